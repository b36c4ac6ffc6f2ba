"""Shared fixtures and synthetic-data generators for the test suite."""

import math

import numpy as np
import pytest

from sivphonon.fem import ModeSet


def make_mode_set(freqs_hz, rigid=None, f_nd=None, q=None, n_nodes=1, shapes=None):
    """Hand-built ModeSet for tests that do not need real displacement fields."""
    freqs = np.asarray(freqs_hz, dtype=float)
    k = freqs.size
    if shapes is None:
        shapes = np.zeros((k, n_nodes, 3))
    rigid = np.zeros(k, dtype=bool) if rigid is None else np.asarray(rigid, dtype=bool)
    f_nd = np.zeros(k) if f_nd is None else np.asarray(f_nd, dtype=float)
    q = np.full(k, 1000.0) if q is None else np.asarray(q, dtype=float)
    return ModeSet(freqs, shapes, f_nd, 1.0 - f_nd, q, rigid, dof_digest="test")


def lorentzian_line(nu, center, fwhm, area):
    """Area-normalized Lorentzian used to synthesize four-line spectra."""
    hw = fwhm / 2.0
    return area / math.pi * hw / ((nu - center) ** 2 + hw**2)


def make_four_line_spectrum(
    nu0=406.7e12,
    delta_es=260e9,
    delta_gs=73e9,
    temperature_k=12.0,
    fwhm=4e9,
    area_scale=1e12,
    baseline=50.0,
    span=1.2e12,
    n_points=3000,
):
    """Synthetic four-line fluorescence spectrum with a Boltzmann intensity ratio.

    Line centers follow the level diagram: the two high-frequency lines come
    from the upper excited branch and are suppressed by exp(-h*delta_ES/kT).
    Returns (nu_grid, counts, planted) with the planted parameter dict.
    """
    from sivphonon.constants import CONST

    centers = {
        "A": nu0 + delta_es / 2 + delta_gs / 2,
        "B": nu0 + delta_es / 2 - delta_gs / 2,
        "C": nu0 - delta_es / 2 + delta_gs / 2,
        "D": nu0 - delta_es / 2 - delta_gs / 2,
    }
    boltz = math.exp(-CONST.h * delta_es / (CONST.k_B * temperature_k))
    # upper-branch lines (A, B per the descending-frequency labels) carry the
    # suppressed population; lower-branch lines (C, D) the reference weight
    areas = {
        "A": 1.0 * area_scale,
        "B": 0.8 * area_scale,
        "C": 1.0 * area_scale * boltz,
        "D": 0.8 * area_scale * boltz,
    }
    nu = np.linspace(nu0 - span / 2, nu0 + span / 2, n_points)
    counts = np.full(nu.shape, float(baseline))
    for key in "ABCD":
        counts += lorentzian_line(nu, centers[key], fwhm, areas[key])
    planted = {
        "delta_es": delta_es,
        "delta_gs": delta_gs,
        "temperature": temperature_k,
        "centers": centers,
        "areas": areas,
        "fwhm": fwhm,
        "baseline": float(baseline),
    }
    return nu, counts, planted


def make_recovery_trace(
    t1=64e-9,
    amplitude=4000.0,
    base_rate=2e7,
    pulse_len=400e-9,
    delays=None,
    bin_width=1e-9,
    transient_tau=5e-9,
    rng=None,
):
    """Two-level-model pulse trace for the T1 recovery analysis.

    Each resonant pulse starts after a dark delay tau; the expected excess
    counts integrated over the pulse equal amplitude * (1 - exp(-tau/T1)),
    deposited as an exponential transient that has fully decayed before the
    trailing baseline window.  With rng=None the expected (noiseless) counts
    are returned; otherwise Poisson samples.  Returns (times, counts, schedule).
    """
    from sivphonon.experiment import build_schedule

    if delays is None:
        delays = np.array([5, 10, 20, 40, 70, 110, 160, 220, 300, 400, 520, 660]) * 1e-9
    delays = np.asarray(delays, dtype=float)
    schedule = build_schedule(pulse_len, delays)
    t_end = schedule[-1, 0] + schedule[-1, 1]
    n_bins = int(round(t_end / bin_width))
    edges = np.arange(n_bins + 1) * bin_width
    expected = np.zeros(n_bins)
    for start, length, delay in schedule:
        sel = (edges[:-1] >= start - 1e-15) & (edges[1:] <= start + length + 1e-15)
        expected[sel] += base_rate * bin_width
        h = amplitude * (1.0 - math.exp(-delay / t1))
        lo = np.clip(edges[:-1] - start, 0.0, None)
        hi = np.clip(edges[1:] - start, 0.0, None)
        inside = sel & (hi > lo)
        expected[inside] += h * (
            np.exp(-lo[inside] / transient_tau) - np.exp(-hi[inside] / transient_tau)
        )
    counts = expected if rng is None else rng.poisson(expected).astype(float)
    times = edges[:-1]
    return times, counts, schedule


def random_rotation(rng):
    """Uniform random proper rotation matrix."""
    q, _ = np.linalg.qr(rng.normal(size=(3, 3)))
    if np.linalg.det(q) < 0:
        q[:, 0] = -q[:, 0]
    return q


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
