"""Analysis of measured data: four-line fluorescence spectra and resonant
saturation-recovery pulse traces.

The spectrum pipeline fits four Lorentzian zero-phonon lines, reads the
ground/excited-state splittings off the line positions, and infers the local
temperature from Boltzmann-distributed line intensities. The pulse pipeline
extracts per-pulse peak heights against a stationary baseline estimated from
the trailing 50 ns of each pulse and fits the recovery curve for T1.
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass

import numpy as np
from scipy import optimize, signal

from .constants import CONST
from .errors import NumericalError, ValidationError

SPEED_OF_LIGHT = 299792458.0  # m/s, vacuum

#: stationary count rate is estimated from this trailing window of each pulse
DEFAULT_BASELINE_WINDOW = 50e-9

#: temperatures above this are treated as a non-thermal population error
DEFAULT_T_MAX = 400.0


@dataclass
class Spectrum:
    """Fluorescence spectrum on a strictly increasing frequency axis (Hz)."""

    freq_hz: np.ndarray
    counts: np.ndarray

    def __post_init__(self):
        self.freq_hz = np.asarray(self.freq_hz, dtype=float)
        self.counts = np.asarray(self.counts, dtype=float)
        if self.freq_hz.shape != self.counts.shape or self.freq_hz.ndim != 1:
            raise ValidationError("spectrum axis and counts must be 1-d and equal length")
        if np.any(np.diff(self.freq_hz) <= 0):
            raise ValidationError("spectrum axis must be strictly increasing")
        if np.any(self.counts < 0):
            raise ValidationError("spectrum counts must be nonnegative")

    @classmethod
    def from_wavelength(cls, wavelength_m, counts) -> "Spectrum":
        nu = SPEED_OF_LIGHT / np.asarray(wavelength_m, dtype=float)
        order = np.argsort(nu)
        return cls(nu[order], np.asarray(counts, dtype=float)[order])

    @classmethod
    def from_csv(cls, path) -> "Spectrum":
        """CSV with header (wavelength_nm|frequency_GHz), counts."""
        with open(path, newline="") as f:
            rows = list(csv.reader(f))
        if not rows:
            raise ValidationError("empty spectrum file")
        header = [h.strip() for h in rows[0]]
        try:
            data = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=float)
        except ValueError as exc:
            raise ValidationError(f"malformed spectrum CSV: {exc}") from exc
        if header[0] == "wavelength_nm":
            return cls.from_wavelength(data[:, 0] * 1e-9, data[:, 1])
        if header[0] == "frequency_GHz":
            order = np.argsort(data[:, 0])
            return cls(data[order, 0] * 1e9, data[order, 1])
        raise ValidationError(
            f"spectrum CSV must start with 'wavelength_nm' or 'frequency_GHz', got {header[0]!r}"
        )


@dataclass(frozen=True)
class Line:
    """One fitted Lorentzian line: center/fwhm in Hz, area in counts*Hz."""

    center: float
    fwhm: float
    area: float
    center_err: float = 0.0
    fwhm_err: float = 0.0
    area_err: float = 0.0


@dataclass(frozen=True)
class LineSet:
    """The four zero-phonon lines labelled by descending frequency
    (nu_A > nu_B > nu_C > nu_D) plus the shared constant baseline."""

    a: Line
    b: Line
    c: Line
    d: Line
    baseline: float

    def __post_init__(self):
        centers = [self.a.center, self.b.center, self.c.center, self.d.center]
        if not all(x > y for x, y in zip(centers, centers[1:])):
            raise ValidationError(f"line centers must be strictly descending A>B>C>D, got {centers}")
        for name, line in zip("ABCD", (self.a, self.b, self.c, self.d)):
            if line.area <= 0 or line.fwhm <= 0:
                raise ValidationError(f"line {name} must have positive area and width")

    @property
    def lines(self):
        return self.a, self.b, self.c, self.d


def _lorentzian(nu, center, fwhm, area):
    return (2.0 * area / (math.pi * fwhm)) / (1.0 + (2.0 * (nu - center) / fwhm) ** 2)


def _four_line_model(nu, *p):
    base = p[12]
    out = np.full_like(nu, base)
    for i in range(4):
        out = out + _lorentzian(nu, p[3 * i], p[3 * i + 1], p[3 * i + 2])
    return out


def _initial_guesses(s: Spectrum):
    span = s.counts.max() - s.counts.min()
    if span <= 0:
        raise ValidationError("peaks unresolvable: flat spectrum")
    peaks, props = signal.find_peaks(s.counts, prominence=0.05 * span)
    if peaks.size < 4:
        raise ValidationError(
            f"peaks unresolvable: found {peaks.size} candidate peaks, need 4"
        )
    best = peaks[np.argsort(props["prominences"])[-4:]]
    return np.sort(s.freq_hz[best])[::-1]


def fit_four_lines(s: Spectrum, guesses=None) -> LineSet:
    """Least-squares fit of four Lorentzians plus a constant baseline.

    guesses : optional 4 center frequencies (Hz); found automatically from
    the most prominent local maxima otherwise.
    """
    if guesses is None:
        centers0 = _initial_guesses(s)
    else:
        centers0 = np.sort(np.asarray(guesses, dtype=float))[::-1]
        if centers0.size != 4:
            raise ValidationError("need exactly 4 center guesses")

    span_nu = s.freq_hz[-1] - s.freq_hz[0]
    base0 = float(np.percentile(s.counts, 10))
    fwhm0 = span_nu / 50.0
    p0 = []
    for c0 in centers0:
        h0 = max(float(np.interp(c0, s.freq_hz, s.counts)) - base0, 1e-3 * s.counts.max())
        p0 += [c0, fwhm0, h0 * math.pi * fwhm0 / 2.0]
    p0.append(base0)

    lo = [s.freq_hz[0], span_nu * 1e-6, 0.0] * 4 + [0.0]
    hi = [s.freq_hz[-1], span_nu, np.inf] * 4 + [float(s.counts.max())]
    try:
        popt, pcov = optimize.curve_fit(
            _four_line_model,
            s.freq_hz,
            s.counts,
            p0=p0,
            bounds=(lo, hi),
            maxfev=20000,
            xtol=1e-14,
            ftol=1e-14,
            gtol=1e-14,
        )
    except (RuntimeError, optimize.OptimizeWarning) as exc:
        raise NumericalError(f"four-line fit did not converge: {exc}") from exc
    perr = np.sqrt(np.clip(np.diag(pcov), 0.0, None))

    lines = [
        Line(
            center=popt[3 * i],
            fwhm=popt[3 * i + 1],
            area=popt[3 * i + 2],
            center_err=perr[3 * i],
            fwhm_err=perr[3 * i + 1],
            area_err=perr[3 * i + 2],
        )
        for i in range(4)
    ]
    lines.sort(key=lambda ln: ln.center, reverse=True)
    return LineSet(*lines, baseline=float(popt[12]))


def splittings(lines: LineSet) -> tuple[float, float]:
    """(Delta_ES, Delta_GS) in Hz from the four line positions.

    Delta_GS = ((nu_A - nu_B) + (nu_C - nu_D)) / 2
    Delta_ES = ((nu_A - nu_C) + (nu_B - nu_D)) / 2
    The level diagram requires nu_A - nu_B = nu_C - nu_D; a residual beyond
    3x the combined center uncertainty is rejected as inconsistent.
    """
    a, b, c, d = (ln.center for ln in lines.lines)
    delta_gs = ((a - b) + (c - d)) / 2.0
    delta_es = ((a - c) + (b - d)) / 2.0
    residual = abs((a - b) - (c - d))
    combined = math.sqrt(sum(ln.center_err**2 for ln in lines.lines))
    if residual > 3.0 * combined + 1e-9 * max(delta_gs, delta_es):
        raise ValidationError(
            f"inconsistent level diagram: splitting residual {residual:g} Hz "
            f"exceeds 3x combined center uncertainty {combined:g} Hz"
        )
    return delta_es, delta_gs


def temperature(
    lines: LineSet,
    delta_es_hz: float,
    numerator: str = "CD",
    t_max: float = DEFAULT_T_MAX,
) -> float:
    """Boltzmann temperature (K) from the fitted line areas.

    The population ratio of the excited-state branches is taken as
    (area_C + area_D)/(area_A + area_B) by default; pass numerator="AB" for
    the opposite labelling convention.
    """
    if numerator not in ("CD", "AB"):
        raise ValidationError("numerator must be 'CD' or 'AB'")
    upper = lines.c.area + lines.d.area if numerator == "CD" else lines.a.area + lines.b.area
    lower = lines.a.area + lines.b.area if numerator == "CD" else lines.c.area + lines.d.area
    ratio = upper / lower
    if ratio >= 1:
        raise ValidationError(
            f"non-thermal population: intensity ratio {ratio:g} >= 1 has no positive temperature"
        )
    t = CONST.h * delta_es_hz / (CONST.k_B * math.log(1.0 / ratio))
    if t > t_max:
        raise ValidationError(
            f"intensity ratio {ratio:g} implies T = {t:.1f} K above the {t_max:g} K sanity cap"
        )
    return t


@dataclass
class PulseTrace:
    """Binned photon counts with the resonant pulse schedule.

    bin_width : seconds per bin
    counts    : photon counts per bin
    schedule  : rows of (pulse_start_s, pulse_len_s, delay_s); pulses must not
                overlap and the delays must be strictly increasing
    """

    bin_width: float
    counts: np.ndarray
    schedule: np.ndarray

    def __post_init__(self):
        self.counts = np.asarray(self.counts, dtype=float)
        self.schedule = np.asarray(self.schedule, dtype=float).reshape(-1, 3)
        if not self.bin_width > 0:
            raise ValidationError("bin width must be positive")
        starts = self.schedule[:, 0]
        ends = starts + self.schedule[:, 1]
        if np.any(starts[1:] < ends[:-1]):
            raise ValidationError("pulses overlap in the schedule")
        delays = self.schedule[:, 2]
        if np.any(np.diff(delays) <= 0):
            raise ValidationError("inter-pulse delays must be strictly increasing")

    @classmethod
    def from_files(cls, trace_csv, schedule_json) -> "PulseTrace":
        """trace CSV: header time_ns, counts; schedule JSON:
        {"pulse_len_ns": 200, "delays_ns": [...]}. The sequence alternates
        delay then pulse, so each pulse is preceded by its delay."""
        with open(trace_csv, newline="") as f:
            rows = list(csv.reader(f))
        if not rows or [h.strip() for h in rows[0][:2]] != ["time_ns", "counts"]:
            raise ValidationError("trace CSV must have header time_ns,counts")
        data = np.array([[float(x) for x in r] for r in rows[1:] if r], dtype=float)
        t = data[:, 0] * 1e-9
        dt = float(np.median(np.diff(t)))
        with open(schedule_json) as f:
            sched = json.load(f)
        pulse_len = float(sched["pulse_len_ns"]) * 1e-9
        delays = np.asarray(sched["delays_ns"], dtype=float) * 1e-9
        return cls(dt, data[:, 1], build_schedule(pulse_len, delays))


def build_schedule(pulse_len_s: float, delays_s) -> np.ndarray:
    """Schedule rows (start, length, delay) for a delay-then-pulse sequence."""
    delays = np.asarray(delays_s, dtype=float)
    starts = np.cumsum(delays) + pulse_len_s * np.arange(delays.size)
    out = np.empty((delays.size, 3))
    out[:, 0] = starts
    out[:, 1] = pulse_len_s
    out[:, 2] = delays
    return out


def peak_heights(
    trace: PulseTrace, baseline_window: float = DEFAULT_BASELINE_WINDOW
) -> np.ndarray:
    """Per-pulse peak heights: rows of (delay tau, h, sigma_h).

    h = (total pulse counts) - (stationary rate from the trailing
    baseline_window of the pulse) * (pulse length); sigma_h from Poisson
    propagation.
    """
    dt = trace.bin_width
    out = np.empty((trace.schedule.shape[0], 3))
    for i, (start, length, delay) in enumerate(trace.schedule):
        if length < baseline_window:
            raise ValidationError(
                f"pulse {i} shorter ({length:g} s) than the baseline window ({baseline_window:g} s)"
            )
        i0 = int(round(start / dt))
        i1 = int(round((start + length) / dt))
        ib = int(round((start + length - baseline_window) / dt))
        if i1 > trace.counts.size:
            raise ValidationError(f"pulse {i} extends beyond the recorded trace")
        n_tot = float(trace.counts[i0:i1].sum())
        n_base = float(trace.counts[ib:i1].sum())
        f = (i1 - i0) / (i1 - ib)
        h = n_tot - f * n_base
        n_rest = n_tot - n_base
        sigma = math.sqrt(max(n_rest + (1.0 - f) ** 2 * n_base, 0.0))
        if n_tot == 0:
            warnings.warn(f"pulse {i} has zero counts: low statistics")
        out[i] = (delay, h, sigma)
    return out


@dataclass(frozen=True)
class T1Fit:
    t1: float
    t1_err: float
    amplitude: float


def fit_t1(points: np.ndarray) -> T1Fit:
    """Weighted least squares of h(tau) = A * (1 - exp(-tau/T1)).

    points : rows of (tau, h, sigma_h); needs >= 4 rows with strictly
    increasing tau. Zero sigmas fall back to an unweighted fit.
    """
    pts = np.asarray(points, dtype=float).reshape(-1, 3)
    if pts.shape[0] < 4:
        raise ValidationError(f"need at least 4 recovery points, got {pts.shape[0]}")
    tau, h, sig = pts[:, 0], pts[:, 1], pts[:, 2]
    if np.any(np.diff(tau) <= 0):
        raise ValidationError("delays must be strictly increasing")
    if np.all(h == 0):
        raise ValidationError("all-zero peak heights: nothing to fit")

    a0 = float(h.max())
    target = a0 * (1.0 - math.exp(-1.0))
    above = np.nonzero(h >= target)[0]
    t0 = float(tau[above[0]]) if above.size else float(np.median(tau))

    sigma = None
    if np.all(sig > 0):
        sigma = sig

    def model(t, amp, t1):
        return amp * (1.0 - np.exp(-t / t1))

    try:
        popt, pcov = optimize.curve_fit(
            model,
            tau,
            h,
            p0=[a0, t0],
            sigma=sigma,
            absolute_sigma=sigma is not None,
            bounds=([0.0, tau[0] * 1e-3], [np.inf, tau[-1] * 1e3]),
            maxfev=20000,
        )
    except RuntimeError as exc:
        raise NumericalError(f"T1 recovery fit did not converge: {exc}") from exc
    perr = np.sqrt(np.clip(np.diag(pcov), 0.0, None))
    return T1Fit(t1=float(popt[1]), t1_err=float(perr[1]), amplitude=float(popt[0]))
