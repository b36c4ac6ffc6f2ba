"""Analysis of measured four-line spectra and pulsed T1 recovery traces."""

import json
import math

import numpy as np
import pytest

from sivphonon import ValidationError
from sivphonon.constants import CONST
from sivphonon.experiment import (
    SPEED_OF_LIGHT,
    PulseTrace,
    Spectrum,
    build_schedule,
    fit_four_lines,
    fit_t1,
    peak_heights,
    splittings,
    temperature,
)
from conftest import make_four_line_spectrum, make_recovery_trace


# -- spectrum container -------------------------------------------------------


def test_spectrum_from_wavelength_sorts_by_frequency():
    wl = np.array([737.0e-9, 736.8e-9, 737.2e-9])
    counts = np.array([1.0, 2.0, 3.0])
    s = Spectrum.from_wavelength(wl, counts)
    assert np.all(np.diff(s.freq_hz) > 0)
    assert s.freq_hz[-1] == pytest.approx(SPEED_OF_LIGHT / 736.8e-9, rel=1e-12)
    assert s.counts[-1] == 2.0


def test_spectrum_rejects_duplicate_frequencies():
    with pytest.raises(ValidationError):
        Spectrum(freq_hz=np.array([1e12, 1e12, 2e12]), counts=np.zeros(3))


def test_spectrum_csv_round_trip(tmp_path):
    nu, counts, _ = make_four_line_spectrum(n_points=50)
    path = tmp_path / "spec.csv"
    with open(path, "w") as f:
        f.write("frequency_GHz,counts\n")
        for x, y in zip(nu, counts):
            f.write(f"{float(x) / 1e9!r},{float(y)!r}\n")
    s = Spectrum.from_csv(path)
    assert np.allclose(s.freq_hz, nu, rtol=1e-12)
    assert np.allclose(s.counts, counts, rtol=1e-12)


def test_spectrum_csv_wavelength_header(tmp_path):
    path = tmp_path / "spec.csv"
    with open(path, "w") as f:
        f.write("wavelength_nm,counts\n737.2,5.0\n737.0,6.0\n736.8,7.0\n")
    s = Spectrum.from_csv(path)
    assert np.all(np.diff(s.freq_hz) > 0)
    assert s.counts[0] == 5.0


def test_spectrum_csv_unknown_header(tmp_path):
    path = tmp_path / "spec.csv"
    path.write_text("energy_eV,counts\n1.68,5.0\n")
    with pytest.raises(ValidationError):
        Spectrum.from_csv(path)


# -- four-line fitting --------------------------------------------------------


def test_noiseless_four_line_recovery():
    nu, counts, planted = make_four_line_spectrum()
    lines = fit_four_lines(Spectrum(freq_hz=nu, counts=counts))
    centers = sorted((ln.center for ln in lines.lines), reverse=True)
    expected = sorted(planted["centers"].values(), reverse=True)
    for got, want in zip(centers, expected):
        assert got == pytest.approx(want, rel=1e-9)
    for ln, key in zip(lines.lines, "ABCD"):
        assert ln.area == pytest.approx(planted["areas"][key], rel=1e-6)
        assert ln.fwhm == pytest.approx(planted["fwhm"], rel=1e-6)
    assert lines.baseline == pytest.approx(planted["baseline"], rel=1e-6)


def test_splittings_recover_planted():
    nu, counts, planted = make_four_line_spectrum(delta_es=260e9, delta_gs=73e9)
    lines = fit_four_lines(Spectrum(freq_hz=nu, counts=counts))
    delta_es, delta_gs = splittings(lines)
    assert delta_es == pytest.approx(260e9, rel=1e-6)
    assert delta_gs == pytest.approx(73e9, rel=1e-6)


def test_temperature_recovers_planted():
    nu, counts, planted = make_four_line_spectrum(temperature_k=12.0)
    lines = fit_four_lines(Spectrum(freq_hz=nu, counts=counts))
    delta_es, _ = splittings(lines)
    assert temperature(lines, delta_es, numerator="CD") == pytest.approx(12.0, rel=1e-6)


def test_temperature_frozen_example():
    # ratio (C+D)/(A+B) = 1/3 at a 260 GHz excited-state splitting
    from sivphonon.experiment import Line, LineSet

    mk = lambda c, a: Line(center=c, fwhm=1e9, area=a)
    lines = LineSet(
        a=mk(4e12, 1.0), b=mk(3e12, 0.8), c=mk(2e12, 0.35), d=mk(1e12, 0.25), baseline=0.0
    )
    assert temperature(lines, 260e9) == pytest.approx(11.357994189087195, rel=1e-12)


def test_flat_spectrum_rejected():
    nu = np.linspace(400e12, 401e12, 500)
    with pytest.raises((ValidationError,)):
        fit_four_lines(Spectrum(freq_hz=nu, counts=np.full(nu.shape, 10.0)))


def test_splittings_rejects_inconsistent_diagram():
    from sivphonon.experiment import Line, LineSet

    mk = lambda c: Line(center=c, fwhm=1e9, area=1.0, center_err=1e3)
    lines = LineSet(
        a=mk(4e12), b=mk(3.9e12), c=mk(3e12), d=mk(2.95e12), baseline=0.0
    )  # A-B = 100 GHz but C-D = 50 GHz
    with pytest.raises(ValidationError, match="inconsistent"):
        splittings(lines)


def test_temperature_nonthermal_ratio_rejected():
    from sivphonon.experiment import Line, LineSet

    mk = lambda c, a: Line(center=c, fwhm=1e9, area=a)
    lines = LineSet(
        a=mk(4e12, 0.2), b=mk(3e12, 0.2), c=mk(2e12, 1.0), d=mk(1e12, 1.0), baseline=0.0
    )
    with pytest.raises(ValidationError, match="non-thermal"):
        temperature(lines, 260e9)


def test_temperature_sanity_cap():
    from sivphonon.experiment import Line, LineSet

    mk = lambda c, a: Line(center=c, fwhm=1e9, area=a)
    lines = LineSet(
        a=mk(4e12, 1.0), b=mk(3e12, 1.0), c=mk(2e12, 0.999), d=mk(1e12, 0.999), baseline=0.0
    )
    with pytest.raises(ValidationError, match="cap"):
        temperature(lines, 260e9)


# -- pulse-trace analysis -----------------------------------------------------


def test_build_schedule_layout():
    sched = build_schedule(400e-9, [100e-9, 50e-9, 200e-9])
    assert sched.shape == (3, 3)
    assert sched[0, 0] == pytest.approx(100e-9)
    assert sched[1, 0] == pytest.approx(100e-9 + 400e-9 + 50e-9)
    assert np.all(sched[:, 1] == 400e-9)
    # pulses never overlap: each starts after the previous one ends
    ends = sched[:-1, 0] + sched[:-1, 1]
    assert np.all(sched[1:, 0] >= ends)


def test_pulse_trace_rejects_overlap():
    sched = np.array([[0.0, 400e-9, 10e-9], [300e-9, 400e-9, 20e-9]])
    with pytest.raises(ValidationError):
        PulseTrace(bin_width=1e-9, counts=np.zeros(1000), schedule=sched)


def test_pulse_trace_files_round_trip(tmp_path):
    times, counts, schedule = make_recovery_trace()
    trace_csv = tmp_path / "trace.csv"
    with open(trace_csv, "w") as f:
        f.write("time_ns,counts\n")
        for t, c in zip(times, counts):
            f.write(f"{float(t) * 1e9!r},{float(c)!r}\n")
    sched_json = tmp_path / "schedule.json"
    sched_json.write_text(
        json.dumps(
            {"pulse_len_ns": 400.0, "delays_ns": (schedule[:, 2] * 1e9).tolist()}
        )
    )
    trace = PulseTrace.from_files(trace_csv, sched_json)
    assert trace.bin_width == pytest.approx(1e-9, rel=1e-9)
    assert np.allclose(trace.counts, counts, rtol=1e-12)
    assert np.allclose(trace.schedule, schedule, rtol=1e-9)


def test_peak_heights_constant_rate_is_zero():
    sched = build_schedule(400e-9, [100e-9, 200e-9, 300e-9, 400e-9])
    t_end = sched[-1, 0] + sched[-1, 1]
    n = int(round(t_end / 1e-9))
    trace = PulseTrace(bin_width=1e-9, counts=np.full(n, 20.0), schedule=sched)
    pts = peak_heights(trace)
    assert np.allclose(pts[:, 1], 0.0, atol=1e-9)


def test_peak_heights_recover_planted_excess():
    t1 = 64e-9
    amp = 4000.0
    times, counts, schedule = make_recovery_trace(t1=t1, amplitude=amp)
    trace = PulseTrace(bin_width=1e-9, counts=counts, schedule=schedule)
    pts = peak_heights(trace)
    expected = amp * (1.0 - np.exp(-schedule[:, 2] / t1))
    assert np.allclose(pts[:, 1], expected, rtol=1e-9)


def test_noiseless_t1_recovery():
    times, counts, schedule = make_recovery_trace(t1=64e-9, amplitude=4000.0)
    trace = PulseTrace(bin_width=1e-9, counts=counts, schedule=schedule)
    fit = fit_t1(peak_heights(trace))
    assert fit.t1 == pytest.approx(64e-9, rel=1e-6)
    assert fit.amplitude == pytest.approx(4000.0, rel=1e-6)


def test_fit_t1_needs_four_points():
    pts = np.array([[1e-9, 1.0, 0.1], [2e-9, 2.0, 0.1], [3e-9, 3.0, 0.1]])
    with pytest.raises(ValidationError):
        fit_t1(pts)


def test_fit_t1_unweighted_fallback():
    tau = np.array([10e-9, 30e-9, 80e-9, 200e-9, 500e-9])
    h = 100.0 * (1.0 - np.exp(-tau / 64e-9))
    pts = np.column_stack([tau, h, np.zeros_like(tau)])
    fit = fit_t1(pts)
    assert fit.t1 == pytest.approx(64e-9, rel=1e-9)


def test_fit_t1_rejects_unsorted_delays():
    tau = np.array([10e-9, 30e-9, 20e-9, 200e-9])
    pts = np.column_stack([tau, np.ones_like(tau), np.ones_like(tau)])
    with pytest.raises(ValidationError):
        fit_t1(pts)
