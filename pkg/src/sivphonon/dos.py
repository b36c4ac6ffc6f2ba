"""Spectral density of states from an eigenmode set, and power-law fitting."""

from __future__ import annotations

import csv
import json
import warnings
from dataclasses import dataclass

import numpy as np

from .errors import ValidationError

_trapezoid = getattr(np, "trapezoid", None) or np.trapz


@dataclass
class DosCurve:
    """Kernel-density estimate of the mode density.

    nu_grid      : (g,) frequencies, Hz
    rho          : (g,) DOS samples, states per Hz
    kernel_sigma : Gaussian broadening width, Hz
    """

    nu_grid: np.ndarray
    rho: np.ndarray
    kernel_sigma: float

    def integral(self) -> float:
        return float(_trapezoid(self.rho, self.nu_grid))


@dataclass(frozen=True)
class PowerLawFit:
    exponent: float
    prefactor: float
    rmse: float
    band_hz: tuple[float, float]


def dos(modes, sigma: float, grid: tuple[float, float, float]) -> DosCurve:
    """Sum of unit-area Gaussian kernels centered on the mode frequencies.

    modes : ModeSet (rigid-body modes are excluded)
    sigma : kernel width, Hz
    grid  : (f_lo, f_hi, step), Hz
    """
    if not sigma > 0:
        raise ValidationError("kernel sigma must be positive")
    f_lo, f_hi, step = grid
    if not (f_hi > f_lo and step > 0):
        raise ValidationError(f"invalid DOS grid {grid}")
    nu = np.arange(f_lo, f_hi + 0.5 * step, step)
    freqs = modes.elastic().freqs_hz if hasattr(modes, "elastic") else np.asarray(modes)
    if freqs.size == 0:
        warnings.warn("empty mode set: DOS curve is identically zero")
        return DosCurve(nu, np.zeros_like(nu), sigma)
    z = (nu[:, None] - freqs[None, :]) / sigma
    rho = np.exp(-0.5 * z * z).sum(axis=1) / (sigma * np.sqrt(2.0 * np.pi))
    return DosCurve(nu, rho, sigma)


def fit_power_law(curve: DosCurve, band_hz: tuple[float, float]) -> PowerLawFit:
    """Least-squares fit of log(rho) vs log(nu) inside the band.

    Returns exponent p and prefactor c of rho ~ c * nu^p, plus the log-space
    RMSE. Needs at least 8 strictly positive samples in the band.
    """
    f_lo, f_hi = band_hz
    if f_lo < curve.nu_grid[0] - 1e-9 or f_hi > curve.nu_grid[-1] + 1e-9:
        raise ValidationError(f"fit band {band_hz} outside the DOS grid")
    mask = (curve.nu_grid >= f_lo) & (curve.nu_grid <= f_hi)
    if np.count_nonzero(mask) < 8:
        raise ValidationError("fewer than 8 DOS samples in the fit band")
    nu = curve.nu_grid[mask]
    rho = curve.rho[mask]
    if np.any(rho <= 0) or np.any(nu <= 0):
        raise ValidationError("nonpositive DOS samples in the fit band")
    x, y = np.log(nu), np.log(rho)
    p, logc = np.polyfit(x, y, 1)
    resid = y - (p * x + logc)
    return PowerLawFit(
        exponent=float(p),
        prefactor=float(np.exp(logc)),
        rmse=float(np.sqrt(np.mean(resid**2))),
        band_hz=(f_lo, f_hi),
    )


def write_dos_csv(curve: DosCurve, path) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["nu_Hz", "rho_per_Hz"])
        for nu, rho in zip(curve.nu_grid, curve.rho):
            w.writerow([repr(float(nu)), repr(float(rho))])


def write_fit_sidecar(fit: PowerLawFit, path) -> None:
    with open(path, "w") as f:
        json.dump(
            {
                "p": fit.exponent,
                "c": fit.prefactor,
                "rmse": fit.rmse,
                "band_Hz": list(fit.band_hz),
            },
            f,
            sort_keys=True,
        )
