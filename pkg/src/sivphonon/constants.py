"""Physical constants, frequency conventions, and elastic material parameters.

All internal rate computations run in angular frequency (rad/s); user-facing
interfaces quote cyclic frequency (Hz or GHz). Conversions happen only at
module boundaries, via the helpers below.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum

from .errors import ValidationError

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PhysicalConstants:
    """CODATA 2018 exact values (SI). Not configurable: these are not fit
    parameters."""

    h: float = 6.62607015e-34      # J s
    hbar: float = 6.62607015e-34 / TWO_PI  # J s
    k_B: float = 1.380649e-23      # J/K


CONST = PhysicalConstants()


class FrequencyConvention(Enum):
    CYCLIC_HZ = "cyclic_Hz"
    ANGULAR_RAD_PER_S = "angular_rad_per_s"


def cyclic_to_angular(nu_hz):
    """Hz -> rad/s, exactly nu * 2*pi."""
    return TWO_PI * nu_hz


def angular_to_cyclic(omega):
    """rad/s -> Hz, exactly omega / (2*pi)."""
    return omega / TWO_PI


@dataclass(frozen=True)
class MaterialParams:
    """Isotropic linear-elastic material.

    rho : mass density, kg/m^3
    E   : Young's modulus, Pa
    nu  : Poisson ratio, dimensionless, strictly inside (-1, 0.5)
    """

    rho: float
    E: float
    nu: float

    def __post_init__(self):
        if not self.rho > 0:
            raise ValidationError(f"density must be positive, got {self.rho}")
        if not self.E > 0:
            raise ValidationError(f"Young's modulus must be positive, got {self.E}")
        if not (-1.0 < self.nu < 0.5):
            raise ValidationError(
                f"Poisson ratio must lie in (-1, 0.5), got {self.nu}"
            )

    @property
    def lame_lambda(self) -> float:
        return self.E * self.nu / ((1 + self.nu) * (1 - 2 * self.nu))

    @property
    def shear_modulus(self) -> float:
        return self.E / (2 * (1 + self.nu))


#: Isotropic diamond used throughout: rho = 3515 kg/m^3, E = 1050 GPa, nu = 0.2.
DIAMOND = MaterialParams(rho=3515.0, E=1050e9, nu=0.2)


def wave_speeds(m: MaterialParams) -> tuple[float, float]:
    """Transverse and longitudinal sound speeds (m/s) of an isotropic solid.

    v_t = sqrt(E/rho * 1/(2(1+nu)))
    v_l = sqrt(E/rho * (1-nu)/((1+nu)(1-2nu)))

    v_l > v_t whenever nu > 0. Rejects nu >= 0.5 (v_l diverges); that is
    already excluded by the MaterialParams invariant.
    """
    v_t = math.sqrt(m.E / m.rho / (2.0 * (1.0 + m.nu)))
    v_l = math.sqrt(m.E / m.rho * (1.0 - m.nu) / ((1.0 + m.nu) * (1.0 - 2.0 * m.nu)))
    return v_t, v_l


def material_from_config(cfg: dict) -> MaterialParams:
    """Build MaterialParams from the JSON scene-config fields."""
    try:
        return MaterialParams(
            rho=float(cfg["rho_kg_m3"]),
            E=float(cfg["youngs_Pa"]),
            nu=float(cfg["poisson"]),
        )
    except KeyError as exc:
        raise ValidationError(f"material config missing field {exc}") from exc
