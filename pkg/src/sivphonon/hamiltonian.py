"""SiV- ground-state manifold under strain.

4x4 Hamiltonian combining spin-orbit coupling with the two E_g-symmetric
strain projections, in the ordered basis {e_x up, e_x dn, e_y up, e_y dn}.
Hydrostatic (A_1g) strain only shifts the total energy and is dropped.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .constants import TWO_PI
from .errors import ValidationError
from .strain import StrainTensor, rotate_packed

_SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
_SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
_SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
_ID2 = np.eye(2, dtype=complex)


def _check_rotation(rot: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    rot = np.asarray(rot, dtype=float)
    if rot.shape != (3, 3):
        raise ValidationError("axis rotation must be a 3x3 matrix")
    if np.abs(rot @ rot.T - np.eye(3)).max() > tol:
        raise ValidationError("axis rotation is not orthogonal")
    if abs(np.linalg.det(rot) - 1.0) > tol:
        raise ValidationError("axis rotation must be proper (det = +1)")
    return rot


@dataclass
class SivParams:
    """Defect parameters, all frequencies cyclic.

    lambda_so : spin-orbit splitting, Hz (46 GHz)
    alpha     : strain susceptibility, Hz/strain (1.3e15)
    beta      : strain susceptibility, Hz/strain (1.7e15)
    axis_rotation : lab frame -> defect internal frame; identity by default
                    (defect high-symmetry axis along lab z)
    """

    lambda_so: float = 46e9
    alpha: float = 1.3e15
    beta: float = 1.7e15
    axis_rotation: np.ndarray = field(default_factory=lambda: np.eye(3))

    def __post_init__(self):
        if not self.lambda_so > 0:
            raise ValidationError(f"lambda_so must be positive, got {self.lambda_so}")
        self.axis_rotation = _check_rotation(self.axis_rotation)

    @classmethod
    def from_config(cls, cfg: dict) -> "SivParams":
        rot = cfg.get("axis_rotation")
        return cls(
            lambda_so=float(cfg.get("lambda_SO_GHz", 46.0)) * 1e9,
            alpha=float(cfg.get("alpha_PHz_per_strain", 1.3)) * 1e15,
            beta=float(cfg.get("beta_PHz_per_strain", 1.7)) * 1e15,
            axis_rotation=np.asarray(rot, dtype=float).reshape(3, 3)
            if rot is not None
            else np.eye(3),
        )


@dataclass(frozen=True)
class StrainProjections:
    """E_g-symmetric strain energies (cyclic Hz): e_gx, e_gy."""

    e_gx: float
    e_gy: float


def rotate_to_defect_frame(eps_lab: StrainTensor, rot: np.ndarray) -> StrainTensor:
    """Transform the full symmetric tensor into the defect frame: R eps R^T."""
    rot = _check_rotation(rot)
    return StrainTensor.from_vector(rotate_packed(eps_lab.as_vector(), rot))


def strain_projections(eps: StrainTensor, p: SivParams) -> StrainProjections:
    """Symmetry-adapted strain energies from a defect-frame strain tensor.

    e_gx = alpha*(e_xx - e_yy) + beta*e_zx
    e_gy = -2*alpha*e_xy + beta*e_yz
    """
    return StrainProjections(
        e_gx=p.alpha * (eps.e_xx - eps.e_yy) + p.beta * eps.e_zx,
        e_gy=-2.0 * p.alpha * eps.e_xy + p.beta * eps.e_yz,
    )


def projections_packed(strains: np.ndarray, p: SivParams) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized strain_projections over packed (..., 6) strain arrays."""
    s = np.asarray(strains, dtype=float)
    e_gx = p.alpha * (s[..., 0] - s[..., 1]) + p.beta * s[..., 5]
    e_gy = -2.0 * p.alpha * s[..., 3] + p.beta * s[..., 4]
    return e_gx, e_gy


def hamiltonian(p: SivParams, s: StrainProjections) -> np.ndarray:
    """4x4 Hermitian ground-state Hamiltonian in angular frequency units
    (rad/s, i.e. energy / hbar), basis {e_x up, e_x dn, e_y up, e_y dn}."""
    H = (
        0.5 * p.lambda_so * np.kron(_SIGMA_Y, _SIGMA_Z)
        + s.e_gx * np.kron(_SIGMA_Z, _ID2)
        + s.e_gy * np.kron(_SIGMA_X, _ID2)
    )
    return TWO_PI * H


def ground_state_splitting(p: SivParams, s: StrainProjections) -> float:
    """Ground-state splitting Delta_GS (cyclic Hz).

    Closed form sqrt(lambda_so^2 + 4 e_gx^2 + 4 e_gy^2); equals the spectral
    spread of the 4x4 Hamiltonian, and reduces to lambda_so at zero strain.
    """
    return math.sqrt(p.lambda_so**2 + 4.0 * s.e_gx**2 + 4.0 * s.e_gy**2)
