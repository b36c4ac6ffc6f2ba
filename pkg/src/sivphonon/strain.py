"""Symmetric strain tensor in engineering storage (six independent components).

Components are tensor strains (e_xy = (du_x/dy + du_y/dx)/2, not the doubled
engineering shear). For physical displacement fields the components are
dimensionless; for raw mass-normalized eigenmode fields they carry
kg^(-1/2) m^(-1).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

#: Component ordering used for all packed (6,) representations.
COMPONENTS = ("xx", "yy", "zz", "xy", "yz", "zx")


@dataclass(frozen=True)
class StrainTensor:
    e_xx: float
    e_yy: float
    e_zz: float
    e_xy: float
    e_yz: float
    e_zx: float

    def as_matrix(self) -> np.ndarray:
        """Full symmetric 3x3 tensor."""
        return np.array(
            [
                [self.e_xx, self.e_xy, self.e_zx],
                [self.e_xy, self.e_yy, self.e_yz],
                [self.e_zx, self.e_yz, self.e_zz],
            ]
        )

    def as_vector(self) -> np.ndarray:
        """Packed (6,) array in COMPONENTS order."""
        return np.array(
            [self.e_xx, self.e_yy, self.e_zz, self.e_xy, self.e_yz, self.e_zx]
        )

    @classmethod
    def from_matrix(cls, m: np.ndarray) -> "StrainTensor":
        m = np.asarray(m, dtype=float)
        if m.shape != (3, 3) or not np.allclose(m, m.T, atol=1e-12 * max(1.0, abs(m).max())):
            raise ValueError("strain matrix must be symmetric 3x3")
        return cls(m[0, 0], m[1, 1], m[2, 2], m[0, 1], m[1, 2], m[2, 0])

    @classmethod
    def from_vector(cls, v) -> "StrainTensor":
        v = np.asarray(v, dtype=float)
        return cls(*v)

    @property
    def trace(self) -> float:
        return self.e_xx + self.e_yy + self.e_zz


def rotate_packed(strains: np.ndarray, rot: np.ndarray) -> np.ndarray:
    """Rotate packed strain arrays: eps' = R eps R^T, vectorized.

    strains : (..., 6) in COMPONENTS order
    rot     : (3, 3) rotation matrix
    """
    s = np.asarray(strains, dtype=float)
    mats = np.empty(s.shape[:-1] + (3, 3))
    mats[..., 0, 0] = s[..., 0]
    mats[..., 1, 1] = s[..., 1]
    mats[..., 2, 2] = s[..., 2]
    mats[..., 0, 1] = mats[..., 1, 0] = s[..., 3]
    mats[..., 1, 2] = mats[..., 2, 1] = s[..., 4]
    mats[..., 2, 0] = mats[..., 0, 2] = s[..., 5]
    rotated = np.einsum("ab,...bc,dc->...ad", rot, mats, rot)
    out = np.empty_like(s)
    out[..., 0] = rotated[..., 0, 0]
    out[..., 1] = rotated[..., 1, 1]
    out[..., 2] = rotated[..., 2, 2]
    out[..., 3] = rotated[..., 0, 1]
    out[..., 4] = rotated[..., 1, 2]
    out[..., 5] = rotated[..., 2, 0]
    return out
