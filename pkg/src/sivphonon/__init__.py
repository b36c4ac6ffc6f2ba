"""Orbital relaxation of SiV- centers in nanodiamonds on a substrate.

Pipeline: voxel meshing of the nanodiamond-on-substrate scene, elastic
eigenmode solves, phonon density of states, golden-rule relaxation-rate
maps with an analytical bulk reference, and analysis of measured spectra
and pulse traces.
"""

__version__ = "0.1.0"

from .constants import (
    CONST,
    DIAMOND,
    FrequencyConvention,
    MaterialParams,
    PhysicalConstants,
    angular_to_cyclic,
    cyclic_to_angular,
    wave_speeds,
)
from .errors import NumericalError, SivPhononError, ValidationError
from .hamiltonian import (
    SivParams,
    StrainProjections,
    ground_state_splitting,
    hamiltonian,
    rotate_to_defect_frame,
    strain_projections,
)
from .mesh import HexMesh, SceneSpec, build_box, build_scene, contact_patch, read_mesh, write_mesh
from .strain import StrainTensor

__all__ = [
    "CONST",
    "DIAMOND",
    "FrequencyConvention",
    "HexMesh",
    "MaterialParams",
    "NumericalError",
    "PhysicalConstants",
    "SceneSpec",
    "SivParams",
    "SivPhononError",
    "StrainProjections",
    "StrainTensor",
    "ValidationError",
    "angular_to_cyclic",
    "build_box",
    "build_scene",
    "contact_patch",
    "cyclic_to_angular",
    "ground_state_splitting",
    "hamiltonian",
    "read_mesh",
    "rotate_to_defect_frame",
    "strain_projections",
    "wave_speeds",
    "write_mesh",
]
