"""Voxelized hexahedral meshing of a nanodiamond-on-substrate scene.

The scene is an ellipsoidal nanodiamond immersed into the top face of a
finite substrate block by a penetration depth xi * r_z. Both bodies are
voxelized on a common axis-aligned grid; an element is tagged nanodiamond
when its center lies inside the ellipsoid, substrate when its center lies
inside the block.
"""

from __future__ import annotations

import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np
from scipy import ndimage

from .errors import ValidationError

MESH_FORMAT_VERSION = 1

REGION_NANODIAMOND = 0
REGION_SUBSTRATE = 1

# local node order: counterclockwise bottom face, then top face
_CORNER_OFFSETS = np.array(
    [
        [0, 0, 0],
        [1, 0, 0],
        [1, 1, 0],
        [0, 1, 0],
        [0, 0, 1],
        [1, 0, 1],
        [1, 1, 1],
        [0, 1, 1],
    ],
    dtype=np.int64,
)


@dataclass(frozen=True)
class SceneSpec:
    """Geometry of the nanodiamond-on-substrate scene (all lengths in meters).

    semi_axes            : (r_x, r_y, r_z) of the ellipsoidal nanodiamond
    penetration_fraction : xi, immersion depth d = xi * r_z
    substrate_dims       : (L_x, L_y, L_z) of the substrate block
    element_size         : voxel edge length h
    bottom_bc            : "clamped" fixes all dofs on the substrate bottom
                           face, "free" leaves the body unconstrained
    """

    semi_axes: tuple[float, float, float]
    penetration_fraction: float
    substrate_dims: tuple[float, float, float]
    element_size: float
    bottom_bc: str = "clamped"

    def __post_init__(self):
        r = self.semi_axes
        if len(r) != 3 or any(not x > 0 for x in r):
            raise ValidationError(f"semi-axes must be positive, got {r}")
        if not (0 <= self.penetration_fraction < 1):
            raise ValidationError(
                f"penetration fraction must lie in [0, 1), got {self.penetration_fraction}"
            )
        if not self.element_size > 0:
            raise ValidationError("element size must be positive")
        L = self.substrate_dims
        if len(L) != 3 or any(not x > 0 for x in L):
            raise ValidationError(f"substrate dims must be positive, got {L}")
        lateral_min = 4.0 * max(r[0], r[1])
        # the >= 4x rule is lateral only; substrate depth is a free choice
        if L[0] < lateral_min or L[1] < lateral_min:
            raise ValidationError(
                f"substrate lateral dims {L[:2]} must be >= 4*max(r_x, r_y) = {lateral_min:g}"
            )
        if self.bottom_bc not in ("clamped", "free"):
            raise ValidationError(f"bottom_bc must be 'clamped' or 'free', got {self.bottom_bc}")

    def scaled(self, s: float) -> "SceneSpec":
        """Uniformly scale every length by s."""
        return SceneSpec(
            tuple(x * s for x in self.semi_axes),
            self.penetration_fraction,
            tuple(x * s for x in self.substrate_dims),
            self.element_size * s,
            self.bottom_bc,
        )


@dataclass
class HexMesh:
    """Voxel hexahedral mesh with region and boundary tags.

    nodes    : (n, 3) coordinates in meters
    elements : (m, 8) node indices, counterclockwise bottom face then top
    region   : (m,) REGION_NANODIAMOND or REGION_SUBSTRATE
    clamped  : (c, 2) rows of (node index, axis) with constrained dofs
    """

    nodes: np.ndarray
    elements: np.ndarray
    region: np.ndarray
    clamped: np.ndarray
    _cell_index: dict = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        self.nodes = np.asarray(self.nodes, dtype=float)
        self.elements = np.asarray(self.elements, dtype=np.int64)
        self.region = np.asarray(self.region, dtype=np.int8)
        self.clamped = np.asarray(self.clamped, dtype=np.int64).reshape(-1, 2)

    @property
    def n_nodes(self) -> int:
        return self.nodes.shape[0]

    @property
    def n_elements(self) -> int:
        return self.elements.shape[0]

    @property
    def spacing(self) -> float:
        """Voxel edge length, inferred from the first element."""
        e = self.elements[0]
        return float(self.nodes[e[1], 0] - self.nodes[e[0], 0])

    def element_centers(self) -> np.ndarray:
        return self.nodes[self.elements].mean(axis=1)

    def element_volume(self) -> float:
        return self.spacing ** 3

    def region_volume(self, region: int) -> float:
        return float(np.count_nonzero(self.region == region)) * self.element_volume()

    def locate(self, points: np.ndarray) -> np.ndarray:
        """Element index containing each point, -1 for points in void.

        Points exactly on shared faces resolve to the lower-index cell.
        """
        if self._cell_index is None:
            h = self.spacing
            origin = self.nodes.min(axis=0)
            corners = self.nodes[self.elements[:, 0]]
            keys = np.round((corners - origin) / h).astype(np.int64)
            self._cell_index = {
                "origin": origin,
                "h": h,
                "map": {tuple(k): i for i, k in enumerate(keys)},
            }
        ci = self._cell_index
        pts = np.atleast_2d(np.asarray(points, dtype=float))
        idx = np.floor((pts - ci["origin"]) / ci["h"] * (1 - 1e-12)).astype(np.int64)
        out = np.full(pts.shape[0], -1, dtype=np.int64)
        for i, k in enumerate(idx):
            out[i] = ci["map"].get(tuple(k), -1)
        return out


def contact_patch(spec: SceneSpec) -> tuple[float, float]:
    """Semi-axes (a_x, a_y) of the elliptical contact patch.

    The immersed ellipsoid intersects the substrate top plane in an ellipse
    with a_i = r_i * sqrt(2*xi - xi^2). At xi = 0 the patch has zero area
    (the mesh would disconnect); that is reported as a warning, not an error.
    """
    xi = spec.penetration_fraction
    if xi == 0:
        warnings.warn("zero penetration: contact patch has zero area, mesh will disconnect")
        return 0.0, 0.0
    s = math.sqrt(2.0 * xi - xi * xi)
    return spec.semi_axes[0] * s, spec.semi_axes[1] * s


def build_scene(spec: SceneSpec) -> HexMesh:
    """Voxelize the scene onto a uniform grid with spacing element_size.

    Fails when the contact patch is unresolved (h > min(a_x, a_y)/2) or when
    the tagged cells do not form a single face-connected body.
    """
    h = spec.element_size
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        a_x, a_y = contact_patch(spec)
    a_min = min(a_x, a_y)
    if h > a_min / 2.0:
        raise ValidationError(
            f"element size {h:g} m does not resolve the contact patch "
            f"(min semi-axis {a_min:g} m); need h <= {a_min / 2:g} m. "
            "Refine the mesh or increase the penetration fraction."
        )

    r_x, r_y, r_z = spec.semi_axes
    L_x, L_y, L_z = spec.substrate_dims
    xi = spec.penetration_fraction

    n_x = math.ceil(L_x / h - 1e-9)
    n_y = math.ceil(L_y / h - 1e-9)
    n_sub = math.ceil(L_z / h - 1e-9)
    z_top = (2.0 - xi) * r_z
    n_top = math.ceil(z_top / h - 1e-9)
    n_z = n_sub + n_top

    # cell-center coordinates expressed as (half-integer index) * h so that a
    # uniform rescale of the spec scales every coordinate exactly
    cx = (np.arange(n_x) + 0.5 - n_x / 2.0) * h
    cy = (np.arange(n_y) + 0.5 - n_y / 2.0) * h
    cz = (np.arange(n_z) + 0.5 - n_sub) * h
    CX, CY, CZ = np.meshgrid(cx, cy, cz, indexing="ij")

    z_c = (1.0 - xi) * r_z
    in_ellipsoid = (CX / r_x) ** 2 + (CY / r_y) ** 2 + ((CZ - z_c) / r_z) ** 2 <= 1.0
    in_block = CZ < 0.0

    region_grid = np.full((n_x, n_y, n_z), -1, dtype=np.int8)
    region_grid[in_block] = REGION_SUBSTRATE
    region_grid[in_ellipsoid] = REGION_NANODIAMOND
    keep = region_grid >= 0
    if not keep.any():
        raise ValidationError("degenerate scene: no elements tagged")
    if not (region_grid == REGION_NANODIAMOND).any():
        raise ValidationError("degenerate scene: ellipsoid unresolved by the grid")

    labels, n_comp = ndimage.label(keep)
    if n_comp != 1:
        raise ValidationError(
            f"disconnected mesh: {n_comp} separate bodies; "
            "increase penetration fraction or refine the mesh"
        )

    ix, iy, iz = np.nonzero(keep)
    m = ix.size
    # global node grid ids, then compact to used nodes
    nnx, nny, nnz = n_x + 1, n_y + 1, n_z + 1

    def node_id(i, j, k):
        return (i * nny + j) * nnz + k

    conn = np.empty((m, 8), dtype=np.int64)
    for c, (di, dj, dk) in enumerate(_CORNER_OFFSETS):
        conn[:, c] = node_id(ix + di, iy + dj, iz + dk)

    used, inverse = np.unique(conn, return_inverse=True)
    elements = inverse.reshape(m, 8)

    gi = used // (nny * nnz)
    gj = (used // nnz) % nny
    gk = used % nnz
    nodes = np.empty((used.size, 3))
    nodes[:, 0] = (gi - n_x / 2.0) * h
    nodes[:, 1] = (gj - n_y / 2.0) * h
    nodes[:, 2] = (gk - float(n_sub)) * h

    region = region_grid[ix, iy, iz]

    if spec.bottom_bc == "clamped":
        bottom = np.nonzero(gk == 0)[0]
        clamped = np.array(
            [(int(n), axis) for n in bottom for axis in range(3)], dtype=np.int64
        )
    else:
        clamped = np.empty((0, 2), dtype=np.int64)

    return HexMesh(nodes=nodes, elements=elements, region=region, clamped=clamped)


def build_box(
    dims: tuple[float, float, float],
    element_size: float,
    region: int = REGION_SUBSTRATE,
    bottom_bc: str = "free",
) -> HexMesh:
    """Voxelize a plain rectangular block (validation geometries: cubes, rods).

    The block spans [-L_x/2, L_x/2] x [-L_y/2, L_y/2] x [0, L_z]. With
    bottom_bc = "clamped" all dofs on the z = 0 face are constrained.
    """
    h = element_size
    if not h > 0:
        raise ValidationError("element size must be positive")
    if any(not d > 0 for d in dims):
        raise ValidationError(f"box dims must be positive, got {dims}")
    if bottom_bc not in ("clamped", "free"):
        raise ValidationError(f"bottom_bc must be 'clamped' or 'free', got {bottom_bc}")
    n = [max(1, math.ceil(d / h - 1e-9)) for d in dims]
    n_x, n_y, n_z = n
    nny, nnz = n_y + 1, n_z + 1
    gi, gj, gk = np.meshgrid(
        np.arange(n_x + 1), np.arange(nny), np.arange(nnz), indexing="ij"
    )
    nodes = np.empty(((n_x + 1) * nny * nnz, 3))
    nodes[:, 0] = ((gi - n_x / 2.0) * h).ravel()
    nodes[:, 1] = ((gj - n_y / 2.0) * h).ravel()
    nodes[:, 2] = (gk * h).ravel()

    ix, iy, iz = np.meshgrid(np.arange(n_x), np.arange(n_y), np.arange(n_z), indexing="ij")
    ix, iy, iz = ix.ravel(), iy.ravel(), iz.ravel()
    conn = np.empty((ix.size, 8), dtype=np.int64)
    for c, (di, dj, dk) in enumerate(_CORNER_OFFSETS):
        conn[:, c] = ((ix + di) * nny + (iy + dj)) * nnz + (iz + dk)

    if bottom_bc == "clamped":
        bottom = np.nonzero(nodes[:, 2] == 0.0)[0]
        clamped = np.array(
            [(int(nd), axis) for nd in bottom for axis in range(3)], dtype=np.int64
        )
    else:
        clamped = np.empty((0, 2), dtype=np.int64)
    return HexMesh(
        nodes=nodes,
        elements=conn,
        region=np.full(ix.size, region, dtype=np.int8),
        clamped=clamped,
    )


def write_mesh(mesh: HexMesh, path) -> None:
    """Serialize to the JSON mesh format (lossless: floats round-trip exactly)."""
    doc = {
        "version": MESH_FORMAT_VERSION,
        "nodes": mesh.nodes.tolist(),
        "elements": mesh.elements.tolist(),
        "region": mesh.region.tolist(),
        "clamped": mesh.clamped.tolist(),
    }
    with open(path, "w") as f:
        json.dump(doc, f)


def read_mesh(path) -> HexMesh:
    """Read and validate a mesh file written by write_mesh."""
    try:
        with open(path) as f:
            doc = json.load(f)
    except json.JSONDecodeError as exc:
        raise ValidationError(f"malformed mesh file (JSON body): {exc}") from exc
    if not isinstance(doc, dict):
        raise ValidationError("malformed mesh file: top-level object expected")
    if doc.get("version") != MESH_FORMAT_VERSION:
        raise ValidationError(
            f"mesh file version mismatch: got {doc.get('version')!r}, "
            f"expected {MESH_FORMAT_VERSION}"
        )
    for section in ("nodes", "elements", "region", "clamped"):
        if section not in doc:
            raise ValidationError(f"malformed mesh file: missing section '{section}'")
    nodes = np.asarray(doc["nodes"], dtype=float)
    elements = np.asarray(doc["elements"], dtype=np.int64)
    if elements.size == 0:
        raise ValidationError("malformed mesh file: section 'elements' is empty")
    if nodes.ndim != 2 or nodes.shape[1] != 3:
        raise ValidationError("malformed mesh file: section 'nodes' must be (n, 3)")
    if elements.ndim != 2 or elements.shape[1] != 8:
        raise ValidationError("malformed mesh file: section 'elements' must be (m, 8)")
    if elements.min() < 0 or elements.max() >= nodes.shape[0]:
        raise ValidationError("malformed mesh file: section 'elements' has out-of-range node index")
    region = np.asarray(doc["region"], dtype=np.int8)
    if region.shape[0] != elements.shape[0]:
        raise ValidationError("malformed mesh file: section 'region' length mismatch")
    clamped = np.asarray(doc["clamped"], dtype=np.int64).reshape(-1, 2)
    if clamped.size and (clamped[:, 0].max() >= nodes.shape[0] or clamped[:, 1].max() > 2):
        raise ValidationError("malformed mesh file: section 'clamped' has out-of-range entry")
    return HexMesh(nodes=nodes, elements=elements, region=region, clamped=clamped)
