"""Linear isotropic elasticity on voxel hexahedral meshes.

Trilinear 8-node elements, 2x2x2 Gauss quadrature for the stiffness, a
consistent (not lumped) mass matrix, and a shift-invert generalized
eigensolver for a target frequency band. Strain is evaluated at element
centers (the superconvergent point of trilinear hexes).
"""

from __future__ import annotations

import hashlib
import json
import struct
import warnings
from dataclasses import dataclass, field

import numpy as np
import scipy.linalg
import scipy.sparse as sp
import scipy.sparse.linalg as spla

from .constants import TWO_PI, MaterialParams
from .errors import NumericalError, ValidationError
from .mesh import REGION_NANODIAMOND, REGION_SUBSTRATE, HexMesh
from .strain import StrainTensor

#: relative eigenpair residual ||K phi - lambda M phi|| / ||K phi|| contract
RESIDUAL_TOL = 1e-6

#: above this dof count the sparse LU of the shift-invert transform no longer
#: fits in desk-scale memory; solve_modes switches to the factorization-free
#: block solver (LOBPCG with an algebraic-multigrid preconditioner)
SHIFT_INVERT_MAX_DOFS = 60_000

#: modes with nu < RIGID_FRACTION * (largest frequency in the set) are
#: flagged as rigid-body motion and excluded from rate evaluation
RIGID_FRACTION = 1e-3

_MODEFILE_MAGIC = b"SIVMODE1"

# natural coordinates of the 8 corners, matching the mesh node ordering
_XI = np.array(
    [
        [-1, -1, -1],
        [1, -1, -1],
        [1, 1, -1],
        [-1, 1, -1],
        [-1, -1, 1],
        [1, -1, 1],
        [1, 1, 1],
        [-1, 1, 1],
    ],
    dtype=float,
)


def _shape_gradients(xi, eta, zeta):
    """d N_i / d(xi, eta, zeta) for the trilinear element, shape (8, 3)."""
    g = np.empty((8, 3))
    for i, (a, b, c) in enumerate(_XI):
        g[i, 0] = a * (1 + b * eta) * (1 + c * zeta) / 8.0
        g[i, 1] = (1 + a * xi) * b * (1 + c * zeta) / 8.0
        g[i, 2] = (1 + a * xi) * (1 + b * eta) * c / 8.0
    return g


def _shape_values(xi, eta, zeta):
    return np.array(
        [(1 + a * xi) * (1 + b * eta) * (1 + c * zeta) / 8.0 for a, b, c in _XI]
    )


def _elasticity_matrix(material: MaterialParams) -> np.ndarray:
    """6x6 isotropic D in engineering ordering (xx, yy, zz, xy, yz, zx)."""
    lam = material.lame_lambda
    mu = material.shear_modulus
    D = np.zeros((6, 6))
    D[:3, :3] = lam
    D[0, 0] = D[1, 1] = D[2, 2] = lam + 2 * mu
    D[3, 3] = D[4, 4] = D[5, 5] = mu
    return D


def _engineering_B(grad_x: np.ndarray) -> np.ndarray:
    """6x24 strain-displacement matrix (engineering shears) from dN/dx (8,3)."""
    B = np.zeros((6, 24))
    for i in range(8):
        dx, dy, dz = grad_x[i]
        c = 3 * i
        B[0, c] = dx
        B[1, c + 1] = dy
        B[2, c + 2] = dz
        B[3, c] = dy
        B[3, c + 1] = dx
        B[4, c + 1] = dz
        B[4, c + 2] = dy
        B[5, c] = dz
        B[5, c + 2] = dx
    return B


def element_matrices(h: float, material: MaterialParams):
    """Stiffness and consistent mass matrix (24x24 each) of one voxel of edge h."""
    D = _elasticity_matrix(material)
    det_j = (h / 2.0) ** 3
    g = 1.0 / np.sqrt(3.0)
    K = np.zeros((24, 24))
    M = np.zeros((24, 24))
    for xi in (-g, g):
        for eta in (-g, g):
            for zeta in (-g, g):
                grad_x = _shape_gradients(xi, eta, zeta) * (2.0 / h)
                B = _engineering_B(grad_x)
                K += B.T @ D @ B * det_j
                N = _shape_values(xi, eta, zeta)
                Nmat = np.zeros((3, 24))
                for i in range(8):
                    Nmat[0, 3 * i] = N[i]
                    Nmat[1, 3 * i + 1] = N[i]
                    Nmat[2, 3 * i + 2] = N[i]
                M += material.rho * Nmat.T @ Nmat * det_j
    return K, M


def center_strain_operator(h: float) -> np.ndarray:
    """6x24 operator mapping element dofs to tensor strain at the center.

    Rows follow strain.COMPONENTS; shear rows carry the tensor (half) shear.
    """
    grad_x = _shape_gradients(0.0, 0.0, 0.0) * (2.0 / h)
    B = np.zeros((6, 24))
    for i in range(8):
        dx, dy, dz = grad_x[i]
        c = 3 * i
        B[0, c] = dx
        B[1, c + 1] = dy
        B[2, c + 2] = dz
        B[3, c] = 0.5 * dy
        B[3, c + 1] = 0.5 * dx
        B[4, c + 1] = 0.5 * dz
        B[4, c + 2] = 0.5 * dy
        B[5, c] = 0.5 * dz
        B[5, c + 2] = 0.5 * dx
    return B


@dataclass
class AssembledSystem:
    """Reduced stiffness/mass operators with constrained dofs eliminated.

    dof_map : (n_nodes, 3) -> global free-dof index, -1 where constrained
    """

    K: sp.csr_matrix
    M: sp.csr_matrix
    dof_map: np.ndarray
    spacing: float
    material: MaterialParams

    @property
    def n_dofs(self) -> int:
        return self.K.shape[0]

    def dof_digest(self) -> str:
        return hashlib.sha256(np.ascontiguousarray(self.dof_map).tobytes()).hexdigest()


def _element_dofs(mesh: HexMesh) -> np.ndarray:
    """(m, 24) node-dof columns per element (pre-constraint numbering)."""
    return (3 * mesh.elements[:, :, None] + np.arange(3)[None, None, :]).reshape(-1, 24)


def assemble(mesh: HexMesh, material: MaterialParams) -> AssembledSystem:
    """Assemble K and M on the mesh; constrained dofs are removed by
    row/column elimination."""
    if mesh.n_elements == 0:
        raise ValidationError("cannot assemble an empty mesh")
    h = mesh.spacing
    K_e, M_e = element_matrices(h, material)
    edof = _element_dofs(mesh).astype(np.int32)
    m = edof.shape[0]
    n_full = 3 * mesh.n_nodes

    rows = np.broadcast_to(edof[:, :, None], (m, 24, 24)).ravel()
    cols = np.broadcast_to(edof[:, None, :], (m, 24, 24)).ravel()
    K_full = sp.coo_matrix(
        (np.broadcast_to(K_e, (m, 24, 24)).ravel(), (rows, cols)),
        shape=(n_full, n_full),
    ).tocsr()
    M_full = sp.coo_matrix(
        (np.broadcast_to(M_e, (m, 24, 24)).ravel(), (rows, cols)),
        shape=(n_full, n_full),
    ).tocsr()

    dof_map = np.arange(n_full, dtype=np.int64).reshape(-1, 3)
    constrained = np.zeros(n_full, dtype=bool)
    if mesh.clamped.size:
        constrained[3 * mesh.clamped[:, 0] + mesh.clamped[:, 1]] = True
    free = np.nonzero(~constrained)[0]
    renum = np.full(n_full, -1, dtype=np.int64)
    renum[free] = np.arange(free.size)
    dof_map = renum.reshape(-1, 3)

    K = K_full[free][:, free].tocsr()
    M = M_full[free][:, free].tocsr()
    return AssembledSystem(K=K, M=M, dof_map=dof_map, spacing=h, material=material)


@dataclass
class ModeSet:
    """Eigenmodes of the assembled system.

    freqs_hz : (k,) cyclic eigenfrequencies, ascending
    shapes   : (k, n_nodes, 3) mass-normalized displacement fields
               (phi^T M phi = 1, units kg^(-1/2)); constrained dofs are zero
    f_nd     : (k,) elastic-energy (mass-norm) fraction in the nanodiamond
    f_sub    : (k,) fraction in the substrate; f_nd + f_sub = 1
    q        : (k,) mechanical quality factors
    rigid    : (k,) True for rigid-body modes (excluded from rate sums)
    """

    freqs_hz: np.ndarray
    shapes: np.ndarray
    f_nd: np.ndarray
    f_sub: np.ndarray
    q: np.ndarray
    rigid: np.ndarray
    dof_digest: str = ""

    def __len__(self) -> int:
        return self.freqs_hz.shape[0]

    def elastic(self) -> "ModeSet":
        """Subset with rigid-body modes removed."""
        keep = ~self.rigid
        return ModeSet(
            self.freqs_hz[keep],
            self.shapes[keep],
            self.f_nd[keep],
            self.f_sub[keep],
            self.q[keep],
            self.rigid[keep],
            self.dof_digest,
        )

    @classmethod
    def empty(cls, n_nodes: int = 0, dof_digest: str = "") -> "ModeSet":
        return cls(
            np.empty(0),
            np.empty((0, n_nodes, 3)),
            np.empty(0),
            np.empty(0),
            np.empty(0),
            np.zeros(0, dtype=bool),
            dof_digest,
        )


def _region_energy(shapes_flat: np.ndarray, mesh: HexMesh, region: int, rho: float) -> np.ndarray:
    """phi^T M_region phi for every mode, via per-element mass matrices."""
    ids = np.nonzero(mesh.region == region)[0]
    if ids.size == 0:
        return np.zeros(shapes_flat.shape[0])
    _, M_e = element_matrices(mesh.spacing, MaterialParams(rho=rho, E=1.0, nu=0.0))
    edof = _element_dofs(mesh)
    out = np.zeros(shapes_flat.shape[0])
    chunk = max(1, int(4e7 // (shapes_flat.shape[0] * 24 + 1)))
    for lo in range(0, ids.size, chunk):
        sel = edof[ids[lo : lo + chunk]]
        U = shapes_flat[:, sel]  # (k, c, 24)
        out += np.einsum("kci,ij,kcj->k", U, M_e, U, optimize=True)
    return out


def energy_fractions(mode_shape: np.ndarray, mesh: HexMesh, rho: float = 1.0):
    """(f_nd, f_sub) for a single full-node mode shape.

    Fractions are mass-weighted and independent of rho for a homogeneous
    density; f_nd + f_sub = 1.
    """
    flat = np.asarray(mode_shape, dtype=float).reshape(1, -1)
    e_nd = _region_energy(flat, mesh, REGION_NANODIAMOND, rho)[0]
    e_sub = _region_energy(flat, mesh, REGION_SUBSTRATE, rho)[0]
    total = e_nd + e_sub
    if total == 0:
        raise ValidationError("zero-energy mode shape")
    return e_nd / total, e_sub / total


def _dense_eigensolve(K, M, lam_hi):
    w, v = scipy.linalg.eigh(K.toarray(), M.toarray())
    keep = w <= lam_hi * (1 + 1e-9) + 1.0
    return w[keep], v[:, keep]


def _arpack_eigensolve(K, M, lam_lo, lam_hi, max_modes):
    n = K.shape[0]
    # place the shift just below the band: K - sigma*M stays definite for
    # bands starting at zero (free bodies) and factorizes robustly
    sigma = lam_lo - 1e-3 * (lam_hi - lam_lo) if lam_lo > 0 else -1e-6 * lam_hi
    rng = np.random.default_rng(20200731)
    v0 = rng.standard_normal(n)
    k = min(max_modes, 64, n - 2)
    while True:
        try:
            # generous subspace: the default 2k+1 can leave one member of a
            # degenerate cluster unconverged
            ncv = min(n, 2 * k + 100)
            w, v = spla.eigsh(K, k=k, M=M, sigma=sigma, which="LM", v0=v0, tol=0, ncv=ncv)
        except spla.ArpackNoConvergence as exc:
            raise NumericalError(f"eigensolver failed to converge (k={k}): {exc}") from exc
        if w.max() >= lam_hi or k >= min(max_modes, n - 2):
            return w, v
        k = min(max(2 * k, k + 32), max_modes, n - 2)


def _rigid_body_basis(sys: AssembledSystem, mesh: HexMesh) -> np.ndarray:
    """(n_dofs, 6) translations and infinitesimal rotations on the free dofs.

    Used as the near-nullspace hint for the multigrid preconditioner; for
    clamped scenes these are not actual nullspace vectors, but they still
    encode the smooth error components the coarse grids must represent.
    """
    free = sys.dof_map.ravel() >= 0
    coords = np.repeat(mesh.nodes, 3, axis=0)[free]
    x, y, z = coords.T
    axis = np.tile(np.arange(3), mesh.n_nodes)[free]
    B = np.zeros((free.sum(), 6))
    for a in range(3):
        B[axis == a, a] = 1.0
    B[axis == 0, 3] = -y[axis == 0]
    B[axis == 1, 3] = x[axis == 1]
    B[axis == 1, 4] = -z[axis == 1]
    B[axis == 2, 4] = y[axis == 2]
    B[axis == 2, 5] = -x[axis == 2]
    B[axis == 0, 5] = z[axis == 0]
    return B


def _lobpcg_eigensolve(sys: AssembledSystem, mesh: HexMesh, lam_hi, max_modes):
    """Factorization-free band eigensolve for systems too large to LU-factor.

    Block LOBPCG on (K + s M, M) preconditioned by a smoothed-aggregation
    algebraic-multigrid V-cycle of the stiffness; the small positive shift s
    keeps the preconditioned operator definite for free bodies and shifts
    every eigenvalue by exactly s without changing the eigenvectors. The
    block is iterated in fixed-size rounds until every eigenpair below the
    band edge meets RESIDUAL_TOL and the block demonstrably covers the band.
    """
    import pyamg

    K = sys.K.tocsr()
    M = sys.M.tocsr()
    n = K.shape[0]
    shift = 1e-6 * lam_hi
    K_s = (K + shift * M).tocsr()
    # pyamg draws its spectral-radius power-method start from the global
    # numpy RNG; pin it so the preconditioner (and thus the whole solve)
    # does not depend on what ran before
    rng_state = np.random.get_state()
    np.random.seed(20200731)
    try:
        ml = pyamg.smoothed_aggregation_solver(
            K_s, B=_rigid_body_basis(sys, mesh), max_coarse=500
        )
    finally:
        np.random.set_state(rng_state)
    prec = ml.aspreconditioner(cycle="V")

    # block larger than the requested mode count: the top members of a LOBPCG
    # block converge last and are discarded
    m = int(min(max_modes + 16, max(n - 3, 1)))
    rng = np.random.default_rng(20200731)
    X = rng.standard_normal((n, m))
    for _ in range(12):
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")  # block-top stagnation warnings
            w, v = spla.lobpcg(K_s, X, B=M, M=prec, largest=False, tol=1e-30, maxiter=25)
        X = v
        order = np.argsort(w)
        w, v = w[order], v[:, order]
        in_band = w <= lam_hi + shift
        if not in_band.any():
            break
        Kv = K_s @ v[:, in_band]
        Mv = M @ v[:, in_band]
        num = np.linalg.norm(Kv - w[in_band] * Mv, axis=0)
        den = np.maximum(np.linalg.norm(Kv, axis=0), np.abs(w[in_band]) * np.linalg.norm(Mv, axis=0))
        converged = np.all(num <= 0.3 * RESIDUAL_TOL * den)
        covered = w.max() > lam_hi + shift or m >= max_modes + 16
        if converged and covered:
            break
    else:
        raise NumericalError("block eigensolver failed to converge within the band")
    keep = w <= lam_hi + shift
    return w[keep] - shift, v[:, keep]


def solve_modes(
    sys: AssembledSystem,
    mesh: HexMesh,
    band_hz: tuple[float, float],
    max_modes: int = 400,
    q_model=None,
    solver: str = "auto",
) -> ModeSet:
    """All eigenmodes with cyclic frequency inside band_hz (up to max_modes).

    Shift-invert targeted below the band; dense fallback for small systems;
    multigrid-preconditioned block iteration (solver="lobpcg") above
    SHIFT_INVERT_MAX_DOFS where the sparse factorization no longer fits in
    memory. Every returned mode is mass-normalized and satisfies the
    RESIDUAL_TOL eigenpair contract. An empty band yields an empty ModeSet,
    not an error.
    """
    f_lo, f_hi = band_hz
    if f_lo < 0 or f_hi <= f_lo:
        raise ValidationError(f"invalid frequency band {band_hz}")
    if max_modes < 1:
        raise ValidationError("max_modes must be >= 1")
    if solver not in ("auto", "dense", "shift-invert", "lobpcg"):
        raise ValidationError(f"unknown solver {solver!r}")
    lam_lo = (TWO_PI * f_lo) ** 2
    lam_hi = (TWO_PI * f_hi) ** 2

    if solver == "auto":
        if sys.n_dofs <= 1500:
            solver = "dense"
        elif sys.n_dofs <= SHIFT_INVERT_MAX_DOFS:
            solver = "shift-invert"
        else:
            solver = "lobpcg"
    if solver == "dense":
        w, v = _dense_eigensolve(sys.K, sys.M, lam_hi)
    elif solver == "shift-invert":
        w, v = _arpack_eigensolve(sys.K, sys.M, lam_lo, lam_hi, max_modes)
    else:
        w, v = _lobpcg_eigensolve(sys, mesh, lam_hi, max_modes)

    w, v = _rayleigh_ritz_refine(sys, v)

    # numerically-zero rigid eigenvalues may come out slightly negative
    neg_tol = 1e-8 * max(lam_hi, abs(w).max() if w.size else 1.0)
    if w.size and w.min() < -neg_tol:
        raise NumericalError(f"eigenvalue {w.min():g} below tolerance {-neg_tol:g}")
    w = np.clip(w, 0.0, None)
    freqs = np.sqrt(w) / TWO_PI

    inside = (freqs >= f_lo) & (freqs <= f_hi)
    # keep numerically-zero modes when the band starts at 0
    if f_lo == 0:
        inside |= freqs < 1e-9 * f_hi
    w, v, freqs = w[inside], v[:, inside], freqs[inside]
    if w.size > max_modes:
        w, v, freqs = w[:max_modes], v[:, :max_modes], freqs[:max_modes]

    if w.size == 0:
        warnings.warn(f"no eigenmodes inside band {band_hz}")
        return ModeSet.empty(mesh.n_nodes, sys.dof_digest())

    # mass-normalize and fix a deterministic sign
    for j in range(v.shape[1]):
        nrm = np.sqrt(v[:, j] @ (sys.M @ v[:, j]))
        v[:, j] /= nrm
        peak = np.argmax(np.abs(v[:, j]))
        if v[peak, j] < 0:
            v[:, j] = -v[:, j]

    _check_residuals(sys, w, v)

    # embed into full-node arrays (zeros at constrained dofs)
    shapes = np.zeros((w.size, mesh.n_nodes * 3))
    free = sys.dof_map.ravel() >= 0
    shapes[:, free] = v.T

    e_nd = _region_energy(shapes, mesh, REGION_NANODIAMOND, sys.material.rho)
    e_sub = _region_energy(shapes, mesh, REGION_SUBSTRATE, sys.material.rho)
    total = e_nd + e_sub
    f_nd = e_nd / total
    f_sub = e_sub / total

    rigid = np.zeros(w.size, dtype=bool)
    fmax = freqs.max()
    if fmax > 0:
        rigid = freqs < RIGID_FRACTION * fmax

    if q_model is None:
        from .rates import QModel

        q_model = QModel()
    q = q_model.assign(f_nd)

    return ModeSet(
        freqs_hz=freqs,
        shapes=shapes.reshape(w.size, mesh.n_nodes, 3),
        f_nd=f_nd,
        f_sub=f_sub,
        q=q,
        rigid=rigid,
        dof_digest=sys.dof_digest(),
    )


def _rayleigh_ritz_refine(sys: AssembledSystem, v):
    """Re-diagonalize within span(v): cleans members of degenerate clusters
    that ARPACK leaves slightly unconverged, and restores M-orthogonality."""
    Kp = v.T @ (sys.K @ v)
    Mp = v.T @ (sys.M @ v)
    Kp = 0.5 * (Kp + Kp.T)
    Mp = 0.5 * (Mp + Mp.T)
    wr, c = scipy.linalg.eigh(Kp, Mp)
    return wr, v @ c


def _check_residuals(sys: AssembledSystem, w, v):
    Kv = sys.K @ v
    Mv = sys.M @ v
    w_scale = w.max() if w.size else 0.0
    for j in range(w.size):
        num = np.linalg.norm(Kv[:, j] - w[j] * Mv[:, j])
        # rigid modes have ||K phi|| ~ 0; judge their residual against the
        # eigenvalue scale of the whole set instead
        den = max(
            np.linalg.norm(Kv[:, j]),
            abs(w[j]) * np.linalg.norm(Mv[:, j]),
            1e-3 * w_scale * np.linalg.norm(Mv[:, j]),
        )
        if den == 0:
            continue
        if num / den > RESIDUAL_TOL:
            raise NumericalError(
                f"eigenpair residual {num / den:.2e} exceeds {RESIDUAL_TOL:g} for mode {j}"
            )


def element_strains(shapes: np.ndarray, mesh: HexMesh, element_ids) -> np.ndarray:
    """Tensor strain at element centers for a batch of modes.

    shapes      : (k, n_nodes, 3)
    element_ids : (m,) element indices
    returns (k, m, 6) in strain.COMPONENTS order; for mass-normalized modes
    the units are kg^(-1/2) m^(-1).
    """
    ids = np.atleast_1d(np.asarray(element_ids, dtype=np.int64))
    if ids.size and (ids.min() < 0 or ids.max() >= mesh.n_elements):
        raise ValidationError("element index out of range")
    B = center_strain_operator(mesh.spacing)
    flat = np.asarray(shapes, dtype=float).reshape(len(shapes), -1)
    edof = _element_dofs(mesh)[ids]
    U = flat[:, edof]  # (k, m, 24)
    return np.einsum("ij,kmj->kmi", B, U)


def strain_field(mode_shape: np.ndarray, mesh: HexMesh, element_id: int) -> StrainTensor:
    """Strain of one mode at the center of one element."""
    out = element_strains(np.asarray(mode_shape)[None], mesh, [element_id])
    return StrainTensor.from_vector(out[0, 0])


def write_modes(modes: ModeSet, path, fmt: str = "binary") -> None:
    """Persist a ModeSet: JSON header + little-endian float64 displacement
    block, or pure JSON for small cases (fmt="json")."""
    header = {
        "n_modes": len(modes),
        "n_nodes": modes.shapes.shape[1],
        "frequencies_Hz": modes.freqs_hz.tolist(),
        "Q": modes.q.tolist(),
        "energy_fraction_nanodiamond": modes.f_nd.tolist(),
        "energy_fraction_substrate": modes.f_sub.tolist(),
        "rigid": [bool(x) for x in modes.rigid],
        "dof_map_digest": modes.dof_digest,
    }
    if fmt == "json":
        header["displacements"] = modes.shapes.tolist()
        with open(path, "w") as f:
            json.dump(header, f)
        return
    if fmt != "binary":
        raise ValidationError(f"unknown mode-file format {fmt!r}")
    blob = json.dumps(header).encode()
    data = np.ascontiguousarray(modes.shapes, dtype="<f8").tobytes()
    with open(path, "wb") as f:
        f.write(_MODEFILE_MAGIC)
        f.write(struct.pack("<Q", len(blob)))
        f.write(blob)
        f.write(data)


def read_modes(path) -> ModeSet:
    """Read a mode file written by write_modes (either format)."""
    with open(path, "rb") as f:
        head = f.read(len(_MODEFILE_MAGIC))
        if head == _MODEFILE_MAGIC:
            (hlen,) = struct.unpack("<Q", f.read(8))
            try:
                header = json.loads(f.read(hlen).decode())
            except (json.JSONDecodeError, UnicodeDecodeError) as exc:
                raise ValidationError(f"malformed mode file header: {exc}") from exc
            k, n = header["n_modes"], header["n_nodes"]
            raw = f.read(k * n * 3 * 8)
            if len(raw) != k * n * 3 * 8:
                raise ValidationError("truncated mode file: displacement block short")
            shapes = np.frombuffer(raw, dtype="<f8").reshape(k, n, 3).copy()
        else:
            f.seek(0)
            try:
                header = json.loads(f.read().decode())
            except (json.JSONDecodeError, UnicodeDecodeError) as exc:
                raise ValidationError(f"unrecognized mode file: {exc}") from exc
            shapes = np.asarray(header["displacements"], dtype=float)
    return ModeSet(
        freqs_hz=np.asarray(header["frequencies_Hz"], dtype=float),
        shapes=shapes,
        f_nd=np.asarray(header["energy_fraction_nanodiamond"], dtype=float),
        f_sub=np.asarray(header["energy_fraction_substrate"], dtype=float),
        q=np.asarray(header["Q"], dtype=float),
        rigid=np.asarray(header["rigid"], dtype=bool),
        dof_digest=header.get("dof_map_digest", ""),
    )
