"""Orbital relaxation rates: golden-rule sum over eigenmodes, analytical
bulk limit, thermal scaling, and spatial T1 maps.

Conventions pinned here (and nowhere else):
  * the analytic bulk rate cubes the ANGULAR splitting (2*pi*nu_GS); the
    cyclic reading disagrees with its own quoted reference value by ~250x,
  * strain susceptibilities are stored cyclic (Hz/strain) and converted to
    angular units only inside these formulas,
  * mass-normalized eigenmodes enter the golden-rule sum with a zero-point
    weight hbar/(2*omega_n), which makes the finite-mode sum converge to the
    analytic long-wavelength limit,
  * thermal scaling divides: T1(T) = T1^0 / coth(h*nu/(2*k_B*T)).
"""

from __future__ import annotations

import csv
import json
import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .constants import CONST, TWO_PI, MaterialParams, wave_speeds
from .errors import ValidationError
from .fem import ModeSet, element_strains
from .hamiltonian import SivParams, projections_packed
from .mesh import REGION_NANODIAMOND, REGION_SUBSTRATE, HexMesh
from .strain import rotate_packed

#: points with no coupling in band are capped at this multiple of the bulk
#: reference so maps remain plottable
CAP_RATIO = 1e6


@dataclass(frozen=True)
class QModel:
    """Mechanical quality-factor assignment per mode.

    kind = "constant": every mode gets q_const.
    kind = "localization_weighted": Q_n = f_ND,n * q_const + f_sub,n * q_leaky,
    emulating radiation leakage of substrate-dominated modes into the
    truncated substrate block.
    """

    kind: str = "constant"
    q_const: float = 1000.0
    q_leaky: float = 50.0

    def __post_init__(self):
        if self.kind not in ("constant", "localization_weighted"):
            raise ValidationError(f"unknown Q model kind {self.kind!r}")
        if self.q_const <= 1 or self.q_leaky <= 1:
            raise ValidationError("all Q values must exceed 1")

    def assign(self, f_nd: np.ndarray) -> np.ndarray:
        f_nd = np.asarray(f_nd, dtype=float)
        if self.kind == "constant":
            return np.full_like(f_nd, self.q_const)
        return f_nd * self.q_const + (1.0 - f_nd) * self.q_leaky

    @classmethod
    def from_config(cls, cfg: dict) -> "QModel":
        return cls(
            kind=cfg.get("kind", "constant"),
            q_const=float(cfg.get("Q_const", 1000.0)),
            q_leaky=float(cfg.get("Q_leaky", 50.0)),
        )


def thermal_factor(delta_hz: float, temperature_k: float) -> float:
    """coth(h*nu_GS / (2 k_B T)): >= 1, exactly 1 at T = 0."""
    if delta_hz <= 0:
        raise ValidationError(f"splitting must be positive, got {delta_hz}")
    if temperature_k < 0:
        raise ValidationError(f"temperature must be >= 0, got {temperature_k}")
    if temperature_k == 0:
        return 1.0
    x = CONST.h * delta_hz / (2.0 * CONST.k_B * temperature_k)
    if x > 350:  # coth saturates; avoid overflow in tanh's argument checks
        return 1.0
    return 1.0 / math.tanh(x)


def t1_bulk_analytic(
    material: MaterialParams,
    siv: SivParams,
    delta_hz: float,
    temperature_k: float,
) -> float:
    """Analytical bulk orbital relaxation time T1^B in seconds.

    1/T1 = [h (alpha^2 + (beta/2)^2) / (pi rho)]
           * [1/(5 v_t^5) + 2/(15 v_l^5)] * (2 pi nu_GS)^3 * coth(...)
    with cyclic susceptibilities alpha, beta and cyclic splitting nu_GS.
    """
    if delta_hz <= 0:
        raise ValidationError(f"splitting must be positive, got {delta_hz}")
    v_t, v_l = wave_speeds(material)
    pre = CONST.h * (siv.alpha**2 + (siv.beta / 2.0) ** 2) / (math.pi * material.rho)
    speed = 1.0 / (5.0 * v_t**5) + 2.0 / (15.0 * v_l**5)
    rate = pre * speed * (TWO_PI * delta_hz) ** 3
    rate *= thermal_factor(delta_hz, temperature_k)
    return 1.0 / rate


def lifetime_ratio(
    t1_measured: float,
    delta_hz: float,
    temperature_k: float,
    material: MaterialParams,
    siv: SivParams,
) -> float:
    """Measured T1 over the analytical bulk limit at the same (GSS, T)."""
    if t1_measured <= 0:
        raise ValidationError("measured T1 must be positive")
    return t1_measured / t1_bulk_analytic(material, siv, delta_hz, temperature_k)


def _lorentzian(x: np.ndarray, gamma: np.ndarray) -> np.ndarray:
    """Unit-area Lorentzian in angular frequency, width gamma = omega/Q."""
    return (gamma / TWO_PI) / (x * x + (gamma / 2.0) ** 2)


def mode_weights(freqs_hz: np.ndarray, q: np.ndarray, delta_hz: float) -> np.ndarray:
    """Per-mode golden-rule weight w_n so that Gamma = sum_n w_n * (e_gx,n^2 + e_gy,n^2)
    with e_g in cyclic Hz units.

    w_n = [hbar/(2 omega_n)] * (2 pi)^3 / (4 pi) * L_{gamma_n}(omega_n - Delta)

    The hbar/(2 omega_n) factor is the zero-point weighting of a mass-normalized
    mode; the (2 pi)^3 converts the cyclic strain projections and the Lorentzian
    lineshape to angular-frequency units.  The overall normalization, including
    the 1/(4 pi), is pinned so that for a dense isotropic mode continuum the sum
    reproduces the closed-form bulk rate of ``t1_bulk_analytic`` exactly (checked
    against a numerical continuum-limit integral over plane-wave branches).
    """
    omega = TWO_PI * np.asarray(freqs_hz, dtype=float)
    delta = TWO_PI * delta_hz
    gamma = omega / np.asarray(q, dtype=float)
    norm = TWO_PI**3 / (4.0 * np.pi)
    return (CONST.hbar / (2.0 * omega)) * norm * _lorentzian(omega - delta, gamma)


def gamma1_golden_rule(
    modes: ModeSet,
    strains,
    siv: SivParams,
    delta_hz: float,
    q_model: QModel | None = None,
) -> float:
    """Golden-rule orbital relaxation rate (1/s, T -> 0) at one position.

    strains : per-mode raw strain at the point, in the LAB frame: either a
              (n_modes, 6) packed array or a list of StrainTensor, aligned
              with modes (rigid modes are skipped internally)
    """
    if delta_hz <= 0:
        raise ValidationError(f"splitting must be positive, got {delta_hz}")
    if len(modes) == 0:
        warnings.warn("empty mode set: golden-rule rate is zero (band may not cover the splitting)")
        return 0.0
    s = np.asarray(
        [t.as_vector() if hasattr(t, "as_vector") else np.asarray(t, float) for t in strains]
    )
    if s.shape != (len(modes), 6):
        raise ValidationError(
            f"need one 6-component strain per mode: got {s.shape}, expected ({len(modes)}, 6)"
        )
    keep = ~modes.rigid
    if not keep.any():
        return 0.0
    q = (q_model.assign(modes.f_nd) if q_model is not None else modes.q)[keep]
    s = s[keep]
    if not np.allclose(siv.axis_rotation, np.eye(3)):
        s = rotate_packed(s, siv.axis_rotation)
    e_gx, e_gy = projections_packed(s, siv)
    w = mode_weights(modes.freqs_hz[keep], q, delta_hz)
    return float(np.sum(w * (e_gx**2 + e_gy**2)))


@dataclass
class RateMap:
    """Spatial map of golden-rule rates and their ratio to the bulk reference.

    points : (n, 3) evaluation positions, meters
    gamma0 : (n,) T->0 rates, 1/s
    t1_0   : (n,) T->0 relaxation times, seconds (capped values flagged)
    t1_thermal : (n,) T1 at the map temperature
    ratio  : (n,) t1_0 / bulk reference
    capped : (n,) True where no coupling in band forced the cap
    region : (n,) region tag of the containing element
    """

    points: np.ndarray
    gamma0: np.ndarray
    t1_0: np.ndarray
    t1_thermal: np.ndarray
    ratio: np.ndarray
    capped: np.ndarray
    region: np.ndarray
    metadata: dict = field(default_factory=dict)


def contact_center(mesh: HexMesh) -> np.ndarray:
    """(x, y, 0) center of the nanodiamond contact patch."""
    nd = mesh.region == REGION_NANODIAMOND
    if not nd.any():
        return np.zeros(3)
    c = mesh.element_centers()[nd]
    return np.array([c[:, 0].mean(), c[:, 1].mean(), 0.0])


def exclusion_radius(mesh: HexMesh) -> float:
    """Largest lateral extent of the nanodiamond from the contact center;
    substrate points inside this radius never enter the bulk average."""
    nd = mesh.region == REGION_NANODIAMOND
    if not nd.any():
        return 0.0
    c = mesh.element_centers()[nd]
    ctr = contact_center(mesh)
    return float(np.hypot(c[:, 0] - ctr[0], c[:, 1] - ctr[1]).max())


def bulk_reference(rate_map: RateMap, mesh: HexMesh) -> float:
    """Arithmetic mean of T1^0 over substrate points farther than the
    nanodiamond lateral extent from the contact-patch center."""
    ctr = contact_center(mesh)
    r_min = exclusion_radius(mesh)
    d = np.linalg.norm(rate_map.points - ctr, axis=1)
    sel = (rate_map.region == REGION_SUBSTRATE) & (d > r_min) & ~rate_map.capped
    if not sel.any():
        raise ValidationError("no qualifying substrate points for the bulk reference")
    return float(rate_map.t1_0[sel].mean())


def t1_map(
    modes: ModeSet,
    mesh: HexMesh,
    grid_points,
    siv: SivParams,
    delta_hz: float,
    temperature_k: float,
    q_model: QModel | None = None,
) -> RateMap:
    """Evaluate the golden-rule rate at every grid point and normalize by the
    bulk reference. Points outside the meshed material are an error."""
    pts = np.atleast_2d(np.asarray(grid_points, dtype=float))
    eids = mesh.locate(pts)
    if (eids < 0).any():
        bad = pts[eids < 0][0]
        raise ValidationError(f"grid point {bad.tolist()} lies outside the meshed material")

    elastic = modes.elastic()
    if len(elastic) == 0:
        warnings.warn("no elastic modes in the set: map rates are all zero")
        gamma = np.zeros(pts.shape[0])
    else:
        q = q_model.assign(elastic.f_nd) if q_model is not None else elastic.q
        s = element_strains(elastic.shapes, mesh, eids)  # (k, n, 6)
        if not np.allclose(siv.axis_rotation, np.eye(3)):
            s = rotate_packed(s, siv.axis_rotation)
        e_gx, e_gy = projections_packed(s, siv)
        w = mode_weights(elastic.freqs_hz, q, delta_hz)
        gamma = np.einsum("k,kn->n", w, e_gx**2 + e_gy**2)

    with np.errstate(divide="ignore"):
        t1_0 = np.where(gamma > 0, 1.0 / np.where(gamma > 0, gamma, 1.0), np.inf)

    region = mesh.region[eids].astype(np.int8)
    rmap = RateMap(
        points=pts,
        gamma0=gamma,
        t1_0=t1_0,
        t1_thermal=np.empty_like(t1_0),
        ratio=np.empty_like(t1_0),
        capped=np.zeros(pts.shape[0], dtype=bool),
        region=region,
    )
    rmap.capped = ~np.isfinite(t1_0)
    bulk = bulk_reference(rmap, mesh)
    cap = CAP_RATIO * bulk
    over = ~np.isfinite(t1_0) | (t1_0 > cap)
    rmap.capped = over
    rmap.t1_0 = np.where(over, cap, t1_0)
    factor = thermal_factor(delta_hz, temperature_k)
    rmap.t1_thermal = rmap.t1_0 / factor
    rmap.ratio = rmap.t1_0 / bulk
    rmap.metadata = {
        "n_points": int(pts.shape[0]),
        "delta_GS_Hz": delta_hz,
        "temperature_K": temperature_k,
        "thermal_factor": factor,
        "q_model": (q_model or QModel()).kind,
        "bulk_reference_t1_0_s": bulk,
        "cap_ratio": CAP_RATIO,
    }
    return rmap


def write_map_csv(rate_map: RateMap, path, metadata_path=None) -> None:
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(["x_m", "y_m", "z_m", "gamma0_per_s", "t1_0_s", "ratio", "capped_flag"])
        for p, g, t1, r, c in zip(
            rate_map.points, rate_map.gamma0, rate_map.t1_0, rate_map.ratio, rate_map.capped
        ):
            w.writerow([repr(float(p[0])), repr(float(p[1])), repr(float(p[2])),
                        repr(float(g)), repr(float(t1)), repr(float(r)), int(c)])
    if metadata_path is not None:
        with open(metadata_path, "w") as f:
            json.dump(rate_map.metadata, f, sort_keys=True)


def render_map_svg(rate_map: RateMap, path) -> None:
    """Optional xz-plane heatmap of the lifetime ratio (needs matplotlib)."""
    import matplotlib

    matplotlib.use("svg")
    import matplotlib.pyplot as plt

    p = rate_map.points
    fig, ax = plt.subplots(figsize=(6, 4))
    sc = ax.scatter(
        p[:, 0] * 1e9, p[:, 2] * 1e9, c=np.log10(rate_map.ratio), s=14, marker="s", cmap="viridis"
    )
    fig.colorbar(sc, ax=ax, label="log10(T1^0 / bulk)")
    ax.set_xlabel("x (nm)")
    ax.set_ylabel("z (nm)")
    fig.savefig(path, format="svg")
    plt.close(fig)
