"""Elastic eigenmode solver: element matrices, assembly, modes, strains."""

import numpy as np
import pytest

from sivphonon import DIAMOND, MaterialParams, build_box, wave_speeds
from sivphonon.fem import (
    RESIDUAL_TOL,
    ModeSet,
    assemble,
    element_matrices,
    element_strains,
    energy_fractions,
    read_modes,
    solve_modes,
    strain_field,
    write_modes,
)
from sivphonon.mesh import REGION_NANODIAMOND, build_scene, SceneSpec


@pytest.fixture(scope="module")
def free_cube():
    mesh = build_box((75e-9, 75e-9, 75e-9), 25e-9, bottom_bc="free")
    system = assemble(mesh, DIAMOND)
    modes = solve_modes(system, mesh, (0.0, 400e9), max_modes=60)
    return mesh, system, modes


def test_element_stiffness_nullspace():
    K_e, M_e = element_matrices(25e-9, DIAMOND)
    assert np.allclose(K_e, K_e.T)
    assert np.allclose(M_e, M_e.T)
    w = np.linalg.eigvalsh(K_e)
    # exactly the 6 rigid-body motions are stress free
    assert np.count_nonzero(np.abs(w) < 1e-6 * w.max()) == 6
    assert np.all(w[6:] > 0)


def test_element_mass_total():
    h = 25e-9
    _, M_e = element_matrices(h, DIAMOND)
    ones = np.ones(24)
    # translating the element rigidly accounts for its full mass, per axis
    assert ones @ M_e @ ones == pytest.approx(3.0 * DIAMOND.rho * h**3, rel=1e-12)


def test_assembled_mass_equals_body_mass():
    mesh = build_box((100e-9, 75e-9, 50e-9), 25e-9, bottom_bc="free")
    system = assemble(mesh, DIAMOND)
    ones = np.ones(system.n_dofs)
    total = ones @ (system.M @ ones)
    assert total == pytest.approx(3.0 * DIAMOND.rho * 100e-9 * 75e-9 * 50e-9, rel=1e-12)


def test_free_cube_rigid_modes(free_cube):
    _, _, modes = free_cube
    assert np.count_nonzero(modes.rigid) == 6
    first_elastic = modes.freqs_hz[~modes.rigid].min()
    assert np.all(modes.freqs_hz[modes.rigid] < 1e-3 * first_elastic)


def test_mode_mass_orthonormality(free_cube):
    _, system, modes = free_cube
    free = system.dof_map.ravel() >= 0
    v = modes.shapes.reshape(len(modes), -1)[:, free].T
    gram = v.T @ (system.M @ v)
    assert np.allclose(gram, np.eye(len(modes)), atol=1e-9)


def test_mode_residuals(free_cube):
    _, system, modes = free_cube
    free = system.dof_map.ravel() >= 0
    w_max = (2.0 * np.pi * modes.freqs_hz.max()) ** 2
    for f, shape in zip(modes.freqs_hz, modes.shapes):
        v = shape.reshape(-1)[free]
        lam = (2.0 * np.pi * f) ** 2
        r = system.K @ v - lam * (system.M @ v)
        denom = max(
            np.linalg.norm(system.K @ v),
            lam * np.linalg.norm(system.M @ v),
            1e-3 * w_max * np.linalg.norm(system.M @ v),
        )
        assert np.linalg.norm(r) / denom <= RESIDUAL_TOL


def test_clamped_rod_fundamental():
    # slenderness 20 rod with nu = 0: quarter-wave longitudinal resonance
    mat = MaterialParams(rho=DIAMOND.rho, E=DIAMOND.E, nu=0.0)
    length = 1e-6
    mesh = build_box((50e-9, 50e-9, length), 50e-9, bottom_bc="clamped")
    system = assemble(mesh, mat)
    modes = solve_modes(system, mesh, (0.0, 10e9), max_modes=12)
    _, v_l = wave_speeds(mat)
    expected = v_l / (4.0 * length)
    # the fundamental is the lowest mode dominated by axial motion
    axial = [
        f
        for f, s in zip(modes.freqs_hz, modes.shapes)
        if (s**2).sum(axis=0)[2] > 0.9 * (s**2).sum()
    ]
    assert axial[0] == pytest.approx(expected, rel=0.02)


def test_frequencies_scale_inversely_with_size(free_cube):
    mesh, _, modes = free_cube
    big = build_box((150e-9, 150e-9, 150e-9), 50e-9, bottom_bc="free")
    system2 = assemble(big, DIAMOND)
    modes2 = solve_modes(system2, big, (0.0, 200e9), max_modes=60)
    f1 = modes.freqs_hz[~modes.rigid]
    f2 = modes2.freqs_hz[~modes2.rigid]
    n = min(f1.size, f2.size)
    assert np.allclose(f2[:n], f1[:n] / 2.0, rtol=1e-6)


def test_band_filter_returns_empty_set(free_cube):
    mesh, system, _ = free_cube
    with pytest.warns(UserWarning):
        modes = solve_modes(system, mesh, (1e9, 2e9), max_modes=10)
    assert len(modes) == 0


def test_rigid_translation_has_zero_strain(free_cube):
    mesh, _, _ = free_cube
    shape = np.zeros((1, mesh.n_nodes, 3))
    shape[0, :, 0] = 1.0
    strains = element_strains(shape, mesh, np.arange(mesh.n_elements))
    assert np.allclose(strains, 0.0, atol=1e-20)


def test_linear_displacement_reproduces_uniform_strain(free_cube, rng):
    # u = A x with symmetric A is reproduced exactly by trilinear elements
    mesh, _, _ = free_cube
    A = rng.normal(size=(3, 3)) * 1e-4
    A = 0.5 * (A + A.T)
    shape = (mesh.nodes @ A.T)[None]
    strains = element_strains(shape, mesh, np.arange(mesh.n_elements))
    expected = np.array([A[0, 0], A[1, 1], A[2, 2], A[0, 1], A[1, 2], A[2, 0]])
    assert np.allclose(strains, expected[None, None, :], rtol=1e-10, atol=1e-16)


def test_strain_field_matches_batch(free_cube):
    mesh, _, modes = free_cube
    k = int(np.argmax(~modes.rigid))
    eps = strain_field(modes.shapes[k], mesh, 3)
    batch = element_strains(modes.shapes[k][None], mesh, [3])[0, 0]
    assert np.allclose(eps.as_vector(), batch, rtol=1e-14)


def test_energy_fractions_sum_to_one():
    spec = SceneSpec(
        semi_axes=(40e-9, 50e-9, 22.5e-9),
        penetration_fraction=0.2,
        substrate_dims=(200e-9, 200e-9, 50e-9),
        element_size=10e-9,
    )
    mesh = build_scene(spec)
    shape = np.zeros((mesh.n_nodes, 3))
    nd_nodes = np.unique(mesh.elements[mesh.region == REGION_NANODIAMOND])
    shape[nd_nodes, 2] = 1.0
    f_nd, f_sub = energy_fractions(shape, mesh)
    assert f_nd + f_sub == pytest.approx(1.0, rel=1e-12)
    assert f_nd > 0.5


def test_lobpcg_solver_matches_shift_invert():
    # the factorization-free large-system path on a small free cube: same
    # band content and frequencies as the shift-invert reference
    mesh = build_box((150e-9, 150e-9, 150e-9), 12.5e-9, bottom_bc="free")
    system = assemble(mesh, DIAMOND)
    band = (0.0, 150e9)
    ref = solve_modes(system, mesh, band, max_modes=40, solver="shift-invert")
    alt = solve_modes(system, mesh, band, max_modes=40, solver="lobpcg")
    assert len(alt) == len(ref)
    f_ref = ref.freqs_hz[~ref.rigid]
    f_alt = alt.freqs_hz[~alt.rigid]
    assert np.count_nonzero(alt.rigid) == 6
    assert np.allclose(f_alt, f_ref, rtol=1e-8)


def test_modes_round_trip_binary_and_json(tmp_path, free_cube):
    _, _, modes = free_cube
    for fmt, name in (("binary", "modes.bin"), ("json", "modes.json")):
        path = tmp_path / name
        write_modes(modes, path, fmt=fmt)
        back = read_modes(path)
        assert np.array_equal(back.freqs_hz, modes.freqs_hz)
        assert np.array_equal(back.shapes, modes.shapes)
        assert np.array_equal(back.rigid, modes.rigid)
        assert np.array_equal(back.q, modes.q)
        assert back.dof_digest == modes.dof_digest


def test_mode_set_elastic_subset(free_cube):
    _, _, modes = free_cube
    elastic = modes.elastic()
    assert len(elastic) == len(modes) - 6
    assert not elastic.rigid.any()
