import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import dense_level_matrices, symbolic_element_matrices
from stokesmg.assembly import (
    ProblemSpec, assemble, element_matrices, evaluate_u_D, load_vector, write_coo,
)
from stokesmg.mesh import build_coarse_mesh, build_dof_maps, refine

UNIT = ((0, 0), (1, 0), (0, 1))
SKEW = (("1/3", "1/5"), ("2", "1/2"), ("1/4", "3/2"))


@pytest.fixture(scope="module")
def level0():
    m = build_coarse_mesh()
    d = build_dof_maps(m)
    return m, d, assemble(m, d), dense_level_matrices(m, d)


def test_oracle_self_check_p1():
    _, _, m1, k1, _ = symbolic_element_matrices(UNIT)
    np.testing.assert_allclose(m1, (0.5 / 12) * np.array([[2, 1, 1], [1, 2, 1], [1, 1, 2]]), atol=1e-15)
    np.testing.assert_allclose(k1, [[1, -0.5, -0.5], [-0.5, 0.5, 0], [-0.5, 0, 0.5]], atol=1e-15)


@pytest.mark.parametrize("tri", [UNIT, SKEW])
def test_element_matrices_match_symbolic(tri):
    m2, k2, m1, _, div = symbolic_element_matrices(tri)
    coords = np.array([[float(eval(str(c))) if isinstance(c, str) else c for c in v] for v in tri])
    got = element_matrices(coords)
    for a, b in zip(got, (m2, k2, m1, div)):
        np.testing.assert_allclose(a, b, rtol=1e-13, atol=1e-14)


def test_p1_mass_unit_triangle():
    _, _, m1, _ = element_matrices(np.array(UNIT, dtype=float))
    np.testing.assert_allclose(m1, (0.5 / 12) * np.array([[2, 1, 1], [1, 2, 1], [1, 1, 2]]), rtol=1e-14)


@given(st.lists(st.floats(-3, 3), min_size=6, max_size=6))
@settings(max_examples=60, deadline=None)
def test_p2_mass_row_sums(coords):
    c = np.array(coords).reshape(3, 2)
    area = 0.5 * ((c[1, 0] - c[0, 0]) * (c[2, 1] - c[0, 1]) - (c[2, 0] - c[0, 0]) * (c[1, 1] - c[0, 1]))
    if area < 1e-3:
        c = c[[0, 2, 1]]
        area = -area
    if area < 1e-3:
        return
    m2, k2, _, div = element_matrices(c)
    np.testing.assert_allclose(m2.sum(axis=1), [0, 0, 0, area / 3, area / 3, area / 3], atol=1e-12 * max(1, area))
    # constants are in the kernel of the stiffness matrix
    np.testing.assert_allclose(k2.sum(axis=1), 0, atol=1e-10 * np.abs(k2).max())
    np.testing.assert_allclose(m2, m2.T, atol=1e-14 * np.abs(m2).max())


def test_degenerate_triangle_rejected():
    with pytest.raises(ValueError):
        element_matrices(np.array([[0, 0], [1, 1], [2, 2.0]]))
    with pytest.raises(ValueError):
        element_matrices(np.array([[0, 0], [0, 1], [1, 0.0]]))  # clockwise


def test_global_blocks_match_dense_oracle(level0):
    _, _, b, (MU, KU, MP, D, _) = level0
    np.testing.assert_allclose(b.M_U.toarray(), MU, atol=1e-15)
    np.testing.assert_allclose(b.K_U.toarray(), KU, atol=1e-13)
    np.testing.assert_allclose(b.M_P.toarray(), MP, atol=1e-15)
    np.testing.assert_allclose(b.D.toarray(), D, atol=1e-14)


def test_stiffness_constant_field(level0):
    _, d, b, (_, _, _, _, K2) = level0
    inner = d.interior_p2
    bnd = np.setdiff1d(np.arange(d.n_p2), inner)
    n = d.n_interior
    got = b.K_U @ np.ones(2 * n)
    expected = -K2[np.ix_(inner, bnd)].sum(axis=1)
    np.testing.assert_allclose(got[:n], expected, atol=1e-13)
    np.testing.assert_allclose(got[n:], expected, atol=1e-13)


@pytest.mark.parametrize("levels", [0, 1, 2])
def test_block_invariants(levels):
    m = build_coarse_mesh()
    for _ in range(levels):
        m = refine(m)
    d = build_dof_maps(m)
    b = assemble(m, d)
    for A in (b.M_U, b.K_U, b.M_P):
        assert abs(A - A.T).max() <= 1e-12 * abs(A).max()
        assert np.linalg.eigvalsh(A.toarray()).min() > 0
    assert b.M_P.sum() == pytest.approx(1.0, abs=1e-12)
    assert np.abs(b.D.T @ np.ones(d.n_pressure)).max() <= 1e-12
    # lumped P1 mass: patch area / 3
    patch = np.zeros(d.n_pressure)
    np.add.at(patch, m.triangles.ravel(), np.repeat(m.signed_areas(), 3))
    np.testing.assert_allclose(np.asarray(b.M_P.sum(axis=1)).ravel(), patch / 3, rtol=1e-12)


def test_u_D_values():
    np.testing.assert_allclose(evaluate_u_D((0.5, 0.5)), [0, 0])
    np.testing.assert_allclose(evaluate_u_D((1.0, 0.5)), [0, -0.5])
    # the corner is at distance sqrt(2)/2 < 4/5, so the rotation applies
    np.testing.assert_allclose(evaluate_u_D((0.0, 0.0)), [-0.5, 0.5])
    np.testing.assert_allclose(evaluate_u_D((0.0, 0.0), radius=0.4), [0, 0])


@given(st.floats(0, 1), st.floats(0, 1))
def test_u_D_is_tangential(x, y):
    v = evaluate_u_D((x, y))
    assert abs(v[0] * (x - 0.5) + v[1] * (y - 0.5)) <= 1e-15


def test_rhs_independent_of_traversal_order():
    m = refine(refine(build_coarse_mesh()))
    d = build_dof_maps(m)
    ref = load_vector(m, d)
    perm = np.random.default_rng(3).permutation(m.n_triangles)
    shuffled = type(m)(**{**m.__dict__, "triangles": m.triangles[perm], "triangle_edges": m.triangle_edges[perm]})
    got = load_vector(shuffled, build_dof_maps(shuffled))
    np.testing.assert_allclose(got, ref, rtol=1e-13, atol=1e-13 * np.abs(ref).max())


def test_rhs_polynomial_exactness():
    # u_D = 1 in x: (1, phi_j) equals the row sums of the mass matrix
    m = refine(build_coarse_mesh())
    d = build_dof_maps(m)
    b = assemble(m, d, ProblemSpec(u_D=lambda p: np.stack([np.ones(p.shape[:-1]), np.zeros(p.shape[:-1])], -1)))
    full_row_sums = np.asarray(b.p2_mass.sum(axis=1)).ravel()[d.interior_p2]
    np.testing.assert_allclose(b.rhs_u[: d.n_interior], full_row_sums, atol=1e-15)
    assert np.all(b.rhs_u[d.n_interior :] == 0)


def test_problem_spec_validation():
    with pytest.raises(ValueError):
        ProblemSpec(alpha=0.0)
    with pytest.raises(ValueError):
        ProblemSpec(ud_radius=-1)


def test_coo_export(tmp_path, level0):
    _, _, b, _ = level0
    p = tmp_path / "mp.txt"
    write_coo(b.M_P, p)
    rows = np.loadtxt(p)
    assert rows.shape == (b.M_P.nnz, 3)
    back = np.zeros(b.M_P.shape)
    back[rows[:, 0].astype(int), rows[:, 1].astype(int)] = rows[:, 2]
    np.testing.assert_array_equal(back, b.M_P.toarray())
