import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from oracles import dense_kkt, dense_level_matrices
from stokesmg.kkt import KktOperator, Layout, StateVector, recover_control, write_fields_csv

seeds = st.integers(0, 2**32 - 1)


@pytest.fixture(scope="module")
def level1(hierarchy3):
    return hierarchy3.levels[1]


def test_zero_maps_to_zero(solvers3):
    op = solvers3[1.0].ops[2]
    assert np.all(op.apply(op.layout.zeros()) == 0)


def test_matches_dense_oracle(level1):
    MU, KU, MP, D, _ = dense_level_matrices(level1.mesh, level1.dofs)
    for a in (1.0, 1e-6):
        op = KktOperator(level1.blocks, a)
        ref = dense_kkt(MU, KU, MP, D, a)
        np.testing.assert_allclose(op.matrix.toarray(), ref, atol=1e-12 * np.abs(ref).max())


@pytest.mark.parametrize("k", [0, 1, 2])
@pytest.mark.parametrize("alpha", [1.0, 1e-6, 1e-12])
def test_constant_pressures_in_kernel(solvers3, k, alpha):
    op = solvers3[alpha].ops[k]
    modes = op.layout.constant_pressure_modes()
    for j in range(2):
        assert np.abs(op.apply(modes[:, j])).max() <= 1e-12


@given(seeds, st.sampled_from([1.0, 1e-6, 1e-12]), st.integers(0, 2))
@settings(max_examples=30, deadline=None)
def test_symmetry(solvers3, seed, alpha, k):
    op = solvers3[alpha].ops[k]
    rng = np.random.default_rng(seed)
    x, y = rng.standard_normal((2, op.layout.size))
    lhs, rhs = op.apply(x) @ y, x @ op.apply(y)
    scale = np.abs(op.matrix).max() * np.linalg.norm(x) * np.linalg.norm(y)
    assert abs(lhs - rhs) <= 1e-12 * scale


@given(seeds, st.sampled_from([1.0, 1e-6, 1e-12]), st.integers(0, 2))
@settings(max_examples=30, deadline=None)
def test_residual_zero_mean(solvers3, seed, alpha, k):
    op = solvers3[alpha].ops[k]
    x = np.random.default_rng(seed).standard_normal(op.layout.size)
    _, rp, _, rmu = op.layout.split(op.rhs() - op.apply(x))
    bound = 1e-12 * np.linalg.norm(x) * max(1.0, abs(op.blocks.D).max())
    assert abs(rp.sum()) <= bound
    assert abs(rmu.sum()) <= bound


def test_alpha_only_in_lam_lam_block(hierarchy3):
    b = hierarchy3.levels[1].blocks
    A1, A2 = KktOperator(b, 1.0).matrix, KktOperator(b, 1e-4).matrix
    lay = Layout(b.n_velocity, b.n_pressure)
    diff = (A1 - A2).tocoo()
    lam = lay.slices[2]
    nz = np.abs(diff.data) > 0
    assert np.all((diff.row[nz] >= lam.start) & (diff.row[nz] < lam.stop))
    assert np.all((diff.col[nz] >= lam.start) & (diff.col[nz] < lam.stop))


def test_rhs(hierarchy3):
    b = hierarchy3.levels[0].blocks
    f1, f2 = KktOperator(b, 1.0).rhs(), KktOperator(b, 1e-12).rhs()
    np.testing.assert_array_equal(f1, f2)
    u, p, lam, mu = KktOperator(b, 1.0).layout.split(f1)
    assert np.linalg.norm(u) > 0
    assert not p.any() and not lam.any() and not mu.any()


def test_dimension_mismatch(solvers3):
    op = solvers3[1.0].ops[1]
    with pytest.raises(ValueError):
        op.apply(np.zeros(op.layout.size + 1))


def test_recover_control():
    lay = Layout(4, 2)
    lam = np.array([1.0, -2.0, 3.0, 0.5])
    sv = StateVector(np.zeros(4), np.zeros(2), lam, np.zeros(2))
    np.testing.assert_array_equal(recover_control(sv, 1.0), lam)
    assert not recover_control(StateVector(*(np.zeros(n) for n in (4, 2, 4, 2))), 1e-3).any()
    f = recover_control(sv.to_array(), 1e-12, lay)
    assert np.linalg.norm(f) == pytest.approx(1e12 * np.linalg.norm(lam))
    with pytest.raises(ValueError):
        recover_control(sv, 0.0)


def test_state_vector_roundtrip_and_algebra():
    lay = Layout(3, 2)
    x = np.arange(lay.size, dtype=float)
    sv = StateVector.from_array(lay, x)
    np.testing.assert_array_equal(sv.to_array(), x)
    np.testing.assert_array_equal((2 * sv - sv).to_array(), x)
    assert sv.dot(sv) == pytest.approx(x @ x)


def test_field_export(tmp_path, hierarchy3):
    lv = hierarchy3.levels[1]
    op = KktOperator(lv.blocks, 0.5)
    x = np.random.default_rng(0).standard_normal(op.layout.size)
    path = tmp_path / "fields.csv"
    write_fields_csv(path, lv.dofs, op.layout, x, 0.5)
    lines = path.read_text().splitlines()
    assert lines[0] == "node_id,x,y,field,value"
    n = lv.dofs.n_interior
    assert len(lines) == 1 + 3 * 2 * n + 2 * lv.dofs.n_pressure
    f_rows = [ln for ln in lines if ",f_x," in ln]
    lam = op.layout.split(x)[2]
    assert float(f_rows[0].split(",")[-1]) == pytest.approx(lam[0] / 0.5)
