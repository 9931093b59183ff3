import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cscontrol.lift import build_lifted
from cscontrol.model import BasisSpec, default_plant
from cscontrol.solvers import (ControlVector, SolverConfig, fista, l1_objective,
                               lipschitz_estimate, ridge, soft_threshold, truncate_top)

from oracles import augmented_lstsq, ista_batch


@pytest.mark.parametrize("v, tau, expected", [
    (3 + 4j, 5.0, 0.0),
    (2 + 0j, 0.5, 1.5),
    (-1 - 1j, np.sqrt(2) / 2, -0.5 - 0.5j),
    (0j, 0.0, 0.0),
])
def test_soft_threshold(v, tau, expected):
    assert soft_threshold(v, tau) == pytest.approx(expected, abs=1e-15)


def test_soft_threshold_hard_zero_and_errors():
    v = np.array([0.1, -0.2j, 1 + 1j])
    out = soft_threshold(v, 0.2)
    assert out[0] == 0 and out[1] == 0 and out[2] != 0
    with pytest.raises(ValueError):
        soft_threshold(1.0, -1.0)


@settings(max_examples=100, deadline=None)
@given(st.complex_numbers(max_magnitude=1e6, allow_nan=False, allow_infinity=False),
       st.floats(0, 1e6))
def test_soft_threshold_shrinks_modulus(v, tau):
    out = soft_threshold(v, tau)
    assert abs(out) == pytest.approx(max(abs(v) - tau, 0.0), abs=1e-9 * (1 + abs(v)))
    if out != 0:
        assert np.angle(out) == pytest.approx(np.angle(v), abs=1e-9)


def test_lipschitz_examples():
    assert lipschitz_estimate(np.eye(5)) == pytest.approx(2.0, rel=1e-9)
    assert lipschitz_estimate(3 * np.array([[1.0, 0.0]])) == pytest.approx(18.0, rel=1e-9)
    assert lipschitz_estimate(np.eye(3), safety=1.01) == pytest.approx(2.02, rel=1e-9)
    with pytest.raises(ValueError):
        lipschitz_estimate(np.zeros((3, 4)))


def test_lipschitz_against_svd():
    rng = np.random.default_rng(5)
    for _ in range(10):
        Phi = rng.standard_normal((33, 101)) + 1j * rng.standard_normal((33, 101))
        oracle = 2 * np.linalg.svd(Phi, compute_uv=False)[0] ** 2
        assert lipschitz_estimate(Phi) == pytest.approx(oracle, rel=1e-5)


def test_fista_orthonormal_design():
    cfg = SolverConfig(mu=0.2, iterations=500)
    theta = fista(np.eye(2), np.array([1.0, 0.0]), cfg).theta
    np.testing.assert_allclose(theta, [0.9, 0.0], atol=1e-12)
    assert theta[1] == 0


def test_fista_zero_solution_condition():
    rng = np.random.default_rng(8)
    for _ in range(20):
        Phi = rng.standard_normal((6, 12)) + 1j * rng.standard_normal((6, 12))
        alpha = rng.standard_normal(6)
        mu = 2 * np.max(np.abs(Phi.conj().T @ alpha))
        for scale in (1.0, 1.5):
            out = fista(Phi, alpha, SolverConfig(mu=mu * scale, iterations=50))
            assert not np.any(out.theta)
            assert out.support_count == 0


def test_fista_against_long_ista():
    rng = np.random.default_rng(21)
    Phi = rng.standard_normal((8, 20)) + 1j * rng.standard_normal((8, 20))
    alpha = rng.standard_normal(8)
    mu = 0.1
    ours = fista(Phi, alpha, SolverConfig(mu=mu, iterations=2000)).theta
    oracle = ista_batch(Phi[None], alpha[None], [mu])[0]
    j_ours, j_oracle = l1_objective(Phi, alpha, ours, mu), l1_objective(Phi, alpha, oracle, mu)
    assert abs(j_ours - j_oracle) <= 1e-6 * abs(j_oracle)
    assert j_ours <= l1_objective(Phi, alpha, np.zeros(20), mu)


def test_fista_warm_start_flag():
    rng = np.random.default_rng(2)
    Phi = rng.standard_normal((5, 9))
    alpha = rng.standard_normal(5)
    init = rng.standard_normal(9) + 0j
    cold = fista(Phi, alpha, SolverConfig(mu=0.01, iterations=3), init=init).theta
    ref = fista(Phi, alpha, SolverConfig(mu=0.01, iterations=3)).theta
    warm = fista(Phi, alpha, SolverConfig(mu=0.01, iterations=3, warm_start=True), init=init).theta
    np.testing.assert_array_equal(cold, ref)
    assert not np.allclose(warm, ref)


def test_fista_errors():
    with pytest.raises(ValueError):
        fista(np.eye(3), np.ones(2), SolverConfig())
    with pytest.raises(FloatingPointError), np.errstate(all="ignore"):
        fista(np.eye(3) * 1e3, np.ones(3), SolverConfig(mu=0.0, iterations=50), lipschitz=1e-3)
    with pytest.raises(ValueError):
        SolverConfig(iterations=0)
    with pytest.raises(ValueError):
        SolverConfig(lipschitz_safety=0.5)


def _symmetric_columns(rng, K, M):
    half = rng.standard_normal((K, M)) + 1j * rng.standard_normal((K, M))
    return np.hstack([np.conj(half[:, ::-1]), rng.standard_normal((K, 1)), half])


def test_fista_preserves_conjugate_symmetry_every_step():
    rng = np.random.default_rng(4)
    Phi = _symmetric_columns(rng, 9, 10)
    alpha = rng.standard_normal(9)
    for it in range(1, 40):
        theta = fista(Phi, alpha, SolverConfig(mu=0.05, iterations=it)).theta
        assert np.max(np.abs(theta - np.conj(theta[::-1]))) < 1e-12


def test_support_has_hard_zeros():
    rng = np.random.default_rng(6)
    Phi = _symmetric_columns(rng, 12, 15)
    out = fista(Phi, rng.standard_normal(12), SolverConfig(mu=0.5, iterations=100))
    mags = np.abs(out.theta)
    assert out.support_count == np.count_nonzero(mags)
    assert 0 < out.support_count < 31


def test_ridge_examples():
    v = np.array([1.0, -2.0, 0.5])
    np.testing.assert_allclose(ridge(np.eye(3), v, 1.0).theta, v / 2)
    with pytest.raises(ValueError):
        ridge(np.eye(3), v, 0.0)


def test_ridge_normal_equations_and_oracle():
    G = build_lifted(default_plant(), BasisSpec(2 * np.pi, 50)).G
    rng = np.random.default_rng(9)
    rhs = rng.standard_normal(101)
    for mu2 in (0.0005, 0.01, 1.0):
        theta = ridge(G, rhs, mu2).theta
        GH = G.conj().T
        resid = (mu2 * theta + GH @ (G @ theta)) - GH @ rhs
        assert np.linalg.norm(resid) <= 1e-10 * (np.linalg.norm(GH @ rhs) + 1)
    theta = ridge(G, rhs, 0.0005).theta
    oracle = augmented_lstsq(G, rhs, 0.0005)
    np.testing.assert_allclose(theta, oracle, atol=1e-8 * max(1, np.max(np.abs(oracle))))


def test_ridge_norm_decreases_in_mu2():
    G = build_lifted(default_plant(), BasisSpec(2 * np.pi, 10)).G
    rhs = np.random.default_rng(1).standard_normal(21)
    norms = [np.linalg.norm(ridge(G, rhs, mu2).theta) for mu2 in 10.0 ** np.arange(-6, 4)]
    assert all(a > b for a, b in zip(norms, norms[1:]))
    assert norms[-1] < 1e-2


def test_truncate_top():
    th = ControlVector(np.array([5.0, 1.0, 3.0]))
    np.testing.assert_array_equal(truncate_top(th, 2).theta, [5.0, 0.0, 3.0])
    np.testing.assert_array_equal(truncate_top(th, 3).theta, th.theta)
    assert truncate_top(th, 0).support_count == 0
    with pytest.raises(ValueError):
        truncate_top(th, 4)


def test_truncate_top_tie_breaking():
    # equal magnitudes at m = -1, +1, -2: closer to m = 0 first, then negative m first
    th = ControlVector(np.array([1.0, 1.0, 0.0, 1.0, 0.5]))
    np.testing.assert_array_equal(truncate_top(th, 1).theta, [0, 1.0, 0, 0, 0])
    np.testing.assert_array_equal(truncate_top(th, 2).theta, [0, 1.0, 0, 1.0, 0])
    assert truncate_top(ControlVector(np.array([0.0, 2.0, 0.0])), 3).support_count == 1
