import numpy as np
import pytest

from fdrs import NullSpace, Span, estimate_betas, power_method


def test_dominant_diagonal_entry():
    D = np.diag([1.0, 2.0, 3.0])
    est = power_method(lambda v: D @ v, 3, tol=1e-12)
    assert est.value == pytest.approx(3.0, rel=1e-10)
    assert est.residual <= 1e-12


def test_identity_map():
    est = power_method(lambda v: v, 17)
    assert est.value == pytest.approx(1.0, rel=1e-12)
    assert est.iterations == 1


def test_matches_dense_eigensolver():
    rng = np.random.default_rng(0)
    M = rng.standard_normal((50, 50))
    Q = M.T @ M
    est = power_method(lambda v: Q @ v, 50, tol=1e-12)
    assert est.value == pytest.approx(np.linalg.eigvalsh(Q)[-1], rel=1e-8)


def test_rayleigh_quotients_nondecreasing():
    rng = np.random.default_rng(1)
    M = rng.standard_normal((30, 30))
    Q = M.T @ M
    history = []
    power_method(lambda v: Q @ v, 30, tol=1e-12, history=history)
    diffs = np.diff(history)
    assert np.all(diffs >= -1e-12 * max(history))


def test_deterministic_given_seed():
    rng = np.random.default_rng(2)
    M = rng.standard_normal((20, 20))
    Q = M.T @ M
    a = power_method(lambda v: Q @ v, 20, seed=42)
    b = power_method(lambda v: Q @ v, 20, seed=42)
    assert a.value == b.value and a.iterations == b.iterations


def test_nonconvergence_raises():
    Q = np.diag([1.0, 1.0 - 1e-12, 0.5])  # nearly degenerate top pair
    with pytest.raises(RuntimeError):
        power_method(lambda v: Q @ v, 3, tol=1e-14, max_iter=3)


def test_estimate_betas_identity_on_coordinate_subspace():
    V = Span(np.eye(3)[:, :2])
    beta, beta_V = estimate_betas(np.eye(3), V)
    assert beta == pytest.approx(1.0, rel=1e-9)
    assert beta_V == pytest.approx(1.0, rel=1e-9)


def test_estimate_betas_when_projection_kills_top_eigenvector():
    Q = np.diag([100.0, 1.0])
    V = Span(np.array([[0.0], [1.0]]))
    beta, beta_V = estimate_betas(Q, V)
    assert beta == pytest.approx(0.01, rel=1e-9)
    assert beta_V == pytest.approx(1.0, rel=1e-9)


def test_estimate_betas_zero_on_subspace_gives_sentinel():
    Q = np.diag([1.0, 0.0])
    V = Span(np.array([[0.0], [1.0]]))
    with pytest.warns(RuntimeWarning):
        beta, beta_V = estimate_betas(Q, V)
    assert beta == pytest.approx(1.0, rel=1e-9)
    assert np.isinf(beta_V)


def test_beta_ordering_holds_on_random_instances():
    rng = np.random.default_rng(3)
    for _ in range(10):
        d = int(rng.integers(3, 20))
        M = rng.standard_normal((d, d))
        Q = M.T @ M
        V = NullSpace(rng.standard_normal((int(rng.integers(1, d)), d)))
        beta, beta_V = estimate_betas(Q, V, tol=1e-10)
        assert beta_V >= beta * (1.0 - 1e-10)
