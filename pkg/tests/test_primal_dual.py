import numpy as np
import pytest
from numpy.testing import assert_allclose

from fdrs import (
    ReferenceSolution,
    SolveConfig,
    Span,
    SplitProblem,
    Zero,
    equivalence_check,
    pd_init_from_fdrs,
    run,
    run_pd,
)
from fdrs import Quadratic

from helpers import make_box_qp


def test_stationary_at_the_optimal_pair():
    p, _ = make_box_qp(dim=6, rank=1, seed=40)
    gamma = p.beta_V
    ref = ReferenceSolution.compute(p, gamma)
    y_star = -ref.subgrad_chi_star
    states = run_pd(p, gamma, 20, y_star, ref.x_star)
    for s in states:
        assert np.linalg.norm(s.x_f - ref.x_star) <= 1e-11 * (
            1 + np.linalg.norm(ref.x_star)
        )
        assert np.linalg.norm(s.y - y_star) <= 1e-11 * (1 + np.linalg.norm(y_star))


def test_reduces_to_gradient_descent_on_whole_space():
    rng = np.random.default_rng(41)
    dim = 5
    M = rng.standard_normal((dim, dim))
    g = Quadratic(M.T @ M / dim, rng.standard_normal(dim))
    p = SplitProblem(Zero(dim), g, Span(np.eye(dim)))
    gamma = 0.9 * p.beta
    x0 = rng.standard_normal(dim)
    states = run_pd(p, gamma, 30, np.zeros(dim), x0)
    x = x0.copy()
    for s in states:
        assert np.linalg.norm(s.y) == 0.0
        assert_allclose(s.x_f, x, atol=1e-12)
        x = x - gamma * g.grad(x)


def test_matches_splitting_trajectory():
    p, _ = make_box_qp(dim=5, rank=1, seed=42)
    gamma = p.beta_V
    z0 = np.random.default_rng(43).standard_normal(5)
    trace = run(p, SolveConfig(gamma=gamma, z0=z0, max_iter=1000, fpr_tol=0.0))
    y0, xf0 = pd_init_from_fdrs(p, z0, gamma)
    states = run_pd(p, gamma, 1000, y0, xf0)
    report = equivalence_check(trace, states, gamma)
    scale = 1.0 + max(np.linalg.norm(s.x_f) for s in states)
    assert report["compared"] == 1001
    assert report["max_primal_deviation"] <= 1e-10 * scale
    assert report["max_dual_deviation"] <= 1e-10


def test_dual_iterates_stay_in_the_complement():
    p, _ = make_box_qp(dim=7, rank=2, seed=44)
    gamma = 0.7 * p.beta_V
    z0 = np.random.default_rng(45).standard_normal(7)
    y0, xf0 = pd_init_from_fdrs(p, z0, gamma)
    for s in run_pd(p, gamma, 200, y0, xf0):
        assert np.linalg.norm(p.V.project(s.y)) <= 1e-12 * (
            1.0 + np.linalg.norm(s.y)
        )


def test_deviation_does_not_grow_over_long_runs():
    p, _ = make_box_qp(dim=6, rank=1, seed=46)
    gamma = p.beta_V
    z0 = np.random.default_rng(47).standard_normal(6)
    trace = run(p, SolveConfig(gamma=gamma, z0=z0, max_iter=10**4, fpr_tol=0.0,
                               record_every=1))
    y0, xf0 = pd_init_from_fdrs(p, z0, gamma)
    states = run_pd(p, gamma, 10**4, y0, xf0)
    report = equivalence_check(trace, states, gamma)
    scale = 1.0 + max(np.linalg.norm(s.x_f) for s in states)
    assert report["max_primal_deviation"] <= 1e-10 * scale


def test_mismatched_stepsize_is_detected():
    p, _ = make_box_qp(dim=5, rank=1, seed=48)
    z0 = np.random.default_rng(49).standard_normal(5)
    trace = run(p, SolveConfig(gamma=p.beta_V, z0=z0, max_iter=200, fpr_tol=0.0))
    y0, xf0 = pd_init_from_fdrs(p, z0, p.beta_V)
    states = run_pd(p, 0.5 * p.beta_V, 200, y0, xf0)
    report = equivalence_check(trace, states, p.beta_V)
    assert report["max_primal_deviation"] > 1e-3


def test_run_pd_validation():
    p, _ = make_box_qp(dim=4, rank=1, seed=50)
    with pytest.raises(ValueError):
        run_pd(p, -1.0, 5, np.zeros(4), np.zeros(4))
    with pytest.raises(ValueError):
        run_pd(p, 1.0, 5, np.zeros(3), np.zeros(4))
