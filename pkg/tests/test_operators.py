import numpy as np
import pytest
from numpy.testing import assert_allclose

from fdrs import (
    BlockRotation,
    BoxIndicator,
    NullSpace,
    Quadratic,
    ShiftedScaledSqNorm,
    Span,
    SplitProblem,
    SubspacePlusScaledSqNorm,
    Zero,
    alpha_fdrs,
    apply_fdrs,
    averaged_composition_coefficient,
    fixed_point_from_minimizer,
    relax,
)

from helpers import random_split_problem


def test_averaged_composition_values():
    assert averaged_composition_coefficient(0.5, 0.5) == pytest.approx(2.0 / 3.0)
    assert averaged_composition_coefficient(2.0 / 3.0, 0.5) == pytest.approx(0.75)


def test_averaged_composition_range():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        a1, a2 = rng.uniform(1e-6, 1.0 - 1e-6, 2)
        out = averaged_composition_coefficient(a1, a2)
        assert max(a1, a2) < out < 1.0
    for bad in (0.0, 1.0, -0.2, 1.3):
        with pytest.raises(ValueError):
            averaged_composition_coefficient(bad, 0.5)


def test_alpha_fdrs_values():
    assert alpha_fdrs(1.0, 1.0) == pytest.approx(2.0 / 3.0)
    assert alpha_fdrs(1e-12, 1.0) == pytest.approx(0.5, abs=1e-9)
    assert alpha_fdrs(2.0, 2.0) == pytest.approx(2.0 / 3.0)
    assert alpha_fdrs(1.0, np.inf) == 0.5
    with pytest.raises(ValueError):
        alpha_fdrs(2.0, 1.0)
    with pytest.raises(ValueError):
        alpha_fdrs(-1.0, 1.0)


def test_apply_reduces_to_projection_when_both_functions_vanish():
    rng = np.random.default_rng(1)
    V = NullSpace(rng.standard_normal((2, 6)))
    p = SplitProblem(Zero(6), Zero(6), V)
    for _ in range(20):
        z = rng.standard_normal(6)
        step = apply_fdrs(p, z, 0.8)
        assert_allclose(step.z_next, V.project(z), atol=1e-14)


def test_fixed_point_identity():
    rng = np.random.default_rng(2)
    M = rng.standard_normal((4, 4))
    p = SplitProblem(
        ShiftedScaledSqNorm(1.0, rng.standard_normal(4)),
        Quadratic(M.T @ M / 4 + 0.5 * np.eye(4), rng.standard_normal(4)),
        NullSpace(rng.standard_normal((1, 4))),
    )
    gamma = 0.5 * p.beta_V
    z = rng.standard_normal(4)
    for _ in range(5000):
        z = apply_fdrs(p, z, gamma).z_next
    step = apply_fdrs(p, z, gamma)
    assert np.linalg.norm(step.z_next - z) <= 1e-12 * (1 + np.linalg.norm(z))


def test_fixed_point_from_minimizer_whole_space():
    rng = np.random.default_rng(3)
    Mf = rng.standard_normal((3, 3))
    Mg = rng.standard_normal((3, 3))
    f = Quadratic(Mf.T @ Mf + np.eye(3), rng.standard_normal(3))
    g = Quadratic(Mg.T @ Mg + np.eye(3), rng.standard_normal(3))
    V = Span(np.eye(3))
    p = SplitProblem(f, g, V)
    x_star = np.linalg.solve(f.Q + g.Q, -(f.c + g.c))
    z_star = fixed_point_from_minimizer(p, x_star, np.zeros(3), 0.7)
    assert_allclose(z_star, x_star)


def test_fixed_point_from_minimizer_active_box_bound():
    # minimize x1^2/2 + x2^2/2 - 3 x1 over the diagonal of R^2 inside [0,1]^2;
    # the diagonal constraint x1 = x2 clips the solution to (1, 1).
    f = BoxIndicator(np.zeros(2), np.ones(2))
    g = Quadratic(np.eye(2), np.array([-3.0, 0.0]))
    V = NullSpace(np.array([[1.0, -1.0]]))
    p = SplitProblem(f, g, V)
    gamma = 0.7
    x_star = np.array([1.0, 1.0])
    # grad_h(x*) = P_V (x* + c) = (-0.5, -0.5); split the remainder between a
    # nonnegative box-normal vector and s * (1, -1) with s in [-1/2, 1/2]
    s = 0.25
    subgrad_chi = s * np.array([1.0, -1.0])
    z_star = fixed_point_from_minimizer(p, x_star, subgrad_chi, gamma)
    assert_allclose(z_star, x_star + gamma * subgrad_chi)
    with pytest.raises(ValueError):
        fixed_point_from_minimizer(p, x_star, 5.0 * np.array([1.0, -1.0]), gamma)


def test_single_block_rotation_operator_matrix():
    c = np.sqrt(0.5)
    U = BlockRotation(cosines=np.array([c]))
    V = BlockRotation(cosines=np.array([1.0]))
    f = SubspacePlusScaledSqNorm(U, 1.0)
    g = ShiftedScaledSqNorm(1.0, np.zeros(2))
    p = SplitProblem(f, g, V, beta=1.0, beta_V=1.0)
    cols = [apply_fdrs(p, e, 1.0).z_next for e in np.eye(2)]
    T = np.column_stack(cols)
    assert_allclose(T, [[0.0, -0.25], [0.0, 0.75]], atol=1e-15)
    assert_allclose(apply_fdrs(p, np.array([0.0, 1.0]), 1.0).z_next,
                    [-0.25, 0.75], atol=1e-15)


def test_relax():
    z, tz = np.zeros(2), np.array([2.0, 4.0])
    assert_allclose(relax(z, tz, 1.0), tz)
    assert_allclose(relax(z, tz, 0.0), z)
    assert_allclose(relax(z, tz, 0.5), [1.0, 2.0])


def test_step_extraction_identities_random_problems():
    rng = np.random.default_rng(4)
    for _ in range(100):
        dim = int(rng.integers(2, 12))
        p, z, gamma = random_split_problem(rng, dim)
        step = apply_fdrs(p, z, gamma)
        scale = 1.0 + np.linalg.norm(z)
        assert_allclose(step.x_h, p.V.project(z), atol=1e-12 * scale)
        assert np.linalg.norm(p.V.project(step.subgrad_chi)) <= 1e-10 * (
            1 + np.linalg.norm(step.subgrad_chi)
        )
        lhs = step.x_h - gamma * (step.subgrad_chi + step.grad_h + step.subgrad_f)
        assert np.abs(lhs - step.x_f).max() <= 1e-12 * (1 + np.abs(step.x_h).max())
        assert np.abs(
            step.z_next - (step.x_f + gamma * step.subgrad_chi)
        ).max() <= 1e-12 * scale


def test_averagedness_contraction_inequality():
    rng = np.random.default_rng(5)
    for _ in range(30):
        p, z, gamma = random_split_problem(rng, 6)
        alpha = alpha_fdrs(gamma, p.beta_V)
        w = rng.standard_normal(6)
        tz, tw = apply_fdrs(p, z, gamma).z_next, apply_fdrs(p, w, gamma).z_next
        lhs = np.linalg.norm(tz - tw) ** 2
        rhs = np.linalg.norm(z - w) ** 2 - (1 - alpha) / alpha * np.linalg.norm(
            (z - tz) - (w - tw)
        ) ** 2
        assert lhs <= rhs + 1e-9


def _drs_direct(p, z, gamma):
    r1 = p.V.reflect(z)
    r2 = p.f.refl(r1, gamma)
    return 0.5 * (z + r2)


def _fbs_direct(p, z, gamma):
    return p.f.prox(z - gamma * p.g.grad(z), gamma)


def _projected_gradient_direct(p, z, gamma):
    return p.V.project(z - gamma * p.grad_h(z))


def test_reduction_to_reflected_averaging_when_g_vanishes():
    rng = np.random.default_rng(6)
    V = NullSpace(rng.standard_normal((2, 5)))
    lo = -np.ones(5)
    p = SplitProblem(BoxIndicator(lo, np.ones(5)), Zero(5), V)
    for _ in range(100):
        z = rng.standard_normal(5) * 2
        gamma = float(rng.uniform(0.1, 3.0))
        assert_allclose(
            apply_fdrs(p, z, gamma).z_next, _drs_direct(p, z, gamma), atol=1e-12
        )


def test_reduction_to_forward_backward_on_whole_space():
    rng = np.random.default_rng(7)
    M = rng.standard_normal((5, 5))
    g = Quadratic(M.T @ M / 5, rng.standard_normal(5))
    p = SplitProblem(BoxIndicator(-np.ones(5), np.ones(5)), g, NullSpace(np.zeros((1, 5))))
    gamma = 0.9 * p.beta_V
    for _ in range(100):
        z = rng.standard_normal(5) * 2
        assert_allclose(
            apply_fdrs(p, z, gamma).z_next, _fbs_direct(p, z, gamma), atol=1e-12
        )


def test_reduction_to_projected_gradient_when_f_vanishes():
    rng = np.random.default_rng(8)
    M = rng.standard_normal((5, 5))
    g = Quadratic(M.T @ M / 5, rng.standard_normal(5))
    V = NullSpace(rng.standard_normal((2, 5)))
    p = SplitProblem(Zero(5), g, V)
    gamma = 0.9 * p.beta_V
    for _ in range(100):
        z = rng.standard_normal(5) * 2
        assert_allclose(
            apply_fdrs(p, z, gamma).z_next,
            _projected_gradient_direct(p, z, gamma),
            atol=1e-12,
        )


def test_h_matches_g_on_the_subspace():
    # coordinate span makes the projector exact, so the identity is bitwise
    rng = np.random.default_rng(9)
    M = rng.standard_normal((4, 4))
    g = Quadratic(M.T @ M, rng.standard_normal(4))
    V = Span(np.eye(4)[:, :2])
    p = SplitProblem(BoxIndicator(np.zeros(4), np.ones(4)), g, V)
    for _ in range(20):
        x = V.project(rng.standard_normal(4))
        assert p.eval_h(x) == g.eval(x)


def test_split_problem_validation():
    V = Span(np.eye(2))
    with pytest.raises(ValueError):
        SplitProblem(Zero(2), BoxIndicator(np.zeros(2), np.ones(2)), V)
    with pytest.raises(ValueError):
        SplitProblem(Zero(2), Zero(3), V)
    g = ShiftedScaledSqNorm(1.0, np.zeros(2))
    with pytest.raises(ValueError):
        SplitProblem(Zero(2), g, V, beta=1.0, beta_V=0.5)
    p = SplitProblem(Zero(2), g, V)
    assert p.beta == 1.0 and p.beta_V == 1.0 and p.mu_g == 1.0
    assert SplitProblem(Zero(2), Zero(2), V).beta == np.inf
