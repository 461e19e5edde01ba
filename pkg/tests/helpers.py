"""Independent oracles and problem builders shared across the tests."""

import itertools

import numpy as np

from fdrs import (
    BoxIndicator,
    NullSpace,
    Quadratic,
    ShiftedScaledSqNorm,
    SplitProblem,
    SubspacePlusScaledSqNorm,
    Span,
    Zero,
    estimate_betas,
)


def kkt_equality_qp(Q, c, A, b):
    """Solve min (1/2) x'Qx + c'x s.t. Ax = b via the dense KKT system."""
    m, d = A.shape
    K = np.zeros((d + m, d + m))
    K[:d, :d] = Q
    K[:d, d:] = A.T
    K[d:, :d] = A
    rhs = np.concatenate([-c, b])
    sol = np.linalg.solve(K, rhs)
    return sol[:d]


def enumerate_box_qp(Q, c, lower, upper, A):
    """Minimize (1/2) x'Qx + c'x over Ax = 0, lower <= x <= upper by
    enumerating every active-set pattern. Only viable for tiny dimensions."""
    d = Q.shape[0]
    best = None
    for pattern in itertools.product((0, 1, 2), repeat=d):
        free = [i for i, p in enumerate(pattern) if p == 0]
        lo = [i for i, p in enumerate(pattern) if p == 1]
        up = [i for i, p in enumerate(pattern) if p == 2]
        x = np.empty(d)
        x[lo] = lower[lo]
        x[up] = upper[up]
        m = A.shape[0]
        nf = len(free)
        K = np.zeros((nf + m, nf + m))
        K[:nf, :nf] = Q[np.ix_(free, free)]
        K[:nf, nf:] = A[:, free].T
        K[nf:, :nf] = A[:, free]
        rhs = np.concatenate(
            [
                -c[free] - Q[np.ix_(free, lo)] @ x[lo] - Q[np.ix_(free, up)] @ x[up],
                -A[:, lo] @ x[lo] - A[:, up] @ x[up],
            ]
        )
        try:
            sol = np.linalg.solve(K, rhs)
        except np.linalg.LinAlgError:
            continue
        x[free] = sol[:nf]
        nu = sol[nf:]
        if np.any(x < lower - 1e-9) or np.any(x > upper + 1e-9):
            continue
        grad = Q @ x + c + A.T @ nu
        if np.any(grad[lo] < -1e-9) or np.any(grad[up] > 1e-9):
            continue
        val = 0.5 * x @ Q @ x + c @ x
        if best is None or val < best[1] - 1e-12:
            best = (x.copy(), val)
    assert best is not None, "no KKT point found"
    return best[0]


def cvxpy_box_qp(Q, c, lower, upper, A):
    """High-accuracy independent solve of the box QP with Ax = 0."""
    import cvxpy as cp

    d = Q.shape[0]
    x = cp.Variable(d)
    objective = 0.5 * cp.quad_form(x, cp.psd_wrap(Q)) + c @ x
    constraints = [A @ x == 0, x >= lower, x <= upper]
    problem = cp.Problem(cp.Minimize(objective), constraints)
    problem.solve(
        solver=cp.CLARABEL, tol_gap_abs=1e-12, tol_gap_rel=1e-12, tol_feas=1e-12
    )
    assert problem.status == "optimal"
    return np.asarray(x.value)


def make_box_qp(dim, rank, seed, ridge=0.5, box=(0.0, 1.0)):
    """Random box QP split problem with spectrally estimated constants."""
    rng = np.random.default_rng(seed)
    M = rng.standard_normal((dim, dim))
    Q = M.T @ M / dim + ridge * np.eye(dim)
    c = rng.standard_normal(dim)
    A = rng.standard_normal((rank, dim))
    V = NullSpace(A)
    beta, beta_V = estimate_betas(Q, V)
    f = BoxIndicator(np.full(dim, box[0]), np.full(dim, box[1]))
    g = Quadratic(Q, c)
    return SplitProblem(f, g, V, beta=beta, beta_V=beta_V), (Q, c, A)


def make_smooth_problem(dim, seed, a=1.0):
    """Smooth strongly convex instance: f = (a/2)||x - u||^2, g = (1/2)||x||^2.

    beta_V = 1 whenever V is nontrivial; the minimizer over V is P_V u / (1+a)
    ... for a = 1 it is P_V u / 2, with an analytic fixed point available.
    """
    rng = np.random.default_rng(seed)
    u = rng.standard_normal(dim)
    A = rng.standard_normal((1, dim))
    V = NullSpace(A)
    f = ShiftedScaledSqNorm(a, u)
    g = ShiftedScaledSqNorm(1.0, np.zeros(dim))
    return SplitProblem(f, g, V, beta=1.0, beta_V=1.0), u


def random_function(rng, dim, smooth_only=False):
    """Sample a descriptor of a random variant for mixed-instance sweeps."""
    kinds = ["zero", "quadratic", "shifted"]
    if not smooth_only:
        kinds += ["box", "subspace"]
    kind = rng.choice(kinds)
    if kind == "zero":
        return Zero(dim)
    if kind == "quadratic":
        M = rng.standard_normal((dim, dim))
        return Quadratic(M.T @ M / dim, rng.standard_normal(dim))
    if kind == "shifted":
        return ShiftedScaledSqNorm(float(rng.uniform(0.2, 3.0)),
                                   rng.standard_normal(dim))
    if kind == "box":
        lo = rng.standard_normal(dim)
        return BoxIndicator(lo, lo + rng.uniform(0.1, 2.0, dim))
    r = int(rng.integers(1, dim + 1))
    B = np.linalg.qr(rng.standard_normal((dim, r)))[0]
    return SubspacePlusScaledSqNorm(Span(B), float(rng.uniform(0.0, 2.0)))


def random_subspace(rng, dim):
    kind = rng.choice(["nullspace", "span", "diagonal", "rotation"])
    if kind == "nullspace":
        m = int(rng.integers(1, dim))
        return NullSpace(rng.standard_normal((m, dim)))
    if kind == "span":
        r = int(rng.integers(1, dim + 1))
        return Span(np.linalg.qr(rng.standard_normal((dim, r)))[0])
    if kind == "diagonal":
        for n in (2, 3, 5):
            if dim % n == 0:
                return __import__("fdrs").DiagonalOfProduct(n, dim // n)
        return NullSpace(rng.standard_normal((1, dim)))
    if dim % 2 == 0:
        return __import__("fdrs").BlockRotation(
            cosines=rng.uniform(0.0, 0.99, dim // 2)
        )
    return NullSpace(rng.standard_normal((1, dim)))


def random_split_problem(rng, dim):
    """Random (problem, z, gamma) triple over mixed variants."""
    f = random_function(rng, dim)
    g = random_function(rng, dim, smooth_only=True)
    V = random_subspace(rng, dim)
    p = SplitProblem(f, g, V)
    z = rng.standard_normal(dim) * float(rng.uniform(0.5, 3.0))
    cap = p.beta_V if np.isfinite(p.beta_V) else 1.0
    gamma = float(rng.uniform(0.1, 1.9)) * cap
    return p, z, gamma
