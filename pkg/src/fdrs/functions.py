"""Convex function descriptors with closed-form proximal maps.

Each descriptor bundles a convex function with the quantities the splitting
iteration and the certificate engine need: evaluation (extended-real),
an exact proximal map, a gradient when the function is smooth, and the
regularity constants ``mu`` (strong-convexity modulus) and ``beta``
(reciprocal gradient-Lipschitz constant; 0 encodes "not Lipschitz
differentiable").
"""

import numpy as np
import scipy.linalg


def _as_vector(x, dim, name="x"):
    x = np.asarray(x, dtype=float)
    if x.ndim != 1 or x.shape[0] != dim:
        raise ValueError(
            f"{name} has shape {x.shape}, expected a vector of dimension {dim}"
        )
    return x


def domain_tolerance(x):
    """Scale-invariant slack used when testing indicator-domain membership."""
    return 1e-9 * (1.0 + float(np.linalg.norm(x)))


class ConvexFunction:
    """Base class for function descriptors.

    Subclasses set ``dim``, ``mu``, ``beta`` and ``smooth`` and implement
    ``eval`` and ``prox``; smooth variants also implement ``grad``.
    Instances are immutable in spirit and safe to share across workers once
    constructed (the quadratic factorization cache must be warmed first if
    workers share a descriptor, see :class:`Quadratic`).
    """

    smooth = False

    def eval(self, x):
        raise NotImplementedError

    def prox(self, x, gamma):
        """argmin_y f(y) + (1/2 gamma)||y - x||^2 for gamma > 0."""
        raise NotImplementedError

    def grad(self, x):
        raise TypeError(f"{type(self).__name__} is not differentiable")

    def refl(self, x, gamma):
        """Reflection 2 prox(x) - x; nonexpansive for convex f."""
        x = _as_vector(x, self.dim)
        return 2.0 * self.prox(x, gamma) - x

    def _check_gamma(self, gamma):
        if not gamma > 0:
            raise ValueError(f"gamma must be positive, got {gamma}")


class Zero(ConvexFunction):
    """The zero function; prox is the identity."""

    smooth = True

    def __init__(self, dim):
        self.dim = int(dim)
        self.mu = 0.0
        self.beta = 0.0

    def eval(self, x):
        _as_vector(x, self.dim)
        return 0.0

    def prox(self, x, gamma):
        self._check_gamma(gamma)
        return _as_vector(x, self.dim)

    def grad(self, x):
        _as_vector(x, self.dim)
        return np.zeros(self.dim)


class Quadratic(ConvexFunction):
    """f(x) = (1/2) <Qx, x> + <c, x> with Q symmetric positive semidefinite.

    The gradient Qx + c is cheap; the prox requires solving
    (I + gamma Q) y = x - gamma c, so the Cholesky factor of I + gamma Q is
    cached per step size and rebuilt only when gamma changes.
    """

    smooth = True

    def __init__(self, Q, c=None):
        Q = np.asarray(Q, dtype=float)
        if Q.ndim != 2 or Q.shape[0] != Q.shape[1]:
            raise ValueError(f"Q must be square, got shape {Q.shape}")
        self.dim = Q.shape[0]
        scale = max(1.0, float(np.abs(Q).max()) if Q.size else 0.0)
        if float(np.abs(Q - Q.T).max()) > 1e-12 * scale:
            raise ValueError("Q is not symmetric within 1e-12 relative")
        self.Q = 0.5 * (Q + Q.T)
        self.c = (
            np.zeros(self.dim) if c is None else _as_vector(c, self.dim, "c")
        )
        w = np.linalg.eigvalsh(self.Q)
        lam_min, lam_max = float(w[0]), float(w[-1])
        if lam_min < -1e-10 * max(abs(lam_min), abs(lam_max)):
            raise ValueError(f"Q is not positive semidefinite (lambda_min={lam_min})")
        self.mu = max(lam_min, 0.0)
        self.beta = 1.0 / lam_max if lam_max > 0.0 else 0.0
        self._cached_gamma = None
        self._cached_factor = None

    def eval(self, x):
        x = _as_vector(x, self.dim)
        return 0.5 * float(x @ (self.Q @ x)) + float(self.c @ x)

    def grad(self, x):
        x = _as_vector(x, self.dim)
        return self.Q @ x + self.c

    def _factor(self, gamma):
        if self._cached_gamma != gamma:
            M = np.eye(self.dim) + gamma * self.Q
            try:
                self._cached_factor = scipy.linalg.cho_factor(M)
            except scipy.linalg.LinAlgError as exc:  # cannot happen for PSD Q
                raise RuntimeError(
                    f"factorization of I + gamma Q failed for gamma={gamma}"
                ) from exc
            self._cached_gamma = gamma
        return self._cached_factor

    def prox(self, x, gamma):
        self._check_gamma(gamma)
        x = _as_vector(x, self.dim)
        return scipy.linalg.cho_solve(self._factor(gamma), x - gamma * self.c)


class BoxIndicator(ConvexFunction):
    """Indicator of the box [lower, upper]; prox is the componentwise clip.

    Infinite bounds are allowed, so half-spaces and free coordinates come for
    free. Evaluation returns +inf only for violations exceeding the
    scale-invariant domain tolerance.
    """

    def __init__(self, lower, upper):
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        if lower.shape != upper.shape or lower.ndim != 1:
            raise ValueError("lower and upper must be vectors of equal length")
        if np.any(lower > upper):
            raise ValueError("box requires lower <= upper componentwise")
        self.dim = lower.shape[0]
        self.lower = lower
        self.upper = upper
        self.mu = 0.0
        self.beta = 0.0

    def eval(self, x):
        x = _as_vector(x, self.dim)
        violation = np.maximum(self.lower - x, x - self.upper)
        if float(np.max(violation, initial=0.0)) > domain_tolerance(x):
            return np.inf
        return 0.0

    def prox(self, x, gamma):
        self._check_gamma(gamma)
        x = _as_vector(x, self.dim)
        return np.clip(x, self.lower, self.upper)


class SubspacePlusScaledSqNorm(ConvexFunction):
    """f(x) = indicator of a subspace U plus (a/2)||x||^2, a >= 0.

    prox_{gamma f}(x) = P_U x / (1 + gamma a).
    """

    def __init__(self, subspace, a):
        if a < 0:
            raise ValueError(f"a must be nonnegative, got {a}")
        self.subspace = subspace
        self.a = float(a)
        self.dim = subspace.dim
        self.mu = float(a)
        self.beta = 0.0

    def eval(self, x):
        x = _as_vector(x, self.dim)
        residual = x - self.subspace.project(x)
        if float(np.linalg.norm(residual)) > domain_tolerance(x):
            return np.inf
        return 0.5 * self.a * float(x @ x)

    def prox(self, x, gamma):
        self._check_gamma(gamma)
        x = _as_vector(x, self.dim)
        return self.subspace.project(x) / (1.0 + gamma * self.a)


class ShiftedScaledSqNorm(ConvexFunction):
    """f(x) = (a/2)||x - u||^2 with a > 0; smooth and strongly convex."""

    smooth = True

    def __init__(self, a, u):
        if not a > 0:
            raise ValueError(f"a must be positive, got {a}")
        self.a = float(a)
        self.u = np.asarray(u, dtype=float)
        if self.u.ndim != 1:
            raise ValueError("u must be a vector")
        self.dim = self.u.shape[0]
        self.mu = float(a)
        self.beta = 1.0 / float(a)

    def eval(self, x):
        x = _as_vector(x, self.dim)
        d = x - self.u
        return 0.5 * self.a * float(d @ d)

    def grad(self, x):
        x = _as_vector(x, self.dim)
        return self.a * (x - self.u)

    def prox(self, x, gamma):
        self._check_gamma(gamma)
        x = _as_vector(x, self.dim)
        return (x + gamma * self.a * self.u) / (1.0 + gamma * self.a)
