"""Closed linear subspaces with exact orthogonal projectors.

All variants expose ``project`` (the orthogonal projector), the complement
projector, and the reflection 2 P - I. Projectors are kept in factored form
(an orthonormal basis of the subspace or of its complement) and applied as
two thin matrix products, so they scale past the dense-projector regime
without a separate code path. Instances are immutable after construction and
safe for shared concurrent reads.
"""

import numpy as np

from .functions import Quadratic, BoxIndicator, ShiftedScaledSqNorm, Zero, _as_vector


class Subspace:
    """Base class; subclasses set ``dim`` and implement ``project``."""

    def project(self, x):
        raise NotImplementedError

    def project_complement(self, x):
        """Projection onto the orthogonal complement, x - P x."""
        x = _as_vector(x, self.dim)
        return x - self.project(x)

    def reflect(self, x):
        """Reflection 2 P x - x; an isometry."""
        x = _as_vector(x, self.dim)
        return 2.0 * self.project(x) - x


class NullSpace(Subspace):
    """Null space of a matrix A, projecting via an orthonormal row-space basis.

    A rank-revealing SVD of A determines the row space; singular values below
    1e-12 of the largest are treated as zero, so redundant or zero rows are
    handled without error. P x = x - R (R^T x) with R the row-space basis.
    """

    def __init__(self, A):
        A = np.atleast_2d(np.asarray(A, dtype=float))
        if A.ndim != 2:
            raise ValueError("A must be a matrix")
        self.A = A
        self.dim = A.shape[1]
        _, s, vt = np.linalg.svd(A, full_matrices=False)
        rank = int(np.sum(s > 1e-12 * s[0])) if s.size and s[0] > 0 else 0
        self.rank = rank
        self._row_basis = vt[:rank].T  # dim x rank, orthonormal columns

    def project(self, x):
        x = _as_vector(x, self.dim)
        if self.rank == 0:
            return x.copy()
        R = self._row_basis
        return x - R @ (R.T @ x)


class Span(Subspace):
    """Column span of a column-orthonormal matrix B; P = B B^T."""

    def __init__(self, B):
        B = np.asarray(B, dtype=float)
        if B.ndim != 2:
            raise ValueError("B must be a matrix")
        gram = B.T @ B
        if float(np.abs(gram - np.eye(B.shape[1])).max()) > 1e-12:
            raise ValueError("columns of B are not orthonormal within 1e-12")
        self.B = B
        self.dim = B.shape[0]

    def project(self, x):
        x = _as_vector(x, self.dim)
        return self.B @ (self.B.T @ x)


class DiagonalOfProduct(Subspace):
    """Diagonal {(x, ..., x)} of n copies of R^{d0}; P replicates the mean."""

    def __init__(self, n, d0):
        if n < 1 or d0 < 1:
            raise ValueError("n and d0 must be positive")
        self.n = int(n)
        self.d0 = int(d0)
        self.dim = self.n * self.d0

    def project(self, x):
        x = _as_vector(x, self.dim)
        mean = x.reshape(self.n, self.d0).mean(axis=0)
        return np.tile(mean, self.n)


def rotation_projector_block(theta):
    """2x2 projector onto the line spanned by (cos theta, sin theta)."""
    c, s = np.cos(theta), np.sin(theta)
    return np.array([[c * c, s * c], [s * c, s * s]])


class BlockRotation(Subspace):
    """Direct sum of rotated lines: block i of R^2 spans (c_i, sqrt(1-c_i^2)).

    Constructed either from angles or directly from a cosine sequence; the
    cosine form avoids acos/cos round trips when the cosines are prescribed.
    Cosine 1 (angle 0) spans the first axis of its block, so the same type
    covers both a rotated family and the axis-aligned family. The projector
    is applied blockwise in O(number of blocks).
    """

    def __init__(self, cosines=None, angles=None):
        if (cosines is None) == (angles is None):
            raise ValueError("provide exactly one of cosines or angles")
        if angles is not None:
            angles = np.asarray(angles, dtype=float)
            self._cos = np.cos(angles)
            self._sin = np.sin(angles)
        else:
            cosines = np.asarray(cosines, dtype=float)
            if np.any(cosines < 0.0) or np.any(cosines > 1.0):
                raise ValueError("cosines must lie in [0, 1]")
            self._cos = cosines
            self._sin = np.sqrt(np.maximum(0.0, 1.0 - cosines * cosines))
        if self._cos.ndim != 1 or self._cos.size == 0:
            raise ValueError("need at least one block")
        self.blocks = self._cos.shape[0]
        self.dim = 2 * self.blocks

    @property
    def cosines(self):
        return self._cos

    def project(self, x):
        x = _as_vector(x, self.dim)
        X = x.reshape(self.blocks, 2)
        t = self._cos * X[:, 0] + self._sin * X[:, 1]
        out = np.empty_like(X)
        out[:, 0] = self._cos * t
        out[:, 1] = self._sin * t
        return out.reshape(self.dim)


def _shift_descriptor(fd, x_p):
    """Descriptor for y -> f(y + x_p).

    For quadratics the additive constant f(x_p)-type term is dropped: the
    minimizer and all objective differences are unchanged.
    """
    if isinstance(fd, Zero):
        return fd
    if isinstance(fd, Quadratic):
        return Quadratic(fd.Q, fd.c + fd.Q @ x_p)
    if isinstance(fd, BoxIndicator):
        return BoxIndicator(fd.lower - x_p, fd.upper - x_p)
    if isinstance(fd, ShiftedScaledSqNorm):
        return ShiftedScaledSqNorm(fd.a, fd.u - x_p)
    raise ValueError(f"cannot shift descriptor of type {type(fd).__name__}")


def affine_reduction(f, g, A, b):
    """Reduce min f(x)+g(x) s.t. Ax = b to a problem over the null space of A.

    Returns ``(problem, x_p)`` where ``x_p`` is the minimum-norm solution of
    A x = b and ``problem`` minimizes f(. + x_p) + g(. + x_p) over null(A);
    a minimizer x of the reduced problem recovers x + x_p for the original.
    Raises if A x = b is inconsistent.
    """
    from .operators import SplitProblem

    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    if A.shape[0] != b.shape[0]:
        raise ValueError("A and b have incompatible shapes")
    x_p, *_ = np.linalg.lstsq(A, b, rcond=None)
    residual = float(np.linalg.norm(A @ x_p - b))
    if residual > 1e-9 * (1.0 + float(np.linalg.norm(b))):
        raise ValueError(
            f"A x = b is infeasible (least-squares residual {residual:.3e})"
        )
    V0 = NullSpace(A)
    problem = SplitProblem(_shift_descriptor(f, x_p), _shift_descriptor(g, x_p), V0)
    return problem, x_p
