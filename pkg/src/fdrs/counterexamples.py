"""Rotated-subspace instances on which the iteration is provably slow.

The ambient space is a direct sum of N planes. The constraint subspace V
takes the first axis of every plane; the subspace U inside f takes the line
at angle theta_i (cosine c_i) of plane i. With f = chi_U + (a/2)||.||^2,
g = (1/2)||.||^2, gamma = 1 and lambda = 1, the iteration map acts
blockwise as the 2x2 matrix

    (1/(a+1)) [[0, -s_i c_i], [0, c_i^2 + a]],   s_i = sqrt(1 - c_i^2),

whose nontrivial eigenvalue b_i = (a + c_i^2)/(a + 1) < 1 approaches 1 as
c_i -> 1. Packing blocks with cosines creeping toward 1 produces initial
points whose iterates decay slower than any prescribed rate (truncated here
to finitely many blocks with an explicit truncation deficit). Everything is
applied blockwise; no dense operator is ever formed.
"""

import math
from dataclasses import dataclass

import numpy as np

from .functions import ShiftedScaledSqNorm, SubspacePlusScaledSqNorm
from .operators import SplitProblem, apply_fdrs
from .subspace import BlockRotation

SCHEDULE_FLOOR_OFFSET = 1e-3


def fdrs_block_matrix(c, a):
    """2x2 action of the iteration map on one plane with cosine c."""
    s = math.sqrt(max(0.0, 1.0 - c * c))
    return np.array([[0.0, -s * c], [0.0, c * c + a]]) / (a + 1.0)


def block_eigenvector(c, a):
    """Eigenpair (z_i, b_i) of the block matrix with b_i = (a + c^2)/(a + 1).

    The returned vector is (-c s / (a + c^2), 1); its squared norm is
    c^2 (1 - c^2) / (a + c^2)^2 + 1 and the squared norm of its first
    (V-aligned) component is c^2 (1 - c^2) / (a + c^2)^2.
    """
    s = math.sqrt(max(0.0, 1.0 - c * c))
    vec = np.array([-c * s / (a + c * c), 1.0])
    return vec, (a + c * c) / (a + 1.0)


@dataclass(frozen=True)
class RotationInstance:
    """A rotated-subspace problem with its canonical parameters.

    gamma = 1 and lambda = 1 are the parameters under which the slowness
    guarantees are stated; the constraint subspace V is axis-aligned and the
    unconstrained minimizer is 0, the unique fixed point.
    """

    N: int
    cosines: np.ndarray
    a: float
    problem: SplitProblem
    V: BlockRotation
    U: BlockRotation
    gamma: float = 1.0


def rotation_instance(cosines, a):
    """Assemble the blockwise problem for a cosine sequence in [0, 1)."""
    cosines = np.asarray(cosines, dtype=float)
    if np.any(cosines >= 1.0) or np.any(cosines < 0.0):
        raise ValueError("cosines must lie in [0, 1) so that U and V only share 0")
    N = cosines.shape[0]
    V = BlockRotation(cosines=np.ones(N))
    U = BlockRotation(cosines=cosines)
    f = SubspacePlusScaledSqNorm(U, a)
    g = ShiftedScaledSqNorm(1.0, np.zeros(2 * N))
    problem = SplitProblem(f, g, V, beta=1.0, beta_V=1.0)
    return RotationInstance(N=N, cosines=cosines, a=float(a),
                            problem=problem, V=V, U=U)


@dataclass(frozen=True)
class SlowSchedule:
    """Block eigenvalues b_j and per-iteration witness indices n_k with

        b_{n_k}^{k+1} / (n_k + 1) > e^{-1} F(k+1)   for 0 <= k <= k_max,

    b_j nondecreasing in (eta, 1) and n_k nondecreasing."""

    b: np.ndarray
    n_k: np.ndarray
    eta: float
    k_max: int

    def cosines(self, a):
        """Recover block cosines via c_j = sqrt(b_j (1 + a) - a)."""
        vals = self.b * (1.0 + a) - a
        if np.any(vals <= 0.0):
            raise ValueError("schedule floor eta must exceed a / (a + 1)")
        return np.sqrt(vals)


def _validate_decay(F, k_max):
    values = np.array([F(float(t)) for t in range(1, k_max + 2)])
    if np.any(values <= 0.0) or np.any(values >= 1.0):
        raise ValueError("F must map [1, k_max + 1] into (0, 1)")
    if np.any(np.diff(values) >= 0.0):
        raise ValueError("F must be strictly decreasing")
    return values


def build_slow_schedule(F, k_max, eta, a=0.0):
    """Constructively satisfy the slow-sequence inequality up to k_max.

    A block keeps serving as the witness while its eigenvalue still clears
    the requirement (e^{-1} F(k+1) (n+1))^{1/(k+1)}; when it expires, the
    next block opens with an eigenvalue halfway between the requirement and
    1, which keeps b inside (eta, 1), strictly monotone at each advance, and
    roughly doubles each block's service span. Raises if a fresh block would
    need an eigenvalue at or above 1 (the index budget is exhausted for this
    decay target).
    """
    if not 0.0 < eta < 1.0 - 2.0 * SCHEDULE_FLOOR_OFFSET:
        raise ValueError(f"eta must lie well inside (0, 1), got {eta}")
    if a < 0.0 or eta <= a / (a + 1.0):
        raise ValueError(f"eta must exceed a/(a+1) = {a / (a + 1.0)}")
    F_values = _validate_decay(F, k_max)
    floor = eta + SCHEDULE_FLOOR_OFFSET

    blocks = []  # b_j per block
    n_k = np.empty(k_max + 1, dtype=int)
    n_cur = -1
    for k in range(k_max + 1):
        target = math.exp(-1.0) * F_values[k]
        if n_cur >= 0:
            b_cur = blocks[n_cur]
            if b_cur ** (k + 1) / (n_cur + 1) > target:
                n_k[k] = n_cur
                continue
        n_new = n_cur + 1
        required = (target * (n_new + 1)) ** (1.0 / (k + 1))
        if required >= 1.0 - SCHEDULE_FLOOR_OFFSET:
            raise ValueError(
                f"schedule search exhausted at k={k}: block {n_new} would "
                f"need eigenvalue {required} >= 1"
            )
        prev = blocks[n_cur] if n_cur >= 0 else 0.0
        b_new = 0.5 * (1.0 + max(floor, prev, required))
        blocks.append(b_new)
        n_cur = n_new
        n_k[k] = n_cur

    schedule = SlowSchedule(
        b=np.array(blocks), n_k=n_k, eta=float(eta), k_max=int(k_max)
    )
    for k in range(k_max + 1):
        lhs = schedule.b[schedule.n_k[k]] ** (k + 1) / (schedule.n_k[k] + 1)
        if not lhs > math.exp(-1.0) * F_values[k]:
            raise RuntimeError(f"constructed schedule violates its bound at k={k}")
    return schedule


def _initial_point(cosines, a, weights):
    """Stack per-block eigenvectors, each normalized then scaled by weights."""
    N = cosines.shape[0]
    z0 = np.empty((N, 2))
    for i, c in enumerate(cosines):
        vec, _ = block_eigenvector(c, a)
        z0[i] = weights[i] * vec / np.linalg.norm(vec)
    return z0.reshape(2 * N)


def arbitrarily_slow_instance(F, a, k_max, eta=None):
    """Instance plus initial point with ||z^k|| >= e^{-1} F(k), 1 <= k <= k_max.

    Block i starts at norm 1/(i+1) along its decay eigenvector, so
    ||z^k|| >= b_n^k / (n+1) for every block n; the constructed schedule
    turns that into the decay floor. The guarantee is a finite-horizon one:
    it holds up to k_max, the horizon the schedule (and hence the truncation
    to n_{k_max} + 1 blocks) was built for.
    """
    if eta is None:
        eta = 0.5 * (a / (a + 1.0) + 1.0)
    schedule = build_slow_schedule(F, k_max, eta, a)
    cosines = schedule.cosines(a)
    instance = rotation_instance(cosines, a)
    weights = 1.0 / (np.arange(instance.N) + 1.0)
    z0 = _initial_point(cosines, a, weights)
    return instance, z0


def sublinear_instance(alpha, a, N):
    """Instance plus initial point decaying no faster than (k+1)^{-alpha}.

    Cosines c_i = sqrt(i/(i+1)) creep toward 1; the initial point weights
    fall like (i+1)^{-alpha}, square-summable only for alpha > 1/2. For
    1 <= k < N the truncated construction guarantees

        ||x_h^k||^2 >= (1 - d) / (k+1)^{2 alpha},
        ||x_f^k||^2 >= (1 - d) (a + 1/2)^2 / ((a+1)^2 (k+1)^{2 alpha}),

    with truncation deficit d = ((k+1)/(N+1))^{2 alpha}.
    """
    if not alpha > 0.5:
        raise ValueError(f"alpha must exceed 1/2, got {alpha}")
    if N < 2:
        raise ValueError("need at least two blocks")
    idx = np.arange(N, dtype=float)
    cosines = np.sqrt(idx / (idx + 1.0))
    instance = rotation_instance(cosines, a)
    kappa = 0.5 + 2.0 * (a + 1.0) ** 2
    scale = math.sqrt(2.0 * alpha * kappa) * math.exp(1.0 / (a + 1.0))
    weights = scale / (idx + 1.0) ** alpha
    z0 = _initial_point(cosines, a, weights)
    return instance, z0


def truncation_deficit(alpha, N, k):
    """Deficit ((k+1)/(N+1))^{2 alpha} of the N-block truncation at step k."""
    return ((k + 1.0) / (N + 1.0)) ** (2.0 * alpha)


def _block_sq_norms(x):
    """Per-block squared norms, reduced with exact (order-independent) summation."""
    sq = (x * x).reshape(-1, 2).sum(axis=1)
    return math.fsum(sq)


def run_norm_history(instance, z0, k_max):
    """Iterate k_max steps (gamma = lambda = 1) and record iterate norms.

    Returns arrays ``norm_z``, ``norm_xh``, ``norm_xf`` indexed by k. Only
    norms are kept, so the largest constructions stay cheap; the operator is
    applied blockwise throughout.
    """
    p = instance.problem
    z = np.asarray(z0, dtype=float).copy()
    norm_z = np.empty(k_max + 1)
    norm_xh = np.empty(k_max + 1)
    norm_xf = np.empty(k_max + 1)
    for k in range(k_max + 1):
        step = apply_fdrs(p, z, instance.gamma)
        norm_z[k] = math.sqrt(_block_sq_norms(z))
        norm_xh[k] = math.sqrt(_block_sq_norms(step.x_h))
        norm_xf[k] = math.sqrt(_block_sq_norms(step.x_f))
        z = step.z_next
    return {"norm_z": norm_z, "norm_xh": norm_xh, "norm_xf": norm_xf}
