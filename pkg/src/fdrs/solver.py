"""Relaxed fixed-point driver with trace recording and ergodic averaging.

The iteration is z^{k+1} = (1-lambda_k) z^k + lambda_k T(z^k). Relaxation
parameters must stay inside (0, 1/alpha) where alpha is the averagedness
parameter of T; an epsilon-window schedule additionally enforces
lambda <= (1-eps)(1+eps*alpha)/alpha, the condition under which the
gradient-summability and ergodic bounds hold.
"""

import warnings
from dataclasses import dataclass, field

import numpy as np

from .functions import _as_vector
from .operators import alpha_fdrs, apply_fdrs, relax


class ConstantSchedule:
    """lambda_k = value for every k."""

    def __init__(self, value):
        self.value = float(value)

    def lam(self, k):
        return self.value


class SequenceSchedule:
    """Explicit per-iteration relaxation values."""

    def __init__(self, values):
        self.values = [float(v) for v in values]
        if not self.values:
            raise ValueError("schedule sequence is empty")

    def lam(self, k):
        if k >= len(self.values):
            raise ValueError(
                f"schedule provides {len(self.values)} values, needs index {k}"
            )
        return self.values[k]


class EpsilonWindowSchedule:
    """Constant lambda validated against the epsilon relaxation window."""

    def __init__(self, value, epsilon=None):
        self.value = float(value)
        self.epsilon = epsilon

    def lam(self, k):
        return self.value


def epsilon_window_cap(epsilon, alpha):
    """Largest admissible relaxation under the epsilon window."""
    return (1.0 - epsilon) * (1.0 + epsilon * alpha) / alpha


@dataclass
class SolveConfig:
    """Run parameters.

    ``fpr_tol`` stops the run once the fixed-point residual norm
    ||T z - z|| drops to the tolerance (the squared residual is what the
    trace records); a nonpositive value disables early stopping. ``epsilon``
    is the window parameter recorded for the certificates and enforced by
    :class:`EpsilonWindowSchedule`.
    """

    gamma: float
    z0: np.ndarray
    max_iter: int = 1000
    lambda_schedule: object = field(default_factory=lambda: ConstantSchedule(1.0))
    epsilon: float = 0.1
    fpr_tol: float = 1e-10
    record_every: int = 1


@dataclass
class TraceRecord:
    k: int
    lam: float
    z: np.ndarray
    x_h: np.ndarray
    x_f: np.ndarray
    grad_h: np.ndarray
    subgrad_chi: np.ndarray
    subgrad_f: np.ndarray
    fpr_sq: float
    feasibility: float
    objective_at_xh: float
    objective_split: float
    Lambda: float
    erg_xh_sum: np.ndarray
    erg_xf_sum: np.ndarray


class IterationTrace:
    """Recorded iterates plus the running sums behind ergodic averages.

    Records land at stride ``record_every`` plus always at k = 0 and at the
    final iterate. The weighted sums sum_{i<=k} lambda_i x^i are carried
    along so ergodic averages are O(1) lookups at any recorded k.
    """

    def __init__(self, problem, gamma, epsilon, alpha):
        self.problem = problem
        self.gamma = float(gamma)
        self.epsilon = float(epsilon)
        self.alpha = float(alpha)
        self.records = []
        self._index = {}
        self.stopped_early = False

    def append(self, record):
        self._index[record.k] = len(self.records)
        self.records.append(record)

    def __len__(self):
        return len(self.records)

    @property
    def ks(self):
        return [r.k for r in self.records]

    def record_at(self, k):
        if k not in self._index:
            raise ValueError(f"iteration {k} is not recorded in the trace")
        return self.records[self._index[k]]

    @property
    def final(self):
        return self.records[-1]

    def ergodic_averages(self, k):
        """Ergodic averages (xbar_h, xbar_f) at recorded iteration k."""
        r = self.record_at(k)
        return r.erg_xh_sum / r.Lambda, r.erg_xf_sum / r.Lambda

    def to_csv(self, path):
        """Write the scalar columns, floats in full round-trip precision."""
        with open(path, "w") as fh:
            fh.write("k,fpr_sq,objective_at_xh,objective_split,feasibility,lambda\n")
            for r in self.records:
                fh.write(
                    f"{r.k},{r.fpr_sq!r},{r.objective_at_xh!r},"
                    f"{r.objective_split!r},{r.feasibility!r},{r.lam!r}\n"
                )

    def save_vectors(self, path):
        """Binary sidecar with the per-record vectors."""
        np.savez(
            path,
            k=np.array(self.ks),
            lam=np.array([r.lam for r in self.records]),
            Lambda=np.array([r.Lambda for r in self.records]),
            z=np.stack([r.z for r in self.records]),
            x_h=np.stack([r.x_h for r in self.records]),
            x_f=np.stack([r.x_f for r in self.records]),
            grad_h=np.stack([r.grad_h for r in self.records]),
            subgrad_chi=np.stack([r.subgrad_chi for r in self.records]),
            subgrad_f=np.stack([r.subgrad_f for r in self.records]),
        )


def _validate_schedule(schedule, epsilon, alpha, max_iter):
    cap = 1.0 / alpha
    window = None
    if isinstance(schedule, EpsilonWindowSchedule):
        eps = schedule.epsilon if schedule.epsilon is not None else epsilon
        if not 0.0 < eps < 1.0:
            raise ValueError(f"epsilon must lie in (0,1), got {eps}")
        window = epsilon_window_cap(eps, alpha)
    for k in range(max_iter + 1):
        lam = schedule.lam(k)
        if not 0.0 < lam < cap:
            raise ValueError(
                f"lambda_{k}={lam} outside the admissible window (0, {cap})"
            )
        if window is not None and lam > window:
            raise ValueError(
                f"lambda_{k}={lam} exceeds the epsilon-window cap {window}"
            )


def run(p, cfg):
    """Drive the relaxed iteration and record a trace.

    Stops at ``max_iter`` updates or once ||T z - z|| <= fpr_tol. Aborts with
    a diagnostic if an iterate becomes non-finite or grows past
    1e12 (1 + ||z0||), which indicates a misconfigured step size. A warning
    is emitted when the relaxation schedule makes the divergence condition
    sum lambda_k (1 - lambda_k alpha) = inf look doubtful over the run.
    """
    z0 = _as_vector(cfg.z0, p.dim, "z0")
    if not 0.0 < cfg.gamma < 2.0 * p.beta_V:
        raise ValueError(
            f"gamma={cfg.gamma} outside the validated window (0, {2.0 * p.beta_V})"
        )
    if not 0.0 < cfg.epsilon < 1.0:
        raise ValueError(f"epsilon must lie in (0,1), got {cfg.epsilon}")
    if cfg.max_iter < 0 or cfg.record_every < 1:
        raise ValueError("max_iter must be >= 0 and record_every >= 1")
    alpha = alpha_fdrs(cfg.gamma, p.beta_V)
    schedule = cfg.lambda_schedule
    _validate_schedule(schedule, cfg.epsilon, alpha, cfg.max_iter)

    margin = sum(
        schedule.lam(k) * (1.0 - schedule.lam(k) * alpha)
        for k in range(cfg.max_iter + 1)
    )
    if margin <= 0.01:
        warnings.warn(
            "relaxation schedule gives sum lambda_k (1 - lambda_k alpha) "
            f"= {margin:.3e} over this run; convergence is not guaranteed",
            RuntimeWarning,
        )

    trace = IterationTrace(p, cfg.gamma, cfg.epsilon, alpha)
    guard = 1e12 * (1.0 + float(np.linalg.norm(z0)))
    z = z0.copy()
    Lambda = 0.0
    erg_xh = np.zeros(p.dim)
    erg_xf = np.zeros(p.dim)

    for k in range(cfg.max_iter + 1):
        step = apply_fdrs(p, z, cfg.gamma)
        lam = schedule.lam(k)
        Lambda += lam
        erg_xh += lam * step.x_h
        erg_xf += lam * step.x_f
        diff = step.x_f - step.x_h
        feasibility = float(np.linalg.norm(diff))
        fpr_sq = feasibility * feasibility
        hit_tol = cfg.fpr_tol > 0.0 and feasibility <= cfg.fpr_tol
        last = hit_tol or k == cfg.max_iter
        if k % cfg.record_every == 0 or last:
            trace.append(
                TraceRecord(
                    k=k,
                    lam=lam,
                    z=z.copy(),
                    x_h=step.x_h,
                    x_f=step.x_f,
                    grad_h=step.grad_h,
                    subgrad_chi=step.subgrad_chi,
                    subgrad_f=step.subgrad_f,
                    fpr_sq=fpr_sq,
                    feasibility=feasibility,
                    objective_at_xh=p.f.eval(step.x_h) + p.g.eval(step.x_h),
                    objective_split=p.f.eval(step.x_f) + p.g.eval(step.x_h),
                    Lambda=Lambda,
                    erg_xh_sum=erg_xh.copy(),
                    erg_xf_sum=erg_xf.copy(),
                )
            )
        if last:
            trace.stopped_early = hit_tol and k < cfg.max_iter
            break
        z = relax(z, step.z_next, lam)
        norm_z = float(np.linalg.norm(z))
        if not np.isfinite(norm_z) or norm_z > guard:
            raise RuntimeError(
                f"iterate diverged at k={k + 1} (||z||={norm_z:.3e}); "
                "check gamma against 2*beta_V"
            )
    return trace


def default_gamma(p, mode):
    """Step size presets: 'conservative' -> beta_V, 'aggressive' -> 1.99 beta_V."""
    if mode not in ("conservative", "aggressive"):
        raise ValueError(f"unknown gamma mode {mode!r}")
    if np.isinf(p.beta_V):
        raise ValueError(
            "beta_V is infinite (gradient of h is constant); choose gamma explicitly"
        )
    return p.beta_V if mode == "conservative" else 1.99 * p.beta_V


def reference_fixed_point(p, gamma, z0=None, fpr_tol=1e-13, max_iter=10**6,
                          polish=200):
    """High-accuracy unrelaxed run used to anchor the certificates.

    Returns ``(z_star, residual)`` where residual = ||T z* - z*|| at the
    returned point. Iterates with lambda = 1 until the residual norm reaches
    ``fpr_tol`` or the iteration budget runs out, then keeps applying the
    operator for up to ``polish`` extra steps in case the iterate settles on
    a floating-point-exact fixed point.
    """
    if z0 is None:
        z0 = np.zeros(p.dim)
    z = _as_vector(z0, p.dim, "z0").copy()
    if not 0.0 < gamma < 2.0 * p.beta_V:
        raise ValueError(
            f"gamma={gamma} outside the validated window (0, {2.0 * p.beta_V})"
        )
    hit = False
    for _ in range(max_iter):
        step = apply_fdrs(p, z, gamma)
        residual = float(np.linalg.norm(step.x_f - step.x_h))
        if residual <= fpr_tol:
            hit = True
            break
        z = step.z_next
    if hit:
        for _ in range(polish):
            step = apply_fdrs(p, z, gamma)
            if np.array_equal(step.z_next, z):
                break
            z = step.z_next
        residual = float(np.linalg.norm(step.x_f - step.x_h))
    return z, residual
