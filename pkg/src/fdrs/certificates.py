"""Numerical certificates for the proved convergence inequalities.

Every certificate is a pure function of a recorded trace, a reference
solution and the problem constants; it re-derives nothing about the
trajectory. Residuals are signed (left side minus right side, negative
means satisfied) and normalized by a per-certificate scale so that a pass
threshold is invariant under scaling the whole problem by a positive
constant. The base tolerance is 1e-7 relative, inflated by
10 * (reference residual / ||z0 - z*||) when the reference fixed point is
itself numerical.
"""

import dataclasses
import json
import math
from dataclasses import dataclass, field

import numpy as np

from .operators import apply_fdrs
from .solver import reference_fixed_point, epsilon_window_cap

BASE_TOLERANCE = 1e-7


class ReferenceSolution:
    """A fixed point z* with the derived optimal quantities.

    x* = P_V z* is the minimizer, subgrad_chi* = (z* - x*)/gamma the
    normal-cone element, and the subgradient of f at x* is fixed by the
    optimality identity subgrad_f* = -grad_h* - subgrad_chi* (never read off
    a prox call), which is the selection the bounds are stated with.
    """

    def __init__(self, problem, gamma, z_star):
        z_star = np.asarray(z_star, dtype=float)
        step = apply_fdrs(problem, z_star, gamma)
        self.residual = float(np.linalg.norm(step.x_f - step.x_h))
        if self.residual > 1e-10 * (1.0 + float(np.linalg.norm(z_star))):
            raise ValueError(
                f"z_star is not a fixed point (residual {self.residual:.3e})"
            )
        self.problem = problem
        self.gamma = float(gamma)
        self.z_star = z_star
        self.x_star = step.x_h
        in_v = float(np.linalg.norm(problem.V.project(self.x_star) - self.x_star))
        if in_v > 1e-12 * (1.0 + float(np.linalg.norm(self.x_star))):
            raise ValueError(f"x_star is not in V (deviation {in_v:.3e})")
        self.subgrad_chi_star = step.subgrad_chi
        self.grad_h_star = step.grad_h
        self.subgrad_f_star = -self.grad_h_star - self.subgrad_chi_star
        self.f_star = problem.f.eval(self.x_star)
        self.g_star = problem.g.eval(self.x_star)

    @classmethod
    def compute(cls, problem, gamma, z0=None, fpr_tol=1e-13, max_iter=10**6):
        """Obtain z* from a high-accuracy unrelaxed run."""
        z_star, _ = reference_fixed_point(
            problem, gamma, z0=z0, fpr_tol=fpr_tol, max_iter=max_iter
        )
        return cls(problem, gamma, z_star)


@dataclass
class CertificateEntry:
    name: str
    anchor: str
    worst_violation: float
    at_iteration: int
    passed: bool
    tolerance: float
    details: dict = field(default_factory=dict)


@dataclass
class RateReport:
    entries: list

    @property
    def all_pass(self):
        return all(e.passed for e in self.entries)

    def entry(self, anchor):
        for e in self.entries:
            if e.anchor == anchor:
                return e
        raise KeyError(anchor)

    def to_json(self, path):
        payload = [
            {
                "name": e.name,
                "anchor": e.anchor,
                "worst_violation": e.worst_violation,
                "at_iteration": e.at_iteration,
                "pass": e.passed,
            }
            for e in self.entries
        ]
        with open(path, "w") as fh:
            json.dump(payload, fh, indent=2)


def certificate_tolerance(trace, ref):
    """Base tolerance inflated by the accuracy of the numerical reference."""
    d0 = _dist0(trace, ref)
    if d0 == 0.0:
        return BASE_TOLERANCE
    return BASE_TOLERANCE + 10.0 * ref.residual / d0


def _dist0(trace, ref):
    return float(np.linalg.norm(trace.records[0].z - ref.z_star))


def _normalized(residual, scale):
    if scale > 0.0:
        return residual / scale
    return 0.0 if residual <= 0.0 else np.inf


def _entry(name, anchor, ks, normalized, tol, details=None):
    normalized = np.asarray(normalized, dtype=float)
    idx = int(np.argmax(normalized)) if normalized.size else 0
    worst = float(normalized[idx]) if normalized.size else 0.0
    return CertificateEntry(
        name=name,
        anchor=anchor,
        worst_violation=worst,
        at_iteration=int(ks[idx]) if normalized.size else -1,
        passed=worst <= tol,
        tolerance=tol,
        details=details or {},
    )


def _combine(name, anchor, parts, tol, details=None):
    """Fold multiple (ks, normalized) sub-checks into a single entry."""
    worst, at = -np.inf, -1
    det = dict(details or {})
    for label, ks, normalized in parts:
        normalized = np.asarray(normalized, dtype=float)
        if normalized.size == 0:
            continue
        idx = int(np.argmax(normalized))
        det[f"worst_{label}"] = float(normalized[idx])
        if normalized[idx] > worst:
            worst, at = float(normalized[idx]), int(ks[idx])
    if worst == -np.inf:
        worst = 0.0
    return CertificateEntry(
        name=name,
        anchor=anchor,
        worst_violation=worst,
        at_iteration=at,
        passed=worst <= tol,
        tolerance=tol,
        details=det,
    )


def _adjacent_pairs(trace):
    pairs = [
        (r1, r2)
        for r1, r2 in zip(trace.records[:-1], trace.records[1:])
        if r2.k == r1.k + 1
    ]
    if len(pairs) != len(trace.records) - 1:
        raise ValueError(
            "this certificate needs consecutive iterates; record the trace "
            "with record_every=1"
        )
    return pairs


def _tau_lower(trace):
    a = trace.alpha
    return min((1.0 - r.lam * a) * r.lam / a for r in trace.records)


def _require_epsilon_window(trace, epsilon):
    cap = epsilon_window_cap(epsilon, trace.alpha)
    for r in trace.records:
        if r.lam > cap:
            raise ValueError(
                f"lambda_{r.k}={r.lam} violates the epsilon-window cap {cap}; "
                "this certificate's hypothesis does not hold for the run"
            )


def _s_f(p, x_f, subgrad_f, ref):
    dx = x_f - ref.x_star
    val = 0.5 * p.mu_f * float(dx @ dx)
    if p.beta_f > 0.0:
        dg = subgrad_f - ref.subgrad_f_star
        val = max(val, 0.5 * p.beta_f * float(dg @ dg))
    return val


def _s_h(p, x_h, grad_h, ref):
    dx = x_h - ref.x_star
    val = 0.5 * p.mu_g * float(dx @ dx)
    if np.isfinite(p.beta_V):
        dg = grad_h - ref.grad_h_star
        val = max(val, 0.5 * p.beta_V * float(dg @ dg))
    return val


def _min_tail(ks, values, early_k=10):
    """(k+1) * running-min series with its early/tail comparison."""
    running = np.minimum.accumulate(values)
    series = (np.asarray(ks, dtype=float) + 1.0) * running
    early_idx = next((i for i, k in enumerate(ks) if k >= early_k), 0)
    early, tail = float(series[early_idx]), float(series[-1])
    return {
        "tail_series_early_k": int(ks[early_idx]),
        "tail_series_early": early,
        "tail_series_final": tail,
        "tail_ratio": tail / early if early > 0.0 else 0.0,
    }


def check_fejer(trace, ref, tol=None):
    """Distance to the fixed point never increases between records."""
    tol = certificate_tolerance(trace, ref) if tol is None else tol
    d_sq = [float(np.linalg.norm(r.z - ref.z_star) ** 2) for r in trace.records]
    scale = _dist0(trace, ref) ** 2
    ks, normalized = [], []
    for i in range(len(d_sq) - 1):
        ks.append(trace.records[i + 1].k)
        normalized.append(_normalized(d_sq[i + 1] - d_sq[i], scale))
    return _entry("distance monotonicity", "fejer-monotonicity", ks, normalized, tol)


def check_fpr_summability(trace, ref, tol=None):
    """Weighted sum of squared successive differences stays below ||z0-z*||^2."""
    tol = certificate_tolerance(trace, ref) if tol is None else tol
    pairs = _adjacent_pairs(trace)
    a = trace.alpha
    terms, ks = [], []
    for r1, r2 in pairs:
        coef = (1.0 - r1.lam * a) / (r1.lam * a)
        terms.append(coef * float(np.linalg.norm(r2.z - r1.z) ** 2))
        ks.append(r1.k)
    total = math.fsum(terms)
    bound = _dist0(trace, ref) ** 2
    at = ks[int(np.argmax(terms))] if terms else -1
    normalized = _normalized(total - bound, bound)
    return CertificateEntry(
        name="step summability",
        anchor="fpr-summability",
        worst_violation=normalized,
        at_iteration=at,
        passed=normalized <= tol,
        tolerance=tol,
        details={"sum": total, "bound": bound,
                 "tightness_ratio": total / bound if bound > 0.0 else 0.0},
    )


def check_fpr_envelope(trace, ref, tol=None):
    """Squared residual under its 1/(k+1) envelope, plus the vanishing-tail
    diagnostic on (k+1) * min residual."""
    tol = certificate_tolerance(trace, ref) if tol is None else tol
    tau = _tau_lower(trace)
    d0_sq = _dist0(trace, ref) ** 2
    scale = d0_sq / tau
    ks = [r.k for r in trace.records]
    normalized = [
        _normalized(r.fpr_sq - d0_sq / (tau * (r.k + 1)), scale)
        for r in trace.records
    ]
    details = _min_tail(ks, [r.fpr_sq for r in trace.records])
    return _entry(
        "residual envelope", "fpr-envelope", ks, normalized, tol, details
    )


def check_gradient_sum(trace, ref, epsilon=None, tol=None):
    """Relaxation-weighted sum of squared gradient gaps is bounded."""
    tol = certificate_tolerance(trace, ref) if tol is None else tol
    eps = trace.epsilon if epsilon is None else epsilon
    _require_epsilon_window(trace, eps)
    p, gamma = trace.problem, trace.gamma
    terms = [
        r.lam * float(np.linalg.norm(r.grad_h - ref.grad_h_star) ** 2)
        for r in trace.records
    ]
    total = math.fsum(terms)
    span = 2.0 * p.beta_V - gamma
    bound = (1.0 + eps) * _dist0(trace, ref) ** 2 / (gamma * eps * span)
    at = trace.records[int(np.argmax(terms))].k if terms else -1
    normalized = _normalized(total - bound, bound)
    return CertificateEntry(
        name="gradient summability",
        anchor="gradient-summability",
        worst_violation=normalized,
        at_iteration=at,
        passed=normalized <= tol,
        tolerance=tol,
        details={"sum": total, "bound": bound},
    )


def check_ergodic_objective(trace, ref, tol=None):
    """Averaged iterates: objective-error bracket and feasibility decay."""
    tol = certificate_tolerance(trace, ref) if tol is None else tol
    _require_epsilon_window(trace, trace.epsilon)
    p, gamma, eps = trace.problem, trace.gamma, trace.epsilon
    d0 = _dist0(trace, ref)
    sf_norm = float(np.linalg.norm(ref.subgrad_f_star))
    gh_norm = float(np.linalg.norm(ref.grad_h_star))
    span = 2.0 * p.beta_V - gamma
    upper_const = (
        d0 + 4.0 * gamma * gh_norm + (1.0 + eps) * gamma * d0 / (eps**3 * span)
    ) * d0 / (2.0 * gamma)
    lower_const = 2.0 * d0 * sf_norm
    feas_const = 2.0 * d0
    opt_value = ref.f_star + ref.g_star

    ks, low, up, feas = [], [], [], []
    L0 = trace.records[0].Lambda
    for r in trace.records:
        xbar_h = r.erg_xh_sum / r.Lambda
        xbar_f = r.erg_xf_sum / r.Lambda
        err = p.f.eval(xbar_f) + p.g.eval(xbar_h) - opt_value
        ks.append(r.k)
        low.append(_normalized(-lower_const / r.Lambda - err, upper_const / L0))
        up.append(_normalized(err - upper_const / r.Lambda, upper_const / L0))
        feas.append(
            _normalized(
                float(np.linalg.norm(xbar_f - xbar_h)) - feas_const / r.Lambda,
                feas_const / L0,
            )
        )
    return _combine(
        "ergodic objective",
        "ergodic-objective",
        [("lower", ks, low), ("upper", ks, up), ("feasibility", ks, feas)],
        tol,
    )


def check_nonergodic_objective(trace, ref, tol=None):
    """Last iterates: split objective error within the 1/sqrt(k+1) envelopes."""
    tol = certificate_tolerance(trace, ref) if tol is None else tol
    p, gamma = trace.problem, trace.gamma
    tau = _tau_lower(trace)
    d0 = _dist0(trace, ref)
    sf_norm = float(np.linalg.norm(ref.subgrad_f_star))
    gh_norm = float(np.linalg.norm(ref.grad_h_star))
    anchor_gap = float(np.linalg.norm(ref.z_star - ref.x_star))
    ratio = gamma / p.beta_V if np.isfinite(p.beta_V) else 0.0
    upper_const = (anchor_gap + (1.0 + ratio) * d0 + gamma * gh_norm) * d0 / gamma
    opt_value = ref.f_star + ref.g_star

    ks, low, up, feas, sqrt_err = [], [], [], [], []
    for r in trace.records:
        denom = math.sqrt(tau * (r.k + 1))
        err = r.objective_split - opt_value
        ks.append(r.k)
        low.append(_normalized(-d0 * sf_norm / denom - err, upper_const))
        up.append(_normalized(err - upper_const / denom, upper_const))
        feas.append(_normalized(r.feasibility - d0 / denom, d0))
        sqrt_err.append(abs(err) * denom)
    details = {"sqrt_scaled_error_final": sqrt_err[-1] if sqrt_err else 0.0}
    return _combine(
        "nonergodic objective",
        "nonergodic-objective",
        [("lower", ks, low), ("upper", ks, up), ("feasibility", ks, feas)],
        tol,
        details,
    )


def check_lipschitz_objective(trace, ref, L, tol=None):
    """Full objective at the projected iterates when f is L-Lipschitz on the
    Fejer ball: nonnegative and within the envelope plus the Lipschitz term."""
    if L < 0:
        raise ValueError("L must be nonnegative")
    tol = certificate_tolerance(trace, ref) if tol is None else tol
    _require_epsilon_window(trace, trace.epsilon)
    p, gamma, eps = trace.problem, trace.gamma, trace.epsilon
    tau = _tau_lower(trace)
    d0 = _dist0(trace, ref)
    gh_norm = float(np.linalg.norm(ref.grad_h_star))
    anchor_gap = float(np.linalg.norm(ref.z_star - ref.x_star))
    ratio = gamma / p.beta_V if np.isfinite(p.beta_V) else 0.0
    span = 2.0 * p.beta_V - gamma
    nonerg_const = (anchor_gap + (1.0 + ratio) * d0 + gamma * gh_norm) * d0 / gamma
    erg_const = (
        d0 + 4.0 * gamma * gh_norm + (1.0 + eps) * gamma * d0 / (eps**3 * span)
    ) * d0 / (2.0 * gamma)
    opt_value = ref.f_star + ref.g_star
    L0 = trace.records[0].Lambda

    ks, nonneg, up_n, up_e = [], [], [], []
    for r in trace.records:
        denom = math.sqrt(tau * (r.k + 1))
        v = r.objective_at_xh - opt_value
        xbar_h = r.erg_xh_sum / r.Lambda
        u = p.f.eval(xbar_h) + p.g.eval(xbar_h) - opt_value
        scale_n = nonerg_const + L * d0
        scale_e = (erg_const + 2.0 * L * d0) / L0
        ks.append(r.k)
        nonneg.append(max(_normalized(-v, scale_n), _normalized(-u, scale_e)))
        up_n.append(_normalized(v - (nonerg_const + L * d0) / denom, scale_n))
        up_e.append(_normalized(u - (erg_const + 2.0 * L * d0) / r.Lambda, scale_e))
    return _combine(
        "objective with Lipschitz f",
        "lipschitz-objective",
        [("nonnegativity", ks, nonneg),
         ("nonergodic_upper", ks, up_n),
         ("ergodic_upper", ks, up_e)],
        tol,
        {"L": L},
    )


def check_strong_convexity(trace, ref, tol=None):
    """Strong-convexity terms: best-iterate, ergodic and last-iterate decay."""
    tol = certificate_tolerance(trace, ref) if tol is None else tol
    _require_epsilon_window(trace, trace.epsilon)
    p, gamma, eps = trace.problem, trace.gamma, trace.epsilon
    tau = _tau_lower(trace)
    lam_low = min(r.lam for r in trace.records)
    d0_sq = _dist0(trace, ref) ** 2
    span = 2.0 * p.beta_V - gamma
    numerator = (1.0 + (1.0 + eps) * gamma / (eps**3 * span)) * d0_sq
    ratio = gamma / p.beta_V if np.isfinite(p.beta_V) else 0.0
    nonerg_const = (1.0 + ratio) * d0_sq / (2.0 * gamma)

    s_values = [
        _s_f(p, r.x_f, r.subgrad_f, ref) + _s_h(p, r.x_h, r.grad_h, ref)
        for r in trace.records
    ]
    running_min = np.minimum.accumulate(s_values)
    L0 = trace.records[0].Lambda

    ks, best, erg, nonerg = [], [], [], []
    for i, r in enumerate(trace.records):
        ks.append(r.k)
        best_bound = numerator / (4.0 * gamma * lam_low * (r.k + 1))
        best.append(
            _normalized(running_min[i] - best_bound,
                        numerator / (4.0 * gamma * lam_low))
        )
        xbar_h = r.erg_xh_sum / r.Lambda
        xbar_f = r.erg_xf_sum / r.Lambda
        erg_lhs = 0.5 * p.mu_f * float(
            np.linalg.norm(xbar_f - ref.x_star) ** 2
        ) + 0.5 * p.mu_g * float(np.linalg.norm(xbar_h - ref.x_star) ** 2)
        erg.append(
            _normalized(erg_lhs - numerator / (4.0 * gamma * r.Lambda),
                        numerator / (4.0 * gamma * L0))
        )
        nonerg.append(
            _normalized(
                s_values[i] - nonerg_const / math.sqrt(tau * (r.k + 1)),
                nonerg_const,
            )
        )
    details = _min_tail(ks, s_values)
    return _combine(
        "strong-convexity terms",
        "strong-convexity",
        [("best", ks, best), ("ergodic", ks, erg), ("nonergodic", ks, nonerg)],
        tol,
        details,
    )


def check_best_iterate_smooth(trace, ref, tol=None):
    """With smooth f: objective error at the projected iterate is nonnegative
    and summable, giving the vanishing (k+1) * min-error tail."""
    p, gamma, eps = trace.problem, trace.gamma, trace.epsilon
    if not p.beta_f > 0.0:
        raise ValueError("requires a Lipschitz-differentiable f (beta_f > 0)")
    tol = certificate_tolerance(trace, ref) if tol is None else tol
    _require_epsilon_window(trace, eps)
    a = trace.alpha
    lam_low = min(r.lam for r in trace.records)
    delta = min((1.0 - r.lam * a) / (r.lam * a) for r in trace.records)
    d0_sq = _dist0(trace, ref) ** 2
    span = 2.0 * p.beta_V - gamma
    bound = (
        (1.0 + 1.0 / delta + (1.0 + eps) * gamma / (eps * span)
         + 1.0 / (lam_low * delta))
        * d0_sq / (2.0 * gamma * lam_low)
    )
    if gamma > p.beta_f:
        bound *= 1.0 + (gamma - p.beta_f) / (2.0 * p.beta_f)
    opt_value = ref.f_star + ref.g_star
    errors = [r.objective_at_xh - opt_value for r in trace.records]
    ks = [r.k for r in trace.records]
    scale = max(bound, abs(errors[0]))
    nonneg = [_normalized(-e, scale) for e in errors]
    total = math.fsum(errors)
    summ = _normalized(total - bound, bound)
    details = _min_tail(ks, errors)
    details.update({"error_sum": total, "sum_bound": bound})
    parts = [("nonnegativity", ks, nonneg),
             ("summability", [ks[int(np.argmax(errors))]], [summ])]
    return _combine(
        "smooth best iterate", "smooth-best-iterate", parts, tol, details
    )


def check_upper_fundamental(trace, ref, tol=None):
    """Per-iteration upper inequality tying the split objective error plus the
    strong-convexity terms to the step geometry, anchored at x*."""
    tol = certificate_tolerance(trace, ref) if tol is None else tol
    p, gamma = trace.problem, trace.gamma
    opt_value = ref.f_star + ref.g_star
    scale = (_dist0(trace, ref) + float(
        np.linalg.norm(ref.z_star - ref.x_star))) ** 2
    ks, normalized = [], []
    for r1, r2 in _adjacent_pairs(trace):
        s_terms = _s_f(p, r1.x_f, r1.subgrad_f, ref) + _s_h(
            p, r1.x_h, r1.grad_h, ref
        )
        lhs = 2.0 * gamma * r1.lam * (r1.objective_split - opt_value + s_terms)
        dz = r1.z - r2.z
        rhs = (
            float(np.linalg.norm(r1.z - ref.x_star) ** 2)
            - float(np.linalg.norm(r2.z - ref.x_star) ** 2)
            + (1.0 - 2.0 / r1.lam) * float(dz @ dz)
            + 2.0 * gamma * float(r1.grad_h @ dz)
        )
        ks.append(r1.k)
        normalized.append(_normalized(lhs - rhs, scale))
    return _entry(
        "upper fundamental inequality", "upper-fundamental", ks, normalized, tol
    )


def check_lower_fundamental(trace, ref, tol=None):
    """Per-iteration lower inequality on the split objective error."""
    tol = certificate_tolerance(trace, ref) if tol is None else tol
    p = trace.problem
    opt_value = ref.f_star + ref.g_star
    d0 = _dist0(trace, ref)
    sf_norm = float(np.linalg.norm(ref.subgrad_f_star))
    scale = d0 * d0 / trace.gamma + d0 * sf_norm
    ks, normalized = [], []
    for r in trace.records:
        s_terms = _s_f(p, r.x_f, r.subgrad_f, ref) + _s_h(p, r.x_h, r.grad_h, ref)
        rhs = float((r.x_f - r.x_h) @ ref.subgrad_f_star) + s_terms
        lhs = r.objective_split - opt_value
        ks.append(r.k)
        normalized.append(_normalized(rhs - lhs, scale))
    return _entry(
        "lower fundamental inequality", "lower-fundamental", ks, normalized, tol
    )


def check_strong_fundamental(trace, ref, tol=None):
    """Per-iteration bound on the strong-convexity terms by the step geometry
    relative to the fixed point."""
    tol = certificate_tolerance(trace, ref) if tol is None else tol
    p, gamma = trace.problem, trace.gamma
    scale = _dist0(trace, ref) ** 2
    ks, normalized = [], []
    for r1, r2 in _adjacent_pairs(trace):
        s_terms = _s_f(p, r1.x_f, r1.subgrad_f, ref) + _s_h(
            p, r1.x_h, r1.grad_h, ref
        )
        lhs = 4.0 * gamma * r1.lam * s_terms
        dz = r1.z - r2.z
        rhs = (
            float(np.linalg.norm(r1.z - ref.z_star) ** 2)
            - float(np.linalg.norm(r2.z - ref.z_star) ** 2)
            + (1.0 - 2.0 / r1.lam) * float(dz @ dz)
            + 2.0 * gamma * float((r1.grad_h - ref.grad_h_star) @ dz)
        )
        ks.append(r1.k)
        normalized.append(_normalized(lhs - rhs, scale))
    return _entry(
        "strong-convexity fundamental inequality",
        "strong-fundamental",
        ks,
        normalized,
        tol,
    )


def check_smooth_fundamental(trace, ref, tol=None):
    """Per-iteration upper bound on the full objective error at the projected
    iterate when f is smooth, with the step-size case split at beta_f."""
    p, gamma = trace.problem, trace.gamma
    if not p.beta_f > 0.0:
        raise ValueError("requires a Lipschitz-differentiable f (beta_f > 0)")
    tol = certificate_tolerance(trace, ref) if tol is None else tol
    opt_value = ref.f_star + ref.g_star
    scale = _dist0(trace, ref) ** 2
    ks, normalized = [], []
    for r1, r2 in _adjacent_pairs(trace):
        lhs = 2.0 * gamma * r1.lam * (r1.objective_at_xh - opt_value)
        dz = r1.z - r2.z
        d_sq = float(np.linalg.norm(r1.z - ref.z_star) ** 2) - float(
            np.linalg.norm(r2.z - ref.z_star) ** 2
        )
        cross = 2.0 * gamma * float((r1.grad_h - ref.grad_h_star) @ dz)
        if gamma <= p.beta_f:
            rhs = (
                d_sq
                + (1.0 + (gamma - p.beta_f) / (p.beta_f * r1.lam)) * float(dz @ dz)
                + cross
            )
        else:
            factor = 1.0 + (gamma - p.beta_f) / (2.0 * p.beta_f)
            rhs = factor * (d_sq + float(dz @ dz)) + factor * cross
        ks.append(r1.k)
        normalized.append(_normalized(lhs - rhs, scale))
    return _entry(
        "smooth-f fundamental inequality", "smooth-fundamental", ks, normalized, tol
    )


def linear_contraction_factors(gamma, lam, c, mu_f, mu_g, beta_f, beta_V):
    """Per-step contraction factors (C1, C2) of the linear-rate regime.

    Requires c > 1/2, gamma < beta_V / c and lam in (0, (2c-1)/c). C1 governs
    instances with mu_g * beta_f > 0, C2 those with mu_f * beta_f > 0; a
    vanishing product degrades the corresponding factor to 1.
    """
    if not c > 0.5:
        raise ValueError(f"c must exceed 1/2, got {c}")
    if not gamma > 0.0 or not gamma < beta_V / c:
        raise ValueError(f"gamma={gamma} outside (0, beta_V/c)={beta_V / c}")
    window = (2.0 * c - 1.0) / c
    if not 0.0 < lam < window:
        raise ValueError(f"lambda={lam} outside (0, {window})")
    ratio_v = gamma / beta_V if np.isfinite(beta_V) else 0.0
    c1 = math.sqrt(
        1.0
        - (lam / 3.0)
        * min(gamma * mu_g / (1.0 + ratio_v) ** 2, beta_f / gamma, window - lam)
    )
    if beta_f > 0.0:
        first = gamma * mu_f / (1.0 + gamma / beta_f) ** 2
    else:
        first = 0.0
    span = beta_V - c * gamma if np.isfinite(beta_V) else np.inf
    c2 = math.sqrt(
        1.0 - (lam / 3.0) * min(first, span / gamma, 0.25 * (window - lam))
    )
    return c1, c2


def check_linear_convergence(trace, ref, c, tol=None):
    """Geometric decay of the distance to the fixed point at the predicted
    per-step factor, plus the unrolled product bound at the final iterate."""
    p, gamma = trace.problem, trace.gamma
    if not p.beta_f * (p.mu_f + p.mu_g) > 0.0:
        raise ValueError(
            "linear rate requires beta_f > 0 and mu_f + mu_g > 0"
        )
    tol = certificate_tolerance(trace, ref) if tol is None else tol
    d0 = _dist0(trace, ref)
    dists = [float(np.linalg.norm(r.z - ref.z_star)) for r in trace.records]
    ks, normalized = [], []
    log_product = 0.0
    for i, (r1, r2) in enumerate(_adjacent_pairs(trace)):
        c1, c2 = linear_contraction_factors(
            gamma, r1.lam, c, p.mu_f, p.mu_g, p.beta_f, p.beta_V
        )
        candidates = []
        if p.mu_g * p.beta_f > 0.0:
            candidates.append(c1)
        if p.mu_f * p.beta_f > 0.0:
            candidates.append(c2)
        factor = min(candidates)
        log_product += math.log(factor)
        ks.append(r2.k)
        normalized.append(_normalized(dists[i + 1] - factor * dists[i], d0))
    unrolled = _normalized(dists[-1] - math.exp(log_product) * d0, d0)
    details = {"final_distance": dists[-1],
               "unrolled_bound": math.exp(log_product) * d0,
               "worst_unrolled": unrolled}
    parts = [("per_step", ks, normalized),
             ("unrolled", [trace.records[-1].k], [unrolled])]
    return _combine(
        "linear contraction", "linear-contraction", parts, tol, details
    )


def run_all(trace, ref, L=None, c=None, tol=None):
    """Evaluate every certificate applicable to the problem's constants."""
    p = trace.problem
    entries = [
        check_fejer(trace, ref, tol),
        check_fpr_summability(trace, ref, tol),
        check_fpr_envelope(trace, ref, tol),
        check_gradient_sum(trace, ref, tol=tol),
        check_ergodic_objective(trace, ref, tol),
        check_nonergodic_objective(trace, ref, tol),
        check_upper_fundamental(trace, ref, tol),
        check_lower_fundamental(trace, ref, tol),
        check_strong_fundamental(trace, ref, tol),
        check_strong_convexity(trace, ref, tol),
    ]
    if L is not None:
        entries.append(check_lipschitz_objective(trace, ref, L, tol))
    if p.beta_f > 0.0:
        entries.append(check_best_iterate_smooth(trace, ref, tol))
        entries.append(check_smooth_fundamental(trace, ref, tol))
        if c is not None and p.mu_f + p.mu_g > 0.0:
            entries.append(check_linear_convergence(trace, ref, c, tol))
    return RateReport(entries)


def corrupt_trace(trace, k, mode="geometry", magnitude=None, shift=None):
    """Copy a trace with one record deliberately damaged, for negative controls.

    mode "geometry" pushes the iterate z^k outward and recomputes its step
    quantities consistently at the displaced point (including that record's
    ergodic sums); mode "objective" lowers the stored objective columns by
    ``magnitude``; mode "ergodic" adds Lambda_k * shift to the stored ergodic
    sums (xh_shift, xf_shift) = shift.
    """
    idx = trace._index[k]
    copy = type(trace)(trace.problem, trace.gamma, trace.epsilon, trace.alpha)
    copy.stopped_early = trace.stopped_early
    for r in trace.records:
        copy.append(dataclasses.replace(r))
    r = copy.records[idx]
    if mode == "geometry":
        if magnitude is None:
            raise ValueError("geometry corruption needs a magnitude")
        direction = r.z.copy()
        norm = float(np.linalg.norm(direction))
        if norm == 0.0:
            direction = np.zeros_like(r.z)
            direction[0] = 1.0
        else:
            direction /= norm
        z_bad = r.z + magnitude * direction
        step = apply_fdrs(trace.problem, z_bad, trace.gamma)
        feas = float(np.linalg.norm(step.x_f - step.x_h))
        prev = copy.records[idx - 1] if idx > 0 else None
        base_xh = prev.erg_xh_sum if prev is not None else 0.0
        base_xf = prev.erg_xf_sum if prev is not None else 0.0
        copy.records[idx] = dataclasses.replace(
            r,
            z=z_bad,
            x_h=step.x_h,
            x_f=step.x_f,
            grad_h=step.grad_h,
            subgrad_chi=step.subgrad_chi,
            subgrad_f=step.subgrad_f,
            fpr_sq=feas * feas,
            feasibility=feas,
            objective_at_xh=trace.problem.f.eval(step.x_h)
            + trace.problem.g.eval(step.x_h),
            objective_split=trace.problem.f.eval(step.x_f)
            + trace.problem.g.eval(step.x_h),
            erg_xh_sum=base_xh + r.lam * step.x_h,
            erg_xf_sum=base_xf + r.lam * step.x_f,
        )
    elif mode == "objective":
        if magnitude is None:
            raise ValueError("objective corruption needs a magnitude")
        copy.records[idx] = dataclasses.replace(
            r,
            objective_at_xh=r.objective_at_xh - magnitude,
            objective_split=r.objective_split - magnitude,
        )
    elif mode == "ergodic":
        if shift is None:
            raise ValueError("ergodic corruption needs shift=(xh_shift, xf_shift)")
        xh_shift, xf_shift = shift
        new_xh = r.erg_xh_sum + (
            r.Lambda * xh_shift if xh_shift is not None else 0.0
        )
        new_xf = r.erg_xf_sum + (
            r.Lambda * xf_shift if xf_shift is not None else 0.0
        )
        copy.records[idx] = dataclasses.replace(
            r, erg_xh_sum=new_xh, erg_xf_sum=new_xf
        )
    else:
        raise ValueError(f"unknown corruption mode {mode!r}")
    return copy
