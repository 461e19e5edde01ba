"""Dominant-eigenvalue estimation for step-size constants.

For quadratic g the smoothness constants are 1/beta = lambda_max(Q) and
1/beta_V = lambda_max(P_V Q P_V); the second is often far smaller, which is
what permits the larger step sizes. Only the dominant eigenvalue is needed,
so plain power iteration suffices.
"""

import warnings
from dataclasses import dataclass

import numpy as np


@dataclass(frozen=True)
class SpectralEstimate:
    value: float
    iterations: int
    residual: float


def power_method(apply, dim, tol=1e-10, max_iter=10000, seed=42, history=None):
    """Dominant eigenvalue of a symmetric PSD linear map.

    ``apply`` maps a vector to M v. Iterates until the relative eigenpair
    residual ||M v - theta v|| / theta falls to ``tol``; deterministic for a
    fixed seed. For PSD maps the Rayleigh quotients are nondecreasing, so a
    stall means the residual criterion, not oscillation. Raises on
    non-convergence; a map that annihilates the start vector is reported as
    eigenvalue 0. Pass a list as ``history`` to collect the Rayleigh
    quotients.
    """
    rng = np.random.default_rng(seed)
    v = rng.standard_normal(dim)
    v /= np.linalg.norm(v)
    theta = 0.0
    for it in range(1, max_iter + 1):
        w = apply(v)
        theta = float(v @ w)
        if history is not None:
            history.append(theta)
        norm_w = float(np.linalg.norm(w))
        if norm_w <= 1e-300:
            return SpectralEstimate(value=0.0, iterations=it, residual=0.0)
        residual = float(np.linalg.norm(w - theta * v))
        if theta > 0.0 and residual <= tol * theta:
            return SpectralEstimate(value=theta, iterations=it, residual=residual / theta)
        v = w / norm_w
    raise RuntimeError(
        f"power iteration did not reach tolerance {tol} in {max_iter} steps "
        f"(last value {theta})"
    )


def estimate_betas(Q, V, tol=1e-10, max_iter=10000, seed=42):
    """Estimate (beta, beta_V) = (1/lambda_max(Q), 1/lambda_max(P_V Q P_V)).

    When Q vanishes on V the composed map has no curvature; beta_V = inf is
    returned with a warning and the caller must cap the step size itself.
    The pair is checked against beta_V >= beta (1 - tol), which holds for any
    orthogonal projection.
    """
    Q = np.asarray(Q, dtype=float)
    dim = Q.shape[0]
    est_q = power_method(lambda v: Q @ v, dim, tol=tol, max_iter=max_iter, seed=seed)
    est_pqp = power_method(
        lambda v: V.project(Q @ V.project(v)),
        dim,
        tol=tol,
        max_iter=max_iter,
        seed=seed,
    )
    beta = 1.0 / est_q.value if est_q.value > 0.0 else np.inf
    if est_pqp.value > 0.0:
        beta_V = 1.0 / est_pqp.value
    else:
        warnings.warn(
            "Q vanishes on V: beta_V is unbounded and gamma is unconstrained "
            "by smoothness; cap it explicitly",
            RuntimeWarning,
        )
        beta_V = np.inf
    if beta_V < beta * (1.0 - tol):
        raise RuntimeError(
            f"estimated beta_V={beta_V} fell below beta={beta}; tighten tol"
        )
    return beta, beta_V
