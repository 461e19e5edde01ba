"""Averaged-operator calculus and the splitting operator itself.

The core iteration map is

    T = ((1/2) I + (1/2) refl_{gamma f} o refl_V) o (I - gamma P_V grad g P_V)

for minimizing f + g over a closed subspace V with smooth g. ``apply_fdrs``
evaluates one application of T and extracts every auxiliary quantity the
certificate engine consumes: the projected point x_h, the prox output x_f,
and the three (sub)gradients that tie them together.
"""

from dataclasses import dataclass

import numpy as np

from .functions import _as_vector


@dataclass(frozen=True)
class FdrsStep:
    """One operator application with its extracted quantities.

    With w := z - x_h the component of z orthogonal to V:
      x_h = P_V z,
      subgrad_chi = w / gamma          (a normal-cone element at x_h),
      grad_h = P_V grad g (x_h),
      x_f = prox_{gamma f}(2 x_h - z - gamma grad_h),
      subgrad_f = prox optimality residual at x_f,
      z_next = x_f + w = T z.
    These satisfy x_f = x_h - gamma (subgrad_chi + grad_h + subgrad_f) and
    T z - z = x_f - x_h up to roundoff.
    """

    z_next: np.ndarray
    x_h: np.ndarray
    x_f: np.ndarray
    subgrad_chi: np.ndarray
    grad_h: np.ndarray
    subgrad_f: np.ndarray


class SplitProblem:
    """The data (f, g, V) plus the regularity constants of the composition.

    ``beta`` is the reciprocal Lipschitz constant of grad g and ``beta_V``
    the (never smaller) reciprocal Lipschitz constant of grad(g o P_V), which
    is what actually limits the step size. If ``beta_V`` is not supplied it
    falls back to ``beta``; a sharper value can be estimated spectrally for
    quadratic g (see :mod:`fdrs.spectral`) and passed in. Instances are
    read-only and shareable across concurrent solves.
    """

    def __init__(self, f, g, V, beta=None, beta_V=None):
        if not getattr(g, "smooth", False):
            raise ValueError("g must be a smooth descriptor (gradient available)")
        if f.dim != g.dim or f.dim != V.dim:
            raise ValueError(
                f"dimension mismatch: f={f.dim}, g={g.dim}, V={V.dim}"
            )
        self.f = f
        self.g = g
        self.V = V
        self.dim = f.dim
        if beta is None:
            beta = g.beta if g.beta > 0.0 else np.inf
        if not beta > 0.0:
            raise ValueError(f"beta must be positive, got {beta}")
        if beta_V is None:
            beta_V = beta
        if beta_V < beta * (1.0 - 1e-9):
            raise ValueError(f"beta_V={beta_V} below beta={beta}")
        self.beta = float(beta)
        self.beta_V = float(max(beta_V, beta))
        self.mu_f = float(f.mu)
        self.mu_g = float(g.mu)
        self.beta_f = float(f.beta)

    def grad_h(self, x):
        """Gradient of h = g o P_V at x, i.e. P_V grad g (P_V x)."""
        return self.V.project(self.g.grad(self.V.project(x)))

    def eval_h(self, x):
        """Value of h = g o P_V at x."""
        return self.g.eval(self.V.project(x))


def averaged_composition_coefficient(a1, a2):
    """Averagedness parameter of the composition of a1- and a2-averaged maps."""
    if not (0.0 < a1 < 1.0 and 0.0 < a2 < 1.0):
        raise ValueError(f"averagedness parameters must lie in (0,1), got {a1}, {a2}")
    return (a1 + a2 - 2.0 * a1 * a2) / (1.0 - a1 * a2)


def alpha_fdrs(gamma, beta_V):
    """Averagedness parameter 2 beta_V / (4 beta_V - gamma) of the iteration map.

    Requires 0 < gamma < 2 beta_V. For beta_V = inf (g with constant
    gradient) the limit 1/2 is returned.
    """
    if not gamma > 0.0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    if np.isinf(beta_V):
        return 0.5
    if not gamma < 2.0 * beta_V:
        raise ValueError(f"gamma={gamma} not below 2*beta_V={2.0 * beta_V}")
    return 2.0 * beta_V / (4.0 * beta_V - gamma)


def apply_fdrs(p, z, gamma):
    """Apply the splitting operator once and extract all step quantities.

    The projected gradient is computed as P_V(grad g(x_h)), reusing x_h so
    each application costs two projections, one gradient and one prox. The
    reflection of z - gamma grad_h across V simplifies to
    2 x_h - z - gamma grad_h because grad_h already lies in V.
    """
    if not gamma > 0.0:
        raise ValueError(f"gamma must be positive, got {gamma}")
    z = _as_vector(z, p.dim, "z")
    x_h = p.V.project(z)
    w = z - x_h
    subgrad_chi = w / gamma
    grad_h = p.V.project(p.g.grad(x_h))
    reflected = (x_h - gamma * grad_h) - w
    x_f = p.f.prox(reflected, gamma)
    subgrad_f = (reflected - x_f) / gamma
    z_next = x_f + w
    return FdrsStep(
        z_next=z_next,
        x_h=x_h,
        x_f=x_f,
        subgrad_chi=subgrad_chi,
        grad_h=grad_h,
        subgrad_f=subgrad_f,
    )


def relax(z, tz, lam):
    """Relaxed update (1 - lam) z + lam tz."""
    return (1.0 - lam) * z + lam * tz


def fixed_point_from_minimizer(p, x_star, subgrad_chi_star, gamma):
    """Assemble the fixed point z* = x* + gamma * subgrad_chi_star.

    ``x_star`` must lie in V and ``subgrad_chi_star`` in its complement, with
    some subgradient of f at x_star closing the optimality identity
    subgrad_f + grad_h(x*) + subgrad_chi_star = 0. That premise is verified a
    posteriori through the fixed-point residual; a failing residual means the
    supplied triple is not optimal.
    """
    x_star = _as_vector(x_star, p.dim, "x_star")
    subgrad_chi_star = _as_vector(subgrad_chi_star, p.dim, "subgrad_chi_star")
    z_star = x_star + gamma * subgrad_chi_star
    step = apply_fdrs(p, z_star, gamma)
    residual = float(np.linalg.norm(step.z_next - z_star))
    if residual > 1e-10 * (1.0 + float(np.linalg.norm(z_star))):
        raise ValueError(
            f"provided point is not a fixed point (residual {residual:.3e})"
        )
    return z_star
