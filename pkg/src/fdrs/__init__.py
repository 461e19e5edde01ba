"""Forward-Douglas-Rachford splitting over a subspace, with rate certificates.

Minimizes f(x) + g(x) over a closed vector subspace V, where f has an easy
prox, g is smooth, and V has an exact projector. Alongside the solver the
package ships a certificate engine that numerically verifies the proved
convergence-rate inequalities on recorded runs, spectral estimation of the
composed smoothness constant that widens the step-size window, slow-instance
constructions showing the rates are unimprovable, and the equivalent
primal-dual recursion.
"""

from .functions import (
    BoxIndicator,
    ConvexFunction,
    Quadratic,
    ShiftedScaledSqNorm,
    SubspacePlusScaledSqNorm,
    Zero,
)
from .subspace import (
    BlockRotation,
    DiagonalOfProduct,
    NullSpace,
    Span,
    Subspace,
    affine_reduction,
    rotation_projector_block,
)
from .operators import (
    FdrsStep,
    SplitProblem,
    alpha_fdrs,
    apply_fdrs,
    averaged_composition_coefficient,
    fixed_point_from_minimizer,
    relax,
)
from .solver import (
    ConstantSchedule,
    EpsilonWindowSchedule,
    IterationTrace,
    SequenceSchedule,
    SolveConfig,
    default_gamma,
    epsilon_window_cap,
    reference_fixed_point,
    run,
)
from .spectral import SpectralEstimate, estimate_betas, power_method
from .certificates import (
    CertificateEntry,
    RateReport,
    ReferenceSolution,
    certificate_tolerance,
    corrupt_trace,
    linear_contraction_factors,
    run_all,
)
from .counterexamples import (
    RotationInstance,
    SlowSchedule,
    arbitrarily_slow_instance,
    block_eigenvector,
    build_slow_schedule,
    fdrs_block_matrix,
    rotation_instance,
    run_norm_history,
    sublinear_instance,
    truncation_deficit,
)
from .primal_dual import PdState, equivalence_check, pd_init_from_fdrs, run_pd

__version__ = "0.1.0"
