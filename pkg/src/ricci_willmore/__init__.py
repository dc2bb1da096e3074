"""Numerical checks of Willmore-type inequalities on rotationally symmetric models."""

__version__ = "0.1.0"

from .errors import (
    AdmissibilityError,
    ConfigurationError,
    DomainError,
    PreconditionError,
    RangeError,
    UnsupportedProfileError,
)
from .lemma31 import Lemma31Params, constant_C, critical_point, numerical_sup, vanishing_limit, verify_pointwise
from .manifold import (
    GeodesicBallDomain,
    RotSymManifold,
    boundary_mean_curvature,
    lp_norm_rho,
    rho_at,
    ricci_extremes,
    sphere_volume_constant,
    tube_volume_log,
    verify_curvature_bound,
)
from .ode import (
    OdeSolution,
    check_lemma21,
    check_lemma22,
    focal_bound_check,
    psi_zero_crossing,
    solve_psi_pair,
    wronskian,
)
from .profiles import DecayProfile, eval_lambda, mass_along_geodesic, total_mass
from .tube import (
    TubeEvolution,
    cnp_constant,
    det_upper_bound,
    evolve_riccati_free,
    evolve_tube,
    hyperbolic_comparators,
    verify_jacobian_comparison,
    verify_lp_mean_comparison,
)
from .willmore import (
    WillmoreReport,
    compose_thm12_constant,
    estimate_rv,
    thm11_rhs,
    verify_thm11,
    verify_thm12,
)
