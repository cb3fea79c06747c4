"""sdestab: strong-stability machinery for nonlinear SDEs.

Generator/extended-generator evaluation, Lyapunov-type exponential-moment
bounds, Lipschitz-in-initial-value bound calculators, a coupled two-solution
Monte Carlo engine, and a zoo of example models with certified constants.
"""
from .core import (
    BoundCertificate,
    BoundQuery,
    DomainSpec,
    McConfig,
    NoCertificate,
    PairField,
    ScalarField,
    SdeModel,
    fd_consistency,
    quadratic_field,
    squared_distance_pair,
    validate_model,
)
from .operators import OperatorValues, PhiMap, apply_extended, apply_operators, power_norm_ratios
from .bounds import (
    lyapunov_check,
    exp_moment_bound_rhs,
    exp_moment_bound_rhs_shifted,
    martingale_sup_bound,
    martingale_sup_bound_2p,
    minmax_theta,
    moment_bound_lyapunov,
    monotonicity_sup,
    thm_uv_bound,
    uniform_bound,
    uniform_bound_query,
    cor_uv3_bound,
    UniformTerm,
)
from .simulate import (
    NoiseSource,
    PathPair,
    Transform,
    coupled_pair,
    integrate,
    pathwise_identity_residual,
    rode_blowup,
)
from .estimate import McEstimate, empirical_lipschitz, exp_moment_estimate, lp_norm, verify_certificate
from .modelzoo import ZooEntry, build_model, certificate, feller_boundary, make_counterexample
from .burgers import GalerkinModel, burgers_certificate, galerkin_model

__version__ = "0.1.0"
