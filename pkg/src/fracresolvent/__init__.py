"""Resolvent families for multivalued operators and their inverses."""

from . import errors
from .errors import *  # noqa: F401,F403
from .kernels import (
    Kernel,
    SubordinationSpec,
    bessel_spec,
    convolve,
    estimate_abscissa,
    make_composite,
    make_power,
    make_rational,
    make_sampled,
    symbol,
    transform_pair,
    wright_spec,
)
from .laplace import (
    ContourSpec,
    ExpRegion,
    contour_nodes,
    exp_region_check,
    forward_transform,
    invert,
    verify_bessel_identity,
    verify_wright_identity,
)
from .mlo import (
    MloGraph,
    Regularizer,
    closure_identity_check,
    compose,
    from_matrix,
    from_pencil,
    graph_distance,
    includes,
    inverse,
    parts,
    prop_lav_check,
    resolvent_batch,
    resolvent_c,
    resolvent_chain_check,
    same_subspace,
    sector_bound_check,
)
from .multiplier import (
    DfpProblem,
    MultiplierSymbol,
    PolySymbol,
    TorusGrid,
    apply_multiplier,
    default_gamma,
    dfp_residual,
    fit_growth_exponent,
    multiplier_norm,
    poisson_wave_demo,
    poisson_wave_operator,
    regularizer_symbol,
    s_alpha_symbol,
    solve_dfp,
    spectral_condition,
    symbol_zeros,
)
from .resolvent import (
    Growth,
    OperatorFamily,
    WeightSpec,
    bessel_subordinate,
    commutation_residual,
    compare_integration_orders,
    construct_family,
    contour_family,
    family_to_csv,
    growth_estimate,
    subgenerator_inclusion_residual,
    subordinate_general,
    verify_existence_eq,
    verify_inverse_laplace_conditions,
    verify_uniqueness_eq,
    wright_subordinate,
)
from .specfun import (
    SampledFunction,
    bessel_j,
    caputo_derivative,
    g_kernel,
    gamma_fn,
    mittag_leffler,
    wright_phi,
    wright_phi_negative,
)

__version__ = "0.1.0"
