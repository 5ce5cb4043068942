"""Radial three-layer tumor growth: profiles, free boundaries, dynamics.

A tumor is a ball whose nutrient concentration solves a radial
reaction-diffusion equation with consumption switching between a
proliferating shell, a quiescent layer and a necrotic core at two threshold
concentrations.  The package reconstructs the nutrient profile and its
internal free boundaries for any tumor radius, locates the critical radii and
critical external-supply values, classifies stationary (dormant) states, and
integrates the tumor-radius evolution with detection of structural
transitions.
"""

from .errors import (
    AssumptionViolated,
    BelowCriticalRadius,
    BelowEtaStar,
    BracketNotFound,
    CapExceeded,
    IntegrationError,
    NegativeConcentration,
    NonFinite,
    NonMonotoneTarget,
    NonPositiveEta,
    NonPositiveInputs,
    OutOfRange,
    SigmaBelowQuiescent,
    TrilayerError,
)
from .evolution import (
    StructureState,
    Terminal,
    Trajectory,
    TrajectorySample,
    TransitionEvent,
    classify_structure,
    evolve,
    radius_rhs,
    transition_times,
)
from .interfaces import (
    InterfaceGeometry,
    Layer,
    RadialProfile,
    R_of_eta,
    R_q_star,
    R_star,
    R_sub_star,
    assemble_profile,
    clear_cache,
    eta_of_R,
    eta_of_rho,
    eta_star,
    interface_flux,
    rho_of_eta,
    set_cache_enabled,
)
from .model import (
    LinearRates,
    ModelConfig,
    RateTriple,
    Thresholds,
    ValidatedConfig,
    canonical_config,
    eval_rate,
    load_config,
    validate_config,
)
from .radial import (
    RadialSolution,
    StopCondition,
    StopReason,
    closed_form_linear_annulus,
    closed_form_linear_annulus_slope,
    closed_form_linear_center,
    closed_form_linear_center_slope,
    flux_at,
    integrate_radial,
    until_radius,
    until_value,
)
from .stationary import (
    CriticalValues,
    Fcal_functional,
    G_functional,
    StationaryState,
    critical_values,
    growth_functional,
    stationary_solution,
)

__version__ = "0.1.0"
