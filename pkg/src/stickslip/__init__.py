"""Stochastic dynamics near smoothed switching surfaces.

Occupation probabilities for sliding regions and mean escape times for
crossing regions of a piecewise-smooth system whose discontinuity has been
smoothed over a thin layer and perturbed by white noise — each computed
exactly (log-space quadrature), asymptotically (Laplace method with a
Stokes multiplier), and by seeded Monte-Carlo simulation. The dry-friction
oscillator ships as the worked application.
"""

from .core import (
    ContinuityReport,
    NoiseRegime,
    NoiseSpec,
    PiecewisePotential,
    PiecewiseSystem,
    ReducedSystem,
    RegionKind,
    SmoothedSystem,
    classify,
    continuity_check,
    filippov_sliding_field,
    make_potential,
    potential_eval,
    reduce_system,
)
from .errors import (
    BadScales,
    DegenerateWell,
    NotCrossing,
    NotNormalizable,
    NotSliding,
    PreconditionError,
    QuadratureFailure,
    StickslipError,
)
from .escape import (
    EscapeResult,
    WellAnalysis,
    escape_C,
    escape_pipeline,
    escape_time_asymptotic,
    escape_time_exact,
    turning_points,
)
from .friction import (
    BreakawayInfo,
    FrictionParams,
    FrictionRegion,
    ScanRow,
    breakaway,
    friction_force,
    oscillator_system,
    reduced_from_friction,
    region_map,
    scan_escape_times,
)
from .mc import (
    McConfig,
    McEstimate,
    SamplePath,
    default_config,
    mc_escape_time,
    mc_occupation,
    simulate_full,
    simulate_reduced,
)
from .presets import PRESETS, get_preset, reduced_from_poly
from .quadrature import QuadratureOptions
from .steady_state import (
    OccupationResult,
    StationaryDensity,
    occupation_probability_asymptotic,
    occupation_probability_exact,
    stationary_density,
)

__version__ = "0.1.0"

__all__ = [
    "BadScales",
    "BreakawayInfo",
    "ContinuityReport",
    "DegenerateWell",
    "EscapeResult",
    "FrictionParams",
    "FrictionRegion",
    "McConfig",
    "McEstimate",
    "NoiseRegime",
    "NoiseSpec",
    "NotCrossing",
    "NotNormalizable",
    "NotSliding",
    "OccupationResult",
    "PRESETS",
    "PiecewisePotential",
    "PiecewiseSystem",
    "PreconditionError",
    "QuadratureFailure",
    "QuadratureOptions",
    "ReducedSystem",
    "RegionKind",
    "SamplePath",
    "ScanRow",
    "SmoothedSystem",
    "StationaryDensity",
    "StickslipError",
    "WellAnalysis",
    "breakaway",
    "classify",
    "continuity_check",
    "default_config",
    "escape_C",
    "escape_pipeline",
    "escape_time_asymptotic",
    "escape_time_exact",
    "filippov_sliding_field",
    "friction_force",
    "get_preset",
    "make_potential",
    "mc_escape_time",
    "mc_occupation",
    "occupation_probability_asymptotic",
    "occupation_probability_exact",
    "oscillator_system",
    "potential_eval",
    "reduce_system",
    "reduced_from_friction",
    "reduced_from_poly",
    "region_map",
    "scan_escape_times",
    "simulate_full",
    "simulate_reduced",
    "stationary_density",
    "turning_points",
    "__version__",
]
