"""Mobility modeling toolkit: random-waypoint trips with lognormal transition
lengths and Gaussian-mixture speeds, closed-form cellular handoff-rate
predictions, exact Monte Carlo handoff counting over Poisson deployments, and
maximum-likelihood fitting of candidate length laws.
"""

from ._kernels import backend
from .fitting import (
    ALL_FAMILIES,
    EmpiricalCdf,
    Family,
    FitError,
    FitResult,
    empirical_cdf,
    family_names,
    fit_mle,
    get_family,
    rank_fits,
    rmse_cdf,
)
from .geometry import (
    Deployment,
    Region,
    boundary_length_intensity,
    count_handoffs,
    count_handoffs_batch,
    generate_ppp,
    nearest_site,
)
from .montecarlo import (
    HandoffStats,
    LognormalMixtureProfile,
    PppWaypointProfile,
    ReplayProfile,
    SimConfig,
    empirical_rate,
    rate_stderr,
    replay_trips,
    run_simulation,
)
from .presets import PRESETS, CityPreset, get_preset, preset_names
from .theory import (
    DEFAULT_QUADRATURE,
    QuadratureSpec,
    TheoryInputs,
    duration_cdf,
    duration_pdf,
    duration_quantile,
    expected_duration,
    expected_handoffs,
    handoff_rate,
    literature_length_sampler,
    literature_waypoint_density,
    mean_abs_sin,
)
from .traces import (
    EARTH_RADIUS_M,
    CorpusSummary,
    RouteTrace,
    SubSegment,
    TraceParseError,
    Transition,
    TransitionSample,
    corpus_statistics,
    geodesic_distance,
    parse_trace_file,
    reduce_transition,
    serialize_traces,
    transition_from_steps,
    trip_to_trace,
)
from .trips import (
    DURATION_FIRST,
    LENGTH_FIRST,
    BearingModel,
    LengthModel,
    Trip,
    VelocityMixture,
    generate_trip,
)

__version__ = "0.1.0"

__all__ = [
    "__version__",
    "backend",
    # trip model
    "LengthModel",
    "VelocityMixture",
    "BearingModel",
    "Trip",
    "generate_trip",
    "LENGTH_FIRST",
    "DURATION_FIRST",
    # presets
    "CityPreset",
    "PRESETS",
    "get_preset",
    "preset_names",
    # geometry
    "Region",
    "Deployment",
    "generate_ppp",
    "nearest_site",
    "count_handoffs",
    "count_handoffs_batch",
    "boundary_length_intensity",
    # theory
    "QuadratureSpec",
    "DEFAULT_QUADRATURE",
    "TheoryInputs",
    "duration_pdf",
    "duration_cdf",
    "duration_quantile",
    "expected_duration",
    "expected_handoffs",
    "handoff_rate",
    "mean_abs_sin",
    "literature_waypoint_density",
    "literature_length_sampler",
    # fitting
    "Family",
    "FitResult",
    "FitError",
    "EmpiricalCdf",
    "ALL_FAMILIES",
    "get_family",
    "family_names",
    "fit_mle",
    "empirical_cdf",
    "rmse_cdf",
    "rank_fits",
    # traces
    "EARTH_RADIUS_M",
    "SubSegment",
    "Transition",
    "RouteTrace",
    "TransitionSample",
    "CorpusSummary",
    "TraceParseError",
    "parse_trace_file",
    "serialize_traces",
    "reduce_transition",
    "geodesic_distance",
    "corpus_statistics",
    "transition_from_steps",
    "trip_to_trace",
    # montecarlo
    "LognormalMixtureProfile",
    "PppWaypointProfile",
    "ReplayProfile",
    "SimConfig",
    "HandoffStats",
    "run_simulation",
    "replay_trips",
    "empirical_rate",
    "rate_stderr",
]
