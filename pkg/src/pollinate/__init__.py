"""Cross-platform social-media traffic: trip simulation, expected trip time,
advertising revenue indices and media-length preference dynamics."""

__version__ = "0.1.0"

from .errors import PollinateError
from .expectation import (
    ExpectationResult,
    SensitivityResult,
    compare_evaluators,
    enumerate_trips,
    expected_time_collapsed,
    expected_time_recursive,
    finite_difference_sensitivity,
    marginal_sensitivity,
)
from .heterogeneity import (
    EngagementProfile,
    convergence_sim,
    engagement,
    exposure_update,
    median_media_length,
)
from .landscape import (
    ContinuationSchedule,
    Landscape,
    OsmPlatform,
    Personality,
    PoolConfig,
    continuation_probability,
    hop_distribution,
    landing_distribution,
    scenario_s1,
    validate_landscape,
)
from .revenue import (
    RevenueParams,
    compute_revenue_table,
    depth_chart_data,
    ingest_usage_csv,
    pollination_uplift,
    uplift_dominance_check,
)
from .trips import TrafficReport, TripRecord, run_monte_carlo, run_pool_comparison, sample_trip
