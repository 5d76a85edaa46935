"""Cover times of random coverage processes on metric spaces.

Fixed-radius and growth coverage models, certified geometric quantities,
closed-form variance and mean bounds with empirical checks, a finite
random-subset harness, the circle clumping-heuristic pipeline, and a
config-driven experiment runner.
"""

__version__ = "0.1.0"

from .spaces import (  # noqa: E402
    Circle,
    FiniteMetric,
    FlatTorus,
    MetricGraph,
    SeedDistribution,
    Segment,
    covering_number,
    dimension_d,
    epsilon_net,
    eta,
)
from .fixed_radius import FixedRadiusConfig, simulate_cover_count  # noqa: E402
from .growth import GrowthParams, c_star, cover_time_exact, simulate_realization  # noqa: E402

__all__ = [
    "Circle",
    "FiniteMetric",
    "FixedRadiusConfig",
    "FlatTorus",
    "GrowthParams",
    "MetricGraph",
    "SeedDistribution",
    "Segment",
    "c_star",
    "cover_time_exact",
    "covering_number",
    "dimension_d",
    "epsilon_net",
    "eta",
    "simulate_cover_count",
    "simulate_realization",
    "__version__",
]
