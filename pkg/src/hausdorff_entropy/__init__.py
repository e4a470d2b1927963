"""Hausdorff metric entropy of finitely generated semigroups of maps.

Orbit sets ``F^n(x)`` live in the hyperspace of finite subsets and are
compared with the Hausdorff metric.  Growth of separated and spanning
sets under the resulting Bowen-type metric gives the entropy estimate.
"""

from .bowen import CountResult, Method, MetricKind, count_table, dhn, dmaxn, exact_counts, greedy_separated, greedy_spanning
from .chaos import ChaosThresholds, classify_pair, distributional_profile, pair_series
from .dynamics import Family, builtin_family, orbit_set, power_family, product_family, witness_points
from .entropy import compare_entropies, estimate_entropy, growth_table
from .estimators import ChaosPairClassifier, HausdorffEntropyEstimator
from .exceptions import ContractViolation, EstimationError, InvariantViolation, SizeLimitError
from .geometry import CIRCLE, INTERVAL, SpaceSpec, distance, grid
from .pointset import FiniteSet, coalesce, directed_dist, hausdorff, product_set

__all__ = [
    "CIRCLE", "INTERVAL", "ChaosPairClassifier", "ChaosThresholds", "ContractViolation", "CountResult",
    "EstimationError", "Family", "FiniteSet", "HausdorffEntropyEstimator", "InvariantViolation", "Method",
    "MetricKind", "SizeLimitError", "SpaceSpec", "builtin_family", "classify_pair", "coalesce",
    "compare_entropies", "count_table", "dhn", "directed_dist", "distance", "distributional_profile",
    "dmaxn", "estimate_entropy", "exact_counts", "greedy_separated", "greedy_spanning", "grid",
    "growth_table", "hausdorff", "orbit_set", "pair_series", "power_family", "product_family",
    "product_set", "witness_points",
]
