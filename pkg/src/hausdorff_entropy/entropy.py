"""Growth tables of spanning/separated counts and entropy estimates from them."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .bowen import CountResult, Method, MetricKind, count_table
from .dynamics import Family
from .exceptions import ContractViolation, EstimationError, InvariantViolation
from .geometry import grid

MIN_SERIES_LENGTH = 4


@dataclass(frozen=True)
class GrowthRecord:
    family: str
    kind: MetricKind
    method: Method
    grid_resolution: float | tuple | None
    results: tuple[CountResult, ...]

    @property
    def epsilons(self) -> list[float]:
        return sorted({c.epsilon for c in self.results})

    def series(self, epsilon: float, count: str = "s") -> tuple[np.ndarray, np.ndarray]:
        """``(ns, counts)`` for one epsilon, ``count`` being ``"s"`` or ``"r"``."""
        rows = sorted((c for c in self.results if c.epsilon == epsilon), key=lambda c: c.n)
        ns = np.array([c.n for c in rows])
        vals = np.array([c.s if count == "s" else c.r for c in rows])
        return ns, vals


def growth_table(family: Family, n_values: Sequence[int], epsilons: Sequence[float],
                 kind=MetricKind.HAUSDORFF_BOWEN, method=Method.GREEDY,
                 grid_resolution=None, candidates=None) -> GrowthRecord:
    """Counts on every ``(n, eps)`` over a grid (or explicit candidates).

    With a grid, its resolution must be at most ``min(epsilons) / 4``.
    """
    eps = [float(e) for e in epsilons]
    if not eps:
        raise ContractViolation("need at least one epsilon")
    if candidates is None:
        if grid_resolution is None:
            raise ContractViolation("pass either grid_resolution or candidates")
        if np.max(grid_resolution) > min(eps) / 4 + 1e-15:
            raise ContractViolation(
                f"grid resolution {grid_resolution} exceeds min(epsilon)/4 = {min(eps) / 4}"
            )
        candidates = grid(family.space, grid_resolution)
    results = count_table(family, candidates, sorted(set(int(n) for n in n_values)), eps, kind, method)
    res = grid_resolution if not isinstance(grid_resolution, (list, np.ndarray)) else tuple(grid_resolution)
    return GrowthRecord(family.name, MetricKind(kind), Method(method), res, tuple(results))


@dataclass(frozen=True)
class EntropyEstimate:
    slopes: dict[float, float]
    headline: float
    count: str
    windows: dict[float, tuple[int, int]]
    residuals: dict[float, float]
    running_ratios: dict[float, float]
    monotone_in_epsilon: bool
    plateaued: dict[float, bool] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {
            "headline": self.headline,
            "count": self.count,
            "slopes": {repr(e): v for e, v in self.slopes.items()},
            "windows": {repr(e): list(w) for e, w in self.windows.items()},
            "fit_residuals": {repr(e): v for e, v in self.residuals.items()},
            "running_ratios": {repr(e): v for e, v in self.running_ratios.items()},
            "monotone_in_epsilon": self.monotone_in_epsilon,
            "plateaued": {repr(e): v for e, v in self.plateaued.items()},
        }


def tail_slope(ns, counts, tail_fraction: float = 0.5) -> tuple[float, tuple[int, int], float]:
    """Least-squares slope of ``log count`` against ``n`` over the final part of the range.

    Returns ``(slope, (n_first, n_last), rms_residual)``.  A constant tail
    has slope exactly 0.
    """
    ns = np.asarray(ns, dtype=float)
    counts = np.asarray(counts, dtype=float)
    if len(ns) < MIN_SERIES_LENGTH:
        raise EstimationError(f"need at least {MIN_SERIES_LENGTH} n-values, got {len(ns)}")
    if np.any(counts <= 0):
        raise EstimationError("counts must be positive")
    start = min(len(ns) - 2, int(math.floor(len(ns) * (1.0 - tail_fraction))))
    x, y = ns[start:], np.log(counts[start:])
    window = (int(x[0]), int(x[-1]))
    if np.all(y == y[0]):
        return 0.0, window, 0.0
    slope, intercept = np.polyfit(x, y, 1)
    resid = float(np.sqrt(np.mean((y - (slope * x + intercept)) ** 2)))
    return float(slope), window, resid


def estimate_entropy(record: GrowthRecord, count: str = "s", tail_fraction: float = 0.5,
                     tolerance: float = 0.05) -> EntropyEstimate:
    """Per-epsilon growth rates of the counts; the headline is the rate at the smallest epsilon.

    Separated counts are the default estimator.  ``monotone_in_epsilon``
    is ``False`` when a smaller epsilon gives a rate lower than a larger
    one by more than ``tolerance``.
    """
    slopes, windows, residuals, ratios, plateaued = {}, {}, {}, {}, {}
    for eps in record.epsilons:
        ns, vals = record.series(eps, count)
        slope, window, resid = tail_slope(ns, vals, tail_fraction)
        slopes[eps], windows[eps], residuals[eps] = slope, window, resid
        tail = ns >= window[0]
        positive = tail & (ns > 0)
        ratios[eps] = float(np.max(np.log(vals[positive]) / ns[positive])) if positive.any() else 0.0
        plateaued[eps] = bool(vals[-1] == vals[-2] and vals[-1] > vals[0])
    ordered = [slopes[e] for e in sorted(slopes)]
    monotone = all(a >= b - tolerance for a, b in zip(ordered, ordered[1:]))
    headline = slopes[min(slopes)]
    if headline < -tolerance:
        raise InvariantViolation(f"headline growth rate {headline:.4g} is negative beyond tolerance {tolerance}")
    return EntropyEstimate(slopes, headline, count, windows, residuals, ratios, monotone, plateaued)


@dataclass(frozen=True)
class ComparisonReport:
    family: str
    hausdorff: EntropyEstimate
    bis: EntropyEstimate
    singles: tuple[EntropyEstimate, ...]
    tolerance: float

    @property
    def h_hausdorff(self) -> float:
        return self.hausdorff.headline

    @property
    def h_bis(self) -> float:
        return self.bis.headline

    @property
    def max_single(self) -> float:
        return max(s.headline for s in self.singles)

    @property
    def hausdorff_le_bis(self) -> bool:
        return self.h_hausdorff <= self.h_bis + self.tolerance

    @property
    def bis_ge_max_single(self) -> bool:
        return self.h_bis >= self.max_single - self.tolerance

    def to_dict(self) -> dict:
        return {
            "family": self.family,
            "h_hausdorff": self.h_hausdorff,
            "h_bis": self.h_bis,
            "h_singles": [s.headline for s in self.singles],
            "max_single": self.max_single,
            "hausdorff_le_bis": self.hausdorff_le_bis,
            "bis_ge_max_single": self.bis_ge_max_single,
            "tolerance": self.tolerance,
        }


def compare_entropies(family: Family, n_values: Sequence[int], epsilons: Sequence[float],
                      grid_resolution=None, candidates=None, method=Method.GREEDY,
                      tolerance: float = 0.05) -> tuple[ComparisonReport, list[GrowthRecord]]:
    """Estimate the Hausdorff, Bis and single-map entropies on the same candidates."""
    records = [growth_table(family, n_values, epsilons, kind, method, grid_resolution, candidates)
               for kind in (MetricKind.HAUSDORFF_BOWEN, MetricKind.BIS_MAX)]
    singles = [growth_table(g, n_values, epsilons, MetricKind.HAUSDORFF_BOWEN, method,
                            grid_resolution, candidates) for g in family.singletons()]
    estimates = [estimate_entropy(r) for r in records + singles]
    report = ComparisonReport(family.name, estimates[0], estimates[1], tuple(estimates[2:]), tolerance)
    return report, records + singles
