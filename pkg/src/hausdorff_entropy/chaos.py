"""Li-Yorke and distributional chaos evidence from orbit-set distance series.

Everything here is a finite-horizon surrogate for asymptotic notions:
limsup/liminf become extremes over the final half of the series, and
the thresholds that decide "positive" and "zero" are explicit
parameters.  Classifications are numerical evidence only.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .dynamics import DEFAULT_SET_CAP, Family, iterate_orbit_sets
from .exceptions import ContractViolation, EstimationError
from .pointset import hausdorff_batch

MIN_PROFILE_LENGTH = 100

HDC1, HDC2, DC3 = "HDC1", "HDC2", "DC3"
NUMERICAL_EVIDENCE = "numerical evidence"


@dataclass(frozen=True)
class PairSeries:
    x: np.ndarray
    y: np.ndarray
    D: np.ndarray

    def __len__(self):
        return len(self.D)


@dataclass(frozen=True)
class DistributionalProfile:
    t_grid: np.ndarray
    phi_lower: np.ndarray
    phi_upper: np.ndarray

    @property
    def gap(self) -> np.ndarray:
        return self.phi_upper - self.phi_lower


@dataclass(frozen=True)
class ChaosThresholds:
    theta_sep: float = 0.05
    eta_prox: float = 0.005
    dc_gap_tol: float = 0.1
    dc_zero_tol: float = 0.02

    def __post_init__(self):
        if min(self.theta_sep, self.eta_prox, self.dc_gap_tol, self.dc_zero_tol) <= 0:
            raise ContractViolation("chaos thresholds must be positive")
        if self.theta_sep <= self.eta_prox:
            raise ContractViolation("theta_sep must exceed eta_prox")


@dataclass(frozen=True)
class PairClassification:
    liyorke: bool
    dc_class: str | None
    tail_max: float
    tail_min: float
    max_phi_gap: float
    evidence: str = NUMERICAL_EVIDENCE


def series_batch(family: Family, X, Y, n: int, cap: int = DEFAULT_SET_CAP) -> np.ndarray:
    """``D[k, i] = d_H(F^i(X[k]), F^i(Y[k]))`` for ``i = 0..n-1``."""
    space = family.space
    X = space.canonicalize(np.atleast_2d(np.asarray(X, dtype=float)).reshape(-1, space.dim))
    Y = space.canonicalize(np.atleast_2d(np.asarray(Y, dtype=float)).reshape(-1, space.dim))
    if len(X) != len(Y):
        raise ContractViolation("X and Y must hold the same number of points")
    if n < 1:
        raise ContractViolation("series length must be positive")
    P = len(X)
    I, J = np.arange(P), np.arange(P, 2 * P)
    out = np.empty((P, n))
    for i, (flat, offsets) in enumerate(iterate_orbit_sets(family, np.vstack([X, Y]), n - 1, cap)):
        out[:, i] = hausdorff_batch(space, flat, offsets, I, J)
    return out


def pair_series(family: Family, x, y, n: int) -> PairSeries:
    D = series_batch(family, [x], [y], n)[0]
    space = family.space
    return PairSeries(space.canonicalize(np.reshape(x, space.dim)), space.canonicalize(np.reshape(y, space.dim)), D)


def default_t_grid(diameter: float, size: int = 50) -> np.ndarray:
    return np.linspace(diameter / size, diameter, size)


def distributional_profile(series: PairSeries | np.ndarray, t_grid: Sequence[float]) -> DistributionalProfile:
    """Extremes of the empirical distribution functions over prefixes in the final half.

    For each ``t`` and each prefix length ``m`` in ``[ceil(L/2), L]`` the
    fraction of ``D[:m]`` below ``t`` is formed; the profile keeps its
    minimum and maximum over ``m``.
    """
    D = np.asarray(series.D if isinstance(series, PairSeries) else series, dtype=float)
    L = len(D)
    if L < MIN_PROFILE_LENGTH:
        raise EstimationError(f"series of length {L} is below the estimation floor of {MIN_PROFILE_LENGTH}")
    t = np.asarray(t_grid, dtype=float)
    if np.any(t <= 0) or np.any(np.diff(t) <= 0):
        raise ContractViolation("t_grid must be positive and increasing")
    below = D[None, :] < t[:, None]
    frac = np.cumsum(below, axis=1) / np.arange(1, L + 1)
    window = frac[:, (L + 1) // 2 - 1:]
    return DistributionalProfile(t, window.min(axis=1), window.max(axis=1))


def classify_pair(series: PairSeries | np.ndarray, profile: DistributionalProfile,
                  thresholds: ChaosThresholds = ChaosThresholds()) -> PairClassification:
    """Li-Yorke flag and the strongest distributional class the evidence supports."""
    D = np.asarray(series.D if isinstance(series, PairSeries) else series, dtype=float)
    tail = D[len(D) // 2:]
    tail_max, tail_min = float(tail.max()), float(tail.min())
    liyorke = tail_max >= thresholds.theta_sep and tail_min <= thresholds.eta_prox
    gap = profile.gap
    spread = bool(np.any(gap > thresholds.dc_gap_tol))
    upper_full = bool(np.all(profile.phi_upper >= 1.0 - thresholds.dc_zero_tol))
    if upper_full and np.any(profile.phi_lower <= thresholds.dc_zero_tol):
        dc = HDC1
    elif upper_full and spread:
        dc = HDC2
    elif spread:
        dc = DC3
    else:
        dc = None
    return PairClassification(liyorke, dc, tail_max, tail_min, float(gap.max()))


def scan_pairs(family: Family, X, Y, n: int, t_grid=None,
               thresholds: ChaosThresholds = ChaosThresholds()) -> list[tuple[np.ndarray, np.ndarray, PairClassification]]:
    """Classify every pair ``(X[k], Y[k])``."""
    space = family.space
    X = space.canonicalize(np.atleast_2d(np.asarray(X, dtype=float)).reshape(-1, space.dim))
    Y = space.canonicalize(np.atleast_2d(np.asarray(Y, dtype=float)).reshape(-1, space.dim))
    if t_grid is None:
        t_grid = default_t_grid(space.diameter)
    D = series_batch(family, X, Y, n)
    out = []
    for k in range(len(X)):
        profile = distributional_profile(D[k], t_grid)
        out.append((X[k], Y[k], classify_pair(D[k], profile, thresholds)))
    return out


def block_oscillation(length: int, low: float = 0.0, high: float = 0.5, first_block: int = 4,
                      growth: float = 2.0) -> np.ndarray:
    """Series alternating ``low``/``high`` in blocks whose lengths grow geometrically."""
    out = np.empty(length)
    pos, block, value = 0, float(first_block), low
    while pos < length:
        size = max(1, int(round(block)))
        out[pos:pos + size] = value
        pos += size
        block *= growth
        value = high if value == low else low
    return out
