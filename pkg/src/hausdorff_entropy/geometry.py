"""Compact state spaces built from interval and circle factors.

A space is a finite product of ``"interval"`` factors ([0, 1] with the
Euclidean metric) and ``"circle"`` factors (reals mod 1 with the arc
metric).  The product carries the max-metric.  Points are plain float
arrays of shape ``(dim,)`` and point collections are arrays of shape
``(k, dim)``; circle coordinates are always stored in ``[0, 1)``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .exceptions import ContractViolation, SizeLimitError

INTERVAL = "interval"
CIRCLE = "circle"
FACTOR_TAGS = (INTERVAL, CIRCLE)

DEFAULT_GRID_CAP = 2_000_000

# tolerance for interval coordinates produced by floating arithmetic
_BOUNDARY_SLACK = 1e-12


@dataclass(frozen=True)
class SpaceSpec:
    factors: tuple[str, ...]

    def __post_init__(self):
        factors = tuple(self.factors)
        if not factors:
            raise ContractViolation("a space needs at least one factor")
        for tag in factors:
            if tag not in FACTOR_TAGS:
                raise ContractViolation(f"unknown factor {tag!r}; expected one of {FACTOR_TAGS}")
        object.__setattr__(self, "factors", factors)

    @classmethod
    def of(cls, *factors: str) -> "SpaceSpec":
        return cls(tuple(factors))

    @property
    def dim(self) -> int:
        return len(self.factors)

    @property
    def circle_mask(self) -> np.ndarray:
        return np.array([tag == CIRCLE for tag in self.factors])

    @property
    def diameter(self) -> float:
        """Max-metric diameter: 1 for an interval factor, 1/2 for a circle."""
        return max(1.0 if tag == INTERVAL else 0.5 for tag in self.factors)

    @property
    def is_one_dimensional(self) -> bool:
        return self.dim == 1

    def product(self, other: "SpaceSpec") -> "SpaceSpec":
        return SpaceSpec(self.factors + other.factors)

    def canonicalize(self, points) -> np.ndarray:
        """Return ``points`` as a float array with circle coords reduced mod 1.

        Accepts a single point ``(dim,)`` or a batch ``(k, dim)``.  Interval
        coordinates outside [0, 1] by more than rounding slack are rejected.
        """
        arr = np.array(points, dtype=float)
        single = arr.ndim == 1
        arr = np.atleast_2d(arr)
        if arr.ndim != 2 or arr.shape[1] != self.dim:
            raise ContractViolation(
                f"point dimension {arr.shape[-1] if arr.ndim else 0} does not match space dimension {self.dim}"
            )
        for k, tag in enumerate(self.factors):
            col = arr[:, k]
            if tag == CIRCLE:
                arr[:, k] = canonical_circle(col)
            else:
                if np.any(col < -_BOUNDARY_SLACK) or np.any(col > 1 + _BOUNDARY_SLACK):
                    raise ContractViolation("interval coordinate outside [0, 1]")
                arr[:, k] = np.clip(col, 0.0, 1.0)
        return arr[0] if single else arr

    def contains(self, points) -> bool:
        arr = np.atleast_2d(np.asarray(points, dtype=float))
        if arr.shape[1] != self.dim:
            return False
        for k, tag in enumerate(self.factors):
            col = arr[:, k]
            if tag == CIRCLE:
                if np.any(col < 0) or np.any(col >= 1):
                    return False
            elif np.any(col < 0) or np.any(col > 1):
                return False
        return True


def canonical_circle(values) -> np.ndarray:
    """Reduce values mod 1 into [0, 1).

    ``np.mod`` maps tiny negative numbers to exactly 1.0, which is folded
    back to 0.0 here.
    """
    out = np.mod(values, 1.0)
    return np.where(out >= 1.0, 0.0, out)


def factor_gaps(space: SpaceSpec, diff: np.ndarray) -> np.ndarray:
    """Per-factor distances from coordinate differences ``diff`` (..., dim)."""
    gaps = np.abs(diff)
    mask = space.circle_mask
    if mask.any():
        circ = gaps[..., mask]
        gaps[..., mask] = np.minimum(circ, 1.0 - circ)
    return gaps


def distance(space: SpaceSpec, a, b) -> float:
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    if a.shape != (space.dim,) or b.shape != (space.dim,):
        raise ContractViolation(
            f"expected points of dimension {space.dim}, got shapes {a.shape} and {b.shape}"
        )
    return float(np.max(factor_gaps(space, a - b)))


def rowwise_distance(space: SpaceSpec, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Distances between matching rows of two ``(..., dim)`` arrays."""
    return np.max(factor_gaps(space, A - B), axis=-1)


def pairwise_distance(space: SpaceSpec, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """All-pairs distance matrix of shape ``(len(A), len(B))``."""
    A = np.asarray(A, dtype=float).reshape(-1, space.dim)
    B = np.asarray(B, dtype=float).reshape(-1, space.dim)
    return np.max(factor_gaps(space, A[:, None, :] - B[None, :, :]), axis=-1)


def grid(space: SpaceSpec, resolution, max_points: int = DEFAULT_GRID_CAP) -> np.ndarray:
    """Uniform lattice with spacing at most ``resolution`` in every factor.

    ``resolution`` is one number or one per factor.  Interval factors
    include both endpoints; circle factors never repeat 0 as 1.  Rows are
    in lexicographic order.
    """
    steps = np.broadcast_to(np.asarray(resolution, dtype=float), (space.dim,))
    axes = []
    for tag, step in zip(space.factors, steps):
        if not (0 < step <= 1):
            raise ContractViolation(f"resolution must lie in (0, 1], got {step}")
        # guard against 1/0.1 landing a hair above an integer
        cells = max(1, math.ceil(1.0 / step - 1e-9))
        if tag == INTERVAL:
            axes.append(np.linspace(0.0, 1.0, cells + 1))
        else:
            axes.append(np.arange(cells) / cells)
    total = math.prod(len(ax) for ax in axes)
    if total > max_points:
        raise SizeLimitError(
            f"grid at resolution {resolution} has {total} points, above the cap of {max_points}"
        )
    mesh = np.meshgrid(*axes, indexing="ij")
    return np.stack([m.ravel() for m in mesh], axis=1)


def as_points(space: SpaceSpec, points: Sequence) -> np.ndarray:
    """Coerce a list of points (or scalars for 1-D spaces) to a ``(k, dim)`` array."""
    arr = np.asarray(points, dtype=float)
    if arr.ndim == 1 and space.dim == 1:
        arr = arr[:, None]
    return space.canonicalize(np.atleast_2d(arr))
