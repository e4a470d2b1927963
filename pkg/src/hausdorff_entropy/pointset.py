"""Finite point sets as stand-ins for nonempty compact subsets.

``FiniteSet`` keeps its points sorted lexicographically with near
duplicates merged, so two sets that agree as sets agree as arrays.  The
Hausdorff distance has two kernels: an all-pairs one for any space and a
sorted-search one for one-dimensional spaces (interval or circle), which
is the hot path of the entropy counts.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .exceptions import ContractViolation
from .geometry import CIRCLE, SpaceSpec, factor_gaps, pairwise_distance

DEFAULT_DEDUP_TOL = 1e-12

# cap on elements materialized at once by the padded all-pairs kernel
_CHUNK_ELEMENTS = 2_000_000


def lexsort_rows(points: np.ndarray) -> np.ndarray:
    """Indices that sort rows of a ``(k, dim)`` array lexicographically."""
    if points.shape[1] == 1:
        return np.argsort(points[:, 0], kind="stable")
    return np.lexsort(points.T[::-1])


def _absorb_sorted_1d(values: np.ndarray, tol: float, circle: bool) -> np.ndarray:
    """Dedup a sorted 1-D array: drop entries within ``tol`` of their predecessor."""
    if len(values) < 2:
        return values
    keep = np.empty(len(values), dtype=bool)
    keep[0] = True
    keep[1:] = np.diff(values) > tol
    out = values[keep]
    if circle and len(out) > 1 and out[0] + 1.0 - out[-1] <= tol:
        out = out[:-1]
    return out


def _absorb_greedy(space: SpaceSpec, points: np.ndarray, delta: float) -> np.ndarray:
    """Left-to-right absorption: keep a point unless it is within ``delta`` of a kept one."""
    kept = [0]
    for i in range(1, len(points)):
        gaps = np.max(factor_gaps(space, points[kept] - points[i]), axis=-1)
        if gaps.min() > delta:
            kept.append(i)
    return points[kept]


def normalize(space: SpaceSpec, points: np.ndarray, tol: float) -> np.ndarray:
    """Canonicalize, sort and dedup a ``(k, dim)`` array."""
    pts = space.canonicalize(np.atleast_2d(points))
    pts = pts[lexsort_rows(pts)]
    if space.is_one_dimensional:
        col = _absorb_sorted_1d(pts[:, 0], tol, space.factors[0] == CIRCLE)
        return col[:, None]
    if tol == 0:
        keep = np.ones(len(pts), dtype=bool)
        keep[1:] = np.any(pts[1:] != pts[:-1], axis=1)
        return pts[keep]
    return _absorb_greedy(space, pts, tol)


@dataclass(frozen=True, eq=False)
class FiniteSet:
    """Nonempty, sorted, deduplicated finite subset of a space.

    Build with :meth:`from_points` or :func:`singleton`; the plain
    constructor trusts its input.
    """

    space: SpaceSpec
    points: np.ndarray
    dedup_tol: float = DEFAULT_DEDUP_TOL

    @classmethod
    def from_points(cls, space: SpaceSpec, points, dedup_tol: float = DEFAULT_DEDUP_TOL) -> "FiniteSet":
        arr = np.asarray(points, dtype=float)
        if arr.ndim == 1 and space.dim == 1:
            arr = arr[:, None]
        arr = np.atleast_2d(arr)
        if arr.size == 0:
            raise ContractViolation("a FiniteSet must be nonempty")
        if dedup_tol < 0:
            raise ContractViolation("dedup_tol must be nonnegative")
        pts = normalize(space, arr, dedup_tol)
        pts.setflags(write=False)
        return cls(space, pts, dedup_tol)

    def __len__(self) -> int:
        return len(self.points)

    def __iter__(self):
        return iter(self.points)

    def __repr__(self) -> str:
        return f"FiniteSet({len(self)} points in {'x'.join(self.space.factors)})"

    def equals(self, other: "FiniteSet") -> bool:
        """Same set up to the dedup tolerance."""
        return hausdorff(self, other) <= max(self.dedup_tol, other.dedup_tol)


def singleton(space: SpaceSpec, x, dedup_tol: float = DEFAULT_DEDUP_TOL) -> FiniteSet:
    return FiniteSet.from_points(space, np.reshape(np.asarray(x, dtype=float), (1, space.dim)), dedup_tol)


def _check_same_space(A: FiniteSet, B: FiniteSet):
    if A.space != B.space:
        raise ContractViolation(f"sets live in different spaces: {A.space.factors} vs {B.space.factors}")


def directed_dist_allpairs(space: SpaceSpec, A: np.ndarray, B: np.ndarray) -> float:
    """max over a in A of min over b in B, by the full distance matrix."""
    best = np.full(len(A), np.inf)
    step = max(1, _CHUNK_ELEMENTS // max(1, len(B)))
    for lo in range(0, len(A), step):
        best[lo:lo + step] = pairwise_distance(space, A[lo:lo + step], B).min(axis=1)
    return float(best.max())


def directed_dist_sorted(a: np.ndarray, b: np.ndarray, circle: bool = False) -> float:
    """One-dimensional directed distance; ``b`` must be sorted ascending."""
    pos = np.searchsorted(b, a)
    if circle:
        left = b[pos - 1]
        right = b[pos % len(b)]
        dl = np.abs(a - left)
        dr = np.abs(a - right)
        dl = np.minimum(dl, 1.0 - dl)
        dr = np.minimum(dr, 1.0 - dr)
    else:
        left = b[np.maximum(pos - 1, 0)]
        right = b[np.minimum(pos, len(b) - 1)]
        dl = np.abs(a - left)
        dr = np.abs(a - right)
    return float(np.minimum(dl, dr).max())


def _directed(space: SpaceSpec, A: np.ndarray, B: np.ndarray) -> float:
    if space.is_one_dimensional:
        return directed_dist_sorted(A[:, 0], B[:, 0], space.factors[0] == CIRCLE)
    return directed_dist_allpairs(space, A, B)


def directed_dist(A: FiniteSet, B: FiniteSet) -> float:
    """sup over a in A of the distance from a to B."""
    _check_same_space(A, B)
    return _directed(A.space, A.points, B.points)


def hausdorff(A: FiniteSet, B: FiniteSet) -> float:
    _check_same_space(A, B)
    return max(_directed(A.space, A.points, B.points), _directed(A.space, B.points, A.points))


def hausdorff_arrays(space: SpaceSpec, A: np.ndarray, B: np.ndarray) -> float:
    """Hausdorff distance between two sorted ``(k, dim)`` arrays."""
    return max(_directed(space, A, B), _directed(space, B, A))


def coalesce(A: FiniteSet, delta: float) -> FiniteSet:
    """Thin ``A`` so that every dropped point is within ``delta`` of a kept one.

    Scans the sorted points left to right and keeps the first point of
    each cluster, so ``hausdorff(result, A) <= delta``.
    """
    if delta < 0:
        raise ContractViolation("coalesce radius must be nonnegative")
    if delta == 0 or len(A) == 1:
        return A
    pts = A.points
    if A.space.is_one_dimensional:
        col = pts[:, 0]
        kept = []
        i = 0
        while i < len(col):
            kept.append(i)
            i = int(np.searchsorted(col, col[i] + delta, side="right"))
        out = pts[kept]
        if A.space.factors[0] == CIRCLE and len(out) > 1 and out[0, 0] + 1.0 - out[-1, 0] <= delta:
            out = out[:-1]
    else:
        out = _absorb_greedy(A.space, pts, delta)
    out = np.array(out)
    out.setflags(write=False)
    return FiniteSet(A.space, out, A.dedup_tol)


def product_set(A: FiniteSet, B: FiniteSet) -> FiniteSet:
    """Cartesian product in the product space ``A.space x B.space``."""
    space = A.space.product(B.space)
    left = np.repeat(A.points, len(B), axis=0)
    right = np.tile(B.points, (len(A), 1))
    return FiniteSet.from_points(space, np.hstack([left, right]), min(A.dedup_tol, B.dedup_tol))


# ---------------------------------------------------------------------------
# batched kernels over sets stored back to back (CSR layout)


def gather_segments(offsets: np.ndarray, idx: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Flat row indices and segment labels for the concatenation of segments ``idx``."""
    idx = np.asarray(idx, dtype=np.int64)
    starts = offsets[idx]
    lengths = offsets[idx + 1] - starts
    total = int(lengths.sum())
    labels = np.repeat(np.arange(len(idx)), lengths)
    seg_start = np.cumsum(lengths) - lengths
    rows = np.repeat(starts - seg_start, lengths) + np.arange(total)
    return rows, labels


def _directed_batch_1d(flat: np.ndarray, offsets: np.ndarray, I: np.ndarray, J: np.ndarray,
                       circle: bool) -> np.ndarray:
    q_rows, q_lab = gather_segments(offsets, I)
    r_rows, r_lab = gather_segments(offsets, J)
    q = flat[q_rows]
    r = flat[r_rows]
    # complex keys sort lexicographically by (segment label, value)
    r_key = r_lab + 1j * r
    q_key = q_lab + 1j * q
    pos = np.searchsorted(r_key, q_key, side="right")
    r_starts = np.searchsorted(r_lab, np.arange(len(J)), side="left")
    r_ends = np.searchsorted(r_lab, np.arange(len(J)), side="right")
    first = r_starts[q_lab]
    last = r_ends[q_lab] - 1
    has_left = pos - 1 >= first
    has_right = pos <= last
    if circle:
        left = np.where(has_left, pos - 1, last)
        right = np.where(has_right, pos, first)
        dl = np.abs(q - r[left])
        dr = np.abs(q - r[right])
        dl = np.minimum(dl, 1.0 - dl)
        dr = np.minimum(dr, 1.0 - dr)
    else:
        left = np.clip(pos - 1, first, last)
        right = np.clip(pos, first, last)
        dl = np.where(has_left, np.abs(q - r[left]), np.inf)
        dr = np.where(has_right, np.abs(q - r[right]), np.inf)
    nearest = np.minimum(dl, dr)
    q_starts = np.searchsorted(q_lab, np.arange(len(I)), side="left")
    return np.maximum.reduceat(nearest, q_starts)


def _padded(flat: np.ndarray, offsets: np.ndarray, idx: np.ndarray, width: int) -> np.ndarray:
    # pad each segment by repeating its first point; duplicates leave the set unchanged
    starts = offsets[idx]
    lengths = offsets[idx + 1] - starts
    cols = np.arange(width)
    rows = starts[:, None] + np.where(cols[None, :] < lengths[:, None], cols[None, :], 0)
    return flat[rows]


def _hausdorff_batch_padded(space: SpaceSpec, flat: np.ndarray, offsets: np.ndarray,
                            I: np.ndarray, J: np.ndarray) -> np.ndarray:
    lengths = np.diff(offsets)
    out = np.empty(len(I))
    wa = int(lengths[I].max())
    wb = int(lengths[J].max())
    step = max(1, _CHUNK_ELEMENTS // (wa * wb * space.dim))
    for lo in range(0, len(I), step):
        a = _padded(flat, offsets, I[lo:lo + step], wa)
        b = _padded(flat, offsets, J[lo:lo + step], wb)
        d = np.max(factor_gaps(space, a[:, :, None, :] - b[:, None, :, :]), axis=-1)
        out[lo:lo + step] = np.maximum(d.min(axis=2).max(axis=1), d.min(axis=1).max(axis=1))
    return out


def hausdorff_batch(space: SpaceSpec, flat: np.ndarray, offsets: np.ndarray,
                    I, J) -> np.ndarray:
    """Hausdorff distances between segment pairs ``(I[k], J[k])``.

    ``flat`` holds all sets back to back as a ``(total, dim)`` array with
    segment ``s`` occupying rows ``offsets[s]:offsets[s + 1]``, each sorted.
    """
    I = np.asarray(I, dtype=np.int64)
    J = np.asarray(J, dtype=np.int64)
    if len(I) == 0:
        return np.empty(0)
    lengths = np.diff(offsets)
    if lengths.max() == 1:
        return np.max(factor_gaps(space, flat[offsets[I]] - flat[offsets[J]]), axis=-1)
    if not space.is_one_dimensional:
        return _hausdorff_batch_padded(space, flat, offsets, I, J)
    col = flat[:, 0]
    circle = space.factors[0] == CIRCLE
    cost = np.cumsum(lengths[I] + lengths[J])
    bounds = np.searchsorted(cost, np.arange(_CHUNK_ELEMENTS, cost[-1] + _CHUNK_ELEMENTS, _CHUNK_ELEMENTS))
    out = np.empty(len(I))
    lo = 0
    for hi in np.unique(np.append(np.minimum(bounds + 1, len(I)), len(I))):
        if hi <= lo:
            continue
        i, j = I[lo:hi], J[lo:hi]
        out[lo:hi] = np.maximum(_directed_batch_1d(col, offsets, i, j, circle),
                                _directed_batch_1d(col, offsets, j, i, circle))
        lo = hi
    return out
