"""Dynamical n-metrics and spanning / separated counts over candidate sets.

Two n-metrics are supported:

* ``HAUSDORFF_BOWEN``: ``max_{i<=n} d_H(F^i(x), F^i(y))`` on orbit sets.
* ``BIS_MAX``: ``max_{k<=n} max_{|g|=k} d(g(x), g(y))`` over words.

Counts are taken over a finite candidate set.  Separated sets use
``>= eps`` and spanning sets ``< eps``.  All pairwise work goes through
:func:`pair_sweep`, which advances every candidate one level at a time and
retires pairs once they are far enough apart to settle every threshold.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Callable, Iterator, Sequence

import numpy as np
from scipy import sparse

from .dynamics import (
    DEFAULT_SET_CAP,
    DEFAULT_WORD_CAP,
    Family,
    iterate_orbit_sets,
    orbit_set,
    word_images,
)
from .exceptions import ContractViolation, SizeLimitError
from .geometry import factor_gaps
from .pointset import hausdorff, hausdorff_batch

EXACT_CANDIDATE_LIMIT = 20

# rows of word images compared at once in the Bis kernel
_BIS_CHUNK = 4_000_000


class MetricKind(str, enum.Enum):
    HAUSDORFF_BOWEN = "hausdorff_bowen"
    BIS_MAX = "bis_max"


class Method(str, enum.Enum):
    GREEDY = "greedy"
    EXACT = "exact"


@dataclass(frozen=True)
class CountResult:
    n: int
    epsilon: float
    kind: MetricKind
    method: Method
    spanning_count: int
    separated_count: int
    candidate_count: int

    @property
    def r(self) -> int:
        return self.spanning_count

    @property
    def s(self) -> int:
        return self.separated_count


def _kind(kind) -> MetricKind:
    try:
        return MetricKind(kind)
    except ValueError:
        raise ContractViolation(f"unknown metric kind {kind!r}") from None


# ---------------------------------------------------------------------------
# single pairs


def dhn(family: Family, x, y, n: int) -> float:
    """Hausdorff-Bowen distance ``max_{0<=i<=n} d_H(F^i(x), F^i(y))``."""
    ox = orbit_set(family, x, n)
    oy = orbit_set(family, y, n)
    return max(hausdorff(a, b) for a, b in zip(ox.sets, oy.sets))


def dmaxn(family: Family, x, y, n: int, cap: int = DEFAULT_WORD_CAP) -> float:
    """Bis distance: largest gap between ``g(x)`` and ``g(y)`` over words of length <= n."""
    pts = family.space.canonicalize(np.vstack([np.reshape(x, (1, -1)), np.reshape(y, (1, -1))]))
    best = 0.0
    for imgs in word_images(family, pts, n, cap):
        gaps = np.max(factor_gaps(family.space, imgs[0] - imgs[1]), axis=-1)
        best = max(best, float(gaps.max()))
    return best


# ---------------------------------------------------------------------------
# batched pair sweep


def level_kernels(family: Family, points: np.ndarray, n: int, kind,
                  cap: int = DEFAULT_SET_CAP) -> Iterator[Callable[[np.ndarray, np.ndarray], np.ndarray]]:
    """Yield, for each level ``i = 0..n``, a function mapping pair indices to level-i distances.

    For ``HAUSDORFF_BOWEN`` the level distance is ``d_H(F^i(x), F^i(y))``;
    for ``BIS_MAX`` it is ``max_{|g|=i} d(g(x), g(y))``.
    """
    space = family.space
    kind = _kind(kind)
    if kind is MetricKind.HAUSDORFF_BOWEN:
        for flat, offsets in iterate_orbit_sets(family, points, n, cap):
            yield lambda I, J, flat=flat, offsets=offsets: hausdorff_batch(space, flat, offsets, I, J)
    else:
        for imgs in word_images(family, points, n, cap):
            def kernel(I, J, imgs=imgs):
                out = np.empty(len(I))
                step = max(1, _BIS_CHUNK // (imgs.shape[1] * imgs.shape[2]))
                for lo in range(0, len(I), step):
                    diff = imgs[I[lo:lo + step]] - imgs[J[lo:lo + step]]
                    out[lo:lo + step] = np.max(factor_gaps(space, diff), axis=(-1, -2))
                return out
            yield kernel


def upper_pairs(N: int) -> tuple[np.ndarray, np.ndarray]:
    I, J = np.triu_indices(N, k=1)
    return I.astype(np.int64), J.astype(np.int64)


def near_pairs(space, points: np.ndarray, radius: float) -> tuple[np.ndarray, np.ndarray]:
    """Index pairs ``i < j`` with ``d(points[i], points[j]) < radius``, built blockwise."""
    N = len(points)
    if not np.isfinite(radius):
        return upper_pairs(N)
    Is, Js = [], []
    step = max(1, 4_000_000 // max(1, N))
    for lo in range(0, N, step):
        block = points[lo:lo + step]
        d = np.max(factor_gaps(space, block[:, None, :] - points[None, :, :]), axis=-1)
        i, j = np.nonzero(d < radius)
        i = i + lo
        upper = j > i
        Is.append(i[upper])
        Js.append(j[upper])
    return np.concatenate(Is).astype(np.int64), np.concatenate(Js).astype(np.int64)


def pair_sweep(family: Family, points: np.ndarray, n: int, kind, I=None, J=None,
               cutoff: float = np.inf, cap: int = DEFAULT_SET_CAP,
               on_level: Callable[[int, np.ndarray, np.ndarray], None] | None = None) -> np.ndarray:
    """Running n-metric values for pairs ``(I[k], J[k])`` up to depth ``n``.

    A pair is retired once its running value reaches ``cutoff``; its
    reported value is then only a lower bound (still ``>= cutoff``).
    ``on_level(i, active, values)`` is called after each level with the
    indices of pairs still active before the level was applied.
    """
    points = np.atleast_2d(points)
    if I is None:
        I, J = upper_pairs(len(points))
    I = np.asarray(I, dtype=np.int64)
    J = np.asarray(J, dtype=np.int64)
    values = np.zeros(len(I))
    active = np.arange(len(I))
    for level, kernel in enumerate(level_kernels(family, points, n, kind, cap)):
        if len(active):
            d = kernel(I[active], J[active])
            values[active] = np.maximum(values[active], d)
        if on_level is not None:
            on_level(level, active, values)
        active = active[values[active] < cutoff]
        if not len(active):
            break
    return values


def exceed_levels(family: Family, points: np.ndarray, n_max: int, epsilons: Sequence[float], kind,
                  cap: int = DEFAULT_SET_CAP) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """First depth at which each pair is ``eps``-apart, for each ``eps``.

    Returns ``(I, J, levels)`` with ``levels[e, k]`` the least ``n <= n_max``
    such that the n-distance of pair ``k`` is ``>= epsilons[e]``, or
    ``n_max + 1`` if none.  Only pairs closer than ``max(epsilons)`` at
    depth 0 are listed; every other pair is apart from depth 0 on.
    """
    eps = np.asarray(epsilons, dtype=float)
    pts = np.atleast_2d(points)
    I, J = near_pairs(family.space, pts, float(eps.max()))
    levels = np.full((len(eps), len(I)), n_max + 1, dtype=np.int32)

    def record(level, active, values):
        if not len(active):
            return
        v = values[active]
        for e, threshold in enumerate(eps):
            hit = active[(v >= threshold) & (levels[e, active] > n_max)]
            levels[e, hit] = level

    pair_sweep(family, pts, n_max, kind, I, J, cutoff=float(eps.max()), cap=cap, on_level=record)
    return I, J, levels


def close_graph(N: int, I: np.ndarray, J: np.ndarray, levels_e: np.ndarray, n: int) -> sparse.csr_matrix:
    """Sparse symmetric adjacency: pairs whose n-distance is below eps, diagonal included."""
    near = levels_e > n
    rows = np.concatenate([np.arange(N), I[near], J[near]])
    cols = np.concatenate([np.arange(N), J[near], I[near]])
    data = np.ones(len(rows), dtype=np.int32)
    return sparse.csr_matrix((data, (rows, cols)), shape=(N, N))


def pairwise_close(family: Family, candidates, n: int, epsilon: float, kind) -> sparse.csr_matrix:
    pts = family.space.canonicalize(np.atleast_2d(candidates))
    I, J, levels = exceed_levels(family, pts, n, [epsilon], kind)
    return close_graph(len(pts), I, J, levels[0], n)


def min_pairwise_distance(family: Family, points: np.ndarray, n: int, kind=MetricKind.HAUSDORFF_BOWEN,
                          cap: int = DEFAULT_SET_CAP) -> tuple[float, int, int]:
    """Smallest n-distance over all pairs of ``points``, with a pair attaining it.

    Branch and bound: neighbours in sorted order give an upper bound, and
    every other pair is retired as soon as its running value reaches it.
    """
    pts = np.atleast_2d(points)
    N = len(pts)
    if N < 2:
        raise ContractViolation("need at least two points")
    order = np.lexsort(pts.T[::-1])
    nI, nJ = np.minimum(order[:-1], order[1:]), np.maximum(order[:-1], order[1:])
    near = pair_sweep(family, pts, n, kind, nI, nJ, cap=cap)
    k = int(np.argmin(near))
    best, bi, bj = float(near[k]), int(nI[k]), int(nJ[k])
    I, J = upper_pairs(N)
    values = pair_sweep(family, pts, n, kind, I, J, cutoff=best, cap=cap)
    k = int(np.argmin(values))
    if values[k] < best:
        best, bi, bj = float(values[k]), int(I[k]), int(J[k])
    return best, bi, bj


# ---------------------------------------------------------------------------
# greedy and exact selection on a closeness matrix


def greedy_separated_indices(close) -> list[int]:
    """Scan in order, keeping each candidate not close to any kept one."""
    close = sparse.csr_matrix(close)
    indptr, indices = close.indptr, close.indices
    blocked = np.zeros(close.shape[0], dtype=bool)
    kept = []
    for i in range(close.shape[0]):
        if not blocked[i]:
            kept.append(i)
            blocked[indices[indptr[i]:indptr[i + 1]]] = True
    return kept


def greedy_spanning_indices(close) -> list[int]:
    """Greedy set cover: repeatedly take the candidate covering most uncovered ones.

    Ties go to the lowest index.
    """
    close = sparse.csr_matrix(close, dtype=np.int64)
    indptr, indices = close.indptr, close.indices
    uncovered = np.ones(close.shape[0], dtype=bool)
    gain = np.diff(indptr).astype(np.int64)
    chosen = []
    while uncovered.any():
        i = int(np.argmax(gain))
        chosen.append(i)
        row = indices[indptr[i]:indptr[i + 1]]
        newly = row[uncovered[row]]
        uncovered[newly] = False
        # closeness is symmetric, so rows of the newly covered list who covered them
        for u in newly:
            gain[indices[indptr[u]:indptr[u + 1]]] -= 1
    return chosen


def exact_counts_from_close(close: np.ndarray) -> tuple[int, int]:
    """Exact minimum spanning and maximum separated cardinality by subset enumeration."""
    close = close.toarray() if sparse.issparse(close) else np.asarray(close)
    N = len(close)
    if N > EXACT_CANDIDATE_LIMIT:
        raise SizeLimitError(f"exact counting is limited to {EXACT_CANDIDATE_LIMIT} candidates, got {N}")
    masks = (close.astype(np.int64) << np.arange(N, dtype=np.int64)[None, :]).sum(axis=1)
    size = 1 << N
    union = np.zeros(size, dtype=np.int64)
    popcount = np.zeros(size, dtype=np.int8)
    independent = np.ones(size, dtype=bool)
    for b in range(N):
        lo = 1 << b
        lower = np.arange(lo, dtype=np.int64)
        union[lo:2 * lo] = union[:lo] | masks[b]
        popcount[lo:2 * lo] = popcount[:lo] + 1
        independent[lo:2 * lo] = independent[:lo] & ((lower & masks[b]) == 0)
    full = size - 1
    r = int(popcount[union == full].min())
    s = int(popcount[independent].max())
    return r, s


def _prepare(family: Family, candidates) -> np.ndarray:
    pts = family.space.canonicalize(np.atleast_2d(np.asarray(candidates, dtype=float)))
    if len(pts) == 0:
        raise ContractViolation("candidate set is empty")
    return pts


def greedy_separated(family: Family, candidates, n: int, epsilon: float, kind) -> np.ndarray:
    """Maximal ``(n, eps)``-separated subset of the candidates, in scan order."""
    pts = _prepare(family, candidates)
    return pts[greedy_separated_indices(pairwise_close(family, pts, n, epsilon, kind))]


def greedy_spanning(family: Family, candidates, n: int, epsilon: float, kind) -> np.ndarray:
    """Greedy ``(n, eps)``-spanning subset covering every candidate."""
    pts = _prepare(family, candidates)
    return pts[greedy_spanning_indices(pairwise_close(family, pts, n, epsilon, kind))]


def exact_counts(family: Family, candidates, n: int, epsilon: float, kind) -> CountResult:
    pts = _prepare(family, candidates)
    if len(pts) > EXACT_CANDIDATE_LIMIT:
        raise SizeLimitError(f"exact counting is limited to {EXACT_CANDIDATE_LIMIT} candidates, got {len(pts)}")
    r, s = exact_counts_from_close(pairwise_close(family, pts, n, epsilon, kind))
    return CountResult(n, float(epsilon), _kind(kind), Method.EXACT, r, s, len(pts))


def count_table(family: Family, candidates, ns: Sequence[int], epsilons: Sequence[float], kind,
                method=Method.GREEDY, cap: int = DEFAULT_SET_CAP) -> list[CountResult]:
    """Counts for every ``(n, eps)``, sharing one pair sweep across the grid.

    Ordered by epsilon, then n.
    """
    pts = _prepare(family, candidates)
    kind = _kind(kind)
    method = Method(method)
    if method is Method.EXACT and len(pts) > EXACT_CANDIDATE_LIMIT:
        raise SizeLimitError(f"exact counting is limited to {EXACT_CANDIDATE_LIMIT} candidates, got {len(pts)}")
    ns = sorted(int(n) for n in ns)
    eps = [float(e) for e in epsilons]
    if any(e <= 0 for e in eps):
        raise ContractViolation("epsilons must be positive")
    I, J, levels = exceed_levels(family, pts, ns[-1], eps, kind, cap)
    out = []
    for e, epsilon in enumerate(eps):
        for n in ns:
            close = close_graph(len(pts), I, J, levels[e], n)
            if method is Method.EXACT:
                r, s = exact_counts_from_close(close)
            else:
                r = len(greedy_spanning_indices(close))
                s = len(greedy_separated_indices(close))
            out.append(CountResult(n, epsilon, kind, method, r, s, len(pts)))
    return out
