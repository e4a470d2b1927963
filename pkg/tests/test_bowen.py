import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from hausdorff_entropy.bowen import (
    CountResult,
    Method,
    MetricKind,
    count_table,
    dhn,
    dmaxn,
    exact_counts,
    greedy_separated,
    greedy_spanning,
    min_pairwise_distance,
    pairwise_close,
)
from hausdorff_entropy.checks import metric_order_violations, power_violations, sandwich_violations
from hausdorff_entropy.dynamics import (
    builtin_family,
    coalesce_error_bound,
    conjugate_family,
    PiecewiseLinear,
    example41,
    rotation_id,
    witness_points,
)
from hausdorff_entropy.exceptions import SizeLimitError
from hausdorff_entropy.pointset import DEFAULT_DEDUP_TOL
from hausdorff_entropy.geometry import distance, grid

from oracles import distance_matrix, dhn_oracle, dmaxn_oracle, max_separated, min_spanning

H, BIS = MetricKind.HAUSDORFF_BOWEN, MetricKind.BIS_MAX
unit = st.floats(0.0, 1.0, allow_nan=False)


def test_dhn_basic():
    F = example41()
    assert dhn(F, [0.4], [0.4], 5) == 0.0
    assert dhn(F, [0.2], [0.7], 0) == distance(F.space, [0.2], [0.7])
    assert dmaxn(F, [0.4], [0.4], 5) == 0.0
    assert dmaxn(F, [0.2], [0.7], 0) == distance(F.space, [0.2], [0.7])


@given(unit, unit, st.integers(0, 4))
def test_metrics_match_word_oracles(x, y, n):
    for F in (example41(), rotation_id()):
        xx, yy = F.space.canonicalize([x]), F.space.canonicalize([y])
        assert dhn(F, xx, yy, n) == pytest.approx(dhn_oracle(F, xx, yy, n), abs=1e-12)
        assert dmaxn(F, xx, yy, n) == pytest.approx(dmaxn_oracle(F, xx, yy, n), abs=1e-12)


@given(unit, unit)
def test_metric_ordering_and_monotonicity(x, y):
    F = example41()
    prev_h = prev_m = 0.0
    for n in range(6):
        h, m = dhn(F, [x], [y], n), dmaxn(F, [x], [y], n)
        # orbit sets merge points closer than the dedup tolerance; the slack propagates with L
        assert h <= m + coalesce_error_bound(DEFAULT_DEDUP_TOL, F.lipschitz, n + 1)
        assert h >= prev_h and m >= prev_m
        prev_h, prev_m = h, m


def test_witness_pairs_separated():
    F = example41()
    pts = [z for _, z in witness_points(F, 3)]
    for i in range(len(pts)):
        for j in range(i + 1, len(pts)):
            assert dhn(F, [pts[i]], [pts[j]], 3) >= 1 / 15 - 1e-9


def test_min_pairwise_distance_agrees_with_brute_force(rng):
    F = example41()
    pts = rng.random((25, 1))
    best, i, j = min_pairwise_distance(F, pts, 4)
    brute = min(dhn(F, pts[a], pts[b], 4) for a in range(25) for b in range(a + 1, 25))
    assert best == pytest.approx(brute, abs=1e-15)
    assert dhn(F, pts[i], pts[j], 4) == pytest.approx(best, abs=1e-15)


def test_greedy_trivial_cases():
    F = example41()
    cand = grid(F.space, 0.1)
    assert len(greedy_separated(F, cand, 2, 1.5, H)) == 1
    assert len(greedy_spanning(F, cand, 2, 1.5, H)) == 1
    assert len(greedy_separated(F, cand, 2, 0.01, H)) == len(cand)
    assert len(greedy_spanning(F, cand, 2, 0.01, H)) == len(cand)


def test_greedy_separated_is_separated_and_maximal():
    F = example41()
    cand = grid(F.space, 0.02)
    kept = greedy_separated(F, cand, 3, 0.1, H)
    for a in range(len(kept)):
        for b in range(a + 1, len(kept)):
            assert dhn(F, kept[a], kept[b], 3) >= 0.1
    for c in cand:
        assert min(dhn(F, c, k, 3) for k in kept) < 0.1 or any(np.array_equal(c, k) for k in kept)


def test_greedy_spanning_covers():
    F = rotation_id()
    cand = grid(F.space, 0.02)
    chosen = greedy_spanning(F, cand, 4, 0.08, H)
    for c in cand:
        assert min(dhn(F, c, k, 4) for k in chosen) < 0.08


def test_two_point_exact():
    F = example41()
    pts = np.array([[0.2], [0.3]])
    D = dhn(F, pts[0], pts[1], 2)
    res = exact_counts(F, pts, 2, D + 1e-3, H)
    assert (res.r, res.s) == (1, 1)
    assert exact_counts(F, pts, 2, D, H).s == 2


def test_exact_counts_match_subset_oracle(rng):
    for F in (example41(), rotation_id()):
        for _ in range(6):
            pts = F.space.canonicalize(rng.random((9, 1)))
            n = int(rng.integers(0, 3))
            eps = float(rng.uniform(0.03, 0.3))
            for kind, metric in ((H, dhn_oracle), (BIS, dmaxn_oracle)):
                D = distance_matrix(metric, F, pts, n)
                res = exact_counts(F, pts, n, eps, kind)
                assert res.s == max_separated(D, eps)
                assert res.r == min_spanning(D, eps)


def test_greedy_bounds_exact_on_tiny_instance(rng):
    F = example41()
    pts = rng.random((16, 1))
    for eps in (0.02, 0.05, 0.1):
        exact = exact_counts(F, pts, 2, eps, H)
        assert len(greedy_separated(F, pts, 2, eps, H)) <= exact.s
        assert len(greedy_spanning(F, pts, 2, eps, H)) >= exact.r


def test_exact_limit():
    with pytest.raises(SizeLimitError):
        exact_counts(example41(), grid(example41().space, 0.04), 1, 0.1, H)


def test_count_table_matches_single_calls(rng):
    F = example41()
    pts = grid(F.space, 0.01)
    table = count_table(F, pts, [0, 2, 5], [0.1, 0.04], H)
    assert [(c.epsilon, c.n) for c in table] == [(e, n) for e in (0.1, 0.04) for n in (0, 2, 5)]
    for c in table:
        assert c.s == len(greedy_separated(F, pts, c.n, c.epsilon, H))
        assert c.r == len(greedy_spanning(F, pts, c.n, c.epsilon, H))
        assert 1 <= c.r <= c.candidate_count and 1 <= c.s <= c.candidate_count


def test_closeness_graph_matches_pairwise(rng):
    F = rotation_id()
    pts = rng.random((30, 1))
    close = pairwise_close(F, pts, 3, 0.15, H).toarray()
    for a in range(30):
        for b in range(30):
            assert bool(close[a, b]) == (dhn(F, pts[a], pts[b], 3) < 0.15)


def test_sandwich_and_metric_order_on_tiny_instances(rng):
    for F in (example41(), rotation_id()):
        for _ in range(10):
            pts = rng.random((10, 1))
            n, eps = int(rng.integers(0, 4)), float(rng.uniform(0.02, 0.3))
            assert sandwich_violations(F, pts, n, eps) == []
            assert metric_order_violations(F, pts, [n], [eps]) == []


def test_power_rule_count_inequality(rng):
    F = example41()
    for _ in range(10):
        pts = rng.random((12, 1))
        n, eps = int(rng.integers(0, 3)), float(rng.uniform(0.02, 0.3))
        assert power_violations(F, pts, n, eps, 2) == []


def test_subsystem_counts_nested(rng):
    F = example41()
    X = np.sort(rng.random((16, 1)), axis=0)
    Y = X[(X[:, 0] >= 1 / 3) & (X[:, 0] <= 2 / 3)]
    if len(Y):
        for n in range(4):
            assert exact_counts(F, Y, n, 0.05, H).s <= exact_counts(F, X, n, 0.05, H).s


def test_isometric_conjugacy_counts_equal(rng):
    F = example41()
    flip = PiecewiseLinear((0.0, 1.0), (1.0, 0.0))
    G = conjugate_family(F, flip, flip)
    for _ in range(5):
        pts = rng.random((12, 1))
        mapped = flip(pts)
        for n in range(3):
            a = exact_counts(F, pts, n, 0.07, H)
            b = exact_counts(G, mapped, n, 0.07, H)
            assert (a.r, a.s) == (b.r, b.s)


def test_singleton_family_kinds_agree():
    F = builtin_family("doubling")
    pts = grid(F.space, 1 / 64)
    a = count_table(F, pts, range(5), [0.25, 0.1], H)
    b = count_table(F, pts, range(5), [0.25, 0.1], BIS)
    assert [(c.r, c.s) for c in a] == [(c.r, c.s) for c in b]


def test_count_result_aliases():
    c = CountResult(2, 0.1, H, Method.EXACT, 3, 4, 10)
    assert (c.r, c.s) == (3, 4)
