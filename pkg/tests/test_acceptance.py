"""Acceptance criteria, each run at its stated tolerance.

Every test prints one PASS/FAIL line; the lines are collected again in
the terminal summary under "acceptance criteria".
"""

import math
import time

import numpy as np
import pytest

from hausdorff_entropy import chaos, cli
from hausdorff_entropy.bowen import MetricKind, count_table, exact_counts, min_pairwise_distance
from hausdorff_entropy.checks import power_violations, random_tiny_instance, sandwich_violations
from hausdorff_entropy.dynamics import (
    Monomial,
    PiecewiseLinear,
    builtin_family,
    conjugate_family,
    example41,
    invariant_subintervals,
    power_family,
    product_family,
    rotation,
    rotation_id,
    witness_points,
)
from hausdorff_entropy.entropy import estimate_entropy, growth_table, tail_slope
from hausdorff_entropy.geometry import CIRCLE, INTERVAL, SpaceSpec, grid
from hausdorff_entropy.pointset import (
    FiniteSet,
    directed_dist_allpairs,
    directed_dist_sorted,
    hausdorff,
    product_set,
)

H, BIS = MetricKind.HAUSDORFF_BOWEN, MetricKind.BIS_MAX
LOG2 = math.log(2)


@pytest.fixture(scope="module")
def example41_tables():
    # the full growth table shared by criteria 2 and 5
    F = example41()
    ns = range(0, 13)
    return {kind: growth_table(F, ns, [0.01], kind, grid_resolution=0.0025) for kind in (H, BIS)}


def test_c01_witness_separation(report):
    F = example41()
    worst, counts_ok, elapsed10 = math.inf, True, None
    for n in range(1, 11):
        start = time.perf_counter()
        w = witness_points(F, n)
        counts_ok &= len(w) == 2 ** n
        dmin, _, _ = min_pairwise_distance(F, np.array([[z] for _, z in w]), n, H)
        worst = min(worst, dmin)
        if n == 10:
            elapsed10 = time.perf_counter() - start
    ok = counts_ok and worst >= 1 / 15 - 1e-9 and elapsed10 < 60
    report(1, ok, f"2^n witnesses for n=1..10: {counts_ok}; min d_H^n = {worst:.6f} >= 1/15; "
                  f"n=10 took {elapsed10:.1f}s")
    assert ok


def test_c02_example41_entropy_lower_bound(report, example41_tables):
    rec = example41_tables[H]
    ns, s = rec.series(0.01, "s")
    tail = ns >= 4
    slope, _, _ = tail_slope(ns[tail], s[tail], tail_fraction=1.0)
    singles = []
    for g in example41().singletons():
        single = growth_table(g, range(0, 13), [0.01], H, grid_resolution=0.0025)
        sn, ss = single.series(0.01, "s")
        singles.append(tail_slope(sn[sn >= 4], ss[sn >= 4], tail_fraction=1.0)[0])
    ok_h = slope >= 0.95 * LOG2
    ok_s = all(h <= 0.05 for h in singles)
    report(2, ok_h and ok_s,
           f"slope over n=4..12 = {slope:.4f} (need >= {0.95 * LOG2:.4f}); counts {list(map(int, s))}; "
           f"singles {[round(h, 4) for h in singles]} (need <= 0.05)")
    assert ok_s
    assert ok_h


def test_c03_rotation_identity_collapse(report):
    F = rotation_id()
    horizon = 400
    rng = np.random.default_rng(3)
    X, Y = rng.random((100, 1)), rng.random((100, 1))
    D = chaos.series_batch(F, X, Y, horizon + 1)
    details, ok = [], True
    for eps in (0.1, 0.05, 0.02):
        rec = growth_table(F, range(horizon + 1), [eps], H, grid_resolution=eps / 4)
        ns, r = rec.series(eps, "r")
        changes = np.nonzero(r[1:] != r[:-1])[0]
        onset = int(changes[-1]) + 1 if len(changes) else 0
        above = np.nonzero((D > eps).any(axis=0))[0]
        d_onset = int(above[-1]) + 1 if len(above) else 0
        N = max(onset, d_onset)
        slopes = estimate_entropy(rec, "r").slopes[eps], estimate_entropy(rec, "s").slopes[eps]
        good = N <= 200 and max(slopes) <= 0.02
        ok &= good
        details.append(f"eps={eps}: N={N} (r from {onset}, D from {d_onset}), slope={max(slopes):.3g}")
    report(3, ok, "; ".join(details))
    assert ok


def test_c04_sandwich_exact(report):
    rng = np.random.default_rng(4)
    fams = [example41(), rotation_id()]
    violations = []
    for i in range(200):
        F = fams[i % 2]
        pts, n, eps = random_tiny_instance(rng, F, max_candidates=16, max_n=3)
        violations += sandwich_violations(F, pts, n, eps)
    ok = not violations
    report(4, ok, f"200 tiny instances, {len(violations)} violations of r(e) <= s(e) <= r(e/2)")
    assert ok


def test_c05_hausdorff_below_bis(report, example41_tables):
    F = example41()
    extra = {kind: count_table(F, grid(F.space, 0.005), range(9), [0.05, 0.02], kind) for kind in (H, BIS)}
    pairs = list(zip(example41_tables[H].results, example41_tables[BIS].results)) + list(zip(extra[H], extra[BIS]))
    bad = [(a.n, a.epsilon) for a, b in pairs if a.s > b.s or a.r > b.r]
    ok = not bad
    report(5, ok, f"{len(pairs)} (n, eps) cells of the example41 table, {len(bad)} with s_H > s_Bis or r_H > r_Bis")
    assert ok


def lap_oracle_entropy(n_max=8):
    # independent oracle: count the full turns made by the n-fold doubling map on a fine grid
    xs = np.arange(2 ** 14) / 2 ** 14
    laps = []
    for n in range(1, n_max + 1):
        y = np.mod(xs * 2 ** n, 1.0)
        laps.append(int(np.sum(np.diff(y) < -0.5)) + 1)
    ns = np.arange(1, n_max + 1)
    return float(np.polyfit(ns, np.log(laps), 1)[0]), laps


def test_c06_singleton_equality(report):
    F = builtin_family("doubling")
    recs = {k: growth_table(F, range(7), [0.25, 0.125], k, grid_resolution=1 / 1024) for k in (H, BIS)}
    same = all((a.r, a.s) == (b.r, b.s) for a, b in zip(recs[H].results, recs[BIS].results))
    head = estimate_entropy(recs[H]).headline
    oracle, laps = lap_oracle_entropy()
    ok = same and abs(head - oracle) <= 0.1 * oracle
    report(6, ok, f"kinds identical: {same}; headline {head:.4f} vs lap oracle {oracle:.4f} (laps {laps[:4]}...)")
    assert ok


def test_c07_power_rule(report):
    rng = np.random.default_rng(7)
    fams = [example41(), rotation_id(), builtin_family("doubling")]
    violations = []
    for i in range(150):
        F = fams[i % 3]
        pts, n, eps = random_tiny_instance(rng, F, max_candidates=14, max_n=3)
        violations += power_violations(F, pts, n, eps, 2)
    D = builtin_family("doubling")
    h1 = estimate_entropy(growth_table(D, range(7), [0.25, 0.125], grid_resolution=1 / 1024)).headline
    h2 = estimate_entropy(growth_table(power_family(D, 2), range(4), [0.25, 0.125],
                                       grid_resolution=1 / 1024)).headline
    ok = not violations and abs(h2 - 2 * h1) <= 0.15 * 2 * h1
    report(7, ok, f"{len(violations)} violations of r(n,F^2) <= r(2n,F) in 150 instances; "
                  f"headline(F^2)={h2:.4f} vs 2*headline(F)={2 * h1:.4f}")
    assert ok


def test_c08_product_additivity(report):
    rng = np.random.default_rng(8)
    I1, C1 = SpaceSpec.of(INTERVAL), SpaceSpec.of(CIRCLE)
    worst = 0.0
    for _ in range(1000):
        sets = [FiniteSet.from_points(sp, rng.random((int(rng.integers(1, 7)), 1))) for sp in (I1, C1, I1, C1)]
        A, B, C, Dd = sets
        lhs = hausdorff(product_set(A, B), product_set(C, Dd))
        worst = max(worst, abs(lhs - max(hausdorff(A, C), hausdorff(B, Dd))))
    Fd, Fr = builtin_family("doubling"), rotation()
    eps = [0.25, 0.125]
    h_d = estimate_entropy(growth_table(Fd, range(6), eps, grid_resolution=1 / 256)).headline
    h_r = estimate_entropy(growth_table(Fr, range(6), eps, grid_resolution=1 / 32)).headline
    h_p = estimate_entropy(growth_table(product_family(Fd, Fr), range(6), eps,
                                        grid_resolution=(1 / 256, 1 / 32))).headline
    ok = worst <= 1e-12 and abs(h_p - (h_d + h_r)) <= 0.15 * (h_d + h_r) and h_r <= 0.02
    report(8, ok, f"product metric identity max error {worst:.1e}; h(doubling x rotation)={h_p:.4f} vs "
                  f"{h_d:.4f} + {h_r:.4f}")
    assert ok


def test_c09_conjugacy(report):
    rng = np.random.default_rng(9)
    F = example41()
    flip = PiecewiseLinear((0.0, 1.0), (1.0, 0.0))
    G = conjugate_family(F, flip, flip)
    mismatches = 0
    for _ in range(50):
        pts = rng.random((int(rng.integers(2, 17)), 1))
        n, eps = int(rng.integers(0, 4)), float(rng.uniform(0.02, 0.3))
        for kind in (H, BIS):
            a, b = exact_counts(F, pts, n, eps, kind), exact_counts(G, flip(pts), n, eps, kind)
            mismatches += (a.r, a.s) != (b.r, b.s)
    sq = conjugate_family(F, Monomial(2.0), Monomial(0.5))
    h = estimate_entropy(growth_table(F, range(13), [0.01], grid_resolution=0.0025)).headline
    h_sq = estimate_entropy(growth_table(sq, range(13), [0.01], grid_resolution=0.0025)).headline
    ok = mismatches == 0 and abs(h_sq - h) <= 0.2 * abs(h)
    report(9, ok, f"isometric conjugacy: {mismatches} count mismatches in 100 exact comparisons; "
                  f"x^2 conjugate headline {h_sq:.4f} vs original {h:.4f}")
    assert ok


def test_c10_subsystem_monotonicity(report):
    F = example41()
    intervals = invariant_subintervals(F, 1 / 18)
    rng = np.random.default_rng(10)
    violations, checked = 0, 0
    for a, b in intervals:
        for _ in range(3):
            X = np.sort(rng.random((16, 1)), axis=0)
            inside = np.concatenate([X[(X[:, 0] >= a) & (X[:, 0] <= b)], [[a], [b]]])
            X = np.concatenate([X, [[a], [b]]])
            for n in range(4):
                for eps in (0.02, 0.05, 0.1):
                    checked += 1
                    violations += exact_counts(F, inside, n, eps, H).s > exact_counts(F, X, n, eps, H).s
    ok = violations == 0 and len(intervals) > 1
    report(10, ok, f"{len(intervals)} invariant subintervals found, {checked} nested comparisons, "
                   f"{violations} with s(Y) > s(X)")
    assert ok


def test_c11_chaos_sanity(report, tmp_path):
    F = rotation_id()
    t_grid = chaos.default_t_grid(F.space.diameter)
    thresholds = chaos.ChaosThresholds()
    xs = grid(F.space, 0.05)
    same_pairs = [cli._pmap(cli._chaos_task, [(F, xs[c], xs[c], 500, t_grid, thresholds, 0.0)
                                              for c in np.array_split(np.arange(len(xs)), w)], w)
                  for w in (1, 2)]
    flat = [[c for part in run for c in part] for run in same_pairs]
    equal_ok = flat[0] == flat[1] and not any(c.liyorke for c in flat[0])

    cfg = {"family": "rotation_id", "experiment": "chaos", "epsilons": [0.1],
           "chaos": {"pairs": 8, "n": 2000}, "seed": 11}
    outs = []
    for w in (1, 2):
        code, summary = cli.run({**cfg, "workers": w}, tmp_path / str(w))
        outs.append(((tmp_path / str(w) / "pairs.csv").read_bytes(), summary["result"]["liyorke_fraction"]))
    rows = outs[0][0].decode().splitlines()[1:]
    tail_max = max(float(r.split(",")[4]) for r in rows)
    rot_ok = outs[0] == outs[1] and outs[0][1] == 0.0 and tail_max < 0.05

    D = chaos.block_oscillation(2000)
    labels = {chaos.classify_pair(D, chaos.distributional_profile(D, t_grid), thresholds).dc_class
              for _ in range(2)}
    block_ok = labels == {chaos.DC3}
    ok = equal_ok and rot_ok and block_ok
    report(11, ok, f"x=y never Li-Yorke: {equal_ok}; rotation_id n=2000 never Li-Yorke "
                   f"(max tail {tail_max:.2e}, workers 1/2 identical): {rot_ok}; block series DC3: {block_ok}")
    assert ok


def test_c12_kernel_oracle(report):
    rng = np.random.default_rng(12)
    I1, C1 = SpaceSpec.of(INTERVAL), SpaceSpec.of(CIRCLE)
    worst = 0.0
    for k in range(10_000):
        space, circle = (I1, False) if k % 2 == 0 else (C1, True)
        A = FiniteSet.from_points(space, rng.random((int(rng.integers(1, 20)), 1)))
        B = FiniteSet.from_points(space, rng.random((int(rng.integers(1, 20)), 1)))
        for P, Q in ((A, B), (B, A)):
            fast = directed_dist_sorted(P.points[:, 0], Q.points[:, 0], circle)
            worst = max(worst, abs(fast - directed_dist_allpairs(space, P.points, Q.points)))
    axiom_bad = 0
    for k in range(10_000):
        space = I1 if k % 2 == 0 else C1
        A, B, C = (FiniteSet.from_points(space, rng.random((int(rng.integers(1, 10)), 1))) for _ in range(3))
        ab, ba = hausdorff(A, B), hausdorff(B, A)
        axiom_bad += (ab != ba or hausdorff(A, A) != 0 or ab < 0
                      or hausdorff(A, C) > ab + hausdorff(B, C) + 1e-12)
    ok = worst <= 1e-15 and axiom_bad == 0
    report(12, ok, f"sorted vs all-pairs max error {worst:.1e} over 10^4 pairs; "
                   f"{axiom_bad} metric-axiom failures over 10^4 triples")
    assert ok
