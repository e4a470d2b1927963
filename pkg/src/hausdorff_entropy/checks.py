"""Count-level inequalities that must hold exactly on any candidate set.

Each function returns a list of human-readable violation strings, empty
when the property holds.  They are used both by the test-suite and by
the ``oracle`` experiment, which turns any violation into an
:class:`InvariantViolation`.
"""

from __future__ import annotations

from typing import Sequence

import numpy as np

from .bowen import Method, MetricKind, count_table, exact_counts
from .dynamics import Family, power_family
from .exceptions import InvariantViolation

H, BIS = MetricKind.HAUSDORFF_BOWEN, MetricKind.BIS_MAX


def sandwich_violations(family: Family, candidates, n: int, epsilon: float) -> list[str]:
    """``r(eps) <= s(eps) <= r(eps / 2)`` for exact counts."""
    full = exact_counts(family, candidates, n, epsilon, H)
    half = exact_counts(family, candidates, n, epsilon / 2, H)
    out = []
    if not full.r <= full.s <= half.r:
        out.append(f"{family.name} n={n} eps={epsilon}: r={full.r} s={full.s} r(eps/2)={half.r}")
    return out


def metric_order_violations(family: Family, candidates, ns: Sequence[int], epsilons: Sequence[float],
                            method=Method.EXACT) -> list[str]:
    """``s_H <= s_Bis`` and ``r_H <= r_Bis`` at every ``(n, eps)``."""
    hb = count_table(family, candidates, ns, epsilons, H, method)
    bis = count_table(family, candidates, ns, epsilons, BIS, method)
    out = []
    for a, b in zip(hb, bis):
        if a.s > b.s or a.r > b.r:
            out.append(f"{family.name} n={a.n} eps={a.epsilon}: H (r={a.r}, s={a.s}) vs Bis (r={b.r}, s={b.s})")
    return out


def power_violations(family: Family, candidates, n: int, epsilon: float, m: int) -> list[str]:
    """``r(n, eps, F^m) <= r(m n, eps, F)`` for exact counts."""
    lhs = exact_counts(power_family(family, m), candidates, n, epsilon, H)
    rhs = exact_counts(family, candidates, m * n, epsilon, H)
    if lhs.r > rhs.r:
        return [f"{family.name} m={m} n={n} eps={epsilon}: r(F^m)={lhs.r} > r(F, mn)={rhs.r}"]
    return []


def random_tiny_instance(rng: np.random.Generator, family: Family, max_candidates: int = 16,
                         max_n: int = 3) -> tuple[np.ndarray, int, float]:
    k = int(rng.integers(2, max_candidates + 1))
    pts = rng.random((k, family.space.dim))
    n = int(rng.integers(0, max_n + 1))
    eps = float(rng.uniform(0.02, 0.4) * family.space.diameter)
    return pts, n, eps


def oracle_sweep(families: Sequence[Family], instances: int, seed: int, power: int = 2) -> dict:
    """Run every exact check on seeded random tiny instances; raise on any violation."""
    rng = np.random.default_rng(seed)
    report = {"instances": 0, "checks": ["sandwich", "metric_order", "power"]}
    failures: list[str] = []
    for i in range(instances):
        family = families[i % len(families)]
        pts, n, eps = random_tiny_instance(rng, family)
        failures += sandwich_violations(family, pts, n, eps)
        failures += metric_order_violations(family, pts, [n], [eps])
        failures += power_violations(family, pts, n, eps, power)
        report["instances"] += 1
    if failures:
        raise InvariantViolation("; ".join(failures[:5]))
    return report
