"""Command-line experiment runner.

One JSON config describes one experiment.  Every field has an explicit
default (see ``--print-config``); presets are complete configs keyed by
name.  Results are sorted before being written, and floats are written
with 12 significant digits, so a rerun with the same config and seed
gives byte-identical files whatever the worker count.

Exit codes: 0 success, 2 invalid config, 3 size limit hit, 4 runtime
invariant violated.
"""

from __future__ import annotations

import argparse
import copy
import csv
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import chaos
from .bowen import Method, MetricKind, count_table, min_pairwise_distance
from .checks import oracle_sweep
from .dynamics import (
    EXAMPLE41_TARGET,
    Family,
    builtin_family,
    conjugate_family,
    coalesce_error_bound,
    family_from_config,
    map_from_config,
    orbit_set,
    power_family,
    product_family,
    witness_points,
)
from .entropy import GrowthRecord, estimate_entropy
from .exceptions import ContractViolation, EstimationError, InvariantViolation, SizeLimitError
from .geometry import grid
from .pointset import hausdorff

EXIT_OK, EXIT_CONFIG, EXIT_SIZE, EXIT_INVARIANT = 0, 2, 3, 4

EXPERIMENTS = ("entropy", "compare", "witness41", "product", "power", "conjugacy", "chaos", "oracle")

GROWTH_COLUMNS = ("family", "kind", "method", "n", "epsilon", "count_r", "count_s")
PAIR_COLUMNS = ("x", "y", "liyorke", "dc_class", "tail_max", "tail_min", "max_phi_gap")
WITNESS_COLUMNS = ("word", "x")

DEFAULTS = {
    "experiment": "entropy",
    "family": "example41",
    "space": None,
    "n_max": 8,
    "epsilons": [0.05, 0.02],
    "grid_resolution": None,
    "kinds": ["hausdorff_bowen"],
    "method": "greedy",
    "count": "s",
    "tail_fraction": 0.5,
    "tolerance": 0.05,
    "coalesce_delta": 0.0,
    "thresholds": {"theta_sep": 0.05, "eta_prox": 0.005, "dc_gap_tol": 0.1, "dc_zero_tol": 0.02},
    "chaos": {"pairs": 20, "n": 500, "t_grid_size": 50},
    "witness": {"target": list(EXAMPLE41_TARGET), "bound": 1 / 15},
    "power": {"m": 2},
    "product": {"other": "rotation"},
    "conjugacy": {"T": {"type": "monomial", "exponent": 2.0}, "T_inv": {"type": "monomial", "exponent": 0.5}},
    "oracle": {"instances": 200, "families": ["example41", "rotation_id"]},
    "out": "out",
    "workers": 1,
    "seed": 0,
}

PRESETS = {
    "example41": (
        "two increasing interval homeomorphisms of zero entropy whose semigroup has positive entropy",
        {"family": "example41", "experiment": "compare", "n_max": 8,
         "epsilons": [0.05, 0.02], "grid_resolution": 0.005},
    ),
    "rotation_id": (
        "golden-mean circle rotation together with the identity; entropy collapses to zero",
        {"family": "rotation_id", "experiment": "entropy", "n_max": 60,
         "epsilons": [0.1, 0.05, 0.02], "grid_resolution": 0.005},
    ),
    "doubling": (
        "the circle doubling map alone; entropy log 2",
        {"family": "doubling", "experiment": "entropy", "n_max": 6,
         "epsilons": [0.25, 0.125], "grid_resolution": 1 / 1024},
    ),
    "tent": (
        "the full tent map on the interval; entropy log 2",
        {"family": "tent", "experiment": "entropy", "n_max": 6,
         "epsilons": [0.1, 0.05], "grid_resolution": 1 / 1024},
    ),
    "identity": (
        "the identity map; entropy exactly zero",
        {"family": "identity", "experiment": "entropy", "n_max": 6,
         "epsilons": [0.1, 0.05], "grid_resolution": 0.0125},
    ),
}


# ---------------------------------------------------------------------------
# config handling


def _merge(base: dict, extra: dict) -> dict:
    out = copy.deepcopy(base)
    for key, value in extra.items():
        if isinstance(value, dict) and isinstance(out.get(key), dict):
            out[key] = _merge(out[key], value)
        else:
            out[key] = copy.deepcopy(value)
    return out


def resolve_config(raw: dict) -> dict:
    """Fill in defaults and validate; raises :class:`ContractViolation`."""
    if not isinstance(raw, dict):
        raise ContractViolation("config must be a JSON object")
    unknown = set(raw) - set(DEFAULTS)
    if unknown:
        raise ContractViolation(f"unknown config keys: {sorted(unknown)}")
    cfg = _merge(DEFAULTS, raw)
    if cfg["experiment"] not in EXPERIMENTS:
        raise ContractViolation(f"experiment must be one of {EXPERIMENTS}")
    family = load_family(cfg["family"])
    if cfg["space"] is not None and list(cfg["space"]) != list(family.space.factors):
        raise ContractViolation(f"space {cfg['space']} does not match the family's {list(family.space.factors)}")
    cfg["space"] = list(family.space.factors)
    if int(cfg["n_max"]) < 1:
        raise ContractViolation("n_max must be positive")
    eps = [float(e) for e in cfg["epsilons"]]
    if not eps or any(e <= 0 for e in eps):
        raise ContractViolation("epsilons must be a nonempty list of positive numbers")
    cfg["epsilons"] = sorted(set(eps), reverse=True)
    if cfg["grid_resolution"] is None:
        cfg["grid_resolution"] = min(eps) / 4
    res = np.atleast_1d(np.asarray(cfg["grid_resolution"], dtype=float))
    if np.any(res <= 0):
        raise ContractViolation("grid_resolution must be positive")
    if cfg["experiment"] in ("entropy", "compare", "power", "conjugacy") and res.max() > min(eps) / 4 + 1e-15:
        raise ContractViolation(f"grid_resolution {cfg['grid_resolution']} exceeds min(epsilons)/4")
    for kind in cfg["kinds"]:
        MetricKind(kind)
    Method(cfg["method"])
    if cfg["count"] not in ("r", "s"):
        raise ContractViolation("count must be 'r' or 's'")
    if float(cfg["coalesce_delta"]) < 0:
        raise ContractViolation("coalesce_delta must be nonnegative")
    chaos.ChaosThresholds(**cfg["thresholds"])
    if int(cfg["workers"]) < 1:
        raise ContractViolation("workers must be at least 1")
    seed = int(cfg["seed"])
    if not 0 <= seed < 2 ** 64:
        raise ContractViolation("seed must be an unsigned 64-bit integer")
    return cfg


def load_family(source) -> Family:
    if isinstance(source, str):
        return builtin_family(source)
    if isinstance(source, dict):
        return family_from_config(source)
    raise ContractViolation("family must be a preset name or a family config object")


def preset_config(name: str) -> dict:
    if name not in PRESETS:
        raise ContractViolation(f"unknown preset {name!r}; known: {sorted(PRESETS)}")
    return copy.deepcopy(PRESETS[name][1])


def list_presets() -> list[tuple[str, str]]:
    return [(name, desc) for name, (desc, _) in sorted(PRESETS.items())]


# ---------------------------------------------------------------------------
# output


def fmt(value) -> str:
    if isinstance(value, (bool, np.bool_)):
        return "true" if value else "false"
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    if isinstance(value, (float, np.floating)):
        return f"{float(value):.12g}"
    return "" if value is None else str(value)


def _clean(obj):
    """Recursively round floats to 12 significant digits for JSON output."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, (bool, np.bool_)):
        return bool(obj)
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (float, np.floating)):
        v = float(obj)
        if not math.isfinite(v):
            return str(v)
        return float(f"{v:.12g}")
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    return obj


def write_csv(path: Path, columns: Sequence[str], rows: Iterable[Sequence]) -> None:
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([fmt(v) for v in row])


def write_json(path: Path, payload: dict) -> None:
    with open(path, "w") as fh:
        json.dump(_clean(payload), fh, indent=2, sort_keys=True)
        fh.write("\n")


# ---------------------------------------------------------------------------
# parallel helpers


def _pmap(fn: Callable, tasks: list, workers: int) -> list:
    if workers <= 1 or len(tasks) <= 1:
        return [fn(t) for t in tasks]
    with ProcessPoolExecutor(max_workers=min(workers, len(tasks))) as pool:
        return list(pool.map(fn, tasks))


def _count_task(task):
    family, candidates, ns, eps, kind, method = task
    return count_table(family, candidates, ns, [eps], kind, method)


def growth_records(family: Family, candidates, ns, epsilons, kinds, method, workers: int,
                   resolution) -> list[GrowthRecord]:
    """One record per kind; every epsilon is an independent task."""
    tasks = [(family, candidates, list(ns), float(e), MetricKind(k), Method(method))
             for k in kinds for e in epsilons]
    results = _pmap(_count_task, tasks, workers)
    records = []
    for i, kind in enumerate(kinds):
        rows = [c for chunk in results[i * len(epsilons):(i + 1) * len(epsilons)] for c in chunk]
        rows.sort(key=lambda c: (c.epsilon, c.n))
        records.append(GrowthRecord(family.name, MetricKind(kind), Method(method), resolution, tuple(rows)))
    return records


def growth_rows(records: Iterable[GrowthRecord]) -> list[tuple]:
    rows = [(r.family, r.kind.value, r.method.value, c.n, c.epsilon, c.r, c.s)
            for r in records for c in r.results]
    return sorted(rows, key=lambda row: (row[0], row[1], row[2], row[4], row[3]))


def _resolution(cfg):
    res = cfg["grid_resolution"]
    return tuple(res) if isinstance(res, list) else res


def _estimates(cfg, records) -> dict:
    out = {}
    for rec in records:
        est = estimate_entropy(rec, cfg["count"], cfg["tail_fraction"], cfg["tolerance"])
        out[f"{rec.family}/{rec.kind.value}"] = est.to_dict()
    return out


# ---------------------------------------------------------------------------
# experiments


def run_entropy(cfg, family, out: Path) -> dict:
    cand = grid(family.space, cfg["grid_resolution"])
    records = growth_records(family, cand, range(cfg["n_max"] + 1), cfg["epsilons"], cfg["kinds"],
                             cfg["method"], cfg["workers"], _resolution(cfg))
    write_csv(out / "growth.csv", GROWTH_COLUMNS, growth_rows(records))
    return {"candidates": len(cand), "estimates": _estimates(cfg, records)}


def run_compare(cfg, family, out: Path) -> dict:
    cand = grid(family.space, cfg["grid_resolution"])
    ns = range(cfg["n_max"] + 1)
    kinds = [MetricKind.HAUSDORFF_BOWEN.value, MetricKind.BIS_MAX.value]
    records = growth_records(family, cand, ns, cfg["epsilons"], kinds, cfg["method"], cfg["workers"],
                             _resolution(cfg))
    singles = [growth_records(g, cand, ns, cfg["epsilons"], kinds[:1], cfg["method"], cfg["workers"],
                              _resolution(cfg))[0] for g in family.singletons()]
    write_csv(out / "growth.csv", GROWTH_COLUMNS, growth_rows(records + singles))
    ests = [estimate_entropy(r, cfg["count"], cfg["tail_fraction"], cfg["tolerance"]) for r in records + singles]
    tol = cfg["tolerance"]
    h_h, h_bis = ests[0].headline, ests[1].headline
    single = [e.headline for e in ests[2:]]
    violations = [(a.n, a.epsilon) for a, b in zip(records[0].results, records[1].results)
                  if a.s > b.s or a.r > b.r]
    if violations and Method(cfg["method"]) is Method.EXACT:
        raise InvariantViolation(f"Hausdorff counts exceed Bis counts at {violations[:5]}")
    return {
        "candidates": len(cand),
        "h_hausdorff": h_h,
        "h_bis": h_bis,
        "h_singles": single,
        "hausdorff_le_bis": h_h <= h_bis + tol,
        "bis_ge_max_single": h_bis >= max(single) - tol,
        "count_level_violations": [list(v) for v in violations],
        "estimates": _estimates(cfg, records + singles),
    }


def run_witness41(cfg, family, out: Path) -> dict:
    n = int(cfg["n_max"])
    target = tuple(cfg["witness"]["target"])
    witnesses = witness_points(family, n, target)
    pts = np.array([[x] for _, x in witnesses])
    dmin, i, j = min_pairwise_distance(family, pts, n, MetricKind.HAUSDORFF_BOWEN)
    bound = float(cfg["witness"]["bound"])
    rows = sorted((".".join(map(str, w)), x) for w, x in witnesses)
    write_csv(out / "witnesses.csv", WITNESS_COLUMNS, rows)
    return {"n": n, "count": len(witnesses), "expected_count": family.p ** n,
            "min_pairwise_dhn": dmin, "closest_pair": [float(pts[i, 0]), float(pts[j, 0])], "bound": bound, "separated": dmin >= bound - 1e-9}


def run_product(cfg, family, out: Path) -> dict:
    other = load_family(cfg["product"]["other"])
    prod = product_family(family, other)
    res = np.broadcast_to(np.asarray(cfg["grid_resolution"], dtype=float), (prod.space.dim,))
    d1 = family.space.dim
    ns = range(cfg["n_max"] + 1)
    records = []
    for fam, r in ((family, res[:d1]), (other, res[d1:]), (prod, res)):
        cand = grid(fam.space, r)
        records += growth_records(fam, cand, ns, cfg["epsilons"], cfg["kinds"][:1], cfg["method"],
                                  cfg["workers"], tuple(r))
    write_csv(out / "growth.csv", GROWTH_COLUMNS, growth_rows(records))
    heads = [estimate_entropy(r, cfg["count"], cfg["tail_fraction"]).headline for r in records]
    total = heads[0] + heads[1]
    return {"h_first": heads[0], "h_second": heads[1], "h_product": heads[2], "h_sum": total,
            "relative_error": abs(heads[2] - total) / total if total > 0 else abs(heads[2]),
            "estimates": _estimates(cfg, records)}


def run_power(cfg, family, out: Path) -> dict:
    m = int(cfg["power"]["m"])
    powered = power_family(family, m)
    cand = grid(family.space, cfg["grid_resolution"])
    n_base = int(cfg["n_max"])
    records = growth_records(family, cand, range(n_base + 1), cfg["epsilons"], cfg["kinds"][:1],
                             cfg["method"], cfg["workers"], _resolution(cfg))
    records += growth_records(powered, cand, range(max(3, n_base // m) + 1), cfg["epsilons"],
                              cfg["kinds"][:1], cfg["method"], cfg["workers"], _resolution(cfg))
    write_csv(out / "growth.csv", GROWTH_COLUMNS, growth_rows(records))
    h, hm = (estimate_entropy(r, cfg["count"], cfg["tail_fraction"]).headline for r in records)
    return {"m": m, "h": h, "h_power": hm, "ratio": hm / h if h > 0 else None,
            "estimates": _estimates(cfg, records)}


def run_conjugacy(cfg, family, out: Path) -> dict:
    T = map_from_config(cfg["conjugacy"]["T"])
    T_inv = map_from_config(cfg["conjugacy"]["T_inv"])
    conj = conjugate_family(family, T, T_inv)
    cand = grid(family.space, cfg["grid_resolution"])
    mapped = family.space.canonicalize(T(cand))
    ns = range(cfg["n_max"] + 1)
    records = growth_records(family, cand, ns, cfg["epsilons"], cfg["kinds"][:1], cfg["method"],
                             cfg["workers"], _resolution(cfg))
    records += growth_records(conj, mapped, ns, cfg["epsilons"], cfg["kinds"][:1], cfg["method"],
                              cfg["workers"], _resolution(cfg))
    write_csv(out / "growth.csv", GROWTH_COLUMNS, growth_rows(records))
    h, hc = (estimate_entropy(r, cfg["count"], cfg["tail_fraction"]).headline for r in records)
    same = all(a.r == b.r and a.s == b.s for a, b in zip(records[0].results, records[1].results))
    return {"h": h, "h_conjugate": hc, "relative_difference": abs(hc - h) / h if h > 0 else abs(hc),
            "counts_identical": same, "estimates": _estimates(cfg, records)}


def _chaos_task(task):
    family, X, Y, n, t_grid, thresholds, delta = task
    if delta > 0:
        D = np.array([[hausdorff(a, b) for a, b in zip(orbit_set(family, x, n - 1, delta).sets,
                                                       orbit_set(family, y, n - 1, delta).sets)]
                      for x, y in zip(X, Y)])
    else:
        D = chaos.series_batch(family, X, Y, n)
    return [chaos.classify_pair(d, chaos.distributional_profile(d, t_grid), thresholds) for d in D]


def run_chaos(cfg, family, out: Path) -> dict:
    rng = np.random.default_rng(int(cfg["seed"]))
    cand = grid(family.space, cfg["grid_resolution"])
    k = int(cfg["chaos"]["pairs"])
    idx = rng.integers(0, len(cand), size=(k, 2))
    X, Y = cand[idx[:, 0]], cand[idx[:, 1]]
    n = int(cfg["chaos"]["n"])
    t_grid = chaos.default_t_grid(family.space.diameter, int(cfg["chaos"]["t_grid_size"]))
    thresholds = chaos.ChaosThresholds(**cfg["thresholds"])
    delta = float(cfg["coalesce_delta"])
    chunks = np.array_split(np.arange(k), max(1, min(k, int(cfg["workers"]))))
    tasks = [(family, X[c], Y[c], n, t_grid, thresholds, delta) for c in chunks if len(c)]
    labels = [c for part in _pmap(_chaos_task, tasks, cfg["workers"]) for c in part]

    def coords(p):
        return " ".join(fmt(v) for v in p)

    rows = sorted((coords(x), coords(y), c.liyorke, c.dc_class or "none", c.tail_max, c.tail_min,
                   c.max_phi_gap) for x, y, c in zip(X, Y, labels))
    write_csv(out / "pairs.csv", PAIR_COLUMNS, rows)
    classes = {name: sum(1 for c in labels if (c.dc_class or "none") == name)
               for name in (chaos.HDC1, chaos.HDC2, chaos.DC3, "none")}
    return {"pairs": k, "n": n, "evidence": chaos.NUMERICAL_EVIDENCE,
            "liyorke_fraction": sum(c.liyorke for c in labels) / k if k else 0.0,
            "dc_classes": classes,
            "coalesce_error_bound": coalesce_error_bound(delta, family.lipschitz, n - 1)}


def run_oracle(cfg, family, out: Path) -> dict:
    families = [load_family(f) for f in cfg["oracle"]["families"]]
    report = oracle_sweep(families, int(cfg["oracle"]["instances"]), int(cfg["seed"]))
    return {"families": [f.name for f in families], **report, "violations": 0}


RUNNERS = {
    "entropy": run_entropy,
    "compare": run_compare,
    "witness41": run_witness41,
    "product": run_product,
    "power": run_power,
    "conjugacy": run_conjugacy,
    "chaos": run_chaos,
    "oracle": run_oracle,
}


def run(cfg: dict, out: Path | str | None = None) -> tuple[int, dict | None]:
    """Run one experiment; returns ``(exit_code, summary)``."""
    try:
        cfg = resolve_config(cfg)
        family = load_family(cfg["family"])
        out_dir = Path(out if out is not None else cfg["out"])
        out_dir.mkdir(parents=True, exist_ok=True)
        result = RUNNERS[cfg["experiment"]](cfg, family, out_dir)
        summary = {"experiment": cfg["experiment"], "family": family.name,
                   "config": {k: v for k, v in cfg.items() if k not in ("out", "workers")},
                   "result": result}
        write_json(out_dir / "summary.json", summary)
        return EXIT_OK, summary
    except (ContractViolation, EstimationError, KeyError) as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG, None
    except SizeLimitError as exc:
        print(f"error: size limit: {exc}", file=sys.stderr)
        return EXIT_SIZE, None
    except AssertionError as exc:
        print(f"error: invariant violated: {exc}", file=sys.stderr)
        return EXIT_INVARIANT, None


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hausdorff-entropy",
                                     description="Hausdorff metric entropy experiments for semigroups of maps.")
    sub = parser.add_subparsers(dest="command", required=True)
    run_p = sub.add_parser("run", help="run one experiment from a JSON config or a preset")
    run_p.add_argument("config", nargs="?", help="path to a JSON config file")
    run_p.add_argument("--preset", help="start from a named preset")
    run_p.add_argument("--experiment", choices=EXPERIMENTS, help="override the experiment")
    run_p.add_argument("--n-max", type=int, help="override n_max")
    run_p.add_argument("--out", help="output directory")
    run_p.add_argument("--workers", type=int, help="worker processes")
    run_p.add_argument("--seed", type=int, help="random seed (unsigned 64-bit)")
    run_p.add_argument("--print-config", action="store_true", help="print the resolved config and exit")
    sub.add_parser("list-presets", help="list preset names")
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    if args.command == "list-presets":
        for name, desc in list_presets():
            print(f"{name}\t{desc}")
        return EXIT_OK
    try:
        raw = preset_config(args.preset) if args.preset else {}
        if args.config:
            with open(args.config) as fh:
                raw = _merge(raw, json.load(fh))
    except (OSError, json.JSONDecodeError, ContractViolation) as exc:
        print(f"error: invalid config: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    if not args.preset and not args.config:
        print("error: give a config file or --preset", file=sys.stderr)
        return EXIT_CONFIG
    for key, value in (("experiment", args.experiment), ("n_max", args.n_max), ("out", args.out),
                       ("workers", args.workers), ("seed", args.seed)):
        if value is not None:
            raw[key] = value
    if args.print_config:
        try:
            print(json.dumps(_clean(resolve_config(raw)), indent=2, sort_keys=True))
        except (ContractViolation, KeyError, TypeError) as exc:
            print(f"error: invalid config: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        return EXIT_OK
    code, summary = run(raw)
    if summary is not None:
        print(json.dumps(_clean(summary["result"]), indent=2, sort_keys=True))
    return code


if __name__ == "__main__":
    sys.exit(main())
