"""Command-line harness: clustering runs, experiments, and verifications.

Subcommands
    cluster      run one algorithm on a graph file; emit dendrogram + reports
    eval         score algorithms against labelled data on a seed grid (CSV)
    adversarial  build a worst-case family and report the separation ratios
    sweep        re-verify the approximation floors on random graphs
    selftest     run the full oracle-backed property suite

Exit codes: 0 success, 1 failed check, 2 usage error.  The exact-engine
vertex cap can be overridden with MATCHCLUST_SIZE_CAP.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import adversarial as adv
from .clusterers import (
    MODE_MAX,
    MODE_MIN,
    TieBreakPolicy,
    affinity_boruvka,
    average_linkage_clusterer,
    matching_affinity,
    random_divisive,
)
from .evaluation import (
    DEFAULT_ALGORITHMS,
    bundled_datasets,
    evaluate_grid,
    load_dataset,
    rows_to_csv,
)
from .graph_core import DISSIMILARITY, SIMILARITY, GraphError, load_graph
from .hierarchy import dendrogram_summary, dendrogram_to_text
from .matching_engine import EngineChoice, EngineInfeasibleError, MatchingError
from .objectives import objective_report, revenue, value
from .selftest import run_selftest

USAGE_ERROR = 2
CHECK_FAILED = 1


def _engine_args(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--engine", default="greedy",
                        choices=["exact", "greedy", "local_search"],
                        help="matching engine (exact is capped at 22 vertices)")
    parser.add_argument("--epsilon", type=float, default=0.05,
                        help="accuracy knob for local search / the k-sized search")


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="matchclust",
        description="Matching-based hierarchical clustering toolkit",
    )
    sub = parser.add_subparsers(dest="subcommand", required=True)

    p_cluster = sub.add_parser("cluster", help="cluster one graph file")
    p_cluster.add_argument("--input", required=True, help="graph CSV (edges or dense)")
    p_cluster.add_argument("--algo", default="matching-affinity",
                           choices=["matching-affinity", "affinity",
                                    "average-linkage", "random"])
    p_cluster.add_argument("--mode", default="max", choices=["max", "min"])
    _engine_args(p_cluster)
    p_cluster.add_argument("--seed", type=int, default=0)
    p_cluster.add_argument("--policy", default="lowest_index",
                           choices=["lowest_index", "seeded_random"])
    p_cluster.add_argument("--out", default=None,
                           help="output directory (default: print summary only)")

    p_eval = sub.add_parser("eval", help="score algorithms on a labelled dataset")
    src = p_eval.add_mutually_exclusive_group(required=True)
    src.add_argument("--input", help="labelled CSV (features..., label)")
    src.add_argument("--dataset", help="bundled dataset name "
                                       f"({', '.join(sorted(bundled_datasets()))})")
    p_eval.add_argument("--k", type=int, default=None,
                        help="clusters to extract (default: class count)")
    p_eval.add_argument("--reps", type=int, default=50, help="seeds per random cell")
    p_eval.add_argument("--seed", type=int, default=0, help="base seed")
    p_eval.add_argument("--filtered", action="store_true",
                        help="balance classes and trim to a power-of-two size per seed")
    p_eval.add_argument("--algo", default=None,
                        help="comma-separated algorithm subset (default: all)")
    p_eval.add_argument("--jobs", type=int, default=1)
    _engine_args(p_eval)
    p_eval.add_argument("--out", default=None, help="results CSV path (default stdout)")

    p_adv = sub.add_parser("adversarial", help="worst-case family ratio report")
    p_adv.add_argument("--family", required=True, choices=list(adv.FAMILIES))
    p_adv.add_argument("--half", type=int, default=0)
    p_adv.add_argument("--n-sets", type=int, default=0)
    p_adv.add_argument("--cube-n", type=int, default=0)
    p_adv.add_argument("--n-half", type=int, default=0)
    p_adv.add_argument("--row-bonus", type=float, default=0.1)
    _engine_args(p_adv)
    p_adv.add_argument("--report", default="json", choices=["json", "csv"])
    p_adv.add_argument("--out", default=None)

    p_sweep = sub.add_parser("sweep", help="approximation-floor checks on random graphs")
    p_sweep.add_argument("--sizes", default="4,8,16")
    p_sweep.add_argument("--seeds", type=int, default=50)
    p_sweep.add_argument("--mode", default="both", choices=["max", "min", "both"])
    _engine_args(p_sweep)
    p_sweep.add_argument("--out", default=None, help="per-run CSV path")

    p_self = sub.add_parser("selftest", help="run the full property/oracle suite")
    p_self.add_argument("--only", default=None,
                        help="comma-separated check names to run")
    return parser


def _write_or_print(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text if text.endswith("\n") else text + "\n")


def _cmd_cluster(args) -> int:
    graph = load_graph(args.input)
    engine = EngineChoice.parse(args.engine, args.epsilon)
    mode = args.mode
    ledger = None
    if args.algo == "matching-affinity":
        wanted = MODE_MAX if graph.orientation == SIMILARITY else MODE_MIN
        if mode != wanted:
            raise GraphError(
                f"{graph.orientation} graphs run matching-affinity with mode '{wanted}'"
            )
        n = graph.n
        needs_reduction = mode == MODE_MAX and (n & (n - 1)) != 0
        if needs_reduction and not graph.has_integer_weights():
            raise GraphError(
                "matching-affinity on a non-power-of-two similarity graph needs "
                "integer weights (the k-sized search is integral); rescale or round "
                "the inputs"
            )
        dendro, ledger = matching_affinity(graph, mode, engine, args.epsilon)
    elif args.algo == "affinity":
        policy = TieBreakPolicy(kind=args.policy, seed=args.seed)
        dendro, ledger = affinity_boruvka(graph, mode, policy)
    elif args.algo == "average-linkage":
        dendro = average_linkage_clusterer(graph, mode)
    else:
        dendro = random_divisive(graph, args.seed)

    report = objective_report(graph, dendro)
    summary = {
        "algorithm": args.algo,
        "mode": mode,
        "engine": engine.kind,
        "dendrogram": dendrogram_summary(dendro),
        "objectives": report.to_dict(),
        "ledger": ledger.to_dict() if ledger else None,
    }
    if args.out:
        out_dir = Path(args.out)
        out_dir.mkdir(parents=True, exist_ok=True)
        (out_dir / "dendrogram.txt").write_text(dendrogram_to_text(dendro))
        (out_dir / "summary.json").write_text(json.dumps(summary, indent=2, sort_keys=True) + "\n")
        (out_dir / "objectives.csv").write_text("\n".join(report.csv_rows()) + "\n")
    score = report.value if report.value is not None else report.revenue
    print(
        f"{args.algo} mode={mode} n={graph.n} levels={len(dendro.frontiers) - 1} "
        f"objective={score:.6g}"
        + (f" ledger.levels={ledger.levels}" if ledger else "")
    )
    return 0


def _cmd_eval(args) -> int:
    if args.dataset:
        paths = bundled_datasets()
        if args.dataset not in paths:
            raise GraphError(f"unknown bundled dataset {args.dataset!r}")
        ds = load_dataset(paths[args.dataset], args.dataset)
    else:
        ds = load_dataset(args.input)
    engine = EngineChoice.parse(args.engine, args.epsilon)
    algorithms = DEFAULT_ALGORITHMS if args.algo is None else tuple(args.algo.split(","))
    rows = evaluate_grid(
        ds,
        k=args.k,
        seeds=range(args.seed, args.seed + args.reps),
        engine=engine,
        epsilon=args.epsilon,
        filtered=args.filtered,
        algorithms=algorithms,
        jobs=args.jobs,
    )
    _write_or_print(rows_to_csv(rows), args.out)
    return 0


def _family_spec(args) -> adv.FamilySpec:
    return adv.FamilySpec(
        family=args.family,
        half=args.half,
        n_sets=args.n_sets,
        cube_n=args.cube_n,
        n_half=args.n_half,
        row_bonus=args.row_bonus,
    )


def _cmd_adversarial(args) -> int:
    spec = _family_spec(args)
    graph = adv.generate(spec)
    _, report = adv.adversarial_affinity_run(spec)
    engine = EngineChoice.parse(args.engine, args.epsilon)
    mode = MODE_MAX if graph.orientation == SIMILARITY else MODE_MIN
    dendro, _ = matching_affinity(graph, mode, engine, args.epsilon)
    matching_score = (
        revenue(graph, dendro) if mode == MODE_MAX else value(graph, dendro)
    )
    payload = report.to_dict()
    payload["matching_affinity_score"] = matching_score
    payload["matching_vs_reference"] = (
        matching_score / report.reference_score if report.reference_score else float("inf")
    )
    payload["matching_vs_affinity"] = (
        matching_score / report.affinity_score if report.affinity_score else float("inf")
    )
    if args.report == "json":
        _write_or_print(json.dumps(payload, indent=2, sort_keys=True), args.out)
    else:
        keys = ["family", "objective", "affinity_score", "reference_score", "ratio",
                "matching_affinity_score", "matching_vs_reference", "matching_vs_affinity"]
        lines = [",".join(keys)]
        lines.append(",".join(_csv_num(payload[k]) for k in keys))
        _write_or_print("\n".join(lines), args.out)
    return 0


def _csv_num(x) -> str:
    if isinstance(x, float):
        return f"{x:.12g}"
    return str(x)


def _cmd_sweep(args) -> int:
    from .selftest import random_integer_graph

    sizes = [int(s) for s in args.sizes.split(",") if s]
    engine = EngineChoice.parse(args.engine, args.epsilon)
    rng = np.random.default_rng(0)
    rows = ["mode,n,seed,objective,bound,ok"]
    failures = 0
    modes = [MODE_MAX, MODE_MIN] if args.mode == "both" else [args.mode]
    for mode in modes:
        for n in sizes:
            pow2 = n & (n - 1) == 0
            for seed in range(args.seeds):
                orientation = SIMILARITY if mode == MODE_MAX else DISSIMILARITY
                g = random_integer_graph(rng, n, orientation)
                dendro, _ = matching_affinity(g, mode, engine, args.epsilon)
                if mode == MODE_MAX:
                    got = revenue(g, dendro)
                    bound = (n - 2) * g.total_weight() / (3 if pow2 else 9)
                else:
                    got = value(g, dendro)
                    bound = n * g.total_weight() * (2 / 3 if pow2 else 1 / 3)
                ok = got >= bound - 1e-6
                failures += 0 if ok else 1
                rows.append(
                    f"{mode},{n},{seed},{got:.12g},{bound:.12g},{int(ok)}"
                )
    if args.out:
        Path(args.out).write_text("\n".join(rows) + "\n")
    print(f"sweep: {len(rows) - 1} runs, {failures} bound violations")
    return CHECK_FAILED if failures else 0


def _cmd_selftest(args) -> int:
    names = args.only.split(",") if args.only else None
    failed = run_selftest(names)
    return CHECK_FAILED if failed else 0


def main(argv=None) -> int:
    parser = _build_parser()
    args = parser.parse_args(argv)
    handlers = {
        "cluster": _cmd_cluster,
        "eval": _cmd_eval,
        "adversarial": _cmd_adversarial,
        "sweep": _cmd_sweep,
        "selftest": _cmd_selftest,
    }
    try:
        return handlers[args.subcommand](args)
    except (GraphError, MatchingError, EngineInfeasibleError, OSError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return USAGE_ERROR


if __name__ == "__main__":
    sys.exit(main())
