"""Command-line entry point: ``signedbc {generate,simulate,sweep,metrics,verify}``.

Exit status: 0 on success, 1 on usage or validation errors, 2 when a
verification check of a proven result fails.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

from . import __version__
from .dynamics import VARIANTS, ModelParams, run
from .errors import SignedBCError
from .files import read_trajectory, write_report, write_reports, write_trajectory
from .graph import generate_er_signed, generate_sbm_signed, load_graph, save_graph
from .metrics import compute_report
from .rng import child_rng, fresh_seed
from .sweep import PRESETS, SweepConfig, export, run_sweep, with_overrides
from .verify import SUITE, reports_json, run_suite, suite_failed

EXIT_OK, EXIT_INVALID, EXIT_VERIFY = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _prob(text: str) -> float:
    v = float(text)
    if not 0.0 <= v <= 1.0:
        raise argparse.ArgumentTypeError(f"{text} is not a probability in [0, 1]")
    return v


def _positive(text: str) -> float:
    v = float(text)
    if not v > 0:
        raise argparse.ArgumentTypeError(f"{text} must be positive")
    return v


def _count(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"{text} must be a positive integer")
    return v


def _seed(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError("seed must be non-negative")
    return v


def _add_seed(p):
    p.add_argument("--seed", type=_seed, help="random seed; drawn from OS entropy and printed when omitted")


def _add_generator(p, required: bool):
    topo = p.add_mutually_exclusive_group(required=required)
    topo.add_argument("--topology", choices=("er", "sbm"))
    topo.add_argument("--er", dest="topology", action="store_const", const="er",
                      help="signed Erdos-Renyi graph (same as --topology er)")
    topo.add_argument("--sbm", dest="topology", action="store_const", const="sbm",
                      help="signed stochastic block model (same as --topology sbm)")
    p.add_argument("--n", type=_count, default=100, help="node count n (default 100)")
    p.add_argument("--p1", type=_prob, default=0.5, help="attractive-layer edge probability p1")
    p.add_argument("--p2", type=_prob, default=0.0, help="repulsive-layer edge probability p2")
    p.add_argument("--rho", type=_prob, default=1.0, help="cross-group scaling rho (sbm)")
    p.add_argument("--k", type=_count, default=5, help="number of groups k (sbm, default 5)")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="signedbc", description=__doc__.splitlines()[0])
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("generate", help="sample a signed graph and write it as an edge list")
    _add_generator(g, required=True)
    _add_seed(g)
    g.add_argument("--out", required=True, help="graph file to write")

    s = sub.add_parser("simulate", help="run one trajectory")
    src = s.add_argument_group("graph source (file or inline generator)")
    src.add_argument("--graph", help="edge-list file produced by 'generate'")
    _add_generator(s, required=False)
    s.add_argument("--c", type=_positive, required=True, help="confidence bound c")
    s.add_argument("--variant", choices=VARIANTS, default="scaled")
    s.add_argument("--tol", type=_positive, default=1e-8, help="convergence tolerance on max displacement")
    s.add_argument("--max-iter", type=_count, default=10_000, help="iteration cap")
    s.add_argument("--run-all", action="store_true", help="run all max-iter steps instead of stopping early")
    s.add_argument("--detect-cycles", action="store_true")
    s.add_argument("--init-lo", type=float, default=0.0, help="initial opinions ~ U[lo, hi]")
    s.add_argument("--init-hi", type=float, default=1.0)
    s.add_argument("--save-graph", help="also write the generated graph here")
    _add_seed(s)
    s.add_argument("--out", default="trajectory.csv", help="trajectory CSV (sidecar <stem>.meta.json)")

    w = sub.add_parser("sweep", help="run a parameter sweep")
    cfg = w.add_mutually_exclusive_group(required=True)
    cfg.add_argument("--config", help="sweep config JSON")
    cfg.add_argument("--preset", choices=sorted(PRESETS))
    w.add_argument("--trials", type=_count)
    w.add_argument("--n", type=_count)
    w.add_argument("--k", type=_count)
    w.add_argument("--tol", type=_positive)
    w.add_argument("--max-iter", type=_count)
    w.add_argument("--variant", choices=VARIANTS)
    w.add_argument("--workers", type=_count, default=1)
    w.add_argument("--format", choices=("csv", "json"), default="csv")
    w.add_argument("--group-by", help="comma-separated aggregate keys (p1,p2,rho,c,ratio)")
    w.add_argument("--seed", type=_seed,
                   help="master seed; defaults to the config's, or entropy for presets")
    w.add_argument("--out", default="sweep_out", help="output directory")

    m = sub.add_parser("metrics", help="compute a metrics report from a trajectory file")
    m.add_argument("--trajectory", required=True, nargs="+", help="one or more trajectory CSVs")
    m.add_argument("--graph", help="graph file carrying the group assignment")
    m.add_argument("--c", type=_positive, help="confidence bound (default: from the sidecar)")
    m.add_argument("--gap-threshold", type=_positive, help="cluster gap (default c/2)")
    _add_seed(m)
    m.add_argument("--out", default="metrics.json",
                   help=".json or .csv; several trajectories give a JSON list or a multi-row CSV")

    v = sub.add_parser("verify", help="run the analytical-result checks")
    v.add_argument("--suite", default="all", help=f"'all' or comma-separated of: {', '.join(SUITE)}")
    _add_seed(v)
    v.add_argument("--out", default="verify_report.json")
    return parser


def _resolve_seed(args) -> int:
    if args.seed is None:
        args.seed = fresh_seed()
    return args.seed


def _generate_graph(args, seed: int):
    rng = child_rng(seed, "graph")
    if args.topology == "sbm":
        return generate_sbm_signed(args.n, args.k, args.p1, args.p2, args.rho, rng)
    return generate_er_signed(args.n, args.p1, args.p2, rng)


def cmd_generate(args) -> int:
    seed = _resolve_seed(args)
    graph = _generate_graph(args, seed)
    save_graph(graph, args.out)
    print(f"seed={seed}")
    print(f"wrote {args.out}: n={graph.n} m={graph.m} m_r={graph.m_r}")
    return EXIT_OK


def cmd_simulate(args) -> int:
    if (args.graph is None) == (args.topology is None):
        raise UsageError("simulate needs exactly one of --graph or --er/--sbm/--topology")
    if not args.init_lo < args.init_hi:
        raise UsageError("--init-lo must be below --init-hi")
    seed = _resolve_seed(args)
    params = ModelParams(c=args.c, tol=args.tol, max_iter=args.max_iter, variant=args.variant,
                         early_stop=not args.run_all, detect_cycles=args.detect_cycles)
    if args.graph:
        graph = load_graph(args.graph)
        source = {"graph_file": str(args.graph)}
    else:
        graph = _generate_graph(args, seed)
        source = {"topology": args.topology, "n": args.n, "p1": args.p1, "p2": args.p2}
        if args.topology == "sbm":
            source.update(k=args.k, rho=args.rho)
        if args.save_graph:
            save_graph(graph, args.save_graph)
    x0 = child_rng(seed, "opinions").uniform(args.init_lo, args.init_hi, size=graph.n)
    traj = run(x0, graph, params)
    write_trajectory(traj, args.out, seed=seed,
                     extra={"graph": source, "initial_interval": [args.init_lo, args.init_hi]})
    report = compute_report(traj.initial, traj.final, args.c, graph.group_of)
    print(f"seed={seed}")
    print(f"converged={traj.converged} T={traj.stopping_time} cycle={traj.cycle_detected} "
          f"spread={report.opinion_spread:.6g} clusters={report.cluster_count} regime={report.regime}")
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_sweep(args) -> int:
    if args.config:
        config = SweepConfig.from_json(args.config)
        seed = args.seed if args.seed is not None else config.master_seed
    else:
        config = PRESETS[args.preset]()
        seed = _resolve_seed(args)
    config = with_overrides(config, master_seed=seed, trials=args.trials, n=args.n, k=args.k,
                            tol=args.tol, max_iter=args.max_iter, variant=args.variant)
    group_by = None
    if args.group_by:
        group_by = [p.strip() for p in args.group_by.split(",") if p.strip()]
    result = run_sweep(config, workers=args.workers)
    out = export(result, args.out, format=args.format, group_by=group_by)
    print(f"seed={config.master_seed}")
    print(f"{len(result.records)} records, {len(result.errors())} errors -> {out}")
    return EXIT_OK


def cmd_metrics(args) -> int:
    seed = _resolve_seed(args)  # metrics are deterministic; accepted for a uniform interface
    groups = load_graph(args.graph).group_of if args.graph else None
    reports = []
    for path in args.trajectory:
        traj, _ = read_trajectory(path)
        c = args.c if args.c is not None else traj.params.c
        reports.append(compute_report(traj.initial, traj.final, c, groups, args.gap_threshold))
    if len(reports) == 1:
        write_report(reports[0], args.out)
    else:
        write_reports(reports, args.trajectory, args.out)
    print(f"seed={seed}")
    for path, report in zip(args.trajectory, reports):
        print(f"{path}: spread={report.opinion_spread} clusters={report.cluster_count} regime={report.regime}")
    print(f"wrote {args.out}")
    return EXIT_OK


def cmd_verify(args) -> int:
    seed = _resolve_seed(args)
    try:
        reports = run_suite(args.suite, seed)
    except KeyError as exc:
        raise UsageError(str(exc.args[0])) from exc
    Path(args.out).write_text(reports_json(reports, seed) + "\n")
    print(f"seed={seed}")
    for rep in reports:
        print(rep.summary())
    failed = suite_failed(reports)
    print(f"wrote {args.out}; {'FAILED' if failed else 'ok'}")
    return EXIT_VERIFY if failed else EXIT_OK


COMMANDS = {
    "generate": cmd_generate,
    "simulate": cmd_simulate,
    "sweep": cmd_sweep,
    "metrics": cmd_metrics,
    "verify": cmd_verify,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
        return COMMANDS[args.command](args)
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return EXIT_INVALID
    except (SignedBCError, ValueError, OSError, json.JSONDecodeError) as exc:
        print(f"signedbc: error: {exc}", file=sys.stderr)
        return EXIT_INVALID


if __name__ == "__main__":
    sys.exit(main())
