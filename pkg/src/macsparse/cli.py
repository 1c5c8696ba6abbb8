"""Command-line entry point: ``macsparse <command> ...``.

Exit codes: 0 success, 2 input error, 3 solver error, 4 partial bench
failure.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path

from . import __version__
from .backbone import odometry_backbone, spectral_backbone
from .bench import expand_matrix, run_bench, run_replay
from .errors import InputError, SolverError
from .fiedler import fiedler_dense_oracle, fiedler_shift_invert
from .generate import KINDS, generate
from .graph import build_laplacian
from .io import format_edge_list, read_graph
from .pipeline import BACKBONES, PRESETS, RunConfig, read_config_file, sparsify
from .rounding import STRATEGIES

EXIT_OK, EXIT_INPUT, EXIT_SOLVER, EXIT_PARTIAL = 0, 2, 3, 4

log = logging.getLogger("macsparse")


def _global_flags(suppress: bool) -> argparse.ArgumentParser:
    # shared by the top-level parser and each subcommand so the flags may
    # appear on either side of the command name
    default = argparse.SUPPRESS if suppress else None
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--seed", type=int, default=default,
                   help="RNG seed for start vectors and randomized rounding")
    p.add_argument("--jobs", type=int, default=default if suppress else 1,
                   help="worker processes for bench sweeps")
    p.add_argument("--deterministic-output", action="store_true",
                   default=default if suppress else False,
                   help="omit timing columns so reruns give identical bytes")
    p.add_argument("-v", "--verbose", action="count", default=default if suppress else 0)
    return p


def _input_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("input", help="edge list (u v w [f|c]) or .g2o file")
    p.add_argument("--format", choices=("auto", "edges", "g2o"), default=None)
    p.add_argument("--weight-rule", default=None,
                   help="g2o information reduction: trace, min-eig-2x2-rot or fixed:<value>")
    p.add_argument("--odom-backbone", action="store_true", default=None,
                   help="mark consecutive-id g2o edges as fixed")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="macsparse", parents=[_global_flags(False)],
        description="Select K edges maximizing algebraic connectivity.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _global_flags(True)

    sp = sub.add_parser("sparsify", parents=[common], help="relax, round and write a selection")
    _input_flags(sp)
    sp.add_argument("-o", "--output", default=None, help="output directory")
    sp.add_argument("--config", help="key=value file; command-line flags override it")
    sp.add_argument("--backbone", choices=BACKBONES, default=None,
                    help="fixed-edge policy (file: use the f markers as given)")
    sp.add_argument("--strategy", choices=sorted(PRESETS), default=None,
                    help="named backbone and rounding pair")
    sp.add_argument("--steprule", "--step", dest="steprule", default=None,
                    help="naive, exact[:evals], backtracking or pairwise[:evals]")
    sp.add_argument("--rounding", choices=STRATEGIES, default=None)
    sp.add_argument("--budget", default=None,
                    help="integer K, or a fraction (0.3 or 30%%) of the candidate edges "
                         "left after the backbone is removed")
    sp.add_argument("--epsilon-u", type=float, default=None, help="relative duality-gap tolerance")
    sp.add_argument("--iterations", type=int, default=None, help="maximum Frank-Wolfe iterations")
    sp.add_argument("--sigma", type=float, default=None, help="eigensolver shift (default auto)")
    sp.add_argument("--return-last", action="store_true", default=None,
                    help="return the last iterate instead of the best one")
    sp.add_argument("--backbone-counts-against-budget", action="store_true", default=None)

    fp = sub.add_parser("fiedler", parents=[common], help="print lambda_2 and write q_2")
    _input_flags(fp)
    fp.add_argument("--sigma", type=float, default=None)
    fp.add_argument("-o", "--output", help="write lambda2 and q2 here (CSV)")
    fp.add_argument("--dense", action="store_true", help="use the dense reference solver")

    bp = sub.add_parser("backbone", parents=[common], help="write a fixed-edge backbone")
    _input_flags(bp)
    bp.add_argument("--method", choices=("spectral", "odometry"), default="spectral")
    bp.add_argument("-o", "--output", help="edge-list file (stdout if omitted)")

    ben = sub.add_parser("bench", parents=[common], help="run a benchmark matrix or replay")
    ben.add_argument("config", help="bench key=value file, or an input graph with --replay")
    ben.add_argument("-o", "--output", default="bench_out")
    ben.add_argument("--replay", action="store_true",
                     help="time Fiedler solvers on Laplacians saved from a naive run")
    ben.add_argument("--iterations", type=int, default=50, help="saved iterates for --replay")
    ben.add_argument("--budget", default=None)
    ben.add_argument("--repeats", type=int, default=None)

    gp = sub.add_parser("generate", parents=[common], help="write a synthetic edge list")
    gp.add_argument("kind", choices=KINDS)
    gp.add_argument("params", nargs="*", metavar="key=value",
                    help="rows/cols (grid2d), nx/ny/nz (grid3d), n/radius (geometric), "
                         "n/p (chain-closures)")
    gp.add_argument("-o", "--output", help="output file (stdout if omitted)")
    return parser


def _read(args):
    return read_graph(args.input, args.format or "auto", args.weight_rule or "trace",
                      bool(args.odom_backbone))


def cmd_sparsify(args) -> int:
    values = read_config_file(args.config) if args.config else {}
    values.update({k: v for k, v in {
        "input": args.input, "format": args.format, "weight_rule": args.weight_rule,
        "odom_backbone": args.odom_backbone, "backbone": args.backbone,
        "steprule": args.steprule, "rounding": args.rounding, "budget": args.budget,
        "epsilon_u": args.epsilon_u, "iterations": args.iterations, "sigma": args.sigma,
        "output": args.output, "return_last": args.return_last,
        "backbone_counts_against_budget": args.backbone_counts_against_budget,
    }.items() if v is not None})
    if args.strategy:
        values["strategy"] = args.strategy
    if args.seed is not None:
        values["seed"] = args.seed
    values["deterministic_output"] = args.deterministic_output or values.get(
        "deterministic_output", False)
    config = RunConfig.from_mapping(values)
    res = sparsify(config)
    print(f"K={res.partition.K} fixed={res.partition.fixed.size} "
          f"lambda2_rounded={res.lambda2_rounded:.10g} lambda2_relaxed={res.mac.lambda2:.10g} "
          f"dual={res.mac.u_final:.10g} iters={res.mac.iterations}")
    return EXIT_OK


def cmd_fiedler(args) -> int:
    g, _ = _read(args)
    L = build_laplacian(g)
    pair = fiedler_dense_oracle(L) if args.dense else fiedler_shift_invert(L, sigma=args.sigma)
    print(float(f"{pair.lambda2:.12g}"))
    if args.output:
        lines = [f"# lambda2 {pair.lambda2!r}", "node,label,q2"]
        lines += [f"{i},{lbl},{q!r}" for i, (lbl, q) in enumerate(zip(g.labels, pair.q2.tolist()))]
        Path(args.output).write_text("\n".join(lines) + "\n")
    return EXIT_OK


def cmd_backbone(args) -> int:
    g, part = _read(args)
    if args.method == "spectral":
        fixed = spectral_backbone(g)
    else:
        fixed = odometry_backbone(g, part.fixed)
    text = format_edge_list(g, fixed, edges=fixed)
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def cmd_bench(args) -> int:
    if args.replay:
        config = RunConfig(input=args.config, budget=args.budget or "0.5", seed=args.seed or 0,
                           deterministic_output=args.deterministic_output)
        _, totals = run_replay(config, args.output, args.iterations)
        for name, tot in totals.items():
            print(f"{name}: {tot:.4f} s")
        return EXIT_OK
    values = read_config_file(args.config)
    base = Path(args.config).parent
    if "input" in values:
        # relative inputs resolve against the config file's directory
        values["input"] = ",".join(
            str(p if Path(p).is_absolute() or Path(p).exists() else base / p)
            for p in (s.strip() for s in values["input"].split(",")) if p)
    overrides = {"budget": args.budget,
                 "repeats": None if args.repeats is None else str(args.repeats)}
    if args.seed is not None:
        values["seed"] = str(args.seed)
    jobs = expand_matrix(values, overrides)
    outcome = run_bench(jobs, args.output, args.jobs, args.deterministic_output)
    print(f"{len(outcome.rows)} rows, {len(outcome.failures)} failed -> {args.output}")
    for s in outcome.sweep:
        if s["points"] > 1:
            state = "nondecreasing" if s["monotone"] else "NOT monotone"
            print(f"sweep {s['dataset']} {s['backbone']}/{s['rounding']}: {state} in K")
    return EXIT_PARTIAL if outcome.failures else EXIT_OK


def cmd_generate(args) -> int:
    params = {}
    for item in args.params:
        if "=" not in item:
            raise InputError(f"expected key=value, got {item!r}")
        k, v = item.split("=", 1)
        params[k.strip()] = v.strip()
    seed = args.seed or 0
    g, fixed = generate(args.kind, params, seed)
    header = f"{args.kind} " + " ".join(f"{k}={v}" for k, v in sorted(params.items()))
    text = format_edge_list(g, fixed, header=f"{header.strip()} seed={seed}")
    if args.output:
        Path(args.output).write_text(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


COMMANDS = {
    "sparsify": cmd_sparsify,
    "fiedler": cmd_fiedler,
    "backbone": cmd_backbone,
    "bench": cmd_bench,
    "generate": cmd_generate,
}


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code not in (0, None) else EXIT_OK
    logging.basicConfig(level=logging.WARNING - 10 * min(args.verbose, 2),
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.command](args)
    except (InputError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except SolverError as exc:
        print(f"solver error: {exc}", file=sys.stderr)
        return EXIT_SOLVER


if __name__ == "__main__":
    sys.exit(main())
