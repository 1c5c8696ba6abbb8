"""Benchmark sweeps and Laplacian replay timing.

A bench config is a flat ``key = value`` file where comma-separated values
span a matrix.  Matrix keys: ``input``, ``budget``, ``backbone``,
``steprule``, ``rounding`` and ``strategy`` (a named backbone/rounding
pair).  ``repeats`` sets how many consecutive seeds (from ``seed``) each
randomized rounding gets.  Every other key is a scalar ``RunConfig``
field shared by all runs.

One relaxed solve serves every rounding strategy and seed that shares its
input, budget, backbone and step rule.
"""

from __future__ import annotations

import itertools
import logging
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import eigsh

from .errors import InputError, MacError, TooLarge
from .fiedler import FiedlerSolver, default_shift, fiedler_dense_oracle
from .frank_wolfe import MacProblem, solve_mac
from .graph import EdgePartition, Graph
from .pipeline import (
    PRESETS,
    REPORT_COLUMNS,
    RunConfig,
    build_partition,
    choose_backbone,
    csv_text,
    format_row,
    load_input,
    relax,
    round_relaxed,
)
from .steps import NaiveDecay

log = logging.getLogger(__name__)

MATRIX_KEYS = ("input", "budget", "backbone", "steprule", "rounding", "strategy")
RANDOMIZED = ("madow", "mst-madow")
AGGREGATE_COLUMNS = ("dataset", "n", "m", "K", "backbone", "steprule", "rounding", "runs",
                     "lambda2_rounded_mean", "lambda2_rounded_std", "lambda2_relaxed",
                     "dual", "cum_s_mean")
REPLAY_COLUMNS = ("iter", "solver", "millis", "lambda2")


@dataclass(frozen=True)
class BenchJob:
    index: int
    config: RunConfig  # rounding field unused; see ``roundings``
    roundings: tuple  # ((rounding, (seed, ...)), ...)


def _split(value) -> list:
    return [v.strip() for v in str(value).split(",") if v.strip()]


def expand_matrix(values: dict, overrides: dict | None = None) -> list:
    """Expand a bench mapping into jobs (one relaxed solve each)."""
    values = dict(values)
    values.update({k: v for k, v in (overrides or {}).items() if v is not None})
    repeats = int(values.pop("repeats", 1))
    matrix = {k: _split(values.pop(k)) for k in MATRIX_KEYS if k in values}
    base = RunConfig.from_mapping(values)
    inputs = matrix.get("input", [base.input])
    budgets = matrix.get("budget", [base.budget])
    steprules = matrix.get("steprule", [base.steprule])
    if "strategy" in matrix:
        pairs = []
        for name in matrix["strategy"]:
            if name not in PRESETS:
                raise InputError(f"unknown strategy {name!r}; choose from {sorted(PRESETS)}")
            pairs.append(PRESETS[name])
    else:
        pairs = list(itertools.product(matrix.get("backbone", [base.backbone]),
                                       matrix.get("rounding", [base.rounding])))
    by_backbone = {}
    for backbone, rounding in pairs:
        by_backbone.setdefault(backbone, [])
        if rounding not in by_backbone[backbone]:
            by_backbone[backbone].append(rounding)
    jobs = []
    for inp, budget, backbone, step in itertools.product(inputs, budgets, by_backbone, steprules):
        rnds = []
        for rounding in by_backbone[backbone]:
            n_seeds = repeats if rounding in RANDOMIZED else 1
            rnds.append((rounding, tuple(base.seed + i for i in range(n_seeds))))
        cfg = RunConfig.from_mapping({**values, "input": inp, "budget": budget,
                                      "backbone": backbone, "steprule": step,
                                      "rounding": by_backbone[backbone][0]})
        jobs.append(BenchJob(len(jobs), cfg, tuple(rnds)))
    return jobs


def _nan_row(cfg: RunConfig, rounding: str, seed: int, g: Graph | None, K) -> dict:
    nan = float("nan")
    return {"dataset": Path(cfg.input).stem, "n": g.n if g else "", "m": g.m if g else "",
            "K": K, "backbone": cfg.backbone, "steprule": cfg.steprule, "rounding": rounding,
            "seed": seed, "lambda2_rounded": nan, "lambda2_relaxed": nan, "dual": nan,
            "iters": "", "cum_s": nan, "avg_iter_s": nan}


def run_job(job: BenchJob, deterministic: bool = False) -> tuple[list, list]:
    """Rows and failure records for one relaxed solve and its roundings."""
    cfg = job.config
    rows, failures = [], []
    g, partition = None, None
    try:
        g, marked = load_input(cfg)
        fixed = choose_backbone(g, marked.fixed, cfg.backbone)
        needs_tree = any(r in ("mst", "mst-madow") for r, _ in job.roundings)
        partition = build_partition(g, fixed, cfg.budget, cfg.backbone_counts_against_budget,
                                    "mst" if needs_tree else None)
        t0 = time.perf_counter()
        mac = relax(g, partition, cfg)
        relax_s = time.perf_counter() - t0
    except MacError as exc:
        K = partition.K if partition is not None else ""
        for rounding, seeds in job.roundings:
            for seed in seeds:
                rows.append(_nan_row(cfg, rounding, seed, g, K))
                failures.append(_failure(cfg, rounding, seed, exc))
        return rows, failures
    iters = max(mac.iterations, 1)
    for rounding, seeds in job.roundings:
        for seed in seeds:
            try:
                _, _, lam = round_relaxed(g, partition, mac, rounding, seed)
            except MacError as exc:
                rows.append(_nan_row(cfg, rounding, seed, g, partition.K))
                failures.append(_failure(cfg, rounding, seed, exc))
                continue
            if lam > mac.u_final + 1e-6:
                log.warning("sandwich violated: rounded %.6g > dual %.6g", lam, mac.u_final)
            rows.append({
                "dataset": Path(cfg.input).stem, "n": g.n, "m": g.m, "K": partition.K,
                "backbone": cfg.backbone, "steprule": cfg.steprule, "rounding": rounding,
                "seed": seed, "lambda2_rounded": lam, "lambda2_relaxed": mac.lambda2,
                "dual": mac.u_final, "iters": mac.iterations,
                "cum_s": "" if deterministic else relax_s,
                "avg_iter_s": "" if deterministic else relax_s / iters,
            })
    return rows, failures


def _failure(cfg, rounding, seed, exc) -> dict:
    return {"dataset": Path(cfg.input).stem, "budget": cfg.budget, "backbone": cfg.backbone,
            "steprule": cfg.steprule, "rounding": rounding, "seed": seed,
            "error": type(exc).__name__, "message": str(exc)}


def _run_job_star(args):
    return run_job(*args)


def aggregate(rows: list) -> list:
    """Mean and standard deviation of ``lambda2_rounded`` per configuration."""
    groups = {}
    for r in rows:
        key = (r["dataset"], r["n"], r["m"], r["K"], r["backbone"], r["steprule"], r["rounding"])
        groups.setdefault(key, []).append(r)
    out = []
    for key, grp in groups.items():
        lam = np.array([float(r["lambda2_rounded"]) for r in grp])
        ok = lam[np.isfinite(lam)]
        cum = [float(r["cum_s"]) for r in grp if r["cum_s"] != ""]
        out.append(dict(zip(AGGREGATE_COLUMNS[:7], key), runs=len(grp),
                        lambda2_rounded_mean=float(ok.mean()) if ok.size else math.nan,
                        lambda2_rounded_std=float(ok.std(ddof=1)) if ok.size > 1 else
                        (0.0 if ok.size == 1 else math.nan),
                        lambda2_relaxed=float(grp[0]["lambda2_relaxed"]),
                        dual=float(grp[0]["dual"]),
                        cum_s_mean=float(np.mean(cum)) if cum else ""))
    return out


def sweep_monotonicity(agg: list) -> list:
    """Whether mean rounded ``lambda2`` is nondecreasing in ``K`` per strategy."""
    series = {}
    for r in agg:
        key = (r["dataset"], r["backbone"], r["steprule"], r["rounding"])
        series.setdefault(key, []).append((int(r["K"]) if r["K"] != "" else -1,
                                           r["lambda2_rounded_mean"]))
    out = []
    for key, pts in series.items():
        pts.sort()
        vals = [v for _, v in pts]
        mono = all(b >= a - 1e-12 for a, b in zip(vals, vals[1:]))
        out.append(dict(zip(("dataset", "backbone", "steprule", "rounding"), key),
                        points=len(pts), monotone=mono))
    return out


@dataclass
class BenchOutcome:
    rows: list
    failures: list
    aggregates: list
    sweep: list


def run_bench(jobs: list, outdir, n_jobs: int = 1, deterministic: bool = False) -> BenchOutcome:
    """Run every job, write ``report.csv``, ``aggregate.csv``, ``sweep_check.csv``
    and, if anything failed, ``failures.csv``."""
    args = [(job, deterministic) for job in jobs]
    if n_jobs > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=n_jobs) as pool:
            results = list(pool.map(_run_job_star, args))
    else:
        results = [run_job(*a) for a in args]
    rows = [r for rs, _ in results for r in rs]
    failures = [f for _, fs in results for f in fs]
    agg = aggregate(rows)
    sweep = sweep_monotonicity(agg)
    outdir = Path(outdir)
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "report.csv").write_text(csv_text(REPORT_COLUMNS, [format_row(r) for r in rows]))
    (outdir / "aggregate.csv").write_text(csv_text(
        AGGREGATE_COLUMNS, [[_fmt(r[c]) for c in AGGREGATE_COLUMNS] for r in agg]))
    sweep_cols = ("dataset", "backbone", "steprule", "rounding", "points", "monotone")
    (outdir / "sweep_check.csv").write_text(csv_text(
        sweep_cols, [[r[c] for c in sweep_cols] for r in sweep]))
    fail_path = outdir / "failures.csv"
    if failures:
        cols = ("dataset", "budget", "backbone", "steprule", "rounding", "seed", "error", "message")
        fail_path.write_text(csv_text(cols, [[f[c] for c in cols] for f in failures]))
    elif fail_path.exists():
        fail_path.unlink()
    return BenchOutcome(rows, failures, agg, sweep)


def _fmt(v):
    return repr(float(v)) if isinstance(v, (float, np.floating)) else v


def record_laplacians(g: Graph, partition: EdgePartition, iterations: int = 50,
                      seed: int = 0) -> list:
    """Laplacians ``L(x_t)`` of a naive-step run with the gap test disabled."""
    problem = MacProblem(g, partition, epsilon_u=0.0, max_iterations=iterations, seed=seed)
    saved = []
    solve_mac(problem, NaiveDecay(),
              callback=lambda t, x, pair: saved.append(problem.laplacian(x)))
    return saved


def _eigsh_lambda2(L) -> float:
    sigma = default_shift(L)
    vals = eigsh(L, k=2, sigma=sigma, which="LM", return_eigenvectors=False)
    return float(np.sort(vals)[1])


def replay(laplacians: list, outdir=None, deterministic: bool = False,
           solvers=("shift-invert", "dense", "eigsh")) -> tuple[list, dict]:
    """Time each solver on every saved Laplacian (one untimed warm-up each).

    Returns ``(rows, totals)`` with ``totals[solver]`` in seconds; the dense
    solver is skipped (NaN) above its size limit.
    """
    if not laplacians:
        return [], {}
    pattern = laplacians[0]
    ours = FiedlerSolver(pattern, check_connected=False)
    funcs = {
        "shift-invert": lambda L: ours.solve(L).lambda2,
        "dense": lambda L: fiedler_dense_oracle(L).lambda2,
        "eigsh": _eigsh_lambda2,
    }
    rows, totals = [], {}
    for name in solvers:
        fn = funcs[name]
        try:
            fn(laplacians[0])
        except TooLarge:
            totals[name] = math.nan
            rows.extend({"iter": t, "solver": name, "millis": math.nan, "lambda2": math.nan}
                        for t in range(len(laplacians)))
            continue
        total = 0.0
        for t, L in enumerate(laplacians):
            L = sp.csr_matrix(L)
            t0 = time.perf_counter()
            lam = fn(L)
            dt = time.perf_counter() - t0
            total += dt
            rows.append({"iter": t, "solver": name, "millis": 1e3 * dt, "lambda2": lam})
        totals[name] = total
    if outdir is not None:
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        body = [[r["iter"], r["solver"], "" if deterministic else _fmt(r["millis"]),
                 _fmt(r["lambda2"])] for r in rows]
        (outdir / "replay.csv").write_text(csv_text(REPLAY_COLUMNS, body))
        ref = totals.get("dense", math.nan)
        summary = [[name, "" if deterministic else _fmt(tot),
                    "" if deterministic else _fmt(ref / tot if tot and np.isfinite(ref) else math.nan)]
                   for name, tot in totals.items()]
        (outdir / "replay_summary.csv").write_text(
            csv_text(("solver", "total_s", "speedup_vs_dense"), summary))
    return rows, totals


def run_replay(config: RunConfig, outdir, iterations: int = 50) -> tuple[list, dict]:
    g, marked = load_input(config)
    fixed = choose_backbone(g, marked.fixed, config.backbone)
    partition = build_partition(g, fixed, config.budget, config.backbone_counts_against_budget)
    saved = record_laplacians(g, partition, iterations, config.seed)
    return replay(saved, outdir, config.deterministic_output)


__all__ = [
    "BenchJob",
    "BenchOutcome",
    "aggregate",
    "expand_matrix",
    "record_laplacians",
    "replay",
    "run_bench",
    "run_job",
    "run_replay",
    "sweep_monotonicity",
]
