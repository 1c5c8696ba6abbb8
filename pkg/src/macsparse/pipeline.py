"""End-to-end sparsification: read, backbone, relax, round, write."""

from __future__ import annotations

import csv
import io
import logging
import time
from dataclasses import dataclass, fields, replace
from pathlib import Path

import numpy as np

from .backbone import odometry_backbone, spectral_backbone
from .errors import BudgetTooSmall, InputError
from .fiedler import fiedler_shift_invert
from .frank_wolfe import MacProblem, MacResult, solve_mac
from .graph import EdgePartition, Graph, build_laplacian, connected_components
from .io import format_edge_list, read_graph
from .rounding import STRATEGIES, RoundedSelection, round_selection
from .steps import parse_step_rule

log = logging.getLogger(__name__)

BACKBONES = ("none", "odometry", "spectral", "file")
REPORT_COLUMNS = ("dataset", "n", "m", "K", "backbone", "steprule", "rounding", "seed",
                  "lambda2_rounded", "lambda2_relaxed", "dual", "iters", "cum_s", "avg_iter_s")

# named strategies of the backbone comparison: (backbone, rounding)
PRESETS = {
    "MST": ("none", "mst"),
    "MST-Madow": ("none", "mst-madow"),
    "MadowEffR": ("spectral", "madow"),
    "MadowFixed": ("odometry", "madow"),
}


@dataclass(frozen=True)
class RunConfig:
    input: str = ""
    format: str = "auto"
    weight_rule: str = "trace"
    odom_backbone: bool = False
    backbone: str = "none"
    steprule: str = "naive"
    rounding: str = "madow"
    budget: str = "0.5"
    epsilon_u: float = 1e-2
    iterations: int = 50
    sigma: float | None = None
    seed: int = 0
    output: str = "out"
    return_last: bool = False
    backbone_counts_against_budget: bool = False
    deterministic_output: bool = False

    def __post_init__(self):
        if self.backbone not in BACKBONES:
            raise InputError(f"unknown backbone policy {self.backbone!r}; choose from {BACKBONES}")
        if self.rounding not in STRATEGIES:
            raise InputError(f"unknown rounding {self.rounding!r}; choose from {STRATEGIES}")
        try:
            parse_step_rule(self.steprule)
        except ValueError as exc:
            raise InputError(str(exc)) from None
        parse_budget(self.budget)

    @classmethod
    def from_mapping(cls, values: dict) -> "RunConfig":
        """Build from string values (config files, CLI); unknown keys raise."""
        known = {f.name: f for f in fields(cls)}
        kwargs = {}
        for key, raw in values.items():
            name = key.replace("-", "_")
            if name == "strategy":
                if raw not in PRESETS:
                    raise InputError(f"unknown strategy {raw!r}; choose from {sorted(PRESETS)}")
                kwargs["backbone"], kwargs["rounding"] = PRESETS[raw]
                continue
            if name not in known:
                raise InputError(f"unknown configuration key {key!r}")
            kwargs[name] = _coerce(name, raw)
        return cls(**kwargs)

    def with_overrides(self, values: dict) -> "RunConfig":
        merged = {k: v for k, v in values.items() if v is not None}
        if not merged:
            return self
        base = RunConfig.from_mapping(merged)
        return replace(self, **{k: getattr(base, k) for k in _resolved_keys(merged)})


def _resolved_keys(values: dict) -> list:
    keys = []
    for key in values:
        name = key.replace("-", "_")
        keys.extend(("backbone", "rounding") if name == "strategy" else (name,))
    return keys


def _coerce(name: str, raw):
    if not isinstance(raw, str):
        return raw
    raw = raw.strip()
    try:
        if name in ("odom_backbone", "return_last", "backbone_counts_against_budget",
                    "deterministic_output"):
            low = raw.lower()
            if low not in ("1", "0", "true", "false", "yes", "no", "on", "off"):
                raise ValueError(raw)
            return low in ("1", "true", "yes", "on")
        if name in ("iterations", "seed"):
            return int(raw)
        if name == "epsilon_u":
            return float(raw)
        if name == "sigma":
            return None if raw.lower() in ("", "auto", "none") else float(raw)
    except ValueError:
        raise InputError(f"bad value {raw!r} for {name}") from None
    return raw


def read_config_file(path) -> dict:
    """Flat ``key = value`` lines; ``#`` comments; values stay strings."""
    out = {}
    for lineno, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise InputError(f"{path}:{lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        out[key] = value
    return out


def parse_budget(spec) -> tuple[str, float]:
    """``("abs", K)`` for integers, ``("frac", f)`` for ``0.3`` or ``30%``."""
    s = str(spec).strip()
    try:
        if s.endswith("%"):
            kind, val = "frac", float(s[:-1]) / 100.0
        elif "." in s or "e" in s.lower():
            kind, val = "frac", float(s)
        else:
            kind, val = "abs", float(int(s))
    except ValueError:
        raise InputError(f"bad budget {spec!r}") from None
    if kind == "frac" and not 0 < val <= 1:
        raise InputError(f"budget fraction must lie in (0, 1], got {val}")
    if kind == "abs" and val < 0:
        raise InputError("absolute budget must be nonnegative")
    return kind, val


def resolve_budget(spec, m_candidates: int) -> int:
    kind, val = parse_budget(spec)
    if kind == "abs":
        return int(val)
    return int(round(val * m_candidates))


def choose_backbone(g: Graph, marked: np.ndarray, policy: str) -> np.ndarray:
    if policy == "none":
        return np.empty(0, np.int64)
    if policy == "file":
        return np.asarray(marked, dtype=np.int64)
    if policy == "odometry":
        return odometry_backbone(g, marked)
    if policy == "spectral":
        return spectral_backbone(g)
    raise InputError(f"unknown backbone policy {policy!r}")


def build_partition(g: Graph, fixed, budget, counts_against_budget: bool = False,
                    rounding: str | None = None) -> EdgePartition:
    """Candidate/fixed split with the budget resolved against the candidates.

    Fractions apply to the candidate edges left after the backbone is
    removed.  With ``counts_against_budget`` the budget covers backbone
    and candidates together and the backbone size is subtracted.
    """
    fixed = np.unique(np.asarray(fixed, dtype=np.int64))
    cand = np.setdiff1d(np.arange(g.m), fixed)
    if counts_against_budget:
        K = resolve_budget(budget, cand.size + fixed.size) - fixed.size
        if K < 0:
            raise InputError(f"budget is smaller than the {fixed.size}-edge backbone")
    else:
        K = resolve_budget(budget, cand.size)
    if K > cand.size:
        raise InputError(f"budget K={K} exceeds the {cand.size} candidate edges")
    if rounding in ("mst", "mst-madow"):
        c_fixed, _ = connected_components(g, fixed)
        if K < c_fixed - 1:
            raise BudgetTooSmall(
                f"connected rounding needs K >= {c_fixed - 1} with this backbone, got K={K}")
    return EdgePartition(fixed, cand, K)


def selection_lambda2(g: Graph, edges) -> float:
    """``lambda_2`` of the subgraph on ``edges`` (zero when disconnected)."""
    sub = g.subgraph(np.sort(np.asarray(edges, dtype=np.int64)))
    count, _ = connected_components(sub)
    if count > 1 or g.n < 2:
        return 0.0
    return fiedler_shift_invert(build_laplacian(sub)).lambda2


@dataclass
class SparsifyResult:
    config: RunConfig
    graph: Graph
    partition: EdgePartition
    mac: MacResult
    selection: RoundedSelection
    edges: np.ndarray  # selected edge indices of the input graph, fixed included
    lambda2_rounded: float
    seconds: float

    def report_row(self, dataset: str | None = None, deterministic: bool = False) -> dict:
        iters = max(self.mac.iterations, 1)
        return {
            "dataset": dataset or Path(self.config.input).stem,
            "n": self.graph.n,
            "m": self.graph.m,
            "K": self.partition.K,
            "backbone": self.config.backbone,
            "steprule": self.config.steprule,
            "rounding": self.config.rounding,
            "seed": self.config.seed,
            "lambda2_rounded": self.lambda2_rounded,
            "lambda2_relaxed": self.mac.lambda2,
            "dual": self.mac.u_final,
            "iters": self.mac.iterations,
            "cum_s": "" if deterministic else self.seconds,
            "avg_iter_s": "" if deterministic else self.seconds / iters,
        }


def format_row(row: dict) -> list:
    out = []
    for col in REPORT_COLUMNS:
        v = row[col]
        out.append(repr(float(v)) if isinstance(v, (float, np.floating)) else v)
    return out


def csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    w.writerows(rows)
    return buf.getvalue()


def relax(g: Graph, partition: EdgePartition, config: RunConfig) -> MacResult:
    problem = MacProblem(g, partition, config.epsilon_u, config.iterations, config.sigma,
                         seed=config.seed)
    return solve_mac(problem, parse_step_rule(config.steprule),
                     return_last=config.return_last)


def round_relaxed(g: Graph, partition: EdgePartition, mac: MacResult, rounding: str,
                  seed: int) -> tuple[RoundedSelection, np.ndarray, float]:
    sel = round_selection(rounding, g, mac.x_relaxed, partition.K, seed=seed,
                          partition=partition)
    edges = np.sort(np.concatenate([partition.fixed, partition.candidate[sel.chosen]]))
    return sel, edges, selection_lambda2(g, edges)


def load_input(config: RunConfig) -> tuple[Graph, EdgePartition]:
    try:
        g, marked = read_graph(config.input, config.format, config.weight_rule,
                               config.odom_backbone)
    except OSError as exc:
        raise InputError(f"cannot read {config.input}: {exc}") from None
    count, _ = connected_components(g)
    if count > 1:
        raise InputError(f"input graph has {count} connected components")
    return g, marked


def sparsify(config: RunConfig, write: bool = True) -> SparsifyResult:
    """Run the full pipeline; with ``write`` the outputs go to ``config.output``."""
    t0 = time.perf_counter()
    g, marked = load_input(config)
    fixed = choose_backbone(g, marked.fixed, config.backbone)
    partition = build_partition(g, fixed, config.budget, config.backbone_counts_against_budget,
                                config.rounding)
    mac = relax(g, partition, config)
    sel, edges, lam = round_relaxed(g, partition, mac, config.rounding, config.seed)
    mac.x_rounded = sel.indicator(partition.candidate.size)
    result = SparsifyResult(config, g, partition, mac, sel, edges, lam,
                            time.perf_counter() - t0)
    if lam > mac.u_final + 1e-6:
        log.warning("rounded lambda2 %.6g exceeds the dual bound %.6g", lam, mac.u_final)
    if write:
        write_outputs(result, Path(config.output))
    return result


def write_outputs(result: SparsifyResult, outdir: Path) -> None:
    det = result.config.deterministic_output
    g, part = result.graph, result.partition
    outdir.mkdir(parents=True, exist_ok=True)
    (outdir / "selected.edges").write_text(
        format_edge_list(g, part.fixed, result.edges))
    x_rows = [[int(k), g.labels[g.u[k]], g.labels[g.v[k]], repr(float(xk))]
              for k, xk in zip(part.candidate, result.mac.x_relaxed)]
    (outdir / "relaxed_x.csv").write_text(csv_text(("edge", "u", "v", "x"), x_rows))
    (outdir / "trace.csv").write_text(result.mac.trace.to_csv(deterministic=det))
    (outdir / "summary.csv").write_text(
        csv_text(REPORT_COLUMNS, [format_row(result.report_row(deterministic=det))]))
    (outdir / "node_map.csv").write_text(
        csv_text(("node", "label"), [[i, lbl] for i, lbl in enumerate(g.labels)]))


__all__ = [
    "BACKBONES",
    "PRESETS",
    "REPORT_COLUMNS",
    "RunConfig",
    "SparsifyResult",
    "build_partition",
    "choose_backbone",
    "parse_budget",
    "read_config_file",
    "resolve_budget",
    "selection_lambda2",
    "sparsify",
]
