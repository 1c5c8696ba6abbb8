"""Frank-Wolfe maximization of algebraic connectivity over edge selections.

The relaxed problem is

    maximize   lambda_2(L_f + sum_k x_k L_k)
    subject to 0 <= x <= 1,  sum(x) = K

whose objective is concave in ``x``.  A supergradient comes from the
Fiedler vector, the linear maximization oracle over the feasible polytope
is a top-K selection, and the linearization gives a running upper (dual)
bound ``u`` used as the stopping certificate.
"""

from __future__ import annotations

import csv
import io
import logging
import time
from dataclasses import dataclass, field

import numpy as np

from .errors import ActiveSetOverflow, DisconnectedGraph, InfeasibleBudget
from .fiedler import FiedlerPair, FiedlerSolver, deflate
from .graph import EdgePartition, Graph, LaplacianAssembler
from .steps import (
    Backtracking,
    BacktrackingState,
    ExactLineSearch,
    NaiveDecay,
    PairwiseExact,
    StepRule,
    backtracking_step,
    line_search_exact,
    step_naive,
)

log = logging.getLogger(__name__)

TRACE_COLUMNS = ("iter", "f", "u", "gap", "gamma", "evals", "millis")
F_FLOOR = 1e-12


class MacProblem:
    """Relaxed edge-selection problem on a fixed/candidate edge split.

    ``L(x) = L_f + sum_k x_k L_k`` is assembled on a pattern shared by all
    ``x``, and a single :class:`FiedlerSolver` (ordering and symbolic
    factorization) serves every objective evaluation of a solve.
    """

    def __init__(self, graph: Graph, partition: EdgePartition, epsilon_u: float = 1e-2,
                 max_iterations: int = 50, sigma: float | None = None, seed: int = 0):
        partition.check(graph)
        if not epsilon_u >= 0:
            raise ValueError("epsilon_u must be nonnegative")
        self.graph = graph
        self.partition = partition
        self.K = partition.K
        self.epsilon_u = float(epsilon_u)
        self.max_iterations = int(max_iterations)
        self.sigma = sigma
        self.assembler = LaplacianAssembler(graph, partition.fixed, partition.candidate)
        self.cand_u = self.assembler.cand_u
        self.cand_v = self.assembler.cand_v
        self.cand_w = self.assembler.cand_w
        count, _ = self.assembler.components(np.ones(self.m_c))
        if count > 1:
            raise DisconnectedGraph(
                f"fixed plus candidate edges leave {count} components", components=count)
        self.solver = FiedlerSolver(self.assembler.matrix(np.zeros(self.m_c)),
                                    seed=seed, check_connected=False)
        self.evaluations = 0

    @property
    def n(self) -> int:
        return self.graph.n

    @property
    def m_c(self) -> int:
        return self.partition.candidate.size

    def laplacian(self, x):
        return self.assembler.matrix(x)

    def feasible(self, x, tol: float = 1e-9) -> bool:
        x = np.asarray(x, dtype=float)
        return (x.shape == (self.m_c,) and bool(np.all(x >= -tol)) and bool(np.all(x <= 1 + tol))
                and abs(x.sum() - self.K) <= tol * max(self.K, 1))

    def default_x0(self) -> np.ndarray:
        if self.m_c == 0:
            return np.zeros(0)
        return np.full(self.m_c, self.K / self.m_c)


def _disconnected_pair(labels: np.ndarray) -> FiedlerPair:
    # indicator of the smallest component, deflated; it spans part of the
    # zero eigenspace, so q^T L(y) q stays a valid supergradient model
    sizes = np.bincount(labels)
    c = int(np.argmin(sizes))
    q = deflate((labels == c).astype(float))
    q /= np.linalg.norm(q)
    return FiedlerPair(0.0, q)


def objective(problem: MacProblem, x, warm=None) -> FiedlerPair:
    """``(lambda_2, q_2)`` of ``L(x)``.

    A disconnected support (possible when ``L_f`` alone is disconnected and
    the step lands on a face with zero weight on a bridge) gives
    ``lambda_2 = 0`` with the deflated indicator of the smallest component
    as ``q_2`` instead of an error.
    """
    x = np.asarray(x, dtype=float)
    problem.evaluations += 1
    count, labels = problem.assembler.components(x)
    if count > 1:
        return _disconnected_pair(labels)
    return problem.solver.solve(problem.assembler.data(x), x0=warm, sigma=problem.sigma)


def supergradient(q, cand_u, cand_v, cand_w) -> np.ndarray:
    """``g_k = w_k (q[u_k] - q[v_k])^2`` for every candidate edge."""
    q = np.asarray(q, dtype=float)
    diff = q[np.asarray(cand_u)] - q[np.asarray(cand_v)]
    return np.asarray(cand_w, dtype=float) * diff * diff


def direction_topk(g, K: int) -> np.ndarray:
    """0/1 vector selecting the ``K`` largest entries of ``g`` (ties: lower index)."""
    g = np.asarray(g, dtype=float)
    if not 0 <= K <= g.size:
        raise InfeasibleBudget(f"K={K} outside [0, {g.size}]")
    s = np.zeros(g.size)
    s[np.argsort(-g, kind="stable")[:K]] = 1.0
    return s


def dual_update(u: float, f: float, g, s, x) -> float:
    """Concavity bound ``min(u, f + g^T (s - x))``."""
    return min(u, f + float(np.dot(g, np.asarray(s) - np.asarray(x))))


def relative_gap(u: float, f: float) -> float:
    return abs(u - f) / max(f, F_FLOOR)


@dataclass
class TraceRow:
    iter: int
    f: float
    u: float
    gap: float
    gamma: float
    evals: int
    millis: float
    note: str = ""


@dataclass
class SolveTrace:
    rows: list = field(default_factory=list)

    def append(self, row: TraceRow) -> None:
        self.rows.append(row)

    def __len__(self) -> int:
        return len(self.rows)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    def to_csv(self, deterministic: bool = False) -> str:
        """CSV text with columns ``iter,f,u,gap,gamma,evals,millis``.

        ``deterministic`` leaves the timing column empty so that repeated
        runs produce identical bytes.
        """
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(TRACE_COLUMNS)
        for r in self.rows:
            millis = "" if deterministic else f"{r.millis:.3f}"
            w.writerow([r.iter, repr(float(r.f)), repr(float(r.u)), repr(float(r.gap)),
                        repr(float(r.gamma)), r.evals, millis])
        return buf.getvalue()


@dataclass
class MacResult:
    x_relaxed: np.ndarray
    pair: FiedlerPair
    u_final: float
    trace: SolveTrace
    x_last: np.ndarray
    f_last: float
    iterations: int
    converged: bool
    x_rounded: np.ndarray | None = None
    step_failures: int = 0

    @property
    def lambda2(self) -> float:
        return self.pair.lambda2

    @property
    def gap(self) -> float:
        return relative_gap(self.u_final, self.pair.lambda2)


class _Line:
    """Objective along ``x + gamma d`` with the evaluated pairs cached."""

    def __init__(self, problem: MacProblem, x, d, warm):
        self.problem = problem
        self.x = x
        self.d = d
        self.warm = warm
        self.cache = {}

    def point(self, gamma: float) -> np.ndarray:
        return np.clip(self.x + gamma * self.d, 0.0, 1.0)

    def pair(self, gamma: float) -> FiedlerPair:
        gamma = float(gamma)
        if gamma not in self.cache:
            self.cache[gamma] = objective(self.problem, self.point(gamma), self.warm)
        return self.cache[gamma]

    def f(self, gamma: float) -> float:
        return self.pair(gamma).lambda2

    def f_slope(self, gamma: float) -> tuple[float, float]:
        p = self.pair(gamma)
        g = supergradient(p.q2, self.problem.cand_u, self.problem.cand_v, self.problem.cand_w)
        return p.lambda2, float(g @ self.d)


def step_exact(problem: MacProblem, x, d, gamma_max: float = 1.0, max_evals: int = 20,
               f0: float | None = None, warm=None) -> float:
    """Approximately ``argmax_{gamma in [0, gamma_max]} lambda_2(L(x + gamma d))``."""
    d = np.asarray(d, dtype=float)
    if not np.any(d):
        return 0.0
    line = _Line(problem, np.asarray(x, dtype=float), d, warm)
    gamma, _, _ = line_search_exact(line.f, gamma_max, max_evals, f0)
    return gamma


def step_backtracking(problem: MacProblem, x, d, g, f: float, state: BacktrackingState | None = None,
                      rule: Backtracking = Backtracking(), gamma_max: float = 1.0,
                      warm=None) -> tuple[float, BacktrackingState]:
    """One adaptive backtracking step; returns ``(gamma, state)``."""
    state = BacktrackingState() if state is None else state
    d = np.asarray(d, dtype=float)
    line = _Line(problem, np.asarray(x, dtype=float), d, warm)
    gamma, _, _, _ = backtracking_step(line.f_slope, f, float(np.dot(g, d)), float(d @ d),
                                       gamma_max, rule, state)
    return gamma, state


def _choose_step(rule: StepRule, t: int, line: _Line, f: float, slope: float,
                 gamma_max: float, bt_state: BacktrackingState):
    """Returns ``(gamma, evals, failed)``."""
    d = line.d
    if not np.any(d) or gamma_max <= 0:
        return 0.0, 0, False
    if isinstance(rule, NaiveDecay):
        return min(step_naive(t), gamma_max), 0, False
    if isinstance(rule, (ExactLineSearch, PairwiseExact)):
        gamma, _, evals = line_search_exact(line.f, gamma_max, rule.max_evals, f0=f)
        return gamma, evals, False
    if isinstance(rule, Backtracking):
        gamma, _, evals, failed = backtracking_step(line.f_slope, f, slope, float(d @ d),
                                                    gamma_max, rule, bt_state)
        return gamma, evals, failed
    raise TypeError(f"unknown step rule {rule!r}")


class _Best:
    def __init__(self):
        self.f = -np.inf
        self.x = None
        self.pair = None

    def offer(self, f, x, pair):
        if f > self.f:
            self.f, self.x, self.pair = f, x.copy(), pair


def _finish(problem, x, line, gamma, warm, best, trace, u, t, converged, return_last,
            failures, evaluated_pair=None):
    # the final iterate after the last step has not been evaluated yet
    if evaluated_pair is None:
        evaluated_pair = line.pair(gamma) if line is not None else objective(problem, x, warm)
    f_last = evaluated_pair.lambda2
    best.offer(f_last, x, evaluated_pair)
    if return_last:
        x_out, pair_out = x.copy(), evaluated_pair
    else:
        x_out, pair_out = best.x, best.pair
    return MacResult(x_out, pair_out, u, trace, x.copy(), f_last, t, converged,
                     step_failures=failures)


def _check_budget(problem: MacProblem):
    if problem.K > problem.m_c:
        raise InfeasibleBudget(f"K={problem.K} exceeds the {problem.m_c} candidate edges")


def solve_mac(problem: MacProblem, rule: StepRule = NaiveDecay(), x0=None,
              return_last: bool = False, callback=None) -> MacResult:
    """Frank-Wolfe ascent on ``lambda_2(L(x))`` over ``{0 <= x <= 1, sum x = K}``.

    Stops when ``|u - f| / max(f, 1e-12) < epsilon_u`` or after
    ``max_iterations`` iterations.  The returned ``x_relaxed`` is the best
    iterate seen unless ``return_last`` is set.  ``callback(t, x, pair)``
    is called on every iterate at which the objective is evaluated.  A
    :class:`PairwiseExact` rule dispatches to :func:`solve_pairwise_fw`.
    """
    if isinstance(rule, PairwiseExact):
        return solve_pairwise_fw(problem, rule, x0, return_last, callback)
    _check_budget(problem)
    x = problem.default_x0() if x0 is None else np.array(x0, dtype=float)
    if not problem.feasible(x):
        raise InfeasibleBudget("x0 is not in the feasible polytope")
    trace = SolveTrace()
    best = _Best()
    bt_state = BacktrackingState()
    u = np.inf
    warm = None
    line = None
    gamma = 0.0
    failures = 0
    pair = None
    for t in range(problem.max_iterations):
        t0 = time.perf_counter()
        pair = line.pair(gamma) if line is not None else objective(problem, x, warm)
        f = pair.lambda2
        best.offer(f, x, pair)
        if callback is not None:
            callback(t, x, pair)
        warm = pair.q2
        g = supergradient(pair.q2, problem.cand_u, problem.cand_v, problem.cand_w)
        s = direction_topk(g, problem.K)
        u = dual_update(u, f, g, s, x)
        gap = relative_gap(u, f)
        note = "f-floor" if f < F_FLOOR else ""
        if gap < problem.epsilon_u:
            trace.append(TraceRow(t, f, u, gap, 0.0, 1,
                                  1e3 * (time.perf_counter() - t0), note))
            return _finish(problem, x, None, 0.0, warm, best, trace, u, t + 1, True,
                           return_last, failures, evaluated_pair=pair)
        d = s - x
        line = _Line(problem, x, d, warm)
        line.cache[0.0] = pair
        gamma, evals, failed = _choose_step(rule, t, line, f, float(g @ d), 1.0, bt_state)
        if failed:
            failures += 1
            note = (note + " step-failure").strip()
            log.debug("backtracking fell back to gamma_min at iteration %d", t)
        x = line.point(gamma)
        trace.append(TraceRow(t, f, u, gap, gamma, 1 + evals,
                              1e3 * (time.perf_counter() - t0), note))
    if line is None:
        pair = objective(problem, x, warm)
        return _finish(problem, x, None, 0.0, warm, best, trace, u, 0, False,
                       return_last, failures, evaluated_pair=pair)
    return _finish(problem, x, line, gamma, warm, best, trace, u, problem.max_iterations,
                   False, return_last, failures)


def madow_decomposition(x, K: int) -> list:
    """Write ``x`` (``0 <= x <= 1``, ``sum x = K``) as a convex combination of K-subsets.

    Systematic sampling maps ``U in [0, 1)`` to a K-subset that is constant
    between the fractional parts of the cumulative sums, and each edge's
    inclusion probability equals ``x_k``.  Integrating over ``U`` therefore
    gives an exact decomposition.  Returns ``[(indices, weight), ...]``.
    """
    from .rounding import madow_select

    x = np.asarray(x, dtype=float)
    c = np.concatenate([[0.0], np.cumsum(x)])
    c[-1] = K
    breaks = np.unique(np.concatenate([[0.0, 1.0], np.mod(c, 1.0)]))
    out = {}
    for a, b in zip(breaks[:-1], breaks[1:]):
        if b - a <= 0:
            continue
        key = tuple(np.flatnonzero(madow_select(x, K, 0.5 * (a + b))).tolist())
        out[key] = out.get(key, 0.0) + (b - a)
    return list(out.items())


def _vertex(idx, m):
    v = np.zeros(m)
    v[list(idx)] = 1.0
    return v


def solve_pairwise_fw(problem: MacProblem, rule: StepRule = PairwiseExact(), x0=None,
                      return_last: bool = False, callback=None) -> MacResult:
    """Pairwise Frank-Wolfe: shift weight from the away vertex to the FW vertex.

    The iterate is kept as a convex combination of K-subsets.  The default
    start is the single vertex of the K heaviest candidates; a custom
    ``x0`` is decomposed exactly by systematic-sampling intervals.
    """
    _check_budget(problem)
    m, K = problem.m_c, problem.K
    cap = getattr(rule, "max_active", 1000)
    if x0 is None:
        active = {tuple(np.sort(np.argsort(-problem.cand_w, kind="stable")[:K]).tolist()): 1.0}
    else:
        x0 = np.asarray(x0, dtype=float)
        if not problem.feasible(x0):
            raise InfeasibleBudget("x0 is not in the feasible polytope")
        active = dict(madow_decomposition(x0, K))
    x = sum(a * _vertex(v, m) for v, a in active.items()) if m else np.zeros(0)
    x = np.clip(x, 0.0, 1.0)

    trace = SolveTrace()
    best = _Best()
    bt_state = BacktrackingState()
    u = np.inf
    warm = None
    line = None
    gamma = 0.0
    failures = 0
    for t in range(problem.max_iterations):
        t0 = time.perf_counter()
        pair = line.pair(gamma) if line is not None else objective(problem, x, warm)
        f = pair.lambda2
        best.offer(f, x, pair)
        if callback is not None:
            callback(t, x, pair)
        warm = pair.q2
        g = supergradient(pair.q2, problem.cand_u, problem.cand_v, problem.cand_w)
        s = direction_topk(g, K)
        u = dual_update(u, f, g, s, x)
        gap = relative_gap(u, f)
        note = "f-floor" if f < F_FLOOR else ""
        s_key = tuple(np.flatnonzero(s).tolist())
        # away vertex: worst active vertex under the linear model
        keys = list(active)
        scores = [sum(g[list(k)]) for k in keys]
        a_key = keys[int(np.argmin(scores))]
        gamma_max = active[a_key]
        d = s - _vertex(a_key, m)
        if gap < problem.epsilon_u or not np.any(d):
            trace.append(TraceRow(t, f, u, gap, 0.0, 1, 1e3 * (time.perf_counter() - t0), note))
            return _finish(problem, x, None, 0.0, warm, best, trace, u, t + 1,
                           gap < problem.epsilon_u, return_last, failures, evaluated_pair=pair)
        line = _Line(problem, x, d, warm)
        line.cache[0.0] = pair
        gamma, evals, failed = _choose_step(rule, t, line, f, float(g @ d), gamma_max, bt_state)
        if failed:
            failures += 1
            note = (note + " step-failure").strip()
        x = line.point(gamma)
        if gamma > 0:
            active[a_key] -= gamma
            active[s_key] = active.get(s_key, 0.0) + gamma
            if active[a_key] <= 1e-15:
                del active[a_key]
        if len(active) > cap:
            for k in [k for k, a in active.items() if a <= 1e-12]:
                del active[k]
            if len(active) > cap:
                raise ActiveSetOverflow(f"active set has {len(active)} vertices (cap {cap})")
        trace.append(TraceRow(t, f, u, gap, gamma, 1 + evals,
                              1e3 * (time.perf_counter() - t0), note))
    if line is None:
        pair = objective(problem, x, warm)
        return _finish(problem, x, None, 0.0, warm, best, trace, u, 0, False,
                       return_last, failures, evaluated_pair=pair)
    return _finish(problem, x, line, gamma, warm, best, trace, u, problem.max_iterations,
                   False, return_last, failures)


__all__ = [
    "MacProblem",
    "MacResult",
    "SolveTrace",
    "TraceRow",
    "TRACE_COLUMNS",
    "direction_topk",
    "dual_update",
    "madow_decomposition",
    "objective",
    "relative_gap",
    "solve_mac",
    "solve_pairwise_fw",
    "step_backtracking",
    "step_exact",
    "supergradient",
]
