"""Step-size rules for Frank-Wolfe on a concave objective.

Rules are small frozen dataclasses; the scalar routines below work on a
line function ``phi(gamma) -> (f, slope)`` where ``f`` is the objective at
``x + gamma d`` and ``slope`` is ``g(x + gamma d)^T d`` for a supergradient
``g`` at that point.  Problem-specific wrappers live in ``frank_wolfe``.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, Union

import numpy as np
from scipy.optimize import minimize_scalar


@dataclass(frozen=True)
class NaiveDecay:
    name = "naive"


@dataclass(frozen=True)
class ExactLineSearch:
    max_evals: int = 20
    name = "exact"


@dataclass(frozen=True)
class Backtracking:
    initial_L: float | None = None  # None: finite-difference estimate on the first step
    shrink: float = 0.5
    grow: float = 2.0
    gamma_min: float = 1e-10
    fd_eps: float = 1e-3
    name = "backtracking"


@dataclass(frozen=True)
class PairwiseExact:
    max_evals: int = 20
    max_active: int = 1000
    name = "pairwise"


StepRule = Union[NaiveDecay, ExactLineSearch, Backtracking, PairwiseExact]

LineFunction = Callable[[float], "tuple[float, float]"]


def parse_step_rule(spec: str) -> StepRule:
    """Rule from a CLI name: ``naive``, ``exact[:evals]``, ``backtracking`` or ``pairwise[:evals]``."""
    name, _, arg = spec.partition(":")
    name = name.strip().lower()
    if name == "naive":
        return NaiveDecay()
    if name == "exact":
        return ExactLineSearch(int(arg)) if arg else ExactLineSearch()
    if name in ("backtracking", "bt"):
        return Backtracking(float(arg)) if arg else Backtracking()
    if name in ("pairwise", "pfw", "pairwise-exact"):
        return PairwiseExact(int(arg)) if arg else PairwiseExact()
    raise ValueError(f"unknown step rule {spec!r}")


def step_naive(t: int) -> float:
    """Decaying step ``2 / (2 + t)``."""
    if t < 0:
        raise ValueError("iteration counter must be nonnegative")
    return 2.0 / (2.0 + t)


class _BudgetSpent(Exception):
    pass


def line_search_exact(phi: Callable[[float], float], gamma_max: float, max_evals: int = 20,
                      f0: float | None = None) -> tuple[float, float, int]:
    """Maximize ``phi`` on ``[0, gamma_max]`` with at most ``max_evals`` calls.

    ``phi(gamma_max)`` is evaluated first, the rest of the budget goes to a
    bounded Brent search, and the best of ``0``, the Brent point and
    ``gamma_max`` wins.  ``f0`` is ``phi(0)`` when already known (otherwise
    it costs one evaluation).

    Returns ``(gamma, phi(gamma), evaluations)``.
    """
    if not gamma_max > 0:
        return 0.0, (phi(0.0) if f0 is None else f0), (0 if f0 is not None else 1)
    if max_evals < 1:
        raise ValueError("max_evals must be positive")
    evals = 0
    best = [0.0, -np.inf]
    if f0 is None:
        f0 = phi(0.0)
        evals += 1
    best[:] = [0.0, f0]

    def take(gamma):
        nonlocal evals
        if evals >= max_evals:
            raise _BudgetSpent
        val = phi(gamma)
        evals += 1
        if val > best[1] or (val == best[1] and gamma < best[0]):
            best[:] = [gamma, val]
        return val

    try:
        take(gamma_max)
        budget = max_evals - evals
        if budget >= 2:
            minimize_scalar(lambda s: -take(s), bounds=(0.0, gamma_max), method="bounded",
                            options={"maxiter": budget - 1, "xatol": 1e-8 * gamma_max})
    except _BudgetSpent:
        pass
    return best[0], best[1], evals


@dataclass
class BacktrackingState:
    L: float | None = None
    failures: int = 0


def backtracking_step(phi: LineFunction, f0: float, slope0: float, dnorm2: float,
                      gamma_max: float, rule: Backtracking,
                      state: BacktrackingState) -> tuple[float, float, int, bool]:
    """Adaptive backtracking along ``d`` with a carried curvature estimate.

    The accepted step satisfies
    ``f(x + gamma d) >= f0 + gamma slope0 - L gamma^2 dnorm2 / 2`` with
    ``gamma = min(slope0 / (L dnorm2), gamma_max)``.  ``L`` is halved
    (``rule.shrink``) on entry and doubled (``rule.grow``) on each
    rejection.  When ``gamma`` falls below ``rule.gamma_min`` the step
    falls back to ``gamma_min`` and reports failure.

    Returns ``(gamma, f(x + gamma d), evaluations, failed)``.
    """
    if dnorm2 <= 0 or slope0 <= 0 or gamma_max <= 0:
        return 0.0, f0, 0, False
    evals = 0
    if state.L is None:
        if rule.initial_L is not None:
            state.L = float(rule.initial_L)
        else:
            eps = rule.fd_eps * gamma_max
            _, slope_eps = phi(eps)
            evals += 1
            L0 = abs(slope_eps - slope0) / (eps * dnorm2)
            # no measurable curvature: start at the estimate that reaches gamma_max
            state.L = L0 if np.isfinite(L0) and L0 > 0 else slope0 / (dnorm2 * gamma_max)
    L = max(state.L * rule.shrink, np.finfo(float).tiny)
    while True:
        gamma = min(slope0 / (L * dnorm2), gamma_max)
        if gamma < rule.gamma_min:
            state.failures += 1
            state.L = L
            gamma = min(rule.gamma_min, gamma_max)
            f_new, _ = phi(gamma)
            return gamma, f_new, evals + 1, True
        f_new, _ = phi(gamma)
        evals += 1
        if f_new >= f0 + gamma * slope0 - 0.5 * L * gamma * gamma * dnorm2:
            state.L = L
            return gamma, f_new, evals, False
        L *= rule.grow
