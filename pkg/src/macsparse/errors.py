"""Exception hierarchy.

Input problems (bad files, infeasible budgets) derive from ``InputError``;
numerical failures derive from ``SolverError``.  The CLI maps the two
families to exit codes 2 and 3.
"""


class MacError(Exception):
    """Base class for all package errors."""


class InputError(MacError, ValueError):
    pass


class ParseError(InputError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class InfeasibleBudget(InputError):
    pass


class BudgetTooSmall(InfeasibleBudget):
    pass


class BudgetMismatch(InputError):
    pass


class NotSpanning(InputError):
    pass


class SolverError(MacError, RuntimeError):
    pass


class DisconnectedGraph(SolverError):
    """The graph (or the weighted subgraph under consideration) has more
    than one connected component."""

    def __init__(self, message, components=None):
        self.components = components
        super().__init__(message)


class NotPositiveDefinite(SolverError):
    def __init__(self, column, pivot=None):
        self.column = column
        self.pivot = pivot
        msg = f"matrix is not positive definite (pivot {pivot!r} at column {column})"
        super().__init__(msg)


class NoConvergence(SolverError):
    def __init__(self, iterations, best_residual):
        self.iterations = iterations
        self.best_residual = best_residual
        super().__init__(
            f"no convergence after {iterations} restarts "
            f"(best residual {best_residual:.3e})"
        )


class TooLarge(SolverError):
    pass


class StepFailure(SolverError):
    pass


class ActiveSetOverflow(SolverError):
    pass
