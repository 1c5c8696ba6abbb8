"""Edge selection maximizing algebraic connectivity.

Frank-Wolfe on the concave relaxation ``max lambda_2(L_f + sum x_k L_k)``
over ``{0 <= x <= 1, sum x = K}``, a shift-invert Fiedler solver built on
an in-house AMD ordering, sparse Cholesky and Krylov-Schur, rounding
strategies that return exactly ``K`` edges, and effective-resistance
backbones.
"""

__version__ = "0.1.0"

from .backbone import edge_resistances, effective_resistance, odometry_backbone, spectral_backbone
from .errors import (
    ActiveSetOverflow,
    BudgetMismatch,
    BudgetTooSmall,
    DisconnectedGraph,
    InfeasibleBudget,
    InputError,
    MacError,
    NoConvergence,
    NotPositiveDefinite,
    NotSpanning,
    ParseError,
    SolverError,
    StepFailure,
    TooLarge,
)
from .fiedler import FiedlerPair, FiedlerSolver, fiedler_dense_oracle, fiedler_shift_invert
from .frank_wolfe import MacProblem, MacResult, objective, solve_mac, solve_pairwise_fw
from .graph import (
    EdgePartition,
    Graph,
    LaplacianAssembler,
    WeightedEdge,
    build_laplacian,
    connected_components,
    edge_laplacian,
    selection_laplacian,
)
from .io import format_edge_list, parse_edge_list, parse_g2o, read_graph
from .pipeline import RunConfig, sparsify
from .rounding import (
    RoundedSelection,
    maximum_spanning_tree,
    round_madow,
    round_mst_connected,
    round_mst_madow,
    round_topk,
)
from .steps import Backtracking, ExactLineSearch, NaiveDecay, PairwiseExact
