# solvers/dispatch.py
import logging
from typing import Optional

from models.data_models import HdConfig
from models.errors import SizeGuardError
from models.problem_models import ProblemInstance, SolveResult
from solvers.baseline import baseline_solve
from solvers.exact import exact_solve
from solvers.qptas import qptas_solve
from solvers.treewidth_dp import solve_on_tree_decomposition, tree_decomposition_of_graph

logger = logging.getLogger(__name__)

SOLVE_MODES = ("qptas", "dp", "exact", "baseline")


def solve_dp_on_graph(p: ProblemInstance, width_cap: Optional[int] = None) -> SolveResult:
    """ Treewidth DP directly on the input graph with a min-fill-in decomposition. """
    g = p.metric.graph
    edges = {(u, v): w for u, v, w in g.edges}
    td = tree_decomposition_of_graph(range(g.n), edges.keys())
    return solve_on_tree_decomposition(p, edges, td, width_cap=width_cap, vertices=range(g.n))


def solve_problem(p: ProblemInstance, cfg: HdConfig, mode: str, seed: Optional[int] = None) -> SolveResult:
    if mode not in SOLVE_MODES:
        raise ValueError(f"Unknown solve mode '{mode}'. Use one of {SOLVE_MODES}.")
    if mode == "qptas":
        return qptas_solve(p, cfg, seed)
    if mode == "dp":
        return solve_dp_on_graph(p)
    if mode == "exact":
        return exact_solve(p)
    return baseline_solve(p)[1]


def attach_oracle_ratio(p: ProblemInstance, result: SolveResult) -> Optional[float]:
    """ cost / OPT when the exact oracle fits its size guard; None otherwise. """
    try:
        optimum = exact_solve(p).cost
    except SizeGuardError as e:
        logger.info(f"No oracle ratio: {e}")
        return None
    if optimum == 0:
        result.ratio_to_oracle = 1.0 if result.cost == 0 else float("inf")
    else:
        result.ratio_to_oracle = result.cost / optimum
    return result.ratio_to_oracle
