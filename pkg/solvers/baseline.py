# solvers/baseline.py
import logging
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import networkx as nx
import numpy as np

from highway.graphcore import canonical_shortest_path
from models.data_models import MetricInstance
from models.problem_models import ProblemInstance, ProblemKind, SolveResult

logger = logging.getLogger(__name__)

Edge = Tuple[int, int]


def path_edges(m: MetricInstance, u: int, v: int) -> List[Edge]:
    path = canonical_shortest_path(m, u, v)
    return [(min(a, b), max(a, b)) for a, b in zip(path, path[1:])]


def metric_mst(m: MetricInstance, vertices: Sequence[int]) -> nx.Graph:
    """ Minimum spanning tree of the metric completion over `vertices`. """
    complete = nx.Graph()
    complete.add_nodes_from(vertices)
    for k, u in enumerate(vertices):
        for v in vertices[k + 1:]:
            complete.add_edge(u, v, weight=float(m.dist[u, v]))
    return nx.minimum_spanning_tree(complete)


def prune_to_steiner_tree(m: MetricInstance, edges: Iterable[Edge], terminals: Iterable[int]) -> List[Edge]:
    """ Spanning tree of the union of `edges`, with non-terminal leaves cut off repeatedly. """
    graph = nx.Graph()
    for u, v in edges:
        graph.add_edge(u, v, weight=float(m.dist[u, v]))
    keep = set(terminals)
    tree = nx.minimum_spanning_tree(graph)
    leaves = [v for v in tree.nodes if tree.degree(v) <= 1 and v not in keep]
    while leaves:
        tree.remove_nodes_from(leaves)
        leaves = [v for v in tree.nodes if tree.degree(v) <= 1 and v not in keep]
    return sorted((min(u, v), max(u, v)) for u, v in tree.edges)


def tour_cost(m: MetricInstance, tour: Sequence[int]) -> float:
    return float(sum(m.dist[a, b] for a, b in zip(tour, tour[1:])))


def tree_cost(m: MetricInstance, edges: Iterable[Edge]) -> float:
    return float(sum(m.dist[u, v] for u, v in edges))


def facility_cost(p: ProblemInstance, opened: Iterable[int], assign: Dict[int, int]) -> float:
    opening = sum(float(p.open_cost[w]) for w in set(opened))
    return opening + float(sum(p.phi[v] * p.metric.dist[v, w] for v, w in assign.items()))


def nearest_assignment(m: MetricInstance, vertices: Iterable[int], opened: Sequence[int]) -> Dict[int, int]:
    ordered = sorted(opened)
    return {v: min(ordered, key=lambda w: (m.dist[v, w], w)) for v in vertices}


def witness_cost(p: ProblemInstance, witness) -> float:
    """ Cost of a witness recomputed from the metric of the instance. """
    if p.kind is ProblemKind.TSP:
        return tour_cost(p.metric, witness)
    if p.kind is ProblemKind.STEINER:
        return tree_cost(p.metric, witness)
    return facility_cost(p, witness["open"], witness["assign"])


def _tsp_baseline(p: ProblemInstance, vertices: List[int]) -> Tuple[float, SolveResult]:
    m = p.metric
    if len(vertices) == 1:
        return 0.0, SolveResult(p.kind, 0.0, list(vertices), "baseline", True)
    tree = metric_mst(m, vertices)
    kappa = 2.0 * tree.size(weight="weight")
    order = list(nx.dfs_preorder_nodes(tree, source=vertices[0]))
    tour = order + [order[0]]
    return kappa, SolveResult(p.kind, tour_cost(m, tour), tour, "baseline", True, {"kappa": kappa})


def _steiner_baseline(p: ProblemInstance, vertices: List[int]) -> Tuple[float, SolveResult]:
    m = p.metric
    terminals = sorted(p.terminals & set(vertices))
    if len(terminals) <= 1:
        return 0.0, SolveResult(p.kind, 0.0, [], "baseline", True, {"kappa": 0.0})
    tree = metric_mst(m, terminals)
    kappa = tree.size(weight="weight")
    union: List[Edge] = []
    for u, v in sorted(tree.edges):
        union.extend(path_edges(m, u, v))
    witness = prune_to_steiner_tree(m, union, terminals)
    return kappa, SolveResult(p.kind, tree_cost(m, witness), witness, "baseline", True, {"kappa": kappa})


def _facility_baseline(p: ProblemInstance, vertices: List[int]) -> Tuple[float, SolveResult]:
    """
    Star greedy: open the facility and the set of unconnected clients with the
    smallest (opening + weighted connection) per unit of weight, then set the
    facility's opening cost to zero; finally reconnect clients to the nearest
    open facility.
    """
    m = p.metric
    idx = np.array(vertices, dtype=int)
    dist = m.dist[np.ix_(idx, idx)]
    phi = p.phi[idx]
    opening = p.open_cost[idx].astype(float).copy()
    unconnected = np.ones(len(idx), dtype=bool)
    opened: List[int] = []

    while unconnected.any():
        best: Optional[Tuple[float, int, np.ndarray]] = None
        clients = np.nonzero(unconnected)[0]
        for f in range(len(idx)):
            order = clients[np.argsort(dist[f, clients], kind="stable")]
            weight = np.cumsum(phi[order])
            spend = opening[f] + np.cumsum(phi[order] * dist[f, order])
            ratios = spend / weight
            k = int(np.argmin(ratios))
            if best is None or ratios[k] < best[0]:
                best = (float(ratios[k]), f, order[:k + 1])
        _, f, served = best
        unconnected[served] = False
        opening[f] = 0.0
        if int(idx[f]) not in opened:
            opened.append(int(idx[f]))

    assign = nearest_assignment(m, vertices, opened)
    kappa = facility_cost(p, opened, assign)
    witness = {"open": sorted(opened), "assign": assign}
    return kappa, SolveResult(p.kind, kappa, witness, "baseline", True, {"kappa": kappa})


def baseline_solve(p: ProblemInstance, vertices: Optional[Iterable[int]] = None) -> Tuple[float, SolveResult]:
    """ (kappa, feasible witness) from the constant-factor baseline of the problem kind. """
    vertex_list = sorted(set(vertices) if vertices is not None else range(p.n))
    if not vertex_list:
        raise ValueError("baseline needs at least one vertex")
    if p.kind is ProblemKind.TSP:
        kappa, result = _tsp_baseline(p, vertex_list)
    elif p.kind is ProblemKind.STEINER:
        kappa, result = _steiner_baseline(p, vertex_list)
    else:
        kappa, result = _facility_baseline(p, vertex_list)
    logger.debug(f"Baseline {p.kind.value} on {len(vertex_list)} vertices: kappa={kappa:.6g}, cost={result.cost:.6g}")
    return kappa, result


def baseline_kappa(p: ProblemInstance, vertices: Optional[Iterable[int]] = None) -> float:
    return baseline_solve(p, vertices)[0]
