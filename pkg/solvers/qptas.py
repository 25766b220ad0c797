# solvers/qptas.py
import logging
from typing import Dict, List, Optional, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from highway.embed import Embedder
from highway.graphcore import REL_TOL, approx_le
from highway.spc import build_cover_ladder
from highway.towns import build_towns_decomposition, restrict_towns
from models.data_models import CoverLadder, HdConfig, TownsDecomposition
from models.errors import MissingCoreHubs, StateBudgetExceeded, StructuralViolation, WidthCapExceeded
from models.problem_models import NetReduction, ProblemInstance, ProblemKind, SolveResult
from solvers.baseline import (baseline_solve, facility_cost, nearest_assignment, path_edges, prune_to_steiner_tree,
                              tour_cost, tree_cost)
from solvers.treewidth_dp import solve_on_tree_decomposition

logger = logging.getLogger(__name__)


def build_net_reduction(p: ProblemInstance,
                        cfg: HdConfig,
                        kappa: Optional[float] = None,
                        vertices: Optional[Sequence[int]] = None) -> NetReduction:
    """
    Greedy delta-net with delta = eps * kappa / n (vertices scanned by id) and
    nearest-net assignment, ties to the smaller id. Terminals move to their net
    points; a net point opens at the cheapest cost among its members and
    weighs the total phi of its members.
    """
    m = p.metric
    vertex_list = sorted(vertices) if vertices is not None else list(range(p.n))
    if kappa is None:
        kappa, _ = baseline_solve(p, vertex_list)
    delta = cfg.epsilon * kappa / len(vertex_list)

    net: List[int] = []
    for v in vertex_list:
        if all(not approx_le(float(m.dist[v, w]), delta) for w in net):
            net.append(v)
    assign = nearest_assignment(m, vertex_list, net)

    terminals = open_cost = phi = facility_of = None
    if p.kind is ProblemKind.STEINER:
        terminals = frozenset(assign[t] for t in p.terminals if t in assign)
    if p.kind is ProblemKind.FACILITY:
        open_cost, phi, facility_of = {}, {}, {}
        for w in net:
            members = [v for v in vertex_list if assign[v] == w]
            cheapest = min(members, key=lambda v: (p.open_cost[v], v))
            facility_of[w] = cheapest
            open_cost[w] = float(p.open_cost[cheapest])
            phi[w] = float(sum(p.phi[v] for v in members))

    reduction = NetReduction(delta, net, assign, kappa, 0, terminals, open_cost, phi, facility_of)
    logger.debug(f"Net reduction: {reduction}")
    return reduction


def level_floor(ladder: CoverLadder, delta: float, scale: float) -> int:
    """ Level j with delta (in ladder units) in (r_j, r_{j+1}]. """
    return ladder.level_for_distance(delta * scale)


def _reduced_instance(p: ProblemInstance, red: NetReduction) -> ProblemInstance:
    if p.kind is ProblemKind.STEINER:
        return ProblemInstance(p.kind, p.metric, terminals=red.terminals)
    if p.kind is ProblemKind.FACILITY:
        open_cost = p.open_cost.copy()
        phi = p.phi.copy()
        for w in red.net:
            open_cost[w] = red.open_cost[w]
            phi[w] = red.phi[w]
        return ProblemInstance(p.kind, p.metric, open_cost=open_cost, phi=phi)
    return ProblemInstance(p.kind, p.metric)


def _lift_tour(p: ProblemInstance, red: NetReduction, walk: List[int]) -> Dict:
    """ Detour from each net point to its members, then shortcut to a tour. """
    m = p.metric
    detoured: List[int] = []
    seen = set()
    for w in walk:
        detoured.append(w)
        if w in seen:
            continue
        seen.add(w)
        for a in red.members(w):
            if a != w:
                detoured.extend([a, w])
    overhead = tour_cost(m, detoured) - tour_cost(m, walk)
    order: List[int] = []
    for v in detoured:
        if v not in order:
            order.append(v)
    tour = order + [order[0]] if len(order) > 1 else order
    return {"witness": tour, "cost": tour_cost(m, tour), "overhead": overhead,
            "bound": 2.0 * len(red.assign) * red.delta}


def _lift_tree(p: ProblemInstance, red: NetReduction, tree: List) -> Dict:
    """ Expand H edges into shortest paths and reconnect every terminal to its net point. """
    m = p.metric
    edges = []
    for a, b in tree:
        edges.extend(path_edges(m, a, b))
    reconnect = 0.0
    for t in sorted(p.terminals):
        w = red.assign[t]
        if w != t:
            edges.extend(path_edges(m, t, w))
            reconnect += float(m.dist[t, w])
    witness = prune_to_steiner_tree(m, edges, p.terminals) if edges else []
    cost = tree_cost(m, witness)
    return {"witness": witness, "cost": cost, "overhead": cost - tree_cost(m, tree),
            "bound": len(red.assign) * red.delta, "reconnect": reconnect}


def _lift_facilities(p: ProblemInstance, red: NetReduction, opened_net: List[int], h_cost: float) -> Dict:
    """ Open the cheapest member behind every open net point and reassign clients in G. """
    opened = sorted({red.facility_of[w] for w in opened_net})
    assign = nearest_assignment(p.metric, red.assign.keys(), opened)
    cost = facility_cost(p, opened, assign)
    weight = float(sum(p.phi[v] for v in red.assign))
    return {"witness": {"open": opened, "assign": assign}, "cost": cost, "overhead": cost - h_cost,
            "bound": 2.0 * weight * red.delta}


class QptasPipeline:
    """ Net reduction, embedding of the net with shifted hubs, DP on the embedding, lifting back to G. """
    def __init__(self, p: ProblemInstance, cfg: HdConfig, seed: Optional[int] = None):
        self.p = p
        self.cfg = cfg
        self.seed = cfg.seed if seed is None else seed
        self.ladder: CoverLadder = build_cover_ladder(p.metric, cfg)
        self.towns: TownsDecomposition = build_towns_decomposition(self.ladder.metric, self.ladder)
        self.scale = self.ladder.metric.scale / p.metric.scale

    def components(self) -> List[List[int]]:
        """ Facility instances split along edges longer than the baseline kappa. """
        p = self.p
        everything = list(range(p.n))
        if p.kind is not ProblemKind.FACILITY or p.n == 1:
            return [everything]
        kappa, _ = baseline_solve(p)
        kept = [(u, v) for u, v, w in p.metric.graph.edges if approx_le(w, kappa)]
        if not kept:
            return [[v] for v in everything]
        rows = [u for u, _ in kept] + [v for _, v in kept]
        cols = [v for _, v in kept] + [u for u, _ in kept]
        graph = csr_matrix((np.ones(len(rows)), (rows, cols)), shape=(p.n, p.n))
        _, labels = connected_components(graph, directed=False)
        groups: Dict[int, List[int]] = {}
        for v, label in enumerate(labels):
            groups.setdefault(int(label), []).append(v)
        return [groups[label] for label in sorted(groups, key=lambda lab: groups[lab][0])]

    def _steiner_region(self, vertices: List[int], kappa: float) -> List[int]:
        terminals = sorted(self.p.terminals)
        if not terminals:
            return vertices
        near = self.p.metric.dist[np.ix_(vertices, terminals)].min(axis=1)
        return [v for v, d in zip(vertices, near) if approx_le(float(d), kappa)]

    def solve_component(self, vertices: List[int]) -> SolveResult:
        p = self.p
        kappa, fallback = baseline_solve(p, vertices)
        if p.kind is ProblemKind.STEINER:
            vertices = self._steiner_region(vertices, kappa)
        red = build_net_reduction(p, self.cfg, kappa, vertices)
        red.level_floor = level_floor(self.ladder, red.delta, self.scale)
        details = {"kappa": kappa, "delta": red.delta, "net": len(red.net), "level_floor": red.level_floor}
        try:
            net_towns = restrict_towns(self.towns, frozenset(red.net))
            embedder = Embedder(net_towns, self.ladder, self.cfg, self.seed, source_td=self.towns,
                                shift=red.assign, level_floor=red.level_floor)
            embedding = embedder.embed()
            lengths = {(u, v): float(p.metric.dist[u, v]) for u, v in embedding.edges}
            reduced = _reduced_instance(p, red)
            on_h = solve_on_tree_decomposition(reduced, lengths, embedding.td, vertices=red.net)
        except (WidthCapExceeded, StateBudgetExceeded, MissingCoreHubs) as exc:
            logger.warning(f"QPTAS on {len(vertices)} vertices falls back to the baseline: {exc}")
            fallback.method = "baseline-fallback"
            fallback.details.update(details)
            fallback.details["fallback"] = str(exc)
            return fallback
        if not on_h.feasible:
            return on_h

        details.update({"width": embedding.width, "h_cost": on_h.cost})
        if p.kind is ProblemKind.TSP:
            lifted = _lift_tour(p, red, on_h.witness)
        elif p.kind is ProblemKind.STEINER:
            lifted = _lift_tree(p, red, on_h.witness)
        else:
            lifted = _lift_facilities(p, red, on_h.witness["open"], on_h.cost)
        slack = REL_TOL * max(1.0, on_h.cost)
        if lifted["overhead"] > lifted["bound"] + slack:
            raise StructuralViolation(
                f"lifting overhead {lifted['overhead']:.6g} exceeds {lifted['bound']:.6g} for {p.kind.value}")
        details.update({"lift_overhead": lifted["overhead"], "lift_bound": lifted["bound"]})
        return SolveResult(p.kind, lifted["cost"], lifted["witness"], "qptas", True, details)


def qptas_solve(p: ProblemInstance, cfg: HdConfig, seed: Optional[int] = None) -> SolveResult:
    pipeline = QptasPipeline(p, cfg, seed)
    parts = [pipeline.solve_component(vertices) for vertices in pipeline.components()]
    if len(parts) == 1:
        result = parts[0]
    else:
        opened = sorted(w for part in parts for w in part.witness["open"])
        assign = {v: w for part in parts for v, w in part.witness["assign"].items()}
        methods = {part.method for part in parts}
        method = "qptas" if methods == {"qptas"} else "qptas-partial-fallback"
        result = SolveResult(p.kind, facility_cost(p, opened, assign), {"open": opened, "assign": assign},
                             method, all(part.feasible for part in parts),
                             {"components": len(parts), "parts": [part.details for part in parts]})
    logger.info(f"QPTAS {p.kind.value} on n={p.n}, eps={cfg.epsilon}: cost {result.cost:.6g} ({result.method})")
    return result
