# solvers/treewidth_dp.py
import logging
import math
from typing import Any, Dict, Iterable, List, Optional, Sequence, Set, Tuple

import networkx as nx
import numpy as np
from networkx.algorithms.approximation import treewidth_min_fill_in
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from highway.graphcore import REL_TOL, approx_le
from models.errors import StateBudgetExceeded, WidthCapExceeded
from models.problem_models import ProblemInstance, ProblemKind, SolveResult
from models.tree_decomposition import TreeDecomposition
from solvers.nice import FORGET, INTRODUCE, LEAF, NiceDecomposition, make_nice

logger = logging.getLogger(__name__)

DEFAULT_WIDTH_CAPS = {
    ProblemKind.TSP: 12,
    ProblemKind.STEINER: 12,
    ProblemKind.FACILITY: 8,
}

# largest DP table allowed, in states
DEFAULT_STATE_BUDGET = 100_000

Edges = Dict[Tuple[int, int], float]
_JOINED = "joined"


def _canon(labels: Sequence[int]) -> Tuple[int, ...]:
    """ Relabel components by first appearance; -1 marks vertices outside the partial solution. """
    mapping: Dict[int, int] = {}
    out = []
    for label in labels:
        if label < 0:
            out.append(-1)
        else:
            out.append(mapping.setdefault(label, len(mapping)))
    return tuple(out)


def _merge_labels(labels: Sequence[int], a: int, b: int) -> Tuple[int, ...]:
    """ Put positions a and b into one component. """
    out = list(labels)
    la, lb = out[a], out[b]
    fresh = max(out, default=-1) + 1
    if la < 0 and lb < 0:
        out[a] = out[b] = fresh
    elif la < 0:
        out[a] = lb
    elif lb < 0:
        out[b] = la
    else:
        out = [la if label == lb else label for label in out]
    return _canon(out)


def _join_labels(first: Sequence[int], second: Sequence[int]) -> Tuple[int, ...]:
    """ Components of the union of two partial solutions over the same bag. """
    parent: Dict[Tuple[int, int], Tuple[int, int]] = {}

    def find(x):
        while parent.setdefault(x, x) != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    for a, b in zip(first, second):
        if a >= 0 and b >= 0:
            parent[find((0, a))] = find((1, b))
    roots = []
    for a, b in zip(first, second):
        if a >= 0:
            roots.append(find((0, a)))
        elif b >= 0:
            roots.append(find((1, b)))
        else:
            roots.append(None)
    mapping: Dict[Tuple[int, int], int] = {}
    return tuple(-1 if r is None else mapping.setdefault(r, len(mapping)) for r in roots)


class _TspRules:
    """
    Edge multiplicities 0/1/2 forming a connected Eulerian spanning multigraph.
    State: ((parity, used) per bag vertex, component labels, closed).
    """
    join_key = None

    def leaf(self):
        return ((), (), False)

    def introduce(self, state, pos, v):
        cells, labels, closed = state
        yield (cells[:pos] + ((0, False),) + cells[pos:], _canon(labels[:pos] + (-1,) + labels[pos:]), closed), 0.0, None

    def edge(self, state, pu, px, u, x, length):
        yield state, 0.0, None
        cells, labels, closed = state
        if closed:
            return
        for k in (1, 2):
            new = list(cells)
            for p in (pu, px):
                parity, _ = new[p]
                new[p] = (parity ^ (k & 1), True)
            yield (tuple(new), _merge_labels(labels, pu, px), False), k * length, (u, x, k)

    def forget(self, state, pos, v):
        cells, labels, closed = state
        parity, used = cells[pos]
        if not used or parity:
            return None
        label = labels[pos]
        rest = labels[:pos] + labels[pos + 1:]
        if label not in rest:
            if closed or any(l >= 0 for l in rest):
                return None
            closed = True
        return (cells[:pos] + cells[pos + 1:], _canon(rest), closed), 0.0, None

    def join(self, first, second):
        if first[2] and second[2]:
            return None
        cells = tuple((pa ^ pb, ua or ub) for (pa, ua), (pb, ub) in zip(first[0], second[0]))
        closed = first[2] or second[2]
        if closed and any(used for _, used in cells):
            return None
        return cells, _join_labels(first[1], second[1]), closed

    def accept(self, state) -> bool:
        return state[2]


class _SteinerRules:
    """
    Tree edges over selected vertices. State: (selected per bag vertex,
    component labels, closed). Terminals are always selected.
    """
    def __init__(self, terminals: Set[int]):
        self.terminals = terminals

    @staticmethod
    def join_key(state):
        return state[0]

    def leaf(self):
        return ((), (), False)

    def introduce(self, state, pos, v):
        selected, labels, closed = state
        if v not in self.terminals:
            yield (selected[:pos] + (False,) + selected[pos:], _canon(labels[:pos] + (-1,) + labels[pos:]), closed), 0.0, None
        if closed:
            return
        fresh = max(labels, default=-1) + 1
        yield (selected[:pos] + (True,) + selected[pos:], _canon(labels[:pos] + (fresh,) + labels[pos:]), closed), 0.0, None

    def edge(self, state, pu, px, u, x, length):
        yield state, 0.0, None
        selected, labels, closed = state
        if selected[pu] and selected[px] and labels[pu] != labels[px]:
            yield (selected, _merge_labels(labels, pu, px), closed), length, (u, x)

    def forget(self, state, pos, v):
        selected, labels, closed = state
        label = labels[pos]
        rest = labels[:pos] + labels[pos + 1:]
        if selected[pos] and label not in rest:
            if closed or any(l >= 0 for l in rest):
                return None
            closed = True
        return (selected[:pos] + selected[pos + 1:], _canon(rest), closed), 0.0, None

    def join(self, first, second):
        if first[2] and second[2]:
            return None
        closed = first[2] or second[2]
        if closed and any(first[0]):
            return None
        return first[0], _join_labels(first[1], second[1]), closed

    def accept(self, state) -> bool:
        return state[2]


class _FacilityRules:
    """
    Every vertex carries a label from its candidate distances (0 = open); a
    closed vertex needs a neighbor u with label(u) + len <= label(v).
    State: (label index per bag vertex, satisfied per bag vertex). Costs are
    charged when a vertex is forgotten.
    """
    def __init__(self, candidates: Dict[int, np.ndarray], open_cost: Dict[int, float], phi: Dict[int, float]):
        self.candidates = candidates
        self.open_cost = open_cost
        self.phi = phi

    @staticmethod
    def join_key(state):
        return state[0]

    def leaf(self):
        return ((), ())

    def introduce(self, state, pos, v):
        labels, satisfied = state
        for idx in range(len(self.candidates[v])):
            yield (labels[:pos] + ((v, idx),) + labels[pos:], satisfied[:pos] + (idx == 0,) + satisfied[pos:]), 0.0, None

    def _value(self, cell) -> float:
        v, idx = cell
        return float(self.candidates[v][idx])

    def edge(self, state, pu, px, u, x, length):
        labels, satisfied = state
        lu, lx = self._value(labels[pu]), self._value(labels[px])
        if abs(lu - lx) > length + REL_TOL * max(length, lu, lx):
            return
        sat = list(satisfied)
        if lu > 0 and approx_le(lx + length, lu):
            sat[pu] = True
        if lx > 0 and approx_le(lu + length, lx):
            sat[px] = True
        yield (labels, tuple(sat)), 0.0, None

    def forget(self, state, pos, v):
        labels, satisfied = state
        if not satisfied[pos]:
            return None
        value = self._value(labels[pos])
        cost = self.open_cost[v] if labels[pos][1] == 0 else self.phi[v] * value
        return (labels[:pos] + labels[pos + 1:], satisfied[:pos] + satisfied[pos + 1:]), cost, (v, value)

    def join(self, first, second):
        return first[0], tuple(a or b for a, b in zip(first[1], second[1]))

    def accept(self, state) -> bool:
        return True


def _flatten(witness) -> List[Any]:
    items: List[Any] = []
    stack = [witness]
    while stack:
        node = stack.pop()
        while node is not None:
            if node[0] == _JOINED:
                stack.append(node[2])
                node = node[1]
                continue
            items.append(node[0])
            node = node[1]
    return items


class TreewidthDP:
    """ Bottom-up table pass over a nice decomposition with pluggable per-problem rules. """
    def __init__(self, nice: NiceDecomposition, rules, state_budget: Optional[int] = None):
        self.nice = nice
        self.rules = rules
        self.state_budget = DEFAULT_STATE_BUDGET if state_budget is None else state_budget
        self.max_states = 0

    def _relax(self, table: Dict, state, cost: float, witness) -> None:
        best = table.get(state)
        if best is None:
            if len(table) >= self.state_budget:
                raise StateBudgetExceeded(len(table) + 1, self.state_budget)
            table[state] = (cost, witness)
        elif cost < best[0]:
            table[state] = (cost, witness)

    @staticmethod
    def _extend(witness, item):
        return witness if item is None else (item, witness)

    def run(self) -> Optional[Tuple[float, List[Any]]]:
        tables: Dict[int, Dict] = {}
        rules = self.rules
        for node in self.nice.nodes:
            table: Dict = {}
            if node.kind == LEAF:
                table[rules.leaf()] = (0.0, None)
            elif node.kind == INTRODUCE:
                pos = node.bag.index(node.vertex)
                for state, (cost, witness) in tables.pop(node.children[0]).items():
                    for new, add, item in rules.introduce(state, pos, node.vertex):
                        self._relax(table, new, cost + add, self._extend(witness, item))
            elif node.kind == FORGET:
                child_bag = tuple(sorted(node.bag + (node.vertex,)))
                current = tables.pop(node.children[0])
                pos_v = child_bag.index(node.vertex)
                for v, x, length in node.edges:
                    pos_x = child_bag.index(x)
                    following: Dict = {}
                    for state, (cost, witness) in current.items():
                        for new, add, item in rules.edge(state, pos_v, pos_x, v, x, length):
                            self._relax(following, new, cost + add, self._extend(witness, item))
                    current = following
                for state, (cost, witness) in current.items():
                    result = rules.forget(state, pos_v, node.vertex)
                    if result is not None:
                        new, add, item = result
                        self._relax(table, new, cost + add, self._extend(witness, item))
            else:
                left = tables.pop(node.children[0])
                right = tables.pop(node.children[1])
                buckets: Dict[Any, List] = {}
                for state, entry in right.items():
                    key = rules.join_key(state) if rules.join_key else None
                    buckets.setdefault(key, []).append((state, entry))
                for state, (cost, witness) in left.items():
                    key = rules.join_key(state) if rules.join_key else None
                    for other, (other_cost, other_witness) in buckets.get(key, ()):
                        new = rules.join(state, other)
                        if new is not None:
                            self._relax(table, new, cost + other_cost, (_JOINED, witness, other_witness))
            tables[node.id] = table
            self.max_states = max(self.max_states, len(table))

        final = tables[self.nice.root]
        accepted = [(cost, witness) for state, (cost, witness) in final.items() if rules.accept(state)]
        if not accepted:
            return None
        cost, witness = min(accepted, key=lambda entry: entry[0])
        return cost, _flatten(witness)


def _distances(vertices: List[int], edges: Edges) -> np.ndarray:
    index = {v: k for k, v in enumerate(vertices)}
    if not edges:
        dist = np.full((len(vertices), len(vertices)), np.inf)
        np.fill_diagonal(dist, 0.0)
        return dist
    rows = [index[u] for u, _ in edges] + [index[v] for _, v in edges]
    cols = [index[v] for _, v in edges] + [index[u] for u, _ in edges]
    data = list(edges.values()) * 2
    return dijkstra(csr_matrix((data, (rows, cols)), shape=(len(vertices), len(vertices))), directed=False)


def _tour_from_multiplicities(items: Iterable[Tuple[int, int, int]], start: int) -> List[int]:
    multigraph = nx.MultiGraph()
    multigraph.add_node(start)
    for u, x, k in items:
        for _ in range(k):
            multigraph.add_edge(u, x)
    walk = [start]
    for _, v in nx.eulerian_circuit(multigraph, source=start):
        walk.append(v)
    return walk


def walk_cost(walk: Sequence[int], edges: Edges) -> float:
    return float(sum(edges[(min(a, b), max(a, b))] for a, b in zip(walk, walk[1:])))


def facility_candidates(p: ProblemInstance, vertices: List[int], dist: np.ndarray) -> Dict[int, np.ndarray]:
    """
    Distance labels each vertex may take. A closed vertex v never sits farther
    than open_cost[v] / phi[v] from its facility in an optimal opening, since
    opening v instead is no worse, so longer distances are dropped.
    """
    candidates = {}
    for k, v in enumerate(vertices):
        row = dist[k][np.isfinite(dist[k])]
        reach = float(p.open_cost[v]) / float(p.phi[v])
        candidates[v] = np.unique(row[row <= reach * (1 + REL_TOL)])
    return candidates


def facility_state_estimate(td: TreeDecomposition, candidates: Dict[int, np.ndarray]) -> int:
    """ Upper bound on any facility table: labels times satisfied flags over the worst bag. """
    return max((math.prod(len(candidates[v]) for v in bag if v in candidates) * 2 ** len(bag) for bag in td.bags.values()), default=1)


def solve_on_tree_decomposition(p: ProblemInstance,
                                edges: Edges,
                                td: TreeDecomposition,
                                width_cap: Optional[int] = None,
                                vertices: Optional[Iterable[int]] = None,
                                state_budget: Optional[int] = None) -> SolveResult:
    """
    Optimal TSP walk, Steiner tree or facility opening over the graph given by
    `edges` (lengths as weights), by dynamic programming on `td`. Vertices
    default to the vertex set of td. Opening costs and phi are read from `p`
    by vertex id.

    Raises WidthCapExceeded when td is wider than the cap for the problem and
    StateBudgetExceeded when a table would hold more than `state_budget` states
    (checked up front for facility location, while running for all problems).
    """
    budget = DEFAULT_STATE_BUDGET if state_budget is None else state_budget
    vertex_list = sorted(set(vertices) if vertices is not None else td.vertices())
    report = td.validate(vertex_list, edges.keys())
    if not report.ok:
        raise ValueError(f"Tree decomposition does not fit the graph: {report.violations[0].message}")
    cap = DEFAULT_WIDTH_CAPS[p.kind] if width_cap is None else width_cap
    if td.width > cap:
        raise WidthCapExceeded(td.width, cap)

    details: Dict[str, Any] = {"width": td.width, "n": len(vertex_list)}
    if p.kind is ProblemKind.TSP and len(vertex_list) <= 1:
        return SolveResult(p.kind, 0.0, list(vertex_list), "dp", True, details)
    if p.kind is ProblemKind.STEINER:
        terminals = set(p.terminals) & set(vertex_list)
        if terminals != set(p.terminals):
            return SolveResult.infeasible(p.kind, "dp", "terminals outside the graph")
        if len(terminals) <= 1:
            return SolveResult(p.kind, 0.0, [], "dp", True, details)

    nice = make_nice(td, edges)
    if p.kind is ProblemKind.TSP:
        rules = _TspRules()
    elif p.kind is ProblemKind.STEINER:
        rules = _SteinerRules(set(p.terminals))
    else:
        dist = _distances(vertex_list, edges)
        candidates = facility_candidates(p, vertex_list, dist)
        estimate = facility_state_estimate(td, candidates)
        details["state_estimate"] = estimate
        if estimate > budget:
            raise StateBudgetExceeded(estimate, budget)
        rules = _FacilityRules(candidates,
                               {v: float(p.open_cost[v]) for v in vertex_list},
                               {v: float(p.phi[v]) for v in vertex_list})

    dp = TreewidthDP(nice, rules, budget)
    outcome = dp.run()
    details["max_states"] = dp.max_states
    details["nice_nodes"] = len(nice)
    if outcome is None:
        logger.warning(f"{p.kind.value} DP found no feasible solution on {len(vertex_list)} vertices")
        return SolveResult.infeasible(p.kind, "dp", "no feasible state at the root")
    cost, items = outcome

    if p.kind is ProblemKind.TSP:
        walk = _tour_from_multiplicities(items, vertex_list[0])
        result = SolveResult(p.kind, walk_cost(walk, edges), walk, "dp", True, details)
    elif p.kind is ProblemKind.STEINER:
        tree = sorted((min(u, x), max(u, x)) for u, x in items)
        result = SolveResult(p.kind, sum(edges[e] for e in tree), tree, "dp", True, details)
    else:
        opened = sorted(v for v, value in items if value == 0)
        index = {v: k for k, v in enumerate(vertex_list)}
        assign = {v: min(opened, key=lambda w: (dist[index[v], index[w]], w)) for v in vertex_list}
        total = sum(p.open_cost[w] for w in opened) + sum(p.phi[v] * dist[index[v], index[assign[v]]] for v in vertex_list)
        result = SolveResult(p.kind, float(total), {"open": opened, "assign": assign}, "dp", True, details)
    logger.debug(f"DP {p.kind.value}: cost {result.cost:.6g} (table {cost:.6g}), width {td.width}, states {dp.max_states}")
    return result


def tree_decomposition_of_graph(vertices: Iterable[int], edges: Iterable[Tuple[int, int]]) -> TreeDecomposition:
    """ Min-fill-in tree decomposition of a graph, rooted at its smallest bag by sorted contents. """
    graph = nx.Graph()
    graph.add_nodes_from(sorted(vertices))
    graph.add_edges_from(edges)
    _, decomposition = treewidth_min_fill_in(graph)
    td = TreeDecomposition()
    if decomposition.number_of_nodes() == 0:
        return td
    root = min(decomposition.nodes, key=lambda bag: sorted(bag))
    ids = {root: td.add_bag(root)}
    for parent, child in nx.bfs_edges(decomposition, root, sort_neighbors=lambda nodes: sorted(nodes, key=sorted)):
        ids[child] = td.add_bag(child, parent=ids[parent])
    return td
