# solvers/exact.py
import logging
from typing import Dict, List, Tuple

import numpy as np

from models.errors import SizeGuardError
from models.problem_models import ProblemInstance, ProblemKind, SolveResult
from solvers.baseline import facility_cost, nearest_assignment, path_edges, prune_to_steiner_tree, tour_cost, tree_cost

logger = logging.getLogger(__name__)

HELD_KARP_MAX_N = 14
DREYFUS_WAGNER_MAX_TERMINALS = 10
FACILITY_ENUM_MAX_N = 18


def held_karp(dist: np.ndarray) -> Tuple[float, List[int]]:
    """ Optimal closed tour through every index of `dist`, starting and ending at 0. """
    n = len(dist)
    if n == 1:
        return 0.0, [0]
    full = 1 << n
    dp = np.full((full, n), np.inf)
    parent = np.full((full, n), -1, dtype=int)
    dp[1, 0] = 0.0
    for mask in range(1, full, 2):
        row = dp[mask]
        if not np.isfinite(row).any():
            continue
        reach = row[:, None] + dist
        best_prev = np.argmin(reach, axis=0)
        best_cost = reach[best_prev, np.arange(n)]
        for k in range(1, n):
            bit = 1 << k
            if mask & bit:
                continue
            if best_cost[k] < dp[mask | bit, k]:
                dp[mask | bit, k] = best_cost[k]
                parent[mask | bit, k] = best_prev[k]

    closing = dp[full - 1] + dist[:, 0]
    last = int(np.argmin(closing[1:])) + 1
    tour = [0]
    mask, current = full - 1, last
    while current != 0:
        tour.append(current)
        previous = int(parent[mask, current])
        mask ^= 1 << current
        current = previous
    tour.append(0)
    tour.reverse()
    return float(closing[last]), tour


def _exact_tsp(p: ProblemInstance) -> SolveResult:
    if p.n > HELD_KARP_MAX_N:
        raise SizeGuardError(f"exact tsp limited to n <= {HELD_KARP_MAX_N}, got n={p.n}")
    _, tour = held_karp(p.metric.dist)
    return SolveResult(p.kind, tour_cost(p.metric, tour), tour, "exact", True)


def _exact_steiner(p: ProblemInstance) -> SolveResult:
    """ Dreyfus-Wagner over subsets of the terminals. """
    terminals = sorted(p.terminals)
    k = len(terminals)
    if k > DREYFUS_WAGNER_MAX_TERMINALS:
        raise SizeGuardError(f"exact steiner limited to {DREYFUS_WAGNER_MAX_TERMINALS} terminals, got {k}")
    if k <= 1:
        return SolveResult(p.kind, 0.0, [], "exact", True)
    m = p.metric
    dist = m.dist
    n = p.n
    rest, root = terminals[:-1], terminals[-1]
    full = 1 << len(rest)

    dp = np.full((full, n), np.inf)
    via = np.full((full, n), -1, dtype=int)
    split = np.zeros((full, n), dtype=int)
    for b, t in enumerate(rest):
        dp[1 << b] = dist[t]
        via[1 << b] = t

    for mask in range(1, full):
        if mask & (mask - 1) == 0:
            continue
        merged = np.full(n, np.inf)
        chosen = np.zeros(n, dtype=int)
        sub = (mask - 1) & mask
        while sub:
            if sub < mask ^ sub:
                sub = (sub - 1) & mask
                continue
            total = dp[sub] + dp[mask ^ sub]
            better = total < merged
            merged[better] = total[better]
            chosen[better] = sub
            sub = (sub - 1) & mask
        reach = merged[:, None] + dist
        best_u = np.argmin(reach, axis=0)
        dp[mask] = reach[best_u, np.arange(n)]
        via[mask] = best_u
        split[mask] = chosen

    edges: List[Tuple[int, int]] = []
    stack = [(full - 1, root)]
    while stack:
        mask, v = stack.pop()
        u = int(via[mask, v])
        edges.extend(path_edges(m, u, v))
        if mask & (mask - 1) == 0:
            continue
        sub = int(split[mask, u])
        stack.append((sub, u))
        stack.append((mask ^ sub, u))
    witness = prune_to_steiner_tree(m, edges, terminals)
    return SolveResult(p.kind, tree_cost(m, witness), witness, "exact", True)


def _exact_facility(p: ProblemInstance) -> SolveResult:
    """ Every non-empty set of open facilities, built up one bit at a time. """
    n = p.n
    if n > FACILITY_ENUM_MAX_N:
        raise SizeGuardError(f"exact facility limited to n <= {FACILITY_ENUM_MAX_N}, got n={n}")
    dist = p.metric.dist
    nearest = np.full((1 << n, n), np.inf)
    opening = np.zeros(1 << n)
    for b in range(n):
        block = slice(1 << b, 1 << (b + 1))
        nearest[block] = np.minimum(nearest[:1 << b], dist[b])
        opening[block] = opening[:1 << b] + p.open_cost[b]
    total = opening + (nearest * p.phi).sum(axis=1)
    total[0] = np.inf
    best = int(np.argmin(total))
    opened = [v for v in range(n) if best >> v & 1]
    assign = nearest_assignment(p.metric, range(n), opened)
    witness = {"open": opened, "assign": assign}
    return SolveResult(p.kind, facility_cost(p, opened, assign), witness, "exact", True)


def exact_solve(p: ProblemInstance) -> SolveResult:
    """ Provably optimal solution for instances within the size guards. """
    if p.kind is ProblemKind.TSP:
        result = _exact_tsp(p)
    elif p.kind is ProblemKind.STEINER:
        result = _exact_steiner(p)
    else:
        result = _exact_facility(p)
    logger.debug(f"Exact {p.kind.value} on n={p.n}: cost {result.cost:.6g}")
    return result
