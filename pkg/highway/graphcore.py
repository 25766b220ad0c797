# highway/graphcore.py
import logging
import math
from typing import FrozenSet, Iterable, List, Sequence

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components, dijkstra

from models.data_models import MetricInstance, WeightedGraph
from models.errors import GraphError

logger = logging.getLogger(__name__)

REL_TOL = 1e-9
RESCALE_ETA = 1e-6


def approx_le(a: float, b: float) -> bool:
    """a <= b with the relative slack applied on the inclusive side."""
    return a <= b + REL_TOL * abs(b)


def approx_eq(a: float, b: float) -> bool:
    return abs(a - b) <= REL_TOL * max(abs(a), abs(b))


def in_window(length: float, low: float, high: float) -> bool:
    """length in the half-open window (low, high]."""
    return not approx_le(length, low) and approx_le(length, high)


def adjacency_matrix(g: WeightedGraph) -> csr_matrix:
    if not g.edges:
        return csr_matrix((g.n, g.n))
    rows = [u for u, _, _ in g.edges] + [v for _, v, _ in g.edges]
    cols = [v for _, v, _ in g.edges] + [u for u, _, _ in g.edges]
    data = [w for _, _, w in g.edges] * 2
    return csr_matrix((data, (rows, cols)), shape=(g.n, g.n))


def _check_graph(g: WeightedGraph) -> None:
    for u, v, w in g.edges:
        if not math.isfinite(w) or w <= 0:
            raise GraphError(f"bad edge ({u}, {v}): length {w} must be positive and finite")
    if g.n > 1:
        n_components, _ = connected_components(adjacency_matrix(g), directed=False)
        if n_components > 1:
            raise GraphError(f"disconnected graph: {n_components} components")


def _canonical_predecessors(g: WeightedGraph, dist: np.ndarray) -> np.ndarray:
    """
    For every source s pick, for each v, the tight predecessor whose path
    carries the largest vertex mask sum(2^(n-1-x)); the resulting paths prefer
    the smallest id where two shortest paths diverge.
    """
    n = g.n
    adjacency = g.neighbors()
    bits = [1 << (n - 1 - v) for v in range(n)]
    pred = np.full((n, n), -1, dtype=np.int64)
    for s in range(n):
        row = dist[s]
        mask: List[int] = [0] * n
        mask[s] = bits[s]
        for v in np.argsort(row, kind="stable"):
            v = int(v)
            if v == s:
                continue
            best_p, best_mask = -1, -1
            for p, w in adjacency[v]:
                if row[p] < row[v] and approx_eq(row[p] + w, row[v]) and mask[p] > best_mask:
                    best_p, best_mask = p, mask[p]
            if best_p < 0:
                raise GraphError(f"no tight predecessor for {v} from source {s}")
            pred[s, v] = best_p
            mask[v] = best_mask | bits[v]
    return pred


def build_metric(g: WeightedGraph) -> MetricInstance:
    """ All-pairs shortest paths plus canonical unique paths. """
    _check_graph(g)
    if g.n == 1:
        return MetricInstance(g, np.zeros((1, 1)), np.full((1, 1), -1))
    dist = dijkstra(adjacency_matrix(g), directed=False)
    pred = _canonical_predecessors(g, dist)
    metric = MetricInstance(g, dist, pred)
    logger.debug(f"Built metric: {metric}")
    return metric


def ball(m: MetricInstance, v: int, r: float) -> FrozenSet[int]:
    return frozenset(int(u) for u in np.nonzero(m.dist[v] <= r + REL_TOL * abs(r))[0])


def rescale_min_distance(m: MetricInstance, c: float) -> MetricInstance:
    """ Scale all lengths so the minimum pairwise distance is (c/2)(1+eta). """
    if c < 4:
        raise ValueError(f"c must be at least 4, got {c}.")
    if m.n == 1:
        return m
    factor = (c / 2.0) * (1.0 + RESCALE_ETA) / m.min_dist
    if math.isclose(factor, 1.0, rel_tol=1e-12):
        return m
    scaled = WeightedGraph(m.n, [(u, v, w * factor) for u, v, w in m.graph.edges])
    logger.debug(f"Rescaling metric by {factor:.12g} for c={c}")
    return MetricInstance(scaled, m.dist * factor, m.pred, scale=m.scale * factor)


def canonical_shortest_path(m: MetricInstance, u: int, v: int) -> List[int]:
    if u == v:
        return [u]
    a, b = (u, v) if u < v else (v, u)
    row = m.pred[a]
    path = [b]
    while path[-1] != a:
        path.append(int(row[path[-1]]))
    path.reverse()
    return path if u == a else path[::-1]


def path_length(m: MetricInstance, path: Sequence[int]) -> float:
    return float(sum(m.dist[path[k], path[k + 1]] for k in range(len(path) - 1)))


def distance_to_set(m: MetricInstance, v: int, targets: Iterable[int]) -> float:
    idx = list(targets)
    if not idx:
        return math.inf
    return float(m.dist[v, idx].min())


def set_distance(m: MetricInstance, a: Iterable[int], b: Iterable[int]) -> float:
    ia, ib = list(a), list(b)
    if not ia or not ib:
        return math.inf
    return float(m.dist[np.ix_(ia, ib)].min())


def set_diameter(m: MetricInstance, vertices: Iterable[int]) -> float:
    idx = list(vertices)
    if len(idx) < 2:
        return 0.0
    return float(m.dist[np.ix_(idx, idx)].max())
