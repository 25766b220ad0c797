# utils/fixtures.py
import logging
from typing import Callable, Dict, List, Tuple

import numpy as np

from models.data_models import WeightedGraph
from models.problem_models import FIXTURE_FAMILIES, FixtureSpec
from utils.seeding import rng_for

logger = logging.getLogger(__name__)

Edge = Tuple[int, int, float]

THREE_CLUSTER_BRIDGES = (50.0, 2500.0)
RANDOM_LENGTHS = (1, 9)


def _positive_int(params: Dict, key: str, default: int, minimum: int = 1) -> int:
    value = params.get(key, default)
    if not isinstance(value, (int, np.integer)) or value < minimum:
        raise ValueError(f"Fixture parameter '{key}' must be an integer >= {minimum}, got {value!r}.")
    return int(value)


def _positive_float(params: Dict, key: str, default: float) -> float:
    value = float(params.get(key, default))
    if not value > 0:
        raise ValueError(f"Fixture parameter '{key}' must be positive, got {value!r}.")
    return value


def star(n: int) -> WeightedGraph:
    """ Center 0 with unit edges to 1..n-1. """
    return WeightedGraph(n, [(0, v, 1.0) for v in range(1, n)])


def path(n: int) -> WeightedGraph:
    return WeightedGraph(n, [(v, v + 1, 1.0) for v in range(n - 1)])


def cycle(n: int) -> WeightedGraph:
    if n < 3:
        raise ValueError(f"A cycle needs at least 3 vertices, got {n}.")
    return WeightedGraph(n, [(v, (v + 1) % n, 1.0) for v in range(n)])


def grid(rows: int, cols: int) -> WeightedGraph:
    """ Unit grid; vertex (r, c) has id r * cols + c. """
    edges: List[Edge] = []
    for r in range(rows):
        for c in range(cols):
            v = r * cols + c
            if c + 1 < cols:
                edges.append((v, v + 1, 1.0))
            if r + 1 < rows:
                edges.append((v, v + cols, 1.0))
    return WeightedGraph(rows * cols, edges)


def spider(legs: int, c: float) -> WeightedGraph:
    """ Body u = 0; leg i is u - v_i (length c - 1) - w_i (length 1). """
    if c <= 1:
        raise ValueError(f"spider needs c > 1, got {c}.")
    edges: List[Edge] = []
    for i in range(legs):
        v, w = 1 + i, 1 + legs + i
        edges.append((0, v, c - 1.0))
        edges.append((v, w, 1.0))
    return WeightedGraph(1 + 2 * legs, edges)


def def19_star(legs: int, epsilon: float) -> WeightedGraph:
    """ Center 0; leg i is 0 - u (4), u - w (2 eps), w - x (1), w - y (1 + eps). """
    if not 0 < epsilon < 0.5:
        raise ValueError(f"def19_star needs 0 < epsilon < 1/2, got {epsilon}.")
    edges: List[Edge] = []
    for i in range(legs):
        u, w, x, y = 1 + 4 * i, 2 + 4 * i, 3 + 4 * i, 4 + 4 * i
        edges.extend([(0, u, 4.0), (u, w, 2.0 * epsilon), (w, x, 1.0), (w, y, 1.0 + epsilon)])
    return WeightedGraph(1 + 4 * legs, edges)


def complete_exp(n: int, c: float) -> WeightedGraph:
    """ Complete graph; with vertices numbered 1..n, edge {i, j}, i < j, has length c^i. """
    edges = [(i, j, float(c) ** (i + 1)) for i in range(n) for j in range(i + 1, n)]
    return WeightedGraph(n, edges)


def three_cluster(size: int) -> WeightedGraph:
    """ Three unit cliques; cluster 0 - 1 bridged at 50, cluster 1 - 2 at 2500. """
    edges: List[Edge] = []
    for k in range(3):
        base = k * size
        edges.extend((base + a, base + b, 1.0) for a in range(size) for b in range(a + 1, size))
    edges.append((size - 1, size, THREE_CLUSTER_BRIDGES[0]))
    edges.append((2 * size - 1, 2 * size, THREE_CLUSTER_BRIDGES[1]))
    return WeightedGraph(3 * size, edges)


def twin_triangles(bridge: float) -> WeightedGraph:
    edges = [(0, 1, 1.0), (1, 2, 1.0), (0, 2, 1.0),
             (3, 4, 1.0), (4, 5, 1.0), (3, 5, 1.0),
             (2, 3, float(bridge))]
    return WeightedGraph(6, edges)


def random_connected(n: int, extra_edges: int, rng: np.random.Generator) -> WeightedGraph:
    """ Random spanning tree plus extra edges, integer lengths in [1, 9]. """
    low, high = RANDOM_LENGTHS
    edges: List[Edge] = []
    for v in range(1, n):
        edges.append((int(rng.integers(0, v)), v, float(rng.integers(low, high + 1))))
    for _ in range(extra_edges):
        if n < 2:
            break
        u, v = (int(x) for x in rng.choice(n, size=2, replace=False))
        edges.append((u, v, float(rng.integers(low, high + 1))))
    return WeightedGraph(n, edges)


def hub_and_spoke(hubs: int, spokes: int, hub_length: float, spoke_radius: float,
                  rng: np.random.Generator) -> WeightedGraph:
    """
    Hubs 0..hubs-1 sit at random plane positions scaled so that the closest
    pair is hub_length apart and are linked by a complete graph of Euclidean
    lengths. Every hub gets `spokes` local vertices on edges of length in
    [1, spoke_radius]; consecutive spokes of a hub are linked too.
    """
    if spoke_radius < 1:
        raise ValueError(f"spoke_radius must be at least 1, got {spoke_radius}.")
    edges: List[Edge] = []
    if hubs > 1:
        points = rng.uniform(0.0, 1.0, size=(hubs, 2))
        gaps = np.linalg.norm(points[:, None, :] - points[None, :, :], axis=2)
        closest = gaps[np.triu_indices(hubs, k=1)].min()
        points *= hub_length / max(closest, 1e-12)
        for a in range(hubs):
            for b in range(a + 1, hubs):
                edges.append((a, b, float(np.linalg.norm(points[a] - points[b]))))
    vertex = hubs
    for h in range(hubs):
        previous = None
        for _ in range(spokes):
            edges.append((h, vertex, float(rng.uniform(1.0, spoke_radius))))
            if previous is not None:
                edges.append((previous, vertex, float(rng.uniform(1.0, spoke_radius))))
            previous = vertex
            vertex += 1
    return WeightedGraph(vertex, edges)


def _build(spec: FixtureSpec) -> WeightedGraph:
    p = spec.params
    family = spec.family
    rng = rng_for(spec.seed, FIXTURE_FAMILIES.index(family))
    builders: Dict[str, Callable[[], WeightedGraph]] = {
        "star": lambda: star(_positive_int(p, "n", 5)),
        "path": lambda: path(_positive_int(p, "n", 5)),
        "cycle": lambda: cycle(_positive_int(p, "n", 6, minimum=3)),
        "grid": lambda: grid(_positive_int(p, "rows", 3), _positive_int(p, "cols", 3)),
        "spider": lambda: spider(_positive_int(p, "l", 8), _positive_float(p, "c", 5.0)),
        "def19_star": lambda: def19_star(_positive_int(p, "l", 4), _positive_float(p, "eps", 0.05)),
        "complete_exp": lambda: complete_exp(_positive_int(p, "n", 5), _positive_float(p, "c", 5.0)),
        "three_cluster": lambda: three_cluster(_positive_int(p, "size", 4)),
        "twin_triangles": lambda: twin_triangles(_positive_float(p, "bridge", 10.0)),
        "random_connected": lambda: random_connected(_positive_int(p, "n", 10),
                                                     _positive_int(p, "extra_edges", 5, minimum=0), rng),
        "hub_and_spoke": lambda: hub_and_spoke(_positive_int(p, "hubs", 4), _positive_int(p, "spokes", 3, minimum=0),
                                               _positive_float(p, "hub_length", 50.0),
                                               _positive_float(p, "spoke_radius", 3.0), rng),
    }
    return builders[family]()


def generate_fixture(spec: FixtureSpec) -> WeightedGraph:
    """ Deterministic graph for (family, params, seed). """
    graph = _build(spec)
    logger.debug(f"Generated fixture {spec.name} (seed {spec.seed}): {graph}")
    return graph


def parse_fixture_spec(text: str, seed: int = 0) -> FixtureSpec:
    """ 'family' or 'family:key=value,key=value' (numbers parsed as int, then float). """
    family, _, rest = text.partition(":")
    params: Dict = {}
    for item in filter(None, (chunk.strip() for chunk in rest.split(","))):
        key, sep, raw = item.partition("=")
        if not sep:
            raise ValueError(f"Fixture parameter '{item}' must look like key=value.")
        try:
            params[key.strip()] = int(raw)
        except ValueError:
            params[key.strip()] = float(raw)
    return FixtureSpec(family.strip(), params, seed=seed)
