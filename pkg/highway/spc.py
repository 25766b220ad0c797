# highway/spc.py
import logging
import math
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

import numpy as np

from highway.graphcore import REL_TOL, canonical_shortest_path, rescale_min_distance
from models.data_models import CoverLadder, CoverLevel, HdConfig, MetricInstance
from models.errors import SizeGuardError

logger = logging.getLogger(__name__)

EXACT_HD_MAX_N = 20
# scales just below a critical value; larger than REL_TOL so the nudge survives the tolerant comparisons
HD_SCALE_NUDGE = 1e-6
HD_VARIANTS = ("def1", "def18", "def19")


def approx_window_le(values: np.ndarray, bound: float) -> np.ndarray:
    return values <= bound + REL_TOL * bound


class PathFamily:
    """
    Canonical shortest paths of every pair u < v of a metric, with their
    lengths and a path/vertex incidence matrix. Built once per metric.
    """
    def __init__(self, m: MetricInstance):
        n = m.n
        self.n = n
        us, vs = np.triu_indices(n, k=1)
        self.pairs: List[Tuple[int, int]] = list(zip(us.tolist(), vs.tolist()))
        self.lengths: np.ndarray = m.dist[us, vs] if len(us) else np.zeros(0)
        self.paths: List[List[int]] = [canonical_shortest_path(m, u, v) for u, v in self.pairs]
        self.incidence: np.ndarray = np.zeros((len(self.paths), n), dtype=bool)
        for k, path in enumerate(self.paths):
            self.incidence[k, path] = True

    def window(self, low: float, high: float) -> np.ndarray:
        """ Indices of paths with length in (low, high]. """
        above = self.lengths > low + REL_TOL * abs(low)
        below = self.lengths <= high + REL_TOL * abs(high)
        return np.nonzero(above & below)[0]


def _greedy_cover(incidence: np.ndarray) -> List[int]:
    """ Greedy maximum coverage; ties to the smallest vertex id. Returns hubs in insertion order. """
    uncovered = np.ones(incidence.shape[0], dtype=bool)
    order: List[int] = []
    while uncovered.any():
        counts = incidence[uncovered].sum(axis=0)
        best = int(np.argmax(counts))
        if counts[best] == 0:
            break
        order.append(best)
        uncovered &= ~incidence[:, best]
    return order


def _prune(incidence: np.ndarray, order: List[int]) -> List[int]:
    """ One reverse pass dropping every hub whose paths stay covered without it. """
    kept = list(order)
    hits = incidence[:, kept].sum(axis=1) if kept else np.zeros(incidence.shape[0], dtype=int)
    for hub in reversed(order):
        column = incidence[:, hub]
        if np.all(hits[column] >= 2):
            kept.remove(hub)
            hits = hits - column
    return kept


def compute_spc_level(m: MetricInstance, r: float, cfg: HdConfig, family: Optional[PathFamily] = None) -> FrozenSet[int]:
    """ Inclusion-wise minimal hub set hitting every canonical path with length in (r, c*r/2]. """
    if r <= 0:
        raise ValueError(f"Scale r must be positive, got {r}.")
    family = family or PathFamily(m)
    selected = family.window(r, cfg.c * r / 2.0)
    if selected.size == 0:
        return frozenset()
    incidence = family.incidence[selected]
    hubs = _prune(incidence, _greedy_cover(incidence))
    logger.debug(f"SPC at r={r:.6g}: {len(selected)} paths, {len(hubs)} hubs")
    return frozenset(hubs)


def local_sparsity(m: MetricInstance, hubs: Iterable[int], r: float, cfg: HdConfig) -> int:
    hub_list = sorted(hubs)
    if not hub_list:
        return 0
    radius = cfg.c * r / 2.0
    inside = m.dist[:, hub_list] <= radius + REL_TOL * radius
    return int(inside.sum(axis=1).max())


def vicinity_hub_count(m: MetricInstance, hubs: Iterable[int], v: int, r: float, cfg: HdConfig) -> int:
    """ Hubs within c*r/2 of the ball B_{cr/2}(v). """
    hub_list = sorted(hubs)
    if not hub_list:
        return 0
    radius = cfg.c * r / 2.0
    limit = radius + REL_TOL * radius
    ball_idx = np.nonzero(m.dist[v] <= limit)[0]
    closest = m.dist[np.ix_(hub_list, ball_idx)].min(axis=1)
    return int((closest <= limit).sum())


def ladder_top_level(m: MetricInstance, c: float) -> int:
    if m.n == 1 or m.diam <= 1.0:
        return 0
    base = c / 4.0
    top = max(0, math.ceil(math.log(m.diam) / math.log(base)))
    while base ** top < m.diam * (1 - REL_TOL):
        top += 1
    return top


def build_cover_ladder(m: MetricInstance, cfg: HdConfig) -> CoverLadder:
    """ Covers for r_i = (c/4)^i, i = 0..m, on the metric rescaled for cfg.c. """
    if cfg.c <= 4:
        raise ValueError(f"The scale ladder needs c > 4: at c={cfg.c} every scale r_i = (c/4)^i equals 1, so the "
                         f"levels never reach the diameter. compute_spc_level and highway_dimension take "
                         f"explicit scales and accept c = 4.")
    rescaled = rescale_min_distance(m, cfg.c)
    top = ladder_top_level(rescaled, cfg.c)
    family = PathFamily(rescaled)
    logger.info(f"Building cover ladder: n={rescaled.n}, c={cfg.c}, levels 0..{top}, {len(family.paths)} canonical paths")

    levels: List[CoverLevel] = []
    for i in range(top + 1):
        r = (cfg.c / 4.0) ** i
        hubs = compute_spc_level(rescaled, r, cfg, family)
        levels.append(CoverLevel(i, r, hubs, local_sparsity(rescaled, hubs, r, cfg)))
    ladder = CoverLadder(cfg, rescaled, levels)
    logger.info(f"Cover ladder done: {ladder}")
    return ladder


def uncovered_paths(ladder: CoverLadder, i: int, family: Optional[PathFamily] = None) -> List[Tuple[int, int]]:
    """ Pairs whose canonical path lies in level i's window but misses its hubs. """
    family = family or PathFamily(ladder.metric)
    r = ladder.radius(i)
    selected = family.window(r, ladder.config.c * r / 2.0)
    hubs = sorted(ladder.hubs(i))
    if selected.size == 0:
        return []
    if not hubs:
        return [family.pairs[k] for k in selected]
    hit = family.incidence[np.ix_(selected, hubs)].any(axis=1)
    return [family.pairs[k] for k, ok in zip(selected, hit) if not ok]


def redundant_hubs(ladder: CoverLadder, i: int, family: Optional[PathFamily] = None) -> List[int]:
    """ Hubs of level i whose removal keeps the level covered. """
    family = family or PathFamily(ladder.metric)
    r = ladder.radius(i)
    selected = family.window(r, ladder.config.c * r / 2.0)
    hubs = sorted(ladder.hubs(i))
    if not hubs:
        return []
    hits = family.incidence[np.ix_(selected, hubs)].sum(axis=1)
    out = []
    for k, hub in enumerate(hubs):
        column = family.incidence[selected, hub]
        if np.all(hits[column] >= 2):
            out.append(hub)
    return out


def highway_dimension_proxy(ladder: CoverLadder) -> int:
    """Upper-bound proxy for large graphs: measured sparsity of the greedy ladder."""
    return ladder.sparsity


# exact highway dimension (small graphs only)

def _strip_supersets(paths: Iterable[FrozenSet[int]]) -> List[FrozenSet[int]]:
    ordered = sorted(set(paths), key=lambda p: (len(p), sorted(p)))
    kept: List[FrozenSet[int]] = []
    for path in ordered:
        if not any(q <= path for q in kept):
            kept.append(path)
    return kept


def _hitting_set_within(paths: List[FrozenSet[int]], budget: int) -> bool:
    if not paths:
        return True
    if budget == 0:
        return False
    smallest = min(paths, key=lambda p: (len(p), sorted(p)))
    for x in sorted(smallest):
        rest = [p for p in paths if x not in p]
        if _hitting_set_within(rest, budget - 1):
            return True
    return False


def min_hitting_set_size(paths: Iterable[FrozenSet[int]]) -> int:
    reduced = _strip_supersets(paths)
    k = 0
    while not _hitting_set_within(reduced, k):
        k += 1
    return k


def _critical_scales(m: MetricInstance, cfg: HdConfig) -> List[float]:
    n = m.n
    values = np.unique(m.dist[np.triu_indices(n, k=1)])
    grid: Set[float] = set()
    for length in values.tolist():
        for q in (1.0, 2.0, cfg.c / 2.0, cfg.c):
            x = length / q
            grid.add(x)
            grid.add(x * (1.0 - HD_SCALE_NUDGE))
    return sorted(x for x in grid if x > 0)


class _Def18Witnesses:
    """ All (path, witness) rows for the r-significance test, singleton paths included. """
    def __init__(self, m: MetricInstance):
        n = m.n
        adjacency = m.graph.neighbors()
        self.paths: List[FrozenSet[int]] = []
        owners: List[int] = []
        lengths: List[float] = []
        closeness: List[np.ndarray] = []
        for a in range(n):
            for b in range(a, n):
                core = canonical_shortest_path(m, a, b)
                on_path = set(core)
                owner = len(self.paths)
                self.paths.append(frozenset(core))
                fronts = [None] + [x for x, _ in adjacency[a] if x not in on_path]
                backs = [None] + [y for y, _ in adjacency[b] if y not in on_path]
                for x in fronts:
                    for y in backs:
                        if x is not None and x == y:
                            continue
                        if a == b and x is not None and y is not None and x > y:
                            continue
                        witness = ([x] if x is not None else []) + core + ([y] if y is not None else [])
                        if len(witness) > 1 and canonical_shortest_path(m, witness[0], witness[-1]) != witness:
                            continue
                        owners.append(owner)
                        lengths.append(float(m.dist[witness[0], witness[-1]]))
                        closeness.append(m.dist[witness].min(axis=0))
        self.owners = np.array(owners, dtype=int)
        self.lengths = np.array(lengths)
        self.closeness = np.vstack(closeness) if closeness else np.zeros((0, n))

    def family(self, r: float, v: int) -> FrozenSet[int]:
        ok = (self.lengths > r + REL_TOL * r) & (self.closeness[:, v] <= 2 * r + REL_TOL * 2 * r)
        return frozenset(np.unique(self.owners[ok]).tolist())


def highway_dimension(m: MetricInstance, cfg: HdConfig, variant: str) -> int:
    """
    Exact highway dimension on the critical-scale grid.
    def1: paths longer than r inside B_{cr}(v).
    def19: paths with length in (r, 2r] meeting B_{2r}(v).
    def18: r-significant paths with a witness within 2r of v.
    """
    if variant not in HD_VARIANTS:
        raise ValueError(f"Unknown highway dimension variant '{variant}'. Use one of {HD_VARIANTS}.")
    if m.n > EXACT_HD_MAX_N:
        raise SizeGuardError(f"exact hd limited to small n (n={m.n} > {EXACT_HD_MAX_N})")
    if m.n == 1:
        return 0

    family = PathFamily(m)
    path_sets = [frozenset(p) for p in family.paths]
    far_from = np.zeros((len(path_sets), m.n))
    near_to = np.zeros((len(path_sets), m.n))
    for k, path in enumerate(family.paths):
        rows = m.dist[path]
        far_from[k] = rows.max(axis=0)
        near_to[k] = rows.min(axis=0)
    witnesses = _Def18Witnesses(m) if variant == "def18" else None

    cache: Dict[FrozenSet[int], int] = {}
    best = 0
    for r in _critical_scales(m, cfg):
        longer = family.lengths > r + REL_TOL * r
        for v in range(m.n):
            if variant == "def1":
                bound = cfg.c * r
                members = longer & (far_from[:, v] <= bound + REL_TOL * bound)
                key = frozenset(np.nonzero(members)[0].tolist())
                paths = [path_sets[k] for k in key]
            elif variant == "def19":
                bound = 2 * r
                members = longer & approx_window_le(family.lengths, bound) & (near_to[:, v] <= bound + REL_TOL * bound)
                key = frozenset(np.nonzero(members)[0].tolist())
                paths = [path_sets[k] for k in key]
            else:
                key = witnesses.family(r, v)
                paths = [witnesses.paths[k] for k in key]
            cache_key = frozenset(paths)
            if cache_key not in cache:
                cache[cache_key] = min_hitting_set_size(paths)
            best = max(best, cache[cache_key])
    logger.info(f"Highway dimension ({variant}, c={cfg.c}) on n={m.n}: {best} ({len(cache)} distinct path families)")
    return best