# highway/corehubs.py
import logging
import math
from typing import Dict, FrozenSet, Iterable, List, Optional, Set, Tuple

import numpy as np

from highway.graphcore import REL_TOL, approx_le
from models.data_models import CoverLadder, HdConfig, MetricInstance, TownsDecomposition
from models.embedding_models import ApproxCoreHubs, CoreChain, DoublingEstimate, Representatives, ShiftRecord

logger = logging.getLogger(__name__)

DOUBLING_MAX_RADII = 96
DOUBLING_MAX_CENTERS = 48


def compute_cores(td: TownsDecomposition, ladder: CoverLadder, town_id: int) -> CoreChain:
    town = td.town(town_id)
    j = town.recursion_level
    cores: Dict[int, FrozenSet[int]] = {j: town.vertices}
    for i in range(j - 1, -1, -1):
        cores[i] = td.sprawl_at(i) & cores[i + 1]
    return CoreChain(town_id, j, cores)


def core_hubs(chain: CoreChain, ladder: CoverLadder, i: int) -> FrozenSet[int]:
    return chain.core(i) & ladder.hubs(i)


def compute_approx_core_hubs(td: TownsDecomposition,
                             ladder: CoverLadder,
                             town_id: int,
                             chain: Optional[CoreChain] = None,
                             cfg: Optional[HdConfig] = None,
                             min_level: int = 1) -> ApproxCoreHubs:
    """
    Approximate core hubs of a town. Levels are scanned upwards from
    min_level to j-1; a core hub is replaced by the closest member of a lower
    level within eps * r_i (ties: lower level, then smaller id).
    """
    cfg = cfg or ladder.config
    chain = chain or compute_cores(td, ladder, town_id)
    m = ladder.metric
    j = chain.top
    per_level: Dict[int, FrozenSet[int]] = {}
    first_level: Dict[int, int] = {}
    shift_log: List[ShiftRecord] = []

    for i in range(max(1, min_level), j):
        hubs = sorted(core_hubs(chain, ladder, i))
        limit = cfg.epsilon * ladder.radius(i)
        members: Set[int] = set()
        lower = sorted(first_level.items(), key=lambda item: (item[1], item[0]))
        for h in hubs:
            best: Optional[Tuple[float, int, int]] = None
            for candidate, level in lower:
                d = float(m.dist[h, candidate])
                if approx_le(d, limit) and (best is None or (d, level, candidate) < best):
                    best = (d, level, candidate)
            if best is None:
                members.add(h)
                shift_log.append(ShiftRecord(h, i, h, 0.0))
            else:
                members.add(best[2])
                shift_log.append(ShiftRecord(h, i, best[2], best[0]))
        per_level[i] = frozenset(members)
        for x in members:
            first_level.setdefault(x, i)

    x = ApproxCoreHubs(town_id, per_level, shift_log)
    logger.debug(f"Town {town_id}: {x}")
    return x


def select_representatives(td: TownsDecomposition, town_id: int, hubs: Iterable[int]) -> Representatives:
    """ Smallest hub id of every child town that holds hubs. """
    hub_set = frozenset(hubs)
    represents: Dict[int, FrozenSet[int]] = {}
    child_of: Dict[int, int] = {}
    for child_id in td.town(town_id).children:
        inside = hub_set & td.town(child_id).vertices
        if inside:
            y = min(inside)
            represents[y] = inside
            child_of[y] = child_id
    return Representatives(represents, child_of)


def core_hubs_by_town(td: TownsDecomposition,
                      ladder: CoverLadder,
                      cfg: Optional[HdConfig] = None) -> List[Tuple[ApproxCoreHubs, Representatives]]:
    """ Approximate core hubs and their representatives for every non-leaf town, by town id. """
    out = []
    for town_id in sorted(td.towns):
        if td.town(town_id).is_leaf:
            continue
        x = compute_approx_core_hubs(td, ladder, town_id, cfg=cfg)
        out.append((x, select_representatives(td, town_id, x.union)))
    return out


def local_nesting_violations(x: ApproxCoreHubs, ladder: CoverLadder, cfg: Optional[HdConfig] = None) -> List[str]:
    """
    For balls of diameter <= eps r_l around hubs, hubs of levels above
    max(l, lowest intersected level) must already appear at or below it.
    """
    cfg = cfg or ladder.config
    m = ladder.metric
    levels = sorted(x.per_level)
    hubs = sorted(x.union)
    problems: List[str] = []
    for center in hubs:
        for l in levels:
            radius = cfg.epsilon * ladder.radius(l) / 2.0
            inside = {h for h in hubs if approx_le(float(m.dist[center, h]), radius)}
            touched = [i for i in levels if x.at(i) & inside]
            if not touched:
                continue
            top = max(l, touched[0])
            lower: Set[int] = set()
            for p in levels:
                if p <= top:
                    lower |= x.at(p)
            for q in levels:
                if q >= top and not (x.at(q) & inside) <= lower:
                    problems.append(f"ball around {center} (l={l}) holds level-{q} hubs missing below level {top}")
    return problems


def _greedy_ball_cover(dist: np.ndarray, members: np.ndarray, start: int, r: float) -> List[int]:
    """ Farthest-first centers until every member is within r of one. """
    limit = r + REL_TOL * r
    centers = [start]
    nearest = dist[start, members].copy()
    while True:
        uncovered = nearest > limit
        if not uncovered.any():
            return [int(c) for c in centers]
        far = np.where(uncovered, nearest, -1.0)
        pick = int(members[int(np.argmax(far))])
        centers.append(pick)
        nearest = np.minimum(nearest, dist[pick, members])


def _evenly(values: np.ndarray, cap: int) -> np.ndarray:
    if len(values) <= cap:
        return values
    idx = np.unique(np.linspace(0, len(values) - 1, cap).round().astype(int))
    return values[idx]


def estimate_doubling_dimension(points: Iterable[int], m: MetricInstance) -> DoublingEstimate:
    """
    log2 of the largest greedy cover of a ball B_{2r}(v) by radius-r balls,
    over centers v in the point set and radii dist/2 and dist.
    """
    pts = np.array(sorted(set(points)), dtype=int)
    if len(pts) < 2:
        return DoublingEstimate(0.0, int(pts[0]) if len(pts) else None, 0.0, [int(p) for p in pts])

    block = m.dist[np.ix_(pts, pts)]
    lengths = np.unique(block[np.triu_indices(len(pts), k=1)])
    radii = _evenly(np.unique(np.concatenate([lengths / 2.0, lengths])), DOUBLING_MAX_RADII)
    centers = _evenly(pts, DOUBLING_MAX_CENTERS)

    best_size, best = 1, (int(pts[0]), 0.0, [int(pts[0])])
    for v in centers:
        row = m.dist[v, pts]
        for r in radii:
            members = pts[row <= 2 * r * (1 + REL_TOL)]
            if len(members) <= best_size:
                continue
            cover = _greedy_ball_cover(m.dist, members, int(v), float(r))
            if len(cover) > best_size:
                best_size, best = len(cover), (int(v), float(r), cover)
    return DoublingEstimate(math.log2(best_size), best[0], best[1], best[2])
