# highway/towns.py
import logging
from itertools import combinations
from typing import Dict, FrozenSet, List, Optional, Set, Tuple

import numpy as np

from highway.graphcore import REL_TOL, approx_le, ball, set_diameter, set_distance
from models.data_models import CoverLadder, MetricInstance, Town, TownsDecomposition, ValidationReport
from models.errors import StructuralViolation

logger = logging.getLogger(__name__)


def sprawl_and_towns_at_level(m: MetricInstance, ladder: CoverLadder, i: int) -> Tuple[FrozenSet[int], List[FrozenSet[int]]]:
    """
    Towns at level i are the balls B_{r_i}(v) around vertices farther than
    2 r_i from every hub; the sprawl is everything outside them.
    `m` must be the metric the ladder was built on.
    """
    r = ladder.radius(i)
    hubs = sorted(ladder.hubs(i))
    if hubs:
        to_hubs = m.dist[:, hubs].min(axis=1)
        far = to_hubs > 2 * r + REL_TOL * 2 * r
    else:
        far = np.ones(m.n, dtype=bool)

    absorbed: Set[int] = set()
    towns: List[FrozenSet[int]] = []
    for v in range(m.n):
        if not far[v] or v in absorbed:
            continue
        town = ball(m, v, r)
        towns.append(town)
        absorbed |= town
    sprawl = frozenset(range(m.n)) - absorbed
    return sprawl, towns


class _TownDraft:
    def __init__(self, vertices: FrozenSet[int], peel_level: int, parent: Optional["_TownDraft"]):
        self.vertices = vertices
        self.peel_level = peel_level
        self.parent = parent
        self.children: List["_TownDraft"] = []
        self.recursion_level = 0
        self.levels: Set[int] = set()


def build_towns_decomposition(m: MetricInstance, ladder: CoverLadder) -> TownsDecomposition:
    """
    Peel towns level by level below each town's recursion level and recurse
    on every removed subtown. A town's recursion level is the lowest level on
    which its vertex set is a town (the root uses the top level).
    """
    if ladder.config.c <= 4:
        raise ValueError(f"Towns need c > 4, got c={ladder.config.c}.")
    top = ladder.m
    per_level: Dict[int, List[FrozenSet[int]]] = {}
    sprawl: Dict[int, FrozenSet[int]] = {}
    levels_of: Dict[FrozenSet[int], Set[int]] = {}
    for i in range(top + 1):
        sprawl[i], per_level[i] = sprawl_and_towns_at_level(m, ladder, i)
        for town in per_level[i]:
            levels_of.setdefault(town, set()).add(i)

    everything = frozenset(range(m.n))
    root = _TownDraft(everything, top + 1, None)
    root.levels = set(levels_of.get(everything, {top}))
    root.recursion_level = top
    drafts = [root]
    stack = [root]
    while stack:
        town = stack.pop()
        if len(town.vertices) == 1:
            continue
        remaining = set(town.vertices)
        for i in range(town.recursion_level - 1, -1, -1):
            if not remaining:
                break
            for sub in per_level[i]:
                if sub.isdisjoint(remaining):
                    continue
                if not sub <= remaining:
                    raise StructuralViolation(
                        f"level-{i} town {sorted(sub)[:8]} straddles the boundary of town {sorted(town.vertices)[:8]}")
                if sub == town.vertices:
                    town.levels.add(i)
                    continue
                child = _TownDraft(sub, i, town)
                child.levels = set(levels_of[sub])
                child.recursion_level = min(child.levels)
                town.children.append(child)
                drafts.append(child)
                stack.append(child)
                remaining -= sub
        if remaining:
            raise StructuralViolation(f"{len(remaining)} vertices of a town were never peeled")

    drafts.sort(key=lambda d: (-d.peel_level, min(d.vertices)))
    ids = {id(d): k for k, d in enumerate(drafts)}
    towns: Dict[int, Town] = {}
    for draft in drafts:
        town_id = ids[id(draft)]
        towns[town_id] = Town(
            town_id,
            draft.vertices,
            draft.levels,
            draft.recursion_level,
            parent=ids[id(draft.parent)] if draft.parent is not None else None,
            children=sorted(ids[id(child)] for child in draft.children),
        )
    td = TownsDecomposition(towns, 0, sprawl, top)
    logger.info(f"Towns decomposition: {len(towns)} towns, {len(td.leaves())} leaves, top level {top}")
    return td


def restrict_towns(td: TownsDecomposition, keep: FrozenSet[int]) -> Optional[TownsDecomposition]:
    """
    Towns decomposition induced on a vertex subset: towns are intersected with
    `keep`, empty towns vanish and single-child chains collapse onto the child.
    Each restricted town remembers the town it came from in `origin`.
    """
    keep = frozenset(keep)
    restricted: Dict[int, Town] = {}
    counter = [0]

    def visit(town_id: int) -> Optional[int]:
        town = td.town(town_id)
        vertices = town.vertices & keep
        if not vertices:
            return None
        kids = [k for k in (visit(child) for child in town.children) if k is not None]
        if len(kids) == 1 and restricted[kids[0]].vertices == vertices:
            return kids[0]
        new_id = counter[0]
        counter[0] += 1
        restricted[new_id] = Town(new_id, vertices, town.levels, town.recursion_level,
                                  children=kids if len(vertices) > 1 else [], origin=town.origin)
        for kid in restricted[new_id].children:
            restricted[kid].parent = new_id
        return new_id

    root = visit(td.root)
    if root is None:
        return None
    sprawl = {i: s & keep for i, s in td.sprawl.items()}
    return TownsDecomposition(restricted, root, sprawl, td.m)


def validate_towns(td: TownsDecomposition, m: MetricInstance, ladder: CoverLadder) -> ValidationReport:
    """ Structural checks on a towns decomposition; `m` is the ladder's metric. """
    report = ValidationReport("towns decomposition")
    everything = frozenset(range(m.n))
    root = td.town(td.root)
    if root.vertices != everything:
        report.add("root", f"root town has {len(root.vertices)} of {m.n} vertices")

    for town in td.towns.values():
        complement = everything - town.vertices
        for i in sorted(town.levels):
            r = ladder.radius(i)
            if not approx_le(set_diameter(m, town.vertices), r):
                report.add("town diameter", f"town {town.id} exceeds diameter r_{i}")
            if complement and approx_le(set_distance(m, town.vertices, complement), r):
                report.add("town separation", f"town {town.id} is within r_{i} of its complement")
        levels = sorted(town.levels)
        if levels and levels != list(range(levels[0], levels[-1] + 1)):
            report.warn("non-consecutive levels", f"town {town.id} is a town on levels {levels}")

        if len(town.children) == 1:
            report.add("child count", f"town {town.id} has exactly one child")
        if not town.children and len(town.vertices) != 1:
            report.add("leaf", f"leaf town {town.id} is not a singleton")
        if town.children and len(town.vertices) == 1:
            report.add("leaf", f"singleton town {town.id} has children")

        covered: Set[int] = set()
        for child_id in town.children:
            child = td.town(child_id)
            if child.parent != town.id:
                report.add("laminarity", f"town {child_id} does not point back to parent {town.id}")
            if not child.vertices <= town.vertices:
                report.add("laminarity", f"child {child_id} is not inside its parent {town.id}")
            if covered & child.vertices:
                report.add("laminarity", f"children of town {town.id} overlap")
            covered |= child.vertices
        if town.children and covered != set(town.vertices):
            report.add("partition", f"children of town {town.id} do not cover it")

    for a, b in combinations(td.towns.values(), 2):
        if a.vertices & b.vertices and not (a.vertices <= b.vertices or b.vertices <= a.vertices):
            report.add("laminarity", f"towns {a.id} and {b.id} cross")

    for i in range(ladder.m + 1):
        r = ladder.radius(i)
        hubs = sorted(ladder.hubs(i))
        spr = sorted(td.sprawl_at(i))
        if spr and hubs:
            far = m.dist[np.ix_(spr, hubs)].min(axis=1) > 2 * r * (1 + REL_TOL)
            if far.any():
                report.add("sprawl distance", f"level {i}: sprawl vertex farther than 2 r_i from the cover")
        elif spr:
            report.add("sprawl distance", f"level {i}: sprawl exists without hubs")
        report_cluster_separation(report, m, ladder, i)
    return report


def report_cluster_separation(report: ValidationReport, m: MetricInstance, ladder: CoverLadder, i: int) -> None:
    """ Vertices farther than c r/4 from the cover are within r or beyond c r/2 of each other. """
    r = ladder.radius(i)
    c = ladder.config.c
    hubs = sorted(ladder.hubs(i))
    if hubs:
        quiet = np.nonzero(m.dist[:, hubs].min(axis=1) > c * r / 4 * (1 + REL_TOL))[0]
    else:
        quiet = np.arange(m.n)
    if len(quiet) < 2:
        return
    block = m.dist[np.ix_(quiet, quiet)]
    bad = (block > r * (1 + REL_TOL)) & (block <= c * r / 2 * (1 + REL_TOL))
    if bad.any():
        report.add("cluster separation", f"level {i}: far-from-cover pair at distance in (r, cr/2]")
