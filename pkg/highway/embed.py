# highway/embed.py
import logging
import math
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import dijkstra

from highway.corehubs import (compute_approx_core_hubs, compute_cores, estimate_doubling_dimension,
                              select_representatives)
from highway.graphcore import REL_TOL, approx_eq, distance_to_set, set_distance
from highway.spc import build_cover_ladder
from highway.splittree import expand_representatives, talwar_embed
from highway.towns import build_towns_decomposition
from models.data_models import CoverLadder, HdConfig, MetricInstance, TownsDecomposition, ValidationReport
from models.embedding_models import (CONNECTOR, INTRA_BAG, ConnectingBagChoice, EdgeTag, Embedding, Pair,
                                     PortalEmbedding, StretchStats, edge_key)
from models.errors import MissingCoreHubs
from models.tree_decomposition import TreeDecomposition
from utils.seeding import derive_seed

logger = logging.getLogger(__name__)


def connecting_bag(td: TownsDecomposition,
                   town_id: int,
                   child_id: int,
                   hubs: Iterable[int],
                   d_x: PortalEmbedding,
                   ladder: CoverLadder,
                   cfg: HdConfig,
                   d: float) -> ConnectingBagChoice:
    """
    Bag of D_X a child town is wired to: the level-l cluster holding the hub
    closest to the child, with l = min(top, i_bar + ceil(log2(1/eps) + log2 d)).
    """
    hub_list = sorted(hubs)
    if not hub_list:
        raise MissingCoreHubs(town_id)
    m = ladder.metric
    town = td.town(town_id)
    child = td.town(child_id)
    siblings = [td.town(s) for s in town.children if s != child_id]
    if not siblings:
        raise ValueError(f"Town {town_id} needs at least two children to place child {child_id}.")

    sibling, gap = min(((s.id, set_distance(m, child.vertices, s.vertices)) for s in siblings),
                       key=lambda item: (item[1], item[0]))
    level = ladder.level_for_distance(gap)
    hub = min(hub_list, key=lambda x: (distance_to_set(m, x, child.vertices), x))

    split = d_x.split_tree
    top = split.top_level
    i_bar = math.ceil(math.log2(ladder.radius(level) / split.unit) - REL_TOL)
    i_bar = min(max(i_bar, 0), top)
    d = max(1.0, d)
    l_bar = min(top, i_bar + math.ceil(math.log2(1.0 / cfg.epsilon) + math.log2(d) - REL_TOL))
    l_bar = max(l_bar, 0)
    cluster = split.cluster_of(hub, l_bar)
    return ConnectingBagChoice(child_id, sibling, level, hub, i_bar, l_bar, d_x.bag_of_cluster[cluster.id])


def merge_tree_decompositions(d_x: TreeDecomposition,
                              children: Sequence[Tuple[int, TreeDecomposition, int, FrozenSet[int]]]) -> Dict[int, Dict[int, int]]:
    """
    Hang each child decomposition below its connecting bag b, then
    (1) add the vertices b held in D_X to every bag of the child subtree and
    (2) add the child's hubs X & T' to the child subtree, to b and to the
    D_X-descendants of b. d_x is modified in place; returns per-child id maps.
    """
    own_bags = set(d_x.bags)
    original = {b: frozenset(bag) for b, bag in d_x.bags.items()}
    id_maps: Dict[int, Dict[int, int]] = {}
    for child_id, child_td, bag_id, child_hubs in children:
        id_map = d_x.graft(child_td, bag_id)
        id_maps[child_id] = id_map
        for new_id in id_map.values():
            d_x.bags[new_id] |= original[bag_id]
        if not child_hubs:
            continue
        for new_id in id_map.values():
            d_x.bags[new_id] |= child_hubs
        for b in d_x.subtree(bag_id):
            if b in own_bags:
                d_x.bags[b] |= child_hubs
    return id_maps


class Embedder:
    """
    Recursive embedding over a towns decomposition. With `shift` set, hubs
    are computed on `source_td` (the decomposition of the full graph), moved
    through the shift map and kept only where they land inside the town;
    levels below `level_floor` contribute no hubs.
    """
    def __init__(self,
                 td: TownsDecomposition,
                 ladder: CoverLadder,
                 cfg: HdConfig,
                 seed: int,
                 source_td: Optional[TownsDecomposition] = None,
                 shift: Optional[Dict[int, int]] = None,
                 level_floor: int = 1):
        self.td = td
        self.ladder = ladder
        self.cfg = cfg
        self.seed = seed
        self.source_td = source_td or td
        self.shift = shift
        self.level_floor = max(1, level_floor)
        self.metric = ladder.metric

    def hubs_of(self, town_id: int) -> FrozenSet[int]:
        town = self.td.town(town_id)
        origin = town.origin
        chain = compute_cores(self.source_td, self.ladder, origin)
        x = compute_approx_core_hubs(self.source_td, self.ladder, origin, chain, self.cfg, min_level=self.level_floor)
        hubs = x.union
        if self.shift is not None:
            hubs = frozenset(self.shift[h] for h in hubs if h in self.shift)
        return hubs & town.vertices

    def embed(self, town_id: Optional[int] = None) -> Embedding:
        town_id = self.td.root if town_id is None else town_id
        town = self.td.town(town_id)
        if town.is_leaf:
            return Embedding(town.vertices, {}, {}, TreeDecomposition.single_bag(town.vertices, level=0), self.seed)

        hubs = self.hubs_of(town_id)
        if not hubs:
            raise MissingCoreHubs(town_id)
        reps = select_representatives(self.td, town_id, hubs)
        m = self.metric
        portal = talwar_embed(reps.members, m, self.cfg.epsilon_prime, derive_seed(self.seed, town_id))
        d_x = expand_representatives(portal, reps, m)
        d_hat = max(1.0, estimate_doubling_dimension(hubs, m).d)

        edges: Dict[Pair, float] = dict(d_x.edges)
        provenance: Dict[Pair, EdgeTag] = {key: EdgeTag(INTRA_BAG, town=town_id) for key in d_x.edges}
        td = d_x.td
        original = {b: frozenset(bag) for b, bag in td.bags.items()}
        connections: List[ConnectingBagChoice] = []
        pending: List[Tuple[int, TreeDecomposition, int, FrozenSet[int]]] = []
        child_embeddings: Dict[int, Embedding] = {}
        child_towns: Dict[int, FrozenSet[int]] = {}

        for child_id in town.children:
            child = self.td.town(child_id)
            sub = self.embed(child_id)
            child_embeddings[child_id] = sub
            child_towns[child_id] = child.vertices
            child_towns.update(sub.child_towns)
            choice = connecting_bag(self.td, town_id, child_id, hubs, d_x, self.ladder, self.cfg, d_hat)
            connections.append(choice)
            pending.append((child_id, sub.td, choice.bag, hubs & child.vertices))
            for key, length in sub.edges.items():
                if key not in edges:
                    edges[key] = length
                    provenance[key] = sub.provenance[key]
            for u in sorted(child.vertices):
                for v in sorted(original[choice.bag]):
                    if u == v:
                        continue
                    key = edge_key(u, v)
                    if key not in edges:
                        edges[key] = float(m.dist[u, v])
                        provenance[key] = EdgeTag(CONNECTOR, town=town_id, child=child_id, bag=choice.bag)

        id_maps = merge_tree_decompositions(td, pending)
        for child_id, sub in child_embeddings.items():
            id_map = id_maps[child_id]
            for key, tag in sub.provenance.items():
                if tag.kind == CONNECTOR and provenance.get(key) is tag:
                    provenance[key] = EdgeTag(CONNECTOR, town=tag.town, child=tag.child, bag=id_map[tag.bag])
            for choice in sub.connections:
                connections.append(ConnectingBagChoice(choice.child, choice.sibling, choice.level, choice.hub,
                                                       choice.i_bar, choice.l_bar, id_map[choice.bag]))

        out = Embedding(town.vertices, edges, provenance, td, self.seed)
        out.connections = connections
        out.child_towns = child_towns
        logger.debug(f"Town {town_id}: |X|={len(hubs)}, |Y|={len(reps)}, children={len(town.children)}, width={td.width}")
        return out


def embed_town(town_id: int,
               td: TownsDecomposition,
               ladder: CoverLadder,
               cfg: HdConfig,
               seed: int) -> Embedding:
    """ Embedding of one town; lengths are distances of the ladder's metric. """
    return Embedder(td, ladder, cfg, seed).embed(town_id)


def embed_graph(m: MetricInstance, cfg: HdConfig, seed: Optional[int] = None) -> Embedding:
    """
    Full pipeline on a graph metric: rescale, cover ladder, towns, embedding
    of the root. Edge lengths of the result are distances of `m`.
    """
    seed = cfg.seed if seed is None else seed
    ladder = build_cover_ladder(m, cfg)
    td = build_towns_decomposition(ladder.metric, ladder)
    embedding = Embedder(td, ladder, cfg, seed).embed()
    lengths = {(u, v): float(m.dist[u, v]) for u, v in embedding.edges}
    logger.info(f"Embedded n={m.n} with c={cfg.c}, eps={cfg.epsilon}, seed={seed}: "
                f"width {embedding.width}, {len(embedding.edges)} edges")
    return embedding.with_lengths(lengths)


def embedding_distances(e: Embedding) -> Tuple[List[int], np.ndarray]:
    """ All-pairs distances in H over its sorted vertex list. """
    order = sorted(e.vertices)
    index = {v: k for k, v in enumerate(order)}
    if not e.edges:
        dist = np.full((len(order), len(order)), np.inf)
        np.fill_diagonal(dist, 0.0)
        return order, dist
    rows = [index[u] for u, _ in e.edges] + [index[v] for _, v in e.edges]
    cols = [index[v] for _, v in e.edges] + [index[u] for u, _ in e.edges]
    data = list(e.edges.values()) * 2
    graph = csr_matrix((data, (rows, cols)), shape=(len(order), len(order)))
    return order, dijkstra(graph, directed=False)


def stretch_matrix(e: Embedding, m: MetricInstance) -> np.ndarray:
    """ dist_H / dist_G over sorted vertices; 1 on the diagonal. """
    order, dist_h = embedding_distances(e)
    dist_g = m.dist[np.ix_(order, order)]
    out = np.ones_like(dist_h)
    off = ~np.eye(len(order), dtype=bool)
    out[off] = dist_h[off] / dist_g[off]
    return out


def validate_embedding(e: Embedding, m: MetricInstance) -> ValidationReport:
    report = e.td.validate(e.vertices, e.edges.keys())
    report.subject = "embedding"

    for (u, v), length in sorted(e.edges.items()):
        if not approx_eq(length, float(m.dist[u, v])):
            report.add("edge length", f"edge ({u}, {v}) has length {length} instead of {m.dist[u, v]}")
        tag = e.provenance.get((u, v))
        if tag is None:
            report.add("provenance", f"edge ({u}, {v}) has no provenance tag")
        elif tag.kind == CONNECTOR:
            bag = e.td.bags.get(tag.bag, set())
            child = e.child_towns.get(tag.child, frozenset())
            if not ((u in child and v in bag) or (v in child and u in bag)):
                report.add("connector locality",
                           f"connector ({u}, {v}) does not join child town {tag.child} to bag {tag.bag}")

    order, dist_h = embedding_distances(e)
    dist_g = m.dist[np.ix_(order, order)]
    if not np.isfinite(dist_h).all():
        report.add("non-contraction", "H is disconnected")
    contracted = dist_h < dist_g * (1.0 - REL_TOL)
    if contracted.any():
        a, b = np.argwhere(contracted)[0]
        report.add("non-contraction",
                   f"dist_H({order[a]}, {order[b]}) = {dist_h[a, b]:.6g} < dist_G = {dist_g[a, b]:.6g}")
    report.details["n_edges"] = len(e.edges)
    return report


def measure_stretch(m: MetricInstance, cfg: HdConfig, seeds: Sequence[int]) -> StretchStats:
    """ Per-pair stretch of embed_graph over a seed list (at least two seeds). """
    seeds = list(seeds)
    if len(seeds) < 2:
        raise ValueError(f"measure_stretch needs at least two seeds, got {len(seeds)}.")
    upper = np.triu_indices(m.n, k=1)
    per_seed: List[np.ndarray] = []
    widths: List[int] = []
    for seed in seeds:
        e = embed_graph(m, cfg, seed)
        per_seed.append(stretch_matrix(e, m)[upper])
        widths.append(e.width)
    samples = np.vstack(per_seed)
    if samples.shape[1] == 0:
        return StretchStats(np.zeros(0), 1.0, 1.0, [1.0] * len(seeds), seeds, widths)
    per_pair = samples.mean(axis=0)
    stats = StretchStats(per_pair, float(per_pair.mean()), float(samples.max()),
                         [float(row.mean()) for row in samples], seeds, widths)
    logger.info(f"Stretch over {len(seeds)} seeds at eps={cfg.epsilon}: {stats}")
    return stats


def measure_stretch_series(m: MetricInstance, c: float, eps_values: Sequence[float],
                           seeds: Sequence[int]) -> Dict[float, StretchStats]:
    return {eps: measure_stretch(m, HdConfig(c, eps), seeds) for eps in eps_values}
