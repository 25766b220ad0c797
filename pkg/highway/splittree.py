# highway/splittree.py
import logging
import math
from itertools import combinations
from typing import Dict, FrozenSet, Iterable, List, Set

import numpy as np

from highway.corehubs import estimate_doubling_dimension
from highway.graphcore import REL_TOL
from models.data_models import MetricInstance
from models.embedding_models import NetHierarchy, PortalEmbedding, Representatives, SplitTree, edge_key
from models.tree_decomposition import TreeDecomposition
from utils.seeding import rng_for

logger = logging.getLogger(__name__)


def build_split_tree(points: Iterable[int], m: MetricInstance, seed: int) -> SplitTree:
    """
    Top-down ball carving. Distances are normalized by the minimum pairwise
    distance `unit`; the top level is ceil(log2 diam) + 1 and every cluster at
    level i is carved with radius beta * 2^i, beta ~ U[1/2, 1), in the order of
    a random permutation of the cluster. Each (level, cluster) draws from its
    own stream.
    """
    pts = sorted(set(int(p) for p in points))
    if not pts:
        raise ValueError("A split tree needs at least one point.")
    if len(pts) == 1:
        st = SplitTree(pts, 1.0, 0, seed)
        st.add_cluster(0, pts, None)
        return st

    block = m.dist[np.ix_(pts, pts)]
    unit = float(block[np.triu_indices(len(pts), k=1)].min())
    diam = float(block.max()) / unit
    top = max(0, math.ceil(math.log2(diam) - REL_TOL)) + 1
    st = SplitTree(pts, unit, top, seed)
    current = [st.add_cluster(top, pts, None)]

    for level in range(top - 1, -1, -1):
        following = []
        for parent in current:
            members = sorted(parent.points)
            rng = rng_for(seed, level, members[0])
            order = rng.permutation(members)
            radius = rng.uniform(0.5, 1.0) * (2.0 ** level) * unit
            unclaimed = set(members)
            for center in order:
                center = int(center)
                if not unclaimed:
                    break
                grabbed = [p for p in sorted(unclaimed) if m.dist[center, p] <= radius]
                if not grabbed:
                    continue
                following.append(st.add_cluster(level, grabbed, parent.id))
                unclaimed.difference_update(grabbed)
        current = following
    logger.debug(f"Split tree: {st}")
    return st


def net_radius(st: SplitTree, beta: float, level: int) -> float:
    return beta * (2.0 ** level) * st.unit


def _extend_net(start: List[int], candidates: List[int], m: MetricInstance, delta: float) -> FrozenSet[int]:
    net = list(start)
    for p in candidates:
        if p in start:
            continue
        if all(m.dist[p, q] > delta + REL_TOL * delta for q in net):
            net.append(p)
    return frozenset(net)


def build_hierarchical_nets(st: SplitTree, beta: float, m: MetricInstance) -> NetHierarchy:
    """
    Nets chosen top-down: a child's net starts from the part of its parent's
    net that falls inside it and is extended greedily by ascending id. Every
    net is a beta 2^i-net of its cluster and every net point reaches down into
    exactly one child's net.
    """
    if not 0 < beta:
        raise ValueError(f"beta must be positive, got {beta}.")
    nets: Dict[int, FrozenSet[int]] = {}
    root = st.clusters[st.root]
    nets[root.id] = _extend_net([], sorted(root.points), m, net_radius(st, beta, root.level))
    stack = [root.id]
    while stack:
        cluster = st.clusters[stack.pop()]
        for child_id in cluster.children:
            child = st.clusters[child_id]
            inherited = sorted(nets[cluster.id] & child.points)
            nets[child_id] = _extend_net(inherited, sorted(child.points), m, net_radius(st, beta, child.level))
            stack.append(child_id)
    return NetHierarchy(beta, nets)


def _complete_edges(bags: Iterable[Set[int]], m: MetricInstance) -> Dict:
    edges: Dict = {}
    for bag in bags:
        for u, v in combinations(sorted(bag), 2):
            edges[(u, v)] = float(m.dist[u, v])
    return edges


def _portal_decomposition(st: SplitTree, nets: NetHierarchy):
    """ One bag per cluster holding its net and its children's nets. """
    td = TreeDecomposition()
    bag_of_cluster: Dict[int, int] = {}
    stack = [st.root]
    while stack:
        cluster = st.clusters[stack.pop()]
        bag = set(nets.net(cluster.id))
        for child_id in cluster.children:
            bag |= nets.net(child_id)
        parent_bag = bag_of_cluster[cluster.parent] if cluster.parent is not None else None
        bag_of_cluster[cluster.id] = td.add_bag(bag, parent=parent_bag, level=cluster.level)
        stack.extend(reversed(cluster.children))
    return td, bag_of_cluster


def talwar_embed(points: Iterable[int], m: MetricInstance, eps_prime: float, seed: int) -> PortalEmbedding:
    """ Portal graph over a split tree with beta = eps' / (4 d max(1, log2 alpha)). """
    if not 0 < eps_prime <= 1:
        raise ValueError(f"eps_prime must lie in (0, 1], got {eps_prime}.")
    pts = sorted(set(int(p) for p in points))
    estimate = estimate_doubling_dimension(pts, m)
    d_hat = max(1.0, estimate.d)
    if len(pts) > 1:
        block = m.dist[np.ix_(pts, pts)]
        off = block[np.triu_indices(len(pts), k=1)]
        alpha = float(off.max() / off.min())
    else:
        alpha = 1.0
    beta = eps_prime / (4.0 * d_hat * max(1.0, math.log2(alpha)))

    st = build_split_tree(pts, m, seed)
    nets = build_hierarchical_nets(st, beta, m)
    td, bag_of_cluster = _portal_decomposition(st, nets)
    edges = _complete_edges(td.bags.values(), m)
    logger.debug(f"Portal embedding over {len(pts)} points: beta={beta:.4g}, d_hat={d_hat:.3f}, width={td.width}")
    return PortalEmbedding(pts, edges, td, bag_of_cluster, st, nets, d_hat)


def expand_representatives(pe: PortalEmbedding, reps: Representatives, m: MetricInstance) -> PortalEmbedding:
    """ Replace every representative by the full hub set it stands for. """
    def grow(vertices: Iterable[int]) -> Set[int]:
        out: Set[int] = set()
        for y in vertices:
            out |= reps.represents.get(y, frozenset([y]))
        return out

    old = pe.split_tree
    st = SplitTree(grow(old.points), old.unit, old.top_level, old.seed)
    cluster_map: Dict[int, int] = {}
    stack = [old.root]
    while stack:
        cluster = old.clusters[stack.pop()]
        parent = cluster_map[cluster.parent] if cluster.parent is not None else None
        cluster_map[cluster.id] = st.add_cluster(cluster.level, grow(cluster.points), parent).id
        stack.extend(reversed(cluster.children))
    nets = NetHierarchy(pe.nets.beta, {cluster_map[cid]: frozenset(grow(net)) for cid, net in pe.nets.nets.items()})

    td = TreeDecomposition()
    bag_map: Dict[int, int] = {}
    for bag_id in pe.td.top_down():
        parent = pe.td.parent[bag_id]
        bag_map[bag_id] = td.add_bag(grow(pe.td.bags[bag_id]),
                                     parent=bag_map[parent] if parent is not None else None,
                                     level=pe.td.level[bag_id])
    bag_of_cluster = {cluster_map[cid]: bag_map[bid] for cid, bid in pe.bag_of_cluster.items()}
    edges = _complete_edges(td.bags.values(), m)
    return PortalEmbedding(st.points, edges, td, bag_of_cluster, st, nets, pe.d_hat)


def cover_radius(centers: Iterable[int], points: Iterable[int], m: MetricInstance) -> float:
    """ Smallest r such that every point lies within r of some center. """
    cs, ps = sorted(centers), sorted(points)
    if not ps:
        return 0.0
    if not cs:
        return math.inf
    return float(m.dist[np.ix_(ps, cs)].min(axis=1).max())
