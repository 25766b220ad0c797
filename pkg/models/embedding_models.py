# models/embedding_models.py
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from models.tree_decomposition import TreeDecomposition

Pair = Tuple[int, int]


def edge_key(u: int, v: int) -> Pair:
    return (u, v) if u < v else (v, u)


class CoreChain:
    """ Cores C_j = T, C_i = S_i & C_{i+1} of one town, levels j..0. """
    def __init__(self, town_id: int, top: int, cores: Dict[int, FrozenSet[int]]):
        self.town_id: int = town_id
        self.top: int = top
        self.cores: Dict[int, FrozenSet[int]] = cores

    def core(self, i: int) -> FrozenSet[int]:
        return self.cores.get(i, frozenset())

    def __repr__(self) -> str:
        sizes = {i: len(c) for i, c in sorted(self.cores.items())}
        return f"CoreChain(town={self.town_id}, sizes={sizes})"


class ShiftRecord:
    def __init__(self, hub: int, level: int, target: int, distance: float):
        self.hub = hub
        self.level = level
        self.target = target
        self.distance = distance

    def __repr__(self) -> str:
        return f"ShiftRecord({self.hub}@{self.level} -> {self.target}, d={self.distance:.6g})"


class ApproxCoreHubs:
    def __init__(self, town_id: int, per_level: Dict[int, FrozenSet[int]], shift_log: List[ShiftRecord]):
        self.town_id: int = town_id
        self.per_level: Dict[int, FrozenSet[int]] = per_level
        self.shift_log: List[ShiftRecord] = shift_log

    @property
    def union(self) -> FrozenSet[int]:
        out: FrozenSet[int] = frozenset()
        for hubs in self.per_level.values():
            out = out | hubs
        return out

    def at(self, i: int) -> FrozenSet[int]:
        return self.per_level.get(i, frozenset())

    def __repr__(self) -> str:
        return f"ApproxCoreHubs(town={self.town_id}, |X|={len(self.union)}, shifts={len(self.shift_log)})"


class Representatives:
    """ One member of X_T per child town; `represents[y]` is X_T & child. """
    def __init__(self, represents: Dict[int, FrozenSet[int]], child_of: Dict[int, int]):
        self.represents: Dict[int, FrozenSet[int]] = represents
        self.child_of: Dict[int, int] = child_of

    @property
    def members(self) -> List[int]:
        return sorted(self.represents)

    def __len__(self) -> int:
        return len(self.represents)

    def __repr__(self) -> str:
        return f"Representatives({ {y: sorted(s) for y, s in sorted(self.represents.items())} })"


class DoublingEstimate:
    def __init__(self, d: float, center: Optional[int], radius: float, cover: List[int]):
        self.d: float = d
        self.center: Optional[int] = center
        self.radius: float = radius
        self.cover: List[int] = cover

    def __repr__(self) -> str:
        return f"DoublingEstimate(d={self.d:.4f}, center={self.center}, r={self.radius:.6g}, cover={len(self.cover)})"


class Cluster:
    def __init__(self, cluster_id: int, level: int, points: Iterable[int], parent: Optional[int]):
        self.id: int = cluster_id
        self.level: int = level
        self.points: FrozenSet[int] = frozenset(points)
        self.parent: Optional[int] = parent
        self.children: List[int] = []

    def __repr__(self) -> str:
        return f"Cluster(id={self.id}, level={self.level}, size={len(self.points)})"


class SplitTree:
    """
    Hierarchical partition of `points`. Levels run from `top_level` down to 0;
    distances were divided by `unit` (the minimum pairwise distance) when the
    radii were drawn.
    """
    def __init__(self, points: Iterable[int], unit: float, top_level: int, seed: int):
        self.points: Tuple[int, ...] = tuple(sorted(points))
        self.unit: float = unit
        self.top_level: int = top_level
        self.seed: int = seed
        self.clusters: Dict[int, Cluster] = {}
        self.levels: Dict[int, List[int]] = {level: [] for level in range(top_level, -1, -1)}
        self.root: Optional[int] = None
        self._owner: Dict[Tuple[int, int], int] = {}

    def add_cluster(self, level: int, points: Iterable[int], parent: Optional[int]) -> Cluster:
        cluster = Cluster(len(self.clusters), level, points, parent)
        self.clusters[cluster.id] = cluster
        self.levels[level].append(cluster.id)
        if parent is None:
            self.root = cluster.id
        else:
            self.clusters[parent].children.append(cluster.id)
        for p in cluster.points:
            self._owner[(level, p)] = cluster.id
        return cluster

    def cluster_of(self, point: int, level: int) -> Cluster:
        return self.clusters[self._owner[(level, point)]]

    def __repr__(self) -> str:
        return f"SplitTree(points={len(self.points)}, levels={self.top_level + 1}, clusters={len(self.clusters)})"


class NetHierarchy:
    def __init__(self, beta: float, nets: Dict[int, FrozenSet[int]]):
        self.beta: float = beta
        self.nets: Dict[int, FrozenSet[int]] = nets

    def net(self, cluster_id: int) -> FrozenSet[int]:
        return self.nets[cluster_id]

    def __repr__(self) -> str:
        return f"NetHierarchy(beta={self.beta:.4g}, clusters={len(self.nets)})"


class PortalEmbedding:
    """
    Graph H over a point set with one complete graph per bag, and the tree
    decomposition whose bags follow the split-tree clusters.
    """
    def __init__(self,
                 points: Iterable[int],
                 edges: Dict[Pair, float],
                 td: TreeDecomposition,
                 bag_of_cluster: Dict[int, int],
                 split_tree: SplitTree,
                 nets: NetHierarchy,
                 d_hat: float):
        self.points: FrozenSet[int] = frozenset(points)
        self.edges: Dict[Pair, float] = edges
        self.td: TreeDecomposition = td
        self.bag_of_cluster: Dict[int, int] = bag_of_cluster
        self.split_tree: SplitTree = split_tree
        self.nets: NetHierarchy = nets
        self.d_hat: float = d_hat

    @property
    def width(self) -> int:
        return self.td.width

    @property
    def top_level(self) -> int:
        return self.split_tree.top_level

    def __repr__(self) -> str:
        return f"PortalEmbedding(points={len(self.points)}, edges={len(self.edges)}, width={self.width})"


INTRA_BAG = "intra_bag"
CONNECTOR = "connector"


class EdgeTag:
    def __init__(self, kind: str, town: Optional[int] = None, child: Optional[int] = None, bag: Optional[int] = None):
        if kind not in (INTRA_BAG, CONNECTOR):
            raise ValueError(f"Unknown edge provenance '{kind}'.")
        self.kind = kind
        self.town = town
        self.child = child
        self.bag = bag

    def __repr__(self) -> str:
        return f"EdgeTag({self.kind}, town={self.town}, child={self.child}, bag={self.bag})"


class ConnectingBagChoice:
    def __init__(self, child: int, sibling: int, level: int, hub: int, i_bar: int, l_bar: int, bag: int):
        self.child = child
        self.sibling = sibling
        self.level = level
        self.hub = hub
        self.i_bar = i_bar
        self.l_bar = l_bar
        self.bag = bag

    def __repr__(self) -> str:
        return (f"ConnectingBagChoice(child={self.child}, sibling={self.sibling}, i={self.level}, "
                f"h={self.hub}, i_bar={self.i_bar}, l_bar={self.l_bar}, bag={self.bag})")


class Embedding:
    """
    Output of the embedding: H over `vertices` (edge lengths are metric
    distances) with provenance tags, and a tree decomposition of H.
    """
    def __init__(self,
                 vertices: Iterable[int],
                 edges: Dict[Pair, float],
                 provenance: Dict[Pair, EdgeTag],
                 td: TreeDecomposition,
                 seed: int):
        self.vertices: FrozenSet[int] = frozenset(vertices)
        self.edges: Dict[Pair, float] = edges
        self.provenance: Dict[Pair, EdgeTag] = provenance
        self.td: TreeDecomposition = td
        self.seed: int = seed
        self.connections: List[ConnectingBagChoice] = []
        # child town id -> vertices, for every town a connector edge names
        self.child_towns: Dict[int, FrozenSet[int]] = {}

    @property
    def width(self) -> int:
        return self.td.width

    def with_lengths(self, lengths: Dict[Pair, float]) -> "Embedding":
        out = Embedding(self.vertices, dict(lengths), dict(self.provenance), self.td, self.seed)
        out.connections = list(self.connections)
        out.child_towns = dict(self.child_towns)
        return out

    def __repr__(self) -> str:
        return f"Embedding(n={len(self.vertices)}, edges={len(self.edges)}, width={self.width}, seed={self.seed})"


class StretchStats:
    """ Per-pair stretch dist_H / dist_G aggregated over seeds (upper-triangle pairs). """
    def __init__(self, per_pair_mean, global_mean: float, max_stretch: float,
                 per_seed_mean: List[float], seeds: List[int], widths: List[int]):
        self.per_pair_mean = per_pair_mean
        self.global_mean: float = global_mean
        self.max: float = max_stretch
        self.per_seed_mean: List[float] = per_seed_mean
        self.seeds: List[int] = seeds
        self.widths: List[int] = widths

    def to_dict(self) -> Dict[str, object]:
        return {
            "global_mean": self.global_mean,
            "max": self.max,
            "per_seed_mean": self.per_seed_mean,
            "seeds": self.seeds,
            "widths": self.widths,
        }

    def __repr__(self) -> str:
        return f"StretchStats(mean={self.global_mean:.4f}, max={self.max:.4f}, seeds={len(self.seeds)})"
