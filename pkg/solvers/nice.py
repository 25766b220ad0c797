# solvers/nice.py
import logging
from typing import Dict, FrozenSet, Iterable, List, Optional, Tuple

from models.tree_decomposition import TreeDecomposition

logger = logging.getLogger(__name__)

LEAF = "leaf"
INTRODUCE = "introduce"
FORGET = "forget"
JOIN = "join"


class NiceNode:
    """
    One node of a nice decomposition. A forget node for v carries the edges
    (v, x, length) whose other endpoint x stays in the bag; every edge of the
    graph is carried by exactly one forget node.
    """
    def __init__(self,
                 node_id: int,
                 kind: str,
                 bag: Iterable[int],
                 vertex: Optional[int] = None,
                 children: Tuple[int, ...] = (),
                 edges: Tuple[Tuple[int, int, float], ...] = ()):
        if kind not in (LEAF, INTRODUCE, FORGET, JOIN):
            raise ValueError(f"Unknown nice node kind '{kind}'.")
        self.id: int = node_id
        self.kind: str = kind
        self.bag: Tuple[int, ...] = tuple(sorted(bag))
        self.vertex: Optional[int] = vertex
        self.children: Tuple[int, ...] = tuple(children)
        self.edges: Tuple[Tuple[int, int, float], ...] = tuple(edges)

    def __repr__(self) -> str:
        extra = f", v={self.vertex}" if self.vertex is not None else ""
        return f"NiceNode({self.id}, {self.kind}{extra}, bag={list(self.bag)})"


class NiceDecomposition:
    """ Nodes are stored children-first, so a forward scan is a post-order. """
    def __init__(self):
        self.nodes: List[NiceNode] = []

    def add(self, kind: str, bag: Iterable[int], vertex: Optional[int] = None,
            children: Tuple[int, ...] = (), edges: Tuple[Tuple[int, int, float], ...] = ()) -> int:
        node = NiceNode(len(self.nodes), kind, bag, vertex, children, edges)
        self.nodes.append(node)
        return node.id

    @property
    def root(self) -> int:
        return len(self.nodes) - 1

    @property
    def width(self) -> int:
        return max((len(node.bag) for node in self.nodes), default=0) - 1

    def __len__(self) -> int:
        return len(self.nodes)

    def __repr__(self) -> str:
        kinds = {k: sum(1 for node in self.nodes if node.kind == k) for k in (LEAF, INTRODUCE, FORGET, JOIN)}
        return f"NiceDecomposition(nodes={len(self.nodes)}, width={self.width}, {kinds})"


class _Builder:
    def __init__(self, edges: Dict[Tuple[int, int], float]):
        self.nice = NiceDecomposition()
        self.adjacent: Dict[int, Dict[int, float]] = {}
        for (u, v), length in edges.items():
            self.adjacent.setdefault(u, {})[v] = length
            self.adjacent.setdefault(v, {})[u] = length
        self.forgotten: set = set()

    def forget(self, node: int, bag: FrozenSet[int], v: int) -> Tuple[int, FrozenSet[int]]:
        rest = bag - {v}
        carried = tuple((v, x, self.adjacent[v][x])
                        for x in sorted(self.adjacent.get(v, {}))
                        if x in rest and x not in self.forgotten)
        self.forgotten.add(v)
        return self.nice.add(FORGET, rest, v, (node,), carried), rest

    def introduce(self, node: int, bag: FrozenSet[int], v: int) -> Tuple[int, FrozenSet[int]]:
        grown = bag | {v}
        return self.nice.add(INTRODUCE, grown, v, (node,)), grown

    def reshape(self, node: int, bag: FrozenSet[int], target: FrozenSet[int]) -> int:
        for v in sorted(bag - target):
            node, bag = self.forget(node, bag, v)
        for v in sorted(target - bag):
            node, bag = self.introduce(node, bag, v)
        return node

    def join_all(self, nodes: List[int], bag: FrozenSet[int]) -> int:
        while len(nodes) > 1:
            merged = [self.nice.add(JOIN, bag, None, (nodes[k], nodes[k + 1]))
                      for k in range(0, len(nodes) - 1, 2)]
            if len(nodes) % 2:
                merged.append(nodes[-1])
            nodes = merged
        return nodes[0]


def make_nice(td: TreeDecomposition, edges: Dict[Tuple[int, int], float]) -> NiceDecomposition:
    """
    Nice decomposition of `td` with the same width: children are reshaped to
    their parent's bag by forgets then introduces, several children are joined
    pairwise and the root bag is forgotten entirely.
    """
    builder = _Builder(edges)
    if td.root is None:
        builder.nice.add(LEAF, ())
        return builder.nice

    built: Dict[int, int] = {}
    for bag_id in reversed(td.top_down()):
        target = frozenset(td.bags[bag_id])
        shaped = []
        for child in td.children[bag_id]:
            shaped.append(builder.reshape(built.pop(child), frozenset(td.bags[child]), target))
        if not shaped:
            leaf = builder.nice.add(LEAF, ())
            shaped.append(builder.reshape(leaf, frozenset(), target))
        built[bag_id] = builder.join_all(shaped, target)

    root_bag = frozenset(td.bags[td.root])
    builder.reshape(built[td.root], root_bag, frozenset())
    logger.debug(f"Nice decomposition: {builder.nice}")
    return builder.nice
