# models/data_models.py
from typing import Dict, FrozenSet, Iterable, Iterator, List, Optional, Set, Tuple

import numpy as np

Edge = Tuple[int, int, float]


class WeightedGraph:
    """
    Undirected graph on vertices 0..n-1 with strictly positive edge lengths.
    Parallel edges collapse to the shortest one.
    """
    def __init__(self, n: int, edges: Iterable[Edge]):
        if not isinstance(n, (int, np.integer)) or isinstance(n, bool):
            raise TypeError(f"Vertex count must be an integer, got {type(n)}.")
        if n < 1:
            raise ValueError("A graph needs at least one vertex.")
        self.n: int = int(n)

        lengths: Dict[Tuple[int, int], float] = {}
        for edge in edges:
            if len(edge) != 3:
                raise ValueError(f"Edge must be (u, v, length), got {edge!r}.")
            u, v, length = int(edge[0]), int(edge[1]), float(edge[2])
            if not (0 <= u < self.n and 0 <= v < self.n):
                raise ValueError(f"Edge ({u}, {v}) has an endpoint outside 0..{self.n - 1}.")
            if u == v:
                raise ValueError(f"Self-loop at vertex {u} is not allowed.")
            key = (u, v) if u < v else (v, u)
            if key in lengths:
                lengths[key] = min(lengths[key], length)
            else:
                lengths[key] = length
        self._lengths = lengths
        self.edges: List[Edge] = [(u, v, w) for (u, v), w in sorted(lengths.items())]

    @property
    def m(self) -> int:
        return len(self.edges)

    def length(self, u: int, v: int) -> Optional[float]:
        key = (u, v) if u < v else (v, u)
        return self._lengths.get(key)

    def neighbors(self) -> List[List[Tuple[int, float]]]:
        adjacency: List[List[Tuple[int, float]]] = [[] for _ in range(self.n)]
        for u, v, w in self.edges:
            adjacency[u].append((v, w))
            adjacency[v].append((u, w))
        return adjacency

    def __eq__(self, other) -> bool:
        if not isinstance(other, WeightedGraph):
            return NotImplemented
        return self.n == other.n and self.edges == other.edges

    def __repr__(self) -> str:
        return f"WeightedGraph(n={self.n}, m={self.m})"


class MetricInstance:
    """
    Shortest-path metric of a WeightedGraph together with the canonical
    predecessor structure: pred[s, v] is the vertex preceding v on the
    canonical path from s to v (pred[s, s] == -1).
    Read-only after construction.
    """
    def __init__(self, graph: WeightedGraph, dist: np.ndarray, pred: np.ndarray, scale: float = 1.0):
        n = graph.n
        if dist.shape != (n, n) or pred.shape != (n, n):
            raise ValueError(f"Distance and predecessor matrices must be {n}x{n}.")
        self.graph: WeightedGraph = graph
        self.dist: np.ndarray = np.array(dist, dtype=float)
        self.dist.flags.writeable = False
        self.pred: np.ndarray = np.array(pred, dtype=np.int64)
        self.pred.flags.writeable = False
        # multiplier applied to the input lengths to obtain self.dist
        self.scale: float = float(scale)

        self.diam: float = float(self.dist.max()) if n > 1 else 0.0
        if n > 1:
            off_diagonal = self.dist[~np.eye(n, dtype=bool)]
            self.min_dist: float = float(off_diagonal.min())
        else:
            self.min_dist = 0.0
        self.aspect_ratio: float = self.diam / self.min_dist if self.min_dist > 0 else 1.0

    @property
    def n(self) -> int:
        return self.graph.n

    def __repr__(self) -> str:
        return (f"MetricInstance(n={self.n}, diam={self.diam:.6g}, "
                f"alpha={self.aspect_ratio:.6g}, scale={self.scale:.6g})")


class HdConfig:
    """ Run parameters: ball constant c, violation lambda = c - 4, eps and eps' = eps^2. """
    def __init__(self, c: float, epsilon: float = 0.5, seed: int = 0):
        if not isinstance(c, (int, float)) or isinstance(c, bool):
            raise TypeError(f"c must be a real number, got {type(c)}.")
        if c < 4:
            raise ValueError(f"c must be at least 4, got {c}.")
        if not 0 < epsilon <= 1:
            raise ValueError(f"epsilon must lie in (0, 1], got {epsilon}.")
        if not isinstance(seed, (int, np.integer)) or seed < 0:
            raise ValueError(f"seed must be a non-negative integer, got {seed!r}.")
        self.c: float = float(c)
        self.epsilon: float = float(epsilon)
        self.seed: int = int(seed)

    @property
    def lambda_(self) -> float:
        return self.c - 4.0

    @property
    def epsilon_prime(self) -> float:
        return self.epsilon ** 2

    def with_seed(self, seed: int) -> "HdConfig":
        return HdConfig(self.c, self.epsilon, seed)

    def with_epsilon(self, epsilon: float) -> "HdConfig":
        return HdConfig(self.c, epsilon, self.seed)

    def __repr__(self) -> str:
        return f"HdConfig(c={self.c}, lambda={self.lambda_}, eps={self.epsilon}, seed={self.seed})"


class CoverLevel:
    def __init__(self, index: int, radius: float, hubs: Iterable[int], sparsity: int = 0):
        if index < 0:
            raise ValueError(f"Level index must be non-negative, got {index}.")
        self.index: int = index
        self.radius: float = float(radius)
        self.hubs: FrozenSet[int] = frozenset(int(h) for h in hubs)
        self.sparsity: int = int(sparsity)

    def __repr__(self) -> str:
        return f"CoverLevel(i={self.index}, r={self.radius:.6g}, hubs={len(self.hubs)}, s={self.sparsity})"


class CoverLadder:
    """
    Shortest path covers over the scales r_i = (c/4)^i, i = 0..m, all computed
    on the (rescaled) metric stored in `metric`.
    """
    def __init__(self, config: HdConfig, metric: MetricInstance, levels: List[CoverLevel]):
        if not levels:
            raise ValueError("A cover ladder needs at least one level.")
        if [level.index for level in levels] != list(range(len(levels))):
            raise ValueError("Ladder levels must be numbered 0..m without gaps.")
        self.config: HdConfig = config
        self.metric: MetricInstance = metric
        self.levels: List[CoverLevel] = levels

    @property
    def m(self) -> int:
        return len(self.levels) - 1

    @property
    def sparsity(self) -> int:
        return max(level.sparsity for level in self.levels)

    def radius(self, i: int) -> float:
        return (self.config.c / 4.0) ** i

    def hubs(self, i: int) -> FrozenSet[int]:
        if 0 <= i <= self.m:
            return self.levels[i].hubs
        return frozenset()

    def level_for_distance(self, d: float, rel_tol: float = 1e-9) -> int:
        """ Level i with d in (r_i, r_{i+1}]; clamped to [0, m]. """
        i = 0
        while i < self.m and d > self.radius(i + 1) * (1.0 + rel_tol):
            i += 1
        return i

    def __repr__(self) -> str:
        return f"CoverLadder(c={self.config.c}, m={self.m}, s={self.sparsity})"


class Town:
    """
    A town of the towns decomposition. `levels` are the ladder levels on which
    the vertex set is a town; `recursion_level` is the level Embed recurses on.
    `origin` points back to the town of the unrestricted decomposition when the
    decomposition was restricted to a vertex subset.
    """
    def __init__(self,
                 town_id: int,
                 vertices: Iterable[int],
                 levels: Iterable[int],
                 recursion_level: int,
                 parent: Optional[int] = None,
                 children: Optional[List[int]] = None,
                 origin: Optional[int] = None):
        self.id: int = town_id
        self.vertices: FrozenSet[int] = frozenset(vertices)
        if not self.vertices:
            raise ValueError(f"Town {town_id} has no vertices.")
        self.levels: Set[int] = set(levels)
        self.recursion_level: int = recursion_level
        self.parent: Optional[int] = parent
        self.children: List[int] = list(children) if children else []
        self.origin: int = town_id if origin is None else origin

    @property
    def top_level(self) -> int:
        return max(self.levels) if self.levels else self.recursion_level

    @property
    def is_leaf(self) -> bool:
        return not self.children

    def __repr__(self) -> str:
        return (f"Town(id={self.id}, size={len(self.vertices)}, levels={sorted(self.levels)}, "
                f"children={self.children})")


class TownsDecomposition:
    def __init__(self, towns: Dict[int, Town], root: int, sprawl: Dict[int, FrozenSet[int]], m: int):
        if root not in towns:
            raise ValueError(f"Root town {root} is not among the towns.")
        self.towns: Dict[int, Town] = towns
        self.root: int = root
        self.sprawl: Dict[int, FrozenSet[int]] = sprawl
        self.m: int = m

    def town(self, town_id: int) -> Town:
        return self.towns[town_id]

    def sprawl_at(self, i: int) -> FrozenSet[int]:
        return self.sprawl.get(i, frozenset())

    def top_down(self) -> Iterator[Town]:
        stack = [self.root]
        while stack:
            town = self.towns[stack.pop()]
            yield town
            stack.extend(reversed(town.children))

    def leaves(self) -> List[Town]:
        return [town for town in self.top_down() if town.is_leaf]

    def __len__(self) -> int:
        return len(self.towns)

    def __repr__(self) -> str:
        return f"TownsDecomposition(towns={len(self.towns)}, root={self.root}, m={self.m})"


class Violation:
    def __init__(self, kind: str, message: str):
        self.kind: str = kind
        self.message: str = message

    def to_dict(self) -> Dict[str, str]:
        return {"kind": self.kind, "message": self.message}

    def __repr__(self) -> str:
        return f"Violation({self.kind}: {self.message})"


class ValidationReport:
    """ Collects property violations and softer warnings from a validator. """
    def __init__(self, subject: str):
        self.subject: str = subject
        self.violations: List[Violation] = []
        self.warnings: List[Violation] = []
        self.details: Dict[str, object] = {}

    def add(self, kind: str, message: str) -> None:
        self.violations.append(Violation(kind, message))

    def warn(self, kind: str, message: str) -> None:
        self.warnings.append(Violation(kind, message))

    @property
    def ok(self) -> bool:
        return not self.violations

    def kinds(self) -> Set[str]:
        return {violation.kind for violation in self.violations}

    def to_dict(self) -> Dict[str, object]:
        return {
            "subject": self.subject,
            "ok": self.ok,
            "violations": [v.to_dict() for v in self.violations],
            "warnings": [w.to_dict() for w in self.warnings],
            "details": self.details,
        }

    def __repr__(self) -> str:
        return (f"ValidationReport({self.subject}: {len(self.violations)} violations, "
                f"{len(self.warnings)} warnings)")
