# models/problem_models.py
from enum import Enum
from typing import Any, Dict, Iterable, List, Optional, Sequence

import numpy as np

from models.data_models import MetricInstance


class ProblemKind(Enum):
    TSP = "tsp"
    STEINER = "steiner"
    FACILITY = "facility"

    @classmethod
    def parse(cls, value: str) -> "ProblemKind":
        aliases = {"fl": cls.FACILITY}
        if value in aliases:
            return aliases[value]
        return cls(value)


class ProblemInstance:
    """
    A TSP, Steiner tree or facility location instance on the metric of a graph.
    open_cost and phi are indexed by vertex id.
    """
    def __init__(self,
                 kind: ProblemKind,
                 metric: MetricInstance,
                 terminals: Optional[Iterable[int]] = None,
                 open_cost: Optional[Sequence[float]] = None,
                 phi: Optional[Sequence[float]] = None):
        if not isinstance(kind, ProblemKind):
            raise TypeError(f"kind must be a ProblemKind, got {type(kind)}.")
        self.kind: ProblemKind = kind
        self.metric: MetricInstance = metric
        n = metric.n

        self.terminals: frozenset = frozenset(int(t) for t in (terminals or ()))
        bad = [t for t in self.terminals if not 0 <= t < n]
        if bad:
            raise ValueError(f"Terminals {sorted(bad)} are not vertices of the graph.")
        if kind is ProblemKind.STEINER and terminals is None:
            raise ValueError("A Steiner instance needs a terminal set.")

        if kind is ProblemKind.FACILITY:
            costs = np.ones(n) if open_cost is None else np.asarray(open_cost, dtype=float)
            if costs.shape != (n,):
                raise ValueError(f"open_cost must have one entry per vertex ({n}), got shape {costs.shape}.")
            if not np.all(np.isfinite(costs)) or np.any(costs < 0):
                raise ValueError("Opening costs must be finite and non-negative.")
            weights = np.ones(n) if phi is None else np.asarray(phi, dtype=float)
            if weights.shape != (n,):
                raise ValueError(f"phi must have one entry per vertex ({n}), got shape {weights.shape}.")
            if not np.all(np.isfinite(weights)) or np.any(weights <= 0):
                raise ValueError("phi must be finite and positive.")
            self.open_cost: Optional[np.ndarray] = costs
            self.phi: Optional[np.ndarray] = weights
        else:
            self.open_cost = None
            self.phi = None

    @property
    def n(self) -> int:
        return self.metric.n

    def __repr__(self) -> str:
        extra = f", terminals={sorted(self.terminals)}" if self.kind is ProblemKind.STEINER else ""
        return f"ProblemInstance({self.kind.value}, n={self.n}{extra})"


class SolveResult:
    """
    witness: closed walk (tsp), list of edges (steiner) or
    {"open": [...], "assign": {v: facility}} (facility).
    """
    def __init__(self,
                 kind: ProblemKind,
                 cost: float,
                 witness: Any,
                 method: str,
                 feasible: bool,
                 details: Optional[Dict[str, Any]] = None):
        self.kind: ProblemKind = kind
        self.cost: float = float(cost)
        self.witness: Any = witness
        self.method: str = method
        self.feasible: bool = bool(feasible)
        self.details: Dict[str, Any] = details if details is not None else {}
        self.ratio_to_oracle: Optional[float] = None

    @classmethod
    def infeasible(cls, kind: ProblemKind, method: str, reason: str) -> "SolveResult":
        return cls(kind, float("inf"), None, method, False, {"reason": reason})

    def __repr__(self) -> str:
        return f"SolveResult({self.kind.value}, cost={self.cost:.6g}, method={self.method}, feasible={self.feasible})"


class NetReduction:
    def __init__(self,
                 delta: float,
                 net: List[int],
                 assign: Dict[int, int],
                 kappa: float,
                 level_floor: int,
                 terminals: Optional[frozenset] = None,
                 open_cost: Optional[Dict[int, float]] = None,
                 phi: Optional[Dict[int, float]] = None,
                 facility_of: Optional[Dict[int, int]] = None):
        if delta < 0:
            raise ValueError(f"delta must be non-negative, got {delta}.")
        self.delta: float = delta
        self.net: List[int] = sorted(net)
        self.assign: Dict[int, int] = assign
        self.kappa: float = kappa
        self.level_floor: int = level_floor
        self.terminals: Optional[frozenset] = terminals
        self.open_cost: Optional[Dict[int, float]] = open_cost
        self.phi: Optional[Dict[int, float]] = phi
        # net point -> cheapest assigned vertex, used when lifting facilities
        self.facility_of: Optional[Dict[int, int]] = facility_of

    def members(self, w: int) -> List[int]:
        return sorted(v for v, a in self.assign.items() if a == w)

    def __repr__(self) -> str:
        return f"NetReduction(delta={self.delta:.6g}, net={len(self.net)}, kappa={self.kappa:.6g}, floor={self.level_floor})"


FIXTURE_FAMILIES = (
    "star", "grid", "spider", "def19_star", "complete_exp", "hub_and_spoke",
    "path", "cycle", "three_cluster", "twin_triangles", "random_connected",
)


class FixtureSpec:
    def __init__(self, family: str, params: Optional[Dict[str, Any]] = None, seed: int = 0, name: Optional[str] = None):
        if family not in FIXTURE_FAMILIES:
            raise ValueError(f"Unknown fixture family '{family}'. Known: {', '.join(FIXTURE_FAMILIES)}.")
        if not isinstance(seed, int) or seed < 0:
            raise ValueError(f"Fixture seed must be a non-negative integer, got {seed!r}.")
        self.family: str = family
        self.params: Dict[str, Any] = dict(params or {})
        self.seed: int = seed
        self.name: str = name or self._default_name()

    def _default_name(self) -> str:
        if not self.params:
            return self.family
        args = ",".join(f"{k}={self.params[k]}" for k in sorted(self.params))
        return f"{self.family}({args})"

    def __repr__(self) -> str:
        return f"FixtureSpec({self.name}, seed={self.seed})"


class ExperimentPlan:
    CSV_COLUMNS = ["fixture", "n", "alpha", "c", "lambda", "eps", "seed",
                   "width", "mean_stretch", "max_stretch", "runtime_ms", "status"]

    def __init__(self,
                 fixtures: List[FixtureSpec],
                 c_values: Sequence[float],
                 eps_values: Sequence[float],
                 seeds: Sequence[int]):
        for c in c_values:
            if c <= 4:
                raise ValueError(f"Experiment c values must exceed 4, got {c}.")
        for eps in eps_values:
            if not 0 < eps <= 1:
                raise ValueError(f"Experiment eps values must lie in (0, 1], got {eps}.")
        self.fixtures: List[FixtureSpec] = list(fixtures)
        self.c_values: List[float] = [float(c) for c in c_values]
        self.eps_values: List[float] = [float(e) for e in eps_values]
        self.seeds: List[int] = [int(s) for s in seeds]

    def cells(self) -> List[tuple]:
        """ (fixture, c, eps, seed) in plan order. """
        return [(fixture, c, eps, seed)
                for fixture in self.fixtures
                for c in self.c_values
                for eps in self.eps_values
                for seed in self.seeds]

    def __len__(self) -> int:
        return len(self.cells())

    def __repr__(self) -> str:
        return (f"ExperimentPlan(fixtures={len(self.fixtures)}, c={self.c_values}, "
                f"eps={self.eps_values}, seeds={len(self.seeds)})")
