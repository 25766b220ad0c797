# tests/test_exact.py
from itertools import combinations, permutations

import numpy as np
import pytest

from highway.graphcore import build_metric
from models.data_models import WeightedGraph
from models.errors import SizeGuardError
from models.problem_models import ProblemInstance, ProblemKind
from solvers.baseline import witness_cost
from solvers.exact import FACILITY_ENUM_MAX_N, HELD_KARP_MAX_N, exact_solve, held_karp
from utils.fixtures import cycle, path, random_connected, star
from utils.seeding import rng_for


def _brute_force_tour(dist):
    n = len(dist)
    return min(sum(dist[a, b] for a, b in zip((0,) + order, order + (0,)))
               for order in permutations(range(1, n)))


def test_held_karp_on_a_cycle():
    m = build_metric(cycle(4))
    cost, tour = held_karp(m.dist)
    assert cost == pytest.approx(4.0)
    assert tour[0] == tour[-1] == 0
    assert sorted(tour[:-1]) == [0, 1, 2, 3]


def test_held_karp_trivial_sizes():
    assert held_karp(np.zeros((1, 1))) == (0.0, [0])
    cost, tour = held_karp(np.array([[0.0, 3.0], [3.0, 0.0]]))
    assert cost == 6.0 and tour == [0, 1, 0]


@pytest.mark.parametrize("seed", range(5))
def test_held_karp_matches_brute_force(seed):
    m = build_metric(random_connected(6, 5, rng_for(seed, 2)))
    cost, tour = held_karp(m.dist)
    assert cost == pytest.approx(_brute_force_tour(m.dist))
    assert sum(m.dist[a, b] for a, b in zip(tour, tour[1:])) == pytest.approx(cost)


def test_steiner_on_a_path():
    p = ProblemInstance(ProblemKind.STEINER, build_metric(path(3)), terminals=[0, 2])
    result = exact_solve(p)
    assert result.cost == pytest.approx(2.0)
    assert result.witness == [(0, 1), (1, 2)]


def test_steiner_with_one_terminal_is_empty():
    result = exact_solve(ProblemInstance(ProblemKind.STEINER, build_metric(path(3)), terminals=[1]))
    assert result.cost == 0.0 and result.witness == []


def test_steiner_picks_the_center_of_a_star(star_metric):
    p = ProblemInstance(ProblemKind.STEINER, star_metric, terminals=[1, 2, 3, 4])
    result = exact_solve(p)
    assert result.cost == pytest.approx(4.0)
    assert {v for edge in result.witness for v in edge} == {0, 1, 2, 3, 4}


def test_single_vertex_facility():
    p = ProblemInstance(ProblemKind.FACILITY, build_metric(WeightedGraph(1, [])), open_cost=[3.0])
    result = exact_solve(p)
    assert result.cost == 3.0
    assert result.witness == {"open": [0], "assign": {0: 0}}


@pytest.mark.parametrize("seed", range(4))
def test_facility_matches_enumeration(seed):
    rng = rng_for(seed, 6)
    m = build_metric(random_connected(5, 3, rng))
    p = ProblemInstance(ProblemKind.FACILITY, m, open_cost=rng.integers(1, 15, size=5).astype(float),
                        phi=rng.integers(1, 4, size=5).astype(float))
    best = min(sum(p.open_cost[w] for w in opened)
               + sum(p.phi[v] * min(m.dist[v, w] for w in opened) for v in range(5))
               for k in range(1, 6) for opened in combinations(range(5), k))
    result = exact_solve(p)
    assert result.cost == pytest.approx(best)
    assert witness_cost(p, result.witness) == pytest.approx(result.cost)


def test_size_guards():
    big = build_metric(path(HELD_KARP_MAX_N + 1))
    with pytest.raises(SizeGuardError):
        exact_solve(ProblemInstance(ProblemKind.TSP, big))
    with pytest.raises(SizeGuardError):
        exact_solve(ProblemInstance(ProblemKind.STEINER, build_metric(star(12)), terminals=range(1, 12)))
    with pytest.raises(SizeGuardError):
        exact_solve(ProblemInstance(ProblemKind.FACILITY, build_metric(path(FACILITY_ENUM_MAX_N + 1))))
