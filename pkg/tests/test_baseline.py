# tests/test_baseline.py
import pytest

from highway.graphcore import build_metric
from models.problem_models import ProblemInstance, ProblemKind
from solvers.baseline import (baseline_kappa, baseline_solve, metric_mst, nearest_assignment,
                              prune_to_steiner_tree, witness_cost)
from solvers.exact import exact_solve
from utils.fixtures import cycle, path, random_connected
from utils.seeding import rng_for

FACILITY_GREEDY_RATIO = 1.861


def test_triangle_tour_kappa():
    p = ProblemInstance(ProblemKind.TSP, build_metric(cycle(3)))
    kappa, result = baseline_solve(p)
    assert kappa == pytest.approx(4.0)
    assert result.cost == pytest.approx(3.0)
    assert result.witness[0] == result.witness[-1]
    assert sorted(result.witness[:-1]) == [0, 1, 2]


def test_single_vertex_tour():
    p = ProblemInstance(ProblemKind.TSP, build_metric(path(1)))
    assert baseline_solve(p)[0] == 0.0


def test_steiner_on_a_tree_is_optimal():
    p = ProblemInstance(ProblemKind.STEINER, build_metric(path(4)), terminals=[0, 1, 2, 3])
    kappa, result = baseline_solve(p)
    assert kappa == pytest.approx(3.0)
    assert result.witness == [(0, 1), (1, 2), (2, 3)]


def test_restricted_vertex_set(grid_metric):
    p = ProblemInstance(ProblemKind.TSP, grid_metric)
    kappa, result = baseline_solve(p, [0, 1, 2])
    assert kappa == pytest.approx(4.0)
    assert set(result.witness) == {0, 1, 2}
    with pytest.raises(ValueError):
        baseline_solve(p, [])


def test_mst_and_pruning(star_metric):
    tree = metric_mst(star_metric, [1, 2, 3])
    assert tree.size(weight="weight") == pytest.approx(4.0)
    pruned = prune_to_steiner_tree(star_metric, [(0, 1), (0, 2), (0, 3), (0, 4)], [1, 2])
    assert pruned == [(0, 1), (0, 2)]


def test_nearest_assignment_breaks_ties_by_id(star_metric):
    assign = nearest_assignment(star_metric, [0, 1, 2], [2, 1])
    assert assign == {0: 1, 1: 1, 2: 2}


@pytest.mark.parametrize("seed", range(12))
def test_baselines_are_within_their_factors(seed):
    rng = rng_for(seed, 8)
    n = int(rng.integers(3, 9))
    m = build_metric(random_connected(n, int(rng.integers(0, 5)), rng))

    tsp = ProblemInstance(ProblemKind.TSP, m)
    optimum = exact_solve(tsp).cost
    kappa, result = baseline_solve(tsp)
    assert optimum - 1e-9 <= result.cost <= kappa + 1e-9
    assert kappa <= 2 * optimum + 1e-9

    terminals = rng.choice(n, size=int(rng.integers(2, n + 1)), replace=False).tolist()
    steiner = ProblemInstance(ProblemKind.STEINER, m, terminals=terminals)
    optimum = exact_solve(steiner).cost
    kappa, result = baseline_solve(steiner)
    assert optimum - 1e-9 <= result.cost <= kappa + 1e-9
    assert kappa <= 2 * optimum + 1e-9

    facility = ProblemInstance(ProblemKind.FACILITY, m, open_cost=rng.integers(1, 20, size=n).astype(float),
                               phi=rng.integers(1, 5, size=n).astype(float))
    optimum = exact_solve(facility).cost
    kappa = baseline_kappa(facility)
    assert optimum - 1e-9 <= kappa <= FACILITY_GREEDY_RATIO * optimum + 1e-9


def test_facility_witness_is_consistent(grid_metric):
    p = ProblemInstance(ProblemKind.FACILITY, grid_metric, open_cost=[2.0] * 9)
    kappa, result = baseline_solve(p)
    assert result.witness["open"]
    assert set(result.witness["assign"]) == set(range(9))
    assert witness_cost(p, result.witness) == pytest.approx(kappa)
