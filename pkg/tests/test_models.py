# tests/test_models.py
import numpy as np
import pytest

from highway.graphcore import build_metric
from models.data_models import CoverLadder, CoverLevel, HdConfig, Town, ValidationReport, WeightedGraph
from models.embedding_models import EdgeTag, edge_key
from models.problem_models import ExperimentPlan, FixtureSpec, ProblemInstance, ProblemKind, SolveResult
from utils.fixtures import path


def test_parallel_edges_keep_the_shortest():
    g = WeightedGraph(3, [(1, 0, 4.0), (0, 1, 2.0), (2, 1, 1.0)])
    assert g.edges == [(0, 1, 2.0), (1, 2, 1.0)]
    assert g.length(1, 0) == 2.0
    assert g.length(0, 2) is None


@pytest.mark.parametrize("n,edges,error", [
    (0, [], ValueError),
    (2.0, [], TypeError),
    (True, [], TypeError),
    (2, [(0, 0, 1.0)], ValueError),
    (2, [(0, 2, 1.0)], ValueError),
    (2, [(0, 1)], ValueError),
])
def test_graph_validation(n, edges, error):
    with pytest.raises(error):
        WeightedGraph(n, edges)


def test_config():
    cfg = HdConfig(6, 0.5, 3)
    assert cfg.lambda_ == 2.0
    assert cfg.epsilon_prime == 0.25
    assert cfg.with_seed(4).seed == 4
    assert cfg.with_epsilon(0.25).epsilon == 0.25
    for bad in ((3.9,), (5.0, 0.0), (5.0, 1.5), (5.0, 0.5, -1)):
        with pytest.raises(ValueError):
            HdConfig(*bad)


def test_level_for_distance():
    m = build_metric(path(2))
    ladder = CoverLadder(HdConfig(5.0), m, [CoverLevel(i, 1.25 ** i, []) for i in range(4)])
    assert ladder.level_for_distance(1.0) == 0
    assert ladder.level_for_distance(1.25) == 0
    assert ladder.level_for_distance(1.3) == 1
    assert ladder.level_for_distance(100.0) == 3
    assert ladder.hubs(9) == frozenset()
    with pytest.raises(ValueError, match="without gaps"):
        CoverLadder(HdConfig(5.0), m, [CoverLevel(1, 1.25, [])])


def test_town_defaults():
    town = Town(4, [1, 2], [2, 3], 2)
    assert town.origin == 4
    assert town.top_level == 3
    assert town.is_leaf
    with pytest.raises(ValueError):
        Town(0, [], [], 0)


def test_problem_instance_validation():
    m = build_metric(path(3))
    with pytest.raises(ValueError, match="terminal set"):
        ProblemInstance(ProblemKind.STEINER, m)
    with pytest.raises(ValueError, match="not vertices"):
        ProblemInstance(ProblemKind.STEINER, m, terminals=[0, 3])
    with pytest.raises(ValueError):
        ProblemInstance(ProblemKind.FACILITY, m, open_cost=[1.0, -1.0, 1.0])
    with pytest.raises(ValueError):
        ProblemInstance(ProblemKind.FACILITY, m, phi=[1.0, 0.0, 1.0])
    p = ProblemInstance(ProblemKind.FACILITY, m)
    assert np.array_equal(p.open_cost, np.ones(3))
    assert ProblemKind.parse("fl") is ProblemKind.FACILITY


def test_infeasible_result():
    result = SolveResult.infeasible(ProblemKind.TSP, "dp", "no bag")
    assert not result.feasible
    assert result.cost == float("inf")
    assert result.details == {"reason": "no bag"}


def test_edge_tags():
    assert edge_key(5, 2) == (2, 5)
    with pytest.raises(ValueError):
        EdgeTag("shortcut")


def test_report_kinds():
    report = ValidationReport("towns")
    report.warn("sprawl", "large")
    assert report.ok
    report.add("laminar", "overlap")
    report.add("laminar", "overlap again")
    assert not report.ok
    assert report.kinds() == {"laminar"}
    assert report.to_dict()["warnings"] == [{"kind": "sprawl", "message": "large"}]


def test_experiment_plan_cells():
    plan = ExperimentPlan([FixtureSpec("star"), FixtureSpec("grid", {"rows": 2})], [5.0], [1.0, 0.5], [0, 1])
    assert len(plan) == 8
    assert plan.cells()[1][0].name == "star"
    assert plan.cells()[4][0].name == "grid(rows=2)"
