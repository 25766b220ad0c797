# tests/test_treewidth_dp.py
import pytest
from hypothesis import given
from hypothesis import strategies as st

from highway.graphcore import build_metric
from models.errors import StateBudgetExceeded, WidthCapExceeded
from models.problem_models import ProblemInstance, ProblemKind
from models.tree_decomposition import TreeDecomposition
from solvers.baseline import witness_cost
from solvers.dispatch import solve_dp_on_graph
from solvers.exact import exact_solve
from solvers.treewidth_dp import (facility_candidates, facility_state_estimate, solve_on_tree_decomposition,
                                  tree_decomposition_of_graph, walk_cost)
from utils.fixtures import cycle, grid, path, random_connected
from utils.seeding import rng_for

TRIANGLE = {(0, 1): 1.0, (1, 2): 1.0, (0, 2): 1.0}


def _random_metric(n, extra, seed):
    return build_metric(random_connected(n, extra, rng_for(seed, 3)))


def test_triangle_tour():
    m = build_metric(cycle(3))
    result = solve_on_tree_decomposition(ProblemInstance(ProblemKind.TSP, m), TRIANGLE,
                                         TreeDecomposition.single_bag({0, 1, 2}))
    assert result.feasible
    assert result.cost == pytest.approx(3.0)
    assert result.witness[0] == result.witness[-1]
    assert set(result.witness) == {0, 1, 2}
    assert walk_cost(result.witness, TRIANGLE) == pytest.approx(3.0)


def test_two_vertex_tour_uses_the_edge_twice():
    m = build_metric(path(2))
    result = solve_dp_on_graph(ProblemInstance(ProblemKind.TSP, m))
    assert result.cost == pytest.approx(2.0)
    assert result.witness in ([0, 1, 0], [1, 0, 1])


def test_single_vertex_tour_is_free():
    m = build_metric(path(1))
    result = solve_dp_on_graph(ProblemInstance(ProblemKind.TSP, m))
    assert result.cost == 0.0 and result.feasible


def test_adjacent_terminals():
    m = build_metric(path(4))
    result = solve_dp_on_graph(ProblemInstance(ProblemKind.STEINER, m, terminals=[1, 2]))
    assert result.cost == pytest.approx(1.0)
    assert result.witness == [(1, 2)]


def test_steiner_uses_a_steiner_vertex():
    m = build_metric(grid(3, 3))
    result = solve_dp_on_graph(ProblemInstance(ProblemKind.STEINER, m, terminals=[1, 3, 5, 7]))
    assert result.cost == pytest.approx(4.0)
    assert {v for edge in result.witness for v in edge} == {1, 3, 4, 5, 7}


def test_terminals_outside_the_decomposition_are_infeasible():
    m = build_metric(path(6))
    edges = {(0, 1): 1.0, (1, 2): 1.0}
    p = ProblemInstance(ProblemKind.STEINER, m, terminals=[0, 5])
    result = solve_on_tree_decomposition(p, edges, TreeDecomposition.single_bag({0, 1, 2}))
    assert not result.feasible
    assert result.cost == float("inf")


def test_single_facility_on_a_star(star_metric):
    p = ProblemInstance(ProblemKind.FACILITY, star_metric, open_cost=[1.5] * 6)
    result = solve_dp_on_graph(p)
    assert result.witness["open"] == [0]
    assert result.cost == pytest.approx(6.5)
    assert witness_cost(p, result.witness) == pytest.approx(result.cost)


def test_width_cap():
    m = build_metric(cycle(3))
    with pytest.raises(WidthCapExceeded, match="width cap exceeded"):
        solve_on_tree_decomposition(ProblemInstance(ProblemKind.TSP, m), TRIANGLE,
                                    TreeDecomposition.single_bag({0, 1, 2}), width_cap=1)


def test_far_labels_are_dropped(star_metric):
    p = ProblemInstance(ProblemKind.FACILITY, star_metric, open_cost=[1.5] * 6)
    candidates = facility_candidates(p, list(range(6)), star_metric.dist)
    assert candidates[0].tolist() == [0.0, 1.0]
    assert candidates[3].tolist() == [0.0, 1.0]
    assert facility_state_estimate(TreeDecomposition.single_bag(set(range(6))), candidates) == 2 ** 6 * 2 ** 6


def test_facility_over_the_state_budget_does_not_start():
    g = grid(3, 3)
    p = ProblemInstance(ProblemKind.FACILITY, build_metric(g), open_cost=[20.0] * 9)
    edges = {(u, v): w for u, v, w in g.edges}
    td = tree_decomposition_of_graph(range(9), edges)
    with pytest.raises(StateBudgetExceeded, match="state budget exceeded") as excinfo:
        solve_on_tree_decomposition(p, edges, td, state_budget=1000)
    assert excinfo.value.states > 1000
    assert solve_on_tree_decomposition(p, edges, td, state_budget=10 ** 12).feasible


def test_tables_stop_at_the_state_budget():
    m = build_metric(cycle(3))
    with pytest.raises(StateBudgetExceeded):
        solve_on_tree_decomposition(ProblemInstance(ProblemKind.TSP, m), TRIANGLE,
                                    TreeDecomposition.single_bag({0, 1, 2}), state_budget=2)


def test_decomposition_must_fit_the_graph():
    m = build_metric(cycle(3))
    td = TreeDecomposition()
    root = td.add_bag({0, 1})
    td.add_bag({1, 2}, parent=root)
    with pytest.raises(ValueError, match="does not fit"):
        solve_on_tree_decomposition(ProblemInstance(ProblemKind.TSP, m), TRIANGLE, td)


def test_graph_decomposition_is_valid():
    g = grid(3, 3)
    edges = [(u, v) for u, v, _ in g.edges]
    td = tree_decomposition_of_graph(range(g.n), edges)
    assert td.validate(range(g.n), edges).ok


@given(st.integers(2, 7), st.integers(0, 4), st.integers(0, 10_000))
def test_tour_matches_exact(n, extra, seed):
    p = ProblemInstance(ProblemKind.TSP, _random_metric(n, extra, seed))
    result = solve_dp_on_graph(p)
    assert result.cost == pytest.approx(exact_solve(p).cost, rel=1e-9)
    assert set(result.witness) == set(range(n))
    assert witness_cost(p, result.witness) == pytest.approx(result.cost)


@given(st.integers(2, 8), st.integers(0, 4), st.integers(0, 10_000), st.data())
def test_steiner_matches_exact(n, extra, seed, data):
    p_metric = _random_metric(n, extra, seed)
    terminals = data.draw(st.sets(st.integers(0, n - 1), min_size=1, max_size=min(n, 5)))
    p = ProblemInstance(ProblemKind.STEINER, p_metric, terminals=terminals)
    result = solve_dp_on_graph(p)
    assert result.cost == pytest.approx(exact_solve(p).cost, rel=1e-9, abs=1e-9)
    covered = {v for edge in result.witness for v in edge}
    if len(terminals) > 1:
        assert set(terminals) <= covered


@given(st.integers(1, 6), st.integers(0, 3), st.integers(0, 10_000))
def test_facility_matches_exact(n, extra, seed):
    rng = rng_for(seed, 4)
    p = ProblemInstance(ProblemKind.FACILITY, _random_metric(n, extra, seed),
                        open_cost=rng.integers(1, 12, size=n).astype(float),
                        phi=rng.integers(1, 4, size=n).astype(float))
    result = solve_dp_on_graph(p)
    assert result.cost == pytest.approx(exact_solve(p).cost, rel=1e-9)
    assert witness_cost(p, result.witness) == pytest.approx(result.cost)


@pytest.mark.slow
@pytest.mark.parametrize("kind", [ProblemKind.TSP, ProblemKind.STEINER, ProblemKind.FACILITY])
def test_dp_matches_exact_on_many_instances(kind):
    for seed in range(200):
        rng = rng_for(seed, 9)
        n = int(rng.integers(2, 8))
        m = _random_metric(n, int(rng.integers(0, 4)), seed)
        if kind is ProblemKind.STEINER:
            terminals = rng.choice(n, size=int(rng.integers(1, n + 1)), replace=False)
            p = ProblemInstance(kind, m, terminals=terminals.tolist())
        elif kind is ProblemKind.FACILITY:
            p = ProblemInstance(kind, m, open_cost=rng.integers(1, 12, size=n).astype(float))
        else:
            p = ProblemInstance(kind, m)
        assert solve_dp_on_graph(p).cost == pytest.approx(exact_solve(p).cost, rel=1e-9, abs=1e-9)
