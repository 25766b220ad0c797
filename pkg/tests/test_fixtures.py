# tests/test_fixtures.py
import pytest

from highway.graphcore import build_metric
from models.problem_models import FIXTURE_FAMILIES, FixtureSpec
from utils.fixtures import (complete_exp, cycle, def19_star, generate_fixture, grid, parse_fixture_spec, spider,
                            star, three_cluster)


def _lengths(graph):
    return {(u, v): w for u, v, w in graph.edges}


def test_star_and_grid_shapes():
    assert _lengths(star(5)) == {(0, 1): 1.0, (0, 2): 1.0, (0, 3): 1.0, (0, 4): 1.0}
    g = grid(2, 3)
    assert g.n == 6 and g.m == 7


def test_spider_legs():
    lengths = _lengths(spider(8, 5.0))
    for i in range(1, 9):
        assert lengths[(0, i)] == 4.0
        assert lengths[(i, 8 + i)] == 1.0


def test_def19_leg_lengths():
    lengths = _lengths(def19_star(1, 0.05))
    assert lengths == {(0, 1): 4.0, (1, 2): pytest.approx(0.1), (2, 3): 1.0, (2, 4): pytest.approx(1.05)}


def test_complete_exp_lengths():
    lengths = _lengths(complete_exp(4, 5.0))
    assert lengths[(0, 3)] == 5.0
    assert lengths[(1, 2)] == 25.0
    assert lengths[(2, 3)] == 125.0
    assert build_metric(complete_exp(4, 5.0)).dist[1, 2] == pytest.approx(10.0)


def test_three_cluster_bridges():
    m = build_metric(three_cluster(3))
    assert m.dist[2, 3] == 50.0
    assert m.dist[5, 6] == 2500.0


@pytest.mark.parametrize("family", FIXTURE_FAMILIES)
def test_every_family_is_deterministic(family):
    a = generate_fixture(FixtureSpec(family, seed=3))
    b = generate_fixture(FixtureSpec(family, seed=3))
    assert a.n == b.n
    assert a.edges == b.edges


def test_random_fixture_depends_on_seed():
    a = generate_fixture(FixtureSpec("random_connected", {"n": 12}, seed=0))
    b = generate_fixture(FixtureSpec("random_connected", {"n": 12}, seed=1))
    assert a.edges != b.edges


@pytest.mark.parametrize("family,params", [
    ("star", {"n": 0}),
    ("spider", {"c": 1}),
    ("cycle", {"n": 2}),
    ("grid", {"rows": 2.5}),
    ("def19_star", {"eps": 0.5}),
])
def test_bad_parameters_are_rejected(family, params):
    with pytest.raises(ValueError):
        generate_fixture(FixtureSpec(family, params))


def test_cycle_needs_three_vertices():
    with pytest.raises(ValueError, match="at least 3"):
        cycle(2)


def test_unknown_family():
    with pytest.raises(ValueError, match="Unknown fixture family"):
        FixtureSpec("moebius")


def test_parse_fixture_spec():
    spec = parse_fixture_spec("spider:l=3,c=6.5", seed=2)
    assert spec.family == "spider"
    assert spec.params == {"l": 3, "c": 6.5}
    assert spec.seed == 2
    assert spec.name == "spider(c=6.5,l=3)"
    assert parse_fixture_spec("star").params == {}
    with pytest.raises(ValueError, match="key=value"):
        parse_fixture_spec("grid:rows")
