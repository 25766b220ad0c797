# tests/test_graphcore.py
import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from highway.graphcore import (RESCALE_ETA, ball, build_metric, canonical_shortest_path, in_window, path_length,
                               rescale_min_distance, set_diameter, set_distance)
from models.data_models import WeightedGraph
from models.errors import GraphError
from utils.fixtures import cycle, grid, path, random_connected
from utils.seeding import rng_for


def test_star_distances(star_metric):
    assert star_metric.dist[0, 5] == 1.0
    assert star_metric.dist[1, 2] == 2.0
    assert star_metric.aspect_ratio == 2.0


def test_single_vertex_metric():
    m = build_metric(WeightedGraph(1, []))
    assert m.dist.shape == (1, 1)
    assert m.diam == 0.0
    assert canonical_shortest_path(m, 0, 0) == [0]


def test_disconnected_graph_is_rejected():
    with pytest.raises(GraphError, match="disconnected"):
        build_metric(WeightedGraph(3, [(0, 1, 1.0)]))


@pytest.mark.parametrize("length", [0.0, -1.0, float("inf")])
def test_bad_edge_length_is_rejected(length):
    with pytest.raises(ValueError, match="bad edge"):
        build_metric(WeightedGraph(2, [(0, 1, length)]))


def test_metric_is_read_only(grid_metric):
    with pytest.raises(ValueError):
        grid_metric.dist[0, 1] = 5.0


def test_four_cycle_prefers_smallest_ids():
    m = build_metric(cycle(4))
    assert canonical_shortest_path(m, 0, 2) == [0, 1, 2]
    assert canonical_shortest_path(m, 2, 0) == [2, 1, 0]
    assert canonical_shortest_path(m, 1, 3) == [1, 0, 3]


def test_grid_corner_to_corner(grid_metric):
    assert canonical_shortest_path(grid_metric, 0, 8) == [0, 1, 2, 5, 8]
    assert canonical_shortest_path(grid_metric, 8, 0) == [8, 5, 2, 1, 0]


def test_rescale_sets_minimum_distance():
    m = build_metric(path(4))
    scaled = rescale_min_distance(m, 5.0)
    assert scaled.min_dist == pytest.approx(2.5 * (1 + RESCALE_ETA))
    assert scaled.scale == pytest.approx(2.5 * (1 + RESCALE_ETA))
    assert np.allclose(scaled.dist, m.dist * scaled.scale)
    with pytest.raises(ValueError):
        rescale_min_distance(m, 3.0)


def test_ball_and_set_helpers(star_metric):
    assert ball(star_metric, 0, 1.0) == frozenset(range(6))
    assert ball(star_metric, 1, 1.0) == frozenset({0, 1})
    assert set_distance(star_metric, {1, 2}, {3}) == 2.0
    assert set_diameter(star_metric, {0}) == 0.0
    assert set_diameter(star_metric, {1, 2, 0}) == 2.0


def test_window_tolerance():
    assert not in_window(1.0, 1.0, 2.0)
    assert not in_window(1.0 + 1e-12, 1.0, 2.0)
    assert in_window(2.0, 1.0, 2.0)
    assert in_window(2.0 + 1e-12, 1.0, 2.0)
    assert not in_window(2.1, 1.0, 2.0)


@given(st.integers(2, 9), st.integers(0, 6), st.integers(0, 10_000))
def test_canonical_paths_are_shortest_symmetric_and_subpath_consistent(n, extra, seed):
    m = build_metric(random_connected(n, extra, rng_for(seed, 1)))
    for u in range(n):
        for v in range(u + 1, n):
            p = canonical_shortest_path(m, u, v)
            assert p[0] == u and p[-1] == v
            assert path_length(m, p) == pytest.approx(m.dist[u, v])
            assert canonical_shortest_path(m, v, u) == p[::-1]
            for i in range(len(p)):
                for j in range(i + 1, len(p)):
                    assert canonical_shortest_path(m, p[i], p[j]) == p[i:j + 1]


def test_larger_grid_paths_match_distances():
    m = build_metric(grid(4, 5))
    for v in range(m.n):
        assert path_length(m, canonical_shortest_path(m, 0, v)) == pytest.approx(m.dist[0, v])
