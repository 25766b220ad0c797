# tests/test_file_handler.py
import csv
import json

import numpy as np
import pytest

from highway.corehubs import core_hubs_by_town
from highway.embed import embed_graph, validate_embedding
from highway.graphcore import build_metric
from highway.spc import build_cover_ladder
from highway.towns import build_towns_decomposition, validate_towns
from models.errors import GraphFormatError
from models.problem_models import ProblemKind, SolveResult
from utils.file_handler import (approx_core_hubs_from_dict, approx_core_hubs_to_dict, format_graph, ladder_from_dict,
                                ladder_to_dict, load_json, metric_from_dict, metric_to_dict, parse_graph, read_costs,
                                read_embedding, read_graph, read_vertex_list, result_to_dict, save_to_csv,
                                save_to_json, towns_from_dict, towns_to_dict, tree_decomposition_from_dict,
                                tree_decomposition_to_dict, write_embedding, write_graph)
from utils.fixtures import grid, three_cluster, twin_triangles


def _through_json(data):
    return json.loads(json.dumps(data))


def test_parse_graph():
    g = parse_graph("3 2\n0 1 1.5\n1 2 2\n")
    assert g.n == 3
    assert g.edges == [(0, 1, 1.5), (1, 2, 2.0)]


def test_comments_and_blank_lines_are_ignored():
    text = "# triangle\n3 3\n\n0 1 1  # first\n1 2 1\n   \n0 2 1\n"
    assert parse_graph(text).m == 3


@pytest.mark.parametrize("text,line", [
    ("2 1\n0 x 1\n", 2),
    ("3 2\n0 1 1\n", 1),
    ("2 1\n0 1 -1\n", 2),
    ("2 1\n0 0 1\n", 2),
    ("2 1 7\n0 1 1\n", 1),
    ("# nothing\n", 1),
])
def test_format_errors_carry_line_numbers(text, line):
    with pytest.raises(GraphFormatError) as excinfo:
        parse_graph(text)
    assert excinfo.value.line_number == line
    assert str(excinfo.value).startswith(f"line {line}:")


def test_graph_file_round_trip(tmp_path):
    g = twin_triangles(7.25)
    target = tmp_path / "nested" / "g.edges"
    write_graph(g, str(target))
    assert read_graph(str(target)) == g
    assert parse_graph(format_graph(g)) == g


def test_read_graph_missing_file(tmp_path):
    with pytest.raises(IOError):
        read_graph(str(tmp_path / "absent.edges"))


def test_metric_dict_recomputes_distances():
    m = build_metric(grid(3, 3))
    again = metric_from_dict(_through_json(metric_to_dict(m)))
    assert np.array_equal(again.dist, m.dist)
    with pytest.raises(ValueError, match="format version"):
        metric_from_dict({"format_version": 99, "n": 1, "edges": []})


def test_ladder_and_towns_dicts(cfg5):
    ladder = build_cover_ladder(build_metric(three_cluster(3)), cfg5)
    towns = build_towns_decomposition(ladder.metric, ladder)

    ladder_again = ladder_from_dict(_through_json(ladder_to_dict(ladder)), ladder.metric)
    assert ladder_again.m == ladder.m
    assert [level.hubs for level in ladder_again.levels] == [level.hubs for level in ladder.levels]

    towns_again = towns_from_dict(_through_json(towns_to_dict(towns)))
    assert towns_again.root == towns.root
    assert {t.id: t.vertices for t in towns_again.top_down()} == {t.id: t.vertices for t in towns.top_down()}
    assert towns_again.sprawl == towns.sprawl
    assert validate_towns(towns_again, ladder.metric, ladder_again).ok


def test_core_hubs_dict(cfg5):
    ladder = build_cover_ladder(build_metric(three_cluster(3)), cfg5)
    towns = build_towns_decomposition(ladder.metric, ladder)
    entries = core_hubs_by_town(towns, ladder)
    assert entries
    for x, reps in entries:
        x_again, reps_again = approx_core_hubs_from_dict(_through_json(approx_core_hubs_to_dict(x, reps)))
        assert x_again.town_id == x.town_id
        assert x_again.per_level == x.per_level
        assert [(s.hub, s.level, s.target) for s in x_again.shift_log] == [(s.hub, s.level, s.target) for s in x.shift_log]
        assert reps_again.represents == reps.represents
        assert reps_again.child_of == reps.child_of


def test_tree_decomposition_dict(cfg5):
    td = embed_graph(build_metric(grid(3, 3)), cfg5).td
    again = tree_decomposition_from_dict(_through_json(tree_decomposition_to_dict(td)))
    assert again.bags == td.bags
    assert again.parent == td.parent
    assert again.root == td.root


def test_unreachable_bags_are_rejected():
    data = {"bags": [{"id": 0, "parent": None, "level": None, "vertices": [0]},
                     {"id": 1, "parent": 7, "level": None, "vertices": [1]}]}
    with pytest.raises(ValueError, match="not connected"):
        tree_decomposition_from_dict(data)


def test_embedding_directory_validates(tmp_path, cfg5):
    m = build_metric(three_cluster(3))
    e = embed_graph(m, cfg5)
    paths = write_embedding(e, m.n, str(tmp_path), {"mean_stretch": 1.5})
    assert [p.rsplit("/", 1)[-1] for p in paths] == ["H.edges", "D.json", "metrics.json"]
    assert load_json(paths[2])["mean_stretch"] == 1.5

    again = read_embedding(str(tmp_path))
    assert again.edges == e.edges
    assert again.seed == e.seed
    assert again.vertices == e.vertices
    assert again.child_towns == e.child_towns
    assert validate_embedding(again, m).ok


def test_header_only_csv(tmp_path):
    path = save_to_csv([], ["a", "b"], "empty.csv", str(tmp_path))
    with open(path, newline="", encoding="utf-8") as f:
        assert list(csv.reader(f)) == [["a", "b"]]


def test_csv_blanks_missing_values(tmp_path):
    path = save_to_csv([{"a": 1}, {"a": None, "b": 2.5}], ["a", "b"], "rows.csv", str(tmp_path))
    with open(path, newline="", encoding="utf-8") as f:
        assert list(csv.reader(f)) == [["a", "b"], ["1", ""], ["", "2.5"]]


def test_json_handles_numpy_values(tmp_path):
    path = save_to_json({"x": np.int64(3), "y": np.arange(2), "s": {2, 1}}, "np.json", str(tmp_path))
    assert load_json(path) == {"x": 3, "y": [0, 1], "s": [1, 2]}


def test_vertex_list_and_costs(tmp_path):
    terminals = tmp_path / "terminals.txt"
    terminals.write_text("# terminals\n0 3\n5\n", encoding="utf-8")
    assert read_vertex_list(str(terminals)) == [0, 3, 5]

    costs = tmp_path / "costs.txt"
    costs.write_text("1 4.5\n2 0 3\n", encoding="utf-8")
    open_cost, phi = read_costs(str(costs), 4)
    assert open_cost.tolist() == [1.0, 4.5, 0.0, 1.0]
    assert phi.tolist() == [1.0, 1.0, 3.0, 1.0]

    costs.write_text("9 1\n", encoding="utf-8")
    with pytest.raises(GraphFormatError, match="line 1"):
        read_costs(str(costs), 4)


@pytest.mark.parametrize("line", ["-1 2.0", "4 2.0", "4 2.0 1.0"])
def test_cost_vertex_out_of_range(tmp_path, line):
    costs = tmp_path / "costs.txt"
    costs.write_text(f"0 1.0\n{line}\n", encoding="utf-8")
    with pytest.raises(GraphFormatError, match="line 2: vertex .* out of range") as excinfo:
        read_costs(str(costs), 4)
    assert excinfo.value.line_number == 2


def test_facility_result_dict():
    result = SolveResult(ProblemKind.FACILITY, 4.0, {"open": [1], "assign": {2: 1, 0: 1, 1: 1}}, "exact", True)
    data = result_to_dict(result)
    assert data["problem"] == "facility"
    assert data["witness"] == {"open": [1], "assign": [[0, 1], [1, 1], [2, 1]]}
    assert "ratio_to_oracle" not in data
    result.ratio_to_oracle = 1.0
    assert result_to_dict(result)["ratio_to_oracle"] == 1.0
