# tests/test_main.py
import pytest

from main import EXIT_IO, EXIT_OK, EXIT_USAGE, run_hubway
from utils.file_handler import load_json, read_graph


def test_gen_writes_the_fixture(tmp_path):
    target = tmp_path / "grid.edges"
    assert run_hubway(["gen", "grid:rows=2,cols=3", "--out", str(target)]) == EXIT_OK
    graph = read_graph(str(target))
    assert graph.n == 6 and graph.m == 7


def test_gen_uses_a_default_name_in_a_directory(tmp_path):
    assert run_hubway(["gen", "star", "--out", str(tmp_path)]) == EXIT_OK
    assert (tmp_path / "star.edges").exists()


def test_hd_of_a_star(capsys):
    assert run_hubway(["hd", "--fixture", "star:n=6", "--variant", "def1"]) == EXIT_OK
    assert "def1 at c=5.0: 1" in capsys.readouterr().out


def test_hd_falls_back_to_the_proxy(capsys):
    assert run_hubway(["hd", "--fixture", "grid:rows=5,cols=5"]) == EXIT_OK
    assert "proxy (upper bound)" in capsys.readouterr().out


def test_spc_and_towns_write_json(tmp_path):
    assert run_hubway(["spc", "--fixture", "spider:l=4", "--out", str(tmp_path)]) == EXIT_OK
    assert load_json(str(tmp_path / "ladder.json"))["c"] == 5.0
    assert run_hubway(["towns", "--fixture", "spider:l=4", "--out", str(tmp_path)]) == EXIT_OK
    assert "root" in load_json(str(tmp_path / "towns.json"))
    hubs = load_json(str(tmp_path / "corehubs.json"))
    assert hubs and {"town", "X", "shifts", "Y"} <= set(hubs[0])


def test_embed_then_validate(tmp_path):
    graph_file = tmp_path / "g.edges"
    assert run_hubway(["gen", "three_cluster:size=3", "--out", str(graph_file)]) == EXIT_OK
    out = tmp_path / "embedding"
    assert run_hubway(["embed", "--graph", str(graph_file), "--out", str(out), "--stretch-seeds", "2"]) == EXIT_OK
    metrics = load_json(str(out / "metrics.json"))
    assert metrics["valid"] is True
    assert metrics["stretch"]["seeds"] == [0, 1]
    assert run_hubway(["validate", "--graph", str(graph_file), "--embedding", str(out)]) == EXIT_OK


def test_solve_tour_exactly(tmp_path):
    args = ["solve", "--fixture", "cycle:n=6", "--problem", "tsp", "--mode", "exact", "--out", str(tmp_path)]
    assert run_hubway(args) == EXIT_OK
    result = load_json(str(tmp_path / "result.json"))
    assert result["cost"] == pytest.approx(6.0)
    assert result["method"] == "exact"


def test_solve_steiner_with_terminals_and_oracle(tmp_path):
    terminals = tmp_path / "t.txt"
    terminals.write_text("0 2 4\n", encoding="utf-8")
    args = ["solve", "--fixture", "path:n=5", "--problem", "steiner", "--terminals", str(terminals),
            "--mode", "dp", "--oracle", "--out", str(tmp_path / "steiner.json")]
    assert run_hubway(args) == EXIT_OK
    result = load_json(str(tmp_path / "steiner.json"))
    assert result["cost"] == pytest.approx(4.0)
    assert result["ratio_to_oracle"] == pytest.approx(1.0)


def test_steiner_without_terminals_is_a_usage_error(tmp_path):
    args = ["solve", "--fixture", "path:n=5", "--problem", "steiner", "--out", str(tmp_path)]
    assert run_hubway(args) == EXIT_USAGE


def test_missing_graph_file_is_an_io_error(tmp_path):
    assert run_hubway(["spc", "--graph", str(tmp_path / "absent.edges")]) == EXIT_IO


def test_malformed_graph_is_an_io_error(tmp_path):
    bad = tmp_path / "bad.edges"
    bad.write_text("2 1\n0 1 zero\n", encoding="utf-8")
    assert run_hubway(["towns", "--graph", str(bad), "--out", str(tmp_path)]) == EXIT_IO


def test_bad_eps_is_a_usage_error():
    assert run_hubway(["hd", "--fixture", "star", "--eps", "2"]) == EXIT_USAGE


def test_argument_errors_exit_with_usage():
    with pytest.raises(SystemExit) as excinfo:
        run_hubway(["solve", "--fixture", "star"])
    assert excinfo.value.code == EXIT_USAGE


def test_experiment_command(tmp_path):
    args = ["experiment", "--fixtures", "path:n=4", "star:n=4", "--seeds", "2", "--eps-values", "1.0", "0.5",
            "--out", str(tmp_path)]
    assert run_hubway(args) == EXIT_OK
    assert (tmp_path / "experiment.csv").exists()
    assert (tmp_path / "experiment_report.html").exists()
