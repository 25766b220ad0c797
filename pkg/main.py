# main.py
import argparse
import logging
import os
import sys
import time
from typing import List, Optional

from highway.corehubs import core_hubs_by_town
from highway.embed import embed_graph, measure_stretch, validate_embedding
from highway.graphcore import build_metric
from highway.spc import HD_VARIANTS, build_cover_ladder, highway_dimension, highway_dimension_proxy
from highway.towns import build_towns_decomposition, validate_towns
from models.data_models import HdConfig, MetricInstance, ValidationReport
from models.errors import GraphFormatError, HubwayError, SizeGuardError
from models.problem_models import ExperimentPlan, ProblemInstance, ProblemKind
from solvers.dispatch import SOLVE_MODES, attach_oracle_ratio, solve_problem
from utils.analyzer import analyze
from utils.experiment import run_experiment
from utils.file_handler import (CORE_HUBS_JSON_FILENAME, approx_core_hubs_to_dict, ladder_to_dict, read_costs,
                                read_embedding, read_graph, read_vertex_list, result_to_dict, save_to_json,
                                towns_to_dict, write_embedding, write_graph)
from utils.fixtures import generate_fixture, parse_fixture_spec

logger = logging.getLogger("hubway")

DEFAULT_C = 5.0
DEFAULT_EPS = 0.5
DEFAULT_SEED = 0
OUTPUT_DIR = "output"

EXIT_OK = 0
EXIT_VIOLATION = 1
EXIT_USAGE = 2
EXIT_IO = 3


def _output_path(args: argparse.Namespace, default_name: str) -> str:
    """ --out naming a file (it has an extension) is used as is; otherwise it is a directory. """
    if os.path.splitext(args.out)[1]:
        return args.out
    return os.path.join(args.out, default_name)


def _write_json(data, path: str) -> None:
    save_to_json(data, os.path.basename(path), os.path.dirname(path) or ".")


def _config(args: argparse.Namespace) -> HdConfig:
    return HdConfig(args.c, args.eps, args.seed)


def _load_metric(args: argparse.Namespace) -> MetricInstance:
    if args.graph:
        graph = read_graph(args.graph)
    else:
        graph = generate_fixture(parse_fixture_spec(args.fixture, args.seed))
    return build_metric(graph)


def _report_exit(report: ValidationReport) -> int:
    for violation in report.violations:
        logger.error(f"{report.subject}: {violation.kind}: {violation.message}")
    return EXIT_OK if report.ok else EXIT_VIOLATION


def run_gen(args: argparse.Namespace) -> int:
    spec = parse_fixture_spec(args.family, args.seed)
    graph = generate_fixture(spec)
    write_graph(graph, _output_path(args, f"{spec.family}.edges"))
    print(f"Generated {spec.name}: {graph}")
    return EXIT_OK


def run_spc(args: argparse.Namespace) -> int:
    m = _load_metric(args)
    ladder = build_cover_ladder(m, _config(args))
    path = _output_path(args, "ladder.json")
    _write_json(ladder_to_dict(ladder), path)
    print(f"{ladder} written to {path}")
    return EXIT_OK


def run_hd(args: argparse.Namespace) -> int:
    m = _load_metric(args)
    cfg = _config(args)
    try:
        value, exact = highway_dimension(m, cfg, args.variant), True
    except SizeGuardError as e:
        logger.warning(f"{e}; reporting the sparsity of the greedy ladder as an upper-bound proxy")
        value, exact = highway_dimension_proxy(build_cover_ladder(m, cfg)), False
    label = args.variant if exact else f"{args.variant} proxy (upper bound)"
    print(f"Highway dimension {label} at c={cfg.c}: {value}")
    return EXIT_OK


def run_towns(args: argparse.Namespace) -> int:
    m = _load_metric(args)
    ladder = build_cover_ladder(m, _config(args))
    td = build_towns_decomposition(ladder.metric, ladder)
    path = _output_path(args, "towns.json")
    _write_json(towns_to_dict(td), path)
    hubs_path = os.path.join(os.path.dirname(path), CORE_HUBS_JSON_FILENAME)
    _write_json([approx_core_hubs_to_dict(x, reps) for x, reps in core_hubs_by_town(td, ladder)], hubs_path)
    print(f"{td} written to {path}, core hubs to {hubs_path}")
    return _report_exit(validate_towns(td, ladder.metric, ladder))


def run_embed(args: argparse.Namespace) -> int:
    m = _load_metric(args)
    cfg = _config(args)
    embedding = embed_graph(m, cfg)
    report = validate_embedding(embedding, m)
    metrics = {"c": cfg.c, "eps": cfg.epsilon, "valid": report.ok}
    if args.stretch_seeds:
        seeds = list(range(cfg.seed, cfg.seed + args.stretch_seeds))
        metrics["stretch"] = measure_stretch(m, cfg, seeds).to_dict()
    write_embedding(embedding, m.n, args.out, metrics)
    print(f"{embedding} written to {args.out}")
    return _report_exit(report)


def run_solve(args: argparse.Namespace) -> int:
    m = _load_metric(args)
    kind = ProblemKind.parse(args.problem)
    terminals = read_vertex_list(args.terminals) if args.terminals else None
    open_cost = phi = None
    if args.costs:
        open_cost, phi = read_costs(args.costs, m.n)
    if kind is ProblemKind.STEINER and terminals is None:
        raise ValueError("steiner needs --terminals")
    p = ProblemInstance(kind, m, terminals=terminals, open_cost=open_cost, phi=phi)
    result = solve_problem(p, _config(args), args.mode)
    if args.oracle:
        attach_oracle_ratio(p, result)
    path = _output_path(args, "result.json")
    _write_json(result_to_dict(result), path)
    ratio = f", ratio {result.ratio_to_oracle:.4f}" if result.ratio_to_oracle is not None else ""
    print(f"{kind.value} ({result.method}): cost {result.cost:.6g}{ratio}")
    return EXIT_OK if result.feasible else EXIT_VIOLATION


def run_validate(args: argparse.Namespace) -> int:
    m = _load_metric(args)
    embedding = read_embedding(args.embedding)
    report = validate_embedding(embedding, m)
    print(f"{report}")
    return _report_exit(report)


def run_experiment_command(args: argparse.Namespace) -> int:
    fixtures = [parse_fixture_spec(text, args.seed) for text in args.fixtures]
    seeds = list(range(args.seed, args.seed + args.seeds))
    plan = ExperimentPlan(fixtures, args.c_values or [args.c], args.eps_values or [args.eps], seeds)
    rows = run_experiment(plan, args.out, args.workers)
    failed = sum(1 for row in rows if row["status"] != "ok")
    analyze(os.path.join(args.out, "experiment.csv"), args.out)
    print(f"{len(rows)} cells, {failed} failed; results in {args.out}")
    return EXIT_OK if failed == 0 else EXIT_VIOLATION


def _add_graph_source(parser: argparse.ArgumentParser) -> None:
    source = parser.add_mutually_exclusive_group(required=True)
    source.add_argument("--graph", help="edge-list file ('n m' header, then 'u v length' lines)")
    source.add_argument("--fixture", help="generated graph, e.g. 'spider:l=8,c=5'")


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--c", type=float, default=DEFAULT_C, help="ball constant c (lambda = c - 4)")
    common.add_argument("--eps", type=float, default=DEFAULT_EPS, help="accuracy parameter in (0, 1]")
    common.add_argument("--seed", type=int, default=DEFAULT_SEED, help="master seed")
    common.add_argument("--out", default=OUTPUT_DIR, help="output directory or file")
    noise = common.add_mutually_exclusive_group()
    noise.add_argument("--verbose", action="store_true")
    noise.add_argument("--quiet", action="store_true")

    parser = argparse.ArgumentParser(prog="hubway", description="Highway-dimension graph embeddings and solvers.")
    sub = parser.add_subparsers(dest="command", required=True)

    gen = sub.add_parser("gen", parents=[common], help="write a fixture graph")
    gen.add_argument("family", help="family with optional params, e.g. 'grid:rows=3,cols=4'")
    gen.set_defaults(handler=run_gen)

    for name, handler, text in (("spc", run_spc, "shortest path cover ladder as JSON"),
                                ("towns", run_towns, "towns decomposition as JSON"),
                                ("embed", run_embed, "embedding H, its bag tree D and metrics")):
        command = sub.add_parser(name, parents=[common], help=text)
        _add_graph_source(command)
        command.set_defaults(handler=handler)
        if name == "embed":
            command.add_argument("--stretch-seeds", type=int, default=0,
                                 help="also measure stretch over this many seeds (at least 2)")

    hd = sub.add_parser("hd", parents=[common], help="exact highway dimension, proxy on large graphs")
    _add_graph_source(hd)
    hd.add_argument("--variant", choices=HD_VARIANTS, default="def1")
    hd.set_defaults(handler=run_hd)

    solve = sub.add_parser("solve", parents=[common], help="tsp, steiner or facility location")
    _add_graph_source(solve)
    solve.add_argument("--problem", choices=["tsp", "steiner", "fl", "facility"], required=True)
    solve.add_argument("--terminals", help="file of terminal vertex ids (steiner)")
    solve.add_argument("--costs", help="file of 'v open_cost [phi]' lines (facility)")
    solve.add_argument("--mode", choices=SOLVE_MODES, default="qptas")
    solve.add_argument("--oracle", action="store_true", help="add cost / OPT when the exact solver fits")
    solve.set_defaults(handler=run_solve)

    validate = sub.add_parser("validate", parents=[common], help="re-check a written embedding")
    _add_graph_source(validate)
    validate.add_argument("--embedding", required=True, help="directory holding H.edges and D.json")
    validate.set_defaults(handler=run_validate)

    experiment = sub.add_parser("experiment", parents=[common], help="batch of embedding runs")
    experiment.add_argument("--fixtures", nargs="+", required=True)
    experiment.add_argument("--c-values", type=float, nargs="+")
    experiment.add_argument("--eps-values", type=float, nargs="+")
    experiment.add_argument("--seeds", type=int, default=5, help="number of seeds, starting at --seed")
    experiment.add_argument("--workers", type=int, default=None)
    experiment.set_defaults(handler=run_experiment_command)
    return parser


def run_hubway(argv: Optional[List[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    level = logging.DEBUG if args.verbose else logging.WARNING if args.quiet else logging.INFO
    logging.basicConfig(level=level, format='%(asctime)s - %(name)s - %(levelname)s - %(message)s')
    try:
        return args.handler(args)
    except (GraphFormatError, OSError) as e:
        logger.error(f"I/O error: {e}")
        return EXIT_IO
    except HubwayError as e:
        logger.error(f"{type(e).__name__}: {e}")
        return EXIT_VIOLATION
    except ValueError as e:
        logger.error(f"Invalid arguments: {e}")
        return EXIT_USAGE


if __name__ == "__main__":
    start_time = time.time()
    exit_code = run_hubway()
    end_time = time.time()
    print(f"\nTotal execution time: {end_time - start_time:.2f} seconds.")
    sys.exit(exit_code)
