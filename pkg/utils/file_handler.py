# utils/file_handler.py
import csv
import json
import logging
import os
from typing import Any, Dict, List, Optional, Sequence, Tuple

import numpy as np

from highway.graphcore import build_metric
from models.data_models import (CoverLadder, CoverLevel, HdConfig, MetricInstance, Town, TownsDecomposition,
                                WeightedGraph)
from models.embedding_models import ApproxCoreHubs, Embedding, EdgeTag, Representatives, ShiftRecord, edge_key
from models.errors import GraphFormatError
from models.problem_models import SolveResult
from models.tree_decomposition import TreeDecomposition

logger = logging.getLogger(__name__)

FORMAT_VERSION = 1
H_EDGES_FILENAME = "H.edges"
D_JSON_FILENAME = "D.json"
METRICS_JSON_FILENAME = "metrics.json"
CORE_HUBS_JSON_FILENAME = "corehubs.json"


def _create_output_dir(dir_path: str = "output"):
    """Creates the output directory if it doesn't exist."""
    try:
        os.makedirs(dir_path, exist_ok=True)
    except OSError as e:
        logger.error(f"Error creating directory {dir_path}: {e}")
        raise


def _json_default(value: Any) -> Any:
    if isinstance(value, np.integer):
        return int(value)
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.ndarray):
        return value.tolist()
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")


# edge lists

def _content_lines(text: str):
    """ (line number, tokens) for every non-blank, non-comment line. """
    for number, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield number, line.split()


def parse_graph(text: str) -> WeightedGraph:
    """
    Edge-list text: a header "n m", then m lines "u v length". '#' starts a
    comment; blank lines are ignored.
    """
    lines = list(_content_lines(text))
    if not lines:
        raise GraphFormatError("missing header 'n m'", 1)
    header_no, header = lines[0]
    if len(header) != 2:
        raise GraphFormatError(f"header must be 'n m', got {' '.join(header)!r}", header_no)
    try:
        n, m = int(header[0]), int(header[1])
    except ValueError:
        raise GraphFormatError(f"header must hold two integers, got {' '.join(header)!r}", header_no)
    if n < 1 or m < 0:
        raise GraphFormatError(f"header needs n >= 1 and m >= 0, got n={n}, m={m}", header_no)

    edges = []
    for number, tokens in lines[1:]:
        if len(tokens) != 3:
            raise GraphFormatError(f"edge line must be 'u v length', got {' '.join(tokens)!r}", number)
        try:
            u, v, length = int(tokens[0]), int(tokens[1]), float(tokens[2])
        except ValueError:
            raise GraphFormatError(f"cannot parse edge {' '.join(tokens)!r}", number)
        if not (0 <= u < n and 0 <= v < n) or u == v:
            raise GraphFormatError(f"bad edge ({u}, {v}) for n={n}", number)
        if not np.isfinite(length) or length <= 0:
            raise GraphFormatError(f"bad edge length {tokens[2]!r}", number)
        edges.append((u, v, length))
    if len(edges) != m:
        raise GraphFormatError(f"header announces {m} edges but {len(edges)} were found", header_no)
    return WeightedGraph(n, edges)


def format_graph(g: WeightedGraph) -> str:
    lines = [f"{g.n} {g.m}"]
    lines.extend(f"{u} {v} {w!r}" for u, v, w in g.edges)
    return "\n".join(lines) + "\n"


def read_graph(filepath: str) -> WeightedGraph:
    logger.info(f"Reading graph from: {filepath}")
    try:
        with open(filepath, 'r', encoding='utf-8') as f:
            text = f.read()
    except IOError as e:
        logger.error(f"Error reading graph file {filepath}: {e}")
        raise
    graph = parse_graph(text)
    logger.info(f"Loaded {graph} from {filepath}")
    return graph


def write_graph(g: WeightedGraph, filepath: str) -> None:
    _create_output_dir(os.path.dirname(filepath) or ".")
    try:
        with open(filepath, 'w', encoding='utf-8') as f:
            f.write(format_graph(g))
        logger.info(f"Successfully saved {g} to {filepath}")
    except IOError as e:
        logger.error(f"Error writing graph file {filepath}: {e}")
        raise


def read_vertex_list(filepath: str) -> List[int]:
    """ Whitespace separated vertex ids, '#' comments allowed. """
    with open(filepath, 'r', encoding='utf-8') as f:
        text = f.read()
    out: List[int] = []
    for number, tokens in _content_lines(text):
        try:
            out.extend(int(t) for t in tokens)
        except ValueError:
            raise GraphFormatError(f"vertex ids must be integers, got {' '.join(tokens)!r}", number)
    return out


def read_costs(filepath: str, n: int) -> Tuple[np.ndarray, np.ndarray]:
    """ Lines "v open_cost [phi]"; vertices not listed keep cost 1 and phi 1. """
    with open(filepath, 'r', encoding='utf-8') as f:
        text = f.read()
    open_cost, phi = np.ones(n), np.ones(n)
    for number, tokens in _content_lines(text):
        if len(tokens) not in (2, 3):
            raise GraphFormatError(f"cost line must be 'v open_cost [phi]', got {' '.join(tokens)!r}", number)
        try:
            v = int(tokens[0])
            cost = float(tokens[1])
            weight = float(tokens[2]) if len(tokens) == 3 else None
        except ValueError:
            raise GraphFormatError(f"cannot parse cost line {' '.join(tokens)!r}", number)
        if not 0 <= v < n:
            raise GraphFormatError(f"vertex {v} is out of range for n={n}", number)
        open_cost[v] = cost
        if weight is not None:
            phi[v] = weight
    return open_cost, phi


# JSON artifacts

def save_to_json(data: Any, filename: str, output_dir: str = "output") -> str:
    _create_output_dir(output_dir)
    filepath = os.path.join(output_dir, filename)
    logger.debug(f"Saving data to JSON: {filepath}...")
    try:
        with open(filepath, 'w', encoding='utf-8') as jsonfile:
            json.dump(data, jsonfile, indent=4, ensure_ascii=False, default=_json_default)
        logger.info(f"Successfully saved {filepath}")
    except IOError as e:
        logger.error(f"Error writing to JSON file {filepath}: {e}")
        raise
    except TypeError as e:
        logger.error(f"Error serializing data to JSON: {e}")
        raise
    return filepath


def load_json(filepath: str) -> Any:
    try:
        with open(filepath, 'r', encoding='utf-8') as jsonfile:
            return json.load(jsonfile)
    except IOError as e:
        logger.error(f"Error reading JSON file {filepath}: {e}")
        raise


def metric_to_dict(m: MetricInstance) -> Dict[str, Any]:
    """ The distance matrix is not stored; it is recomputed on load. """
    return {"format_version": FORMAT_VERSION, "n": m.n, "edges": [[u, v, w] for u, v, w in m.graph.edges]}


def metric_from_dict(data: Dict[str, Any]) -> MetricInstance:
    if data.get("format_version") != FORMAT_VERSION:
        raise ValueError(f"Unsupported metric format version {data.get('format_version')!r}.")
    return build_metric(WeightedGraph(data["n"], [tuple(edge) for edge in data["edges"]]))


def ladder_to_dict(ladder: CoverLadder) -> Dict[str, Any]:
    return {
        "c": ladder.config.c,
        "lambda": ladder.config.lambda_,
        "m": ladder.m,
        "levels": [{"i": level.index, "r": level.radius, "hubs": sorted(level.hubs), "sparsity": level.sparsity}
                   for level in ladder.levels],
    }


def ladder_from_dict(data: Dict[str, Any], metric: MetricInstance) -> CoverLadder:
    """ `metric` is the rescaled metric the ladder was computed on. """
    levels = [CoverLevel(entry["i"], entry["r"], entry["hubs"], entry["sparsity"]) for entry in data["levels"]]
    return CoverLadder(HdConfig(data["c"]), metric, levels)


def _town_to_dict(td: TownsDecomposition, town_id: int) -> Dict[str, Any]:
    town = td.town(town_id)
    return {
        "id": town.id,
        "levels": sorted(town.levels),
        "recursion_level": town.recursion_level,
        "origin": town.origin,
        "vertices": sorted(town.vertices),
        "children": [_town_to_dict(td, child) for child in town.children],
    }


def towns_to_dict(td: TownsDecomposition) -> Dict[str, Any]:
    return {
        "m": td.m,
        "sprawl": {str(i): sorted(s) for i, s in sorted(td.sprawl.items())},
        "root": _town_to_dict(td, td.root),
    }


def towns_from_dict(data: Dict[str, Any]) -> TownsDecomposition:
    towns: Dict[int, Town] = {}
    stack = [(data["root"], None)]
    while stack:
        node, parent = stack.pop()
        towns[node["id"]] = Town(node["id"], node["vertices"], node["levels"], node["recursion_level"],
                                 parent=parent, children=[child["id"] for child in node["children"]],
                                 origin=node.get("origin"))
        stack.extend((child, node["id"]) for child in node["children"])
    sprawl = {int(i): frozenset(s) for i, s in data["sprawl"].items()}
    return TownsDecomposition(towns, data["root"]["id"], sprawl, data["m"])


def approx_core_hubs_to_dict(x: ApproxCoreHubs, reps: Optional[Representatives] = None) -> Dict[str, Any]:
    return {
        "town": x.town_id,
        "X": [{"level": i, "hubs": sorted(hubs)} for i, hubs in sorted(x.per_level.items())],
        "shifts": [{"from": s.hub, "to": s.target, "dist": s.distance, "level": s.level} for s in x.shift_log],
        "Y": [] if reps is None else [{"representative": y, "child": reps.child_of[y], "represents": sorted(members)}
                                      for y, members in sorted(reps.represents.items())],
    }


def approx_core_hubs_from_dict(data: Dict[str, Any]) -> Tuple[ApproxCoreHubs, Representatives]:
    per_level = {entry["level"]: frozenset(entry["hubs"]) for entry in data["X"]}
    shifts = [ShiftRecord(s["from"], s["level"], s["to"], s["dist"]) for s in data["shifts"]]
    represents = {y["representative"]: frozenset(y["represents"]) for y in data["Y"]}
    child_of = {y["representative"]: y["child"] for y in data["Y"]}
    return ApproxCoreHubs(data["town"], per_level, shifts), Representatives(represents, child_of)


def tree_decomposition_to_dict(td: TreeDecomposition) -> Dict[str, Any]:
    return {
        "root": td.root,
        "width": td.width,
        "bags": [{"id": b, "parent": td.parent[b], "level": td.level[b], "vertices": sorted(td.bags[b])}
                 for b in td.top_down()],
    }


def tree_decomposition_from_dict(data: Dict[str, Any]) -> TreeDecomposition:
    td = TreeDecomposition()
    pending = {entry["id"]: entry for entry in data["bags"]}
    children: Dict[Optional[int], List[int]] = {}
    for entry in data["bags"]:
        children.setdefault(entry["parent"], []).append(entry["id"])
    stack = list(reversed(children.get(None, [])))
    while stack:
        entry = pending[stack.pop()]
        td.add_bag(entry["vertices"], parent=entry["parent"], level=entry["level"], bag_id=entry["id"])
        stack.extend(reversed(children.get(entry["id"], [])))
    if len(td) != len(pending):
        raise ValueError(f"Bag tree is not connected: {len(pending) - len(td)} bags unreachable from the root.")
    return td


def _tag_to_dict(pair, tag: EdgeTag) -> Dict[str, Any]:
    return {"u": pair[0], "v": pair[1], "kind": tag.kind, "town": tag.town, "child": tag.child, "bag": tag.bag}


def embedding_to_dict(e: Embedding) -> Dict[str, Any]:
    """ D.json: bag tree plus the provenance needed to re-validate H. """
    data = tree_decomposition_to_dict(e.td)
    data.update({
        "format_version": FORMAT_VERSION,
        "seed": e.seed,
        "vertices": sorted(e.vertices),
        "provenance": [_tag_to_dict(pair, tag) for pair, tag in sorted(e.provenance.items())],
        "connections": [vars(choice) for choice in e.connections],
        "child_towns": [{"town": t, "vertices": sorted(vertices)} for t, vertices in sorted(e.child_towns.items())],
    })
    return data


def write_embedding(e: Embedding, n: int, output_dir: str, metrics: Optional[Dict[str, Any]] = None) -> List[str]:
    """ H as an edge list over 0..n-1 (lengths as stored), D as JSON, and a metrics JSON. """
    h = WeightedGraph(n, [(u, v, w) for (u, v), w in sorted(e.edges.items())])
    h_path = os.path.join(output_dir, H_EDGES_FILENAME)
    write_graph(h, h_path)
    d_path = save_to_json(embedding_to_dict(e), D_JSON_FILENAME, output_dir)
    summary = {"width": e.width, "n_bags": len(e.td), "n_edges": len(e.edges), "seed": e.seed}
    summary.update(metrics or {})
    metrics_path = save_to_json(summary, METRICS_JSON_FILENAME, output_dir)
    return [h_path, d_path, metrics_path]


def read_embedding(input_dir: str) -> Embedding:
    h = read_graph(os.path.join(input_dir, H_EDGES_FILENAME))
    data = load_json(os.path.join(input_dir, D_JSON_FILENAME))
    td = tree_decomposition_from_dict(data)
    provenance = {edge_key(t["u"], t["v"]): EdgeTag(t["kind"], t["town"], t["child"], t["bag"])
                  for t in data["provenance"]}
    edges = {(u, v): w for u, v, w in h.edges}
    e = Embedding(data["vertices"], edges, provenance, td, data["seed"])
    e.child_towns = {t["town"]: frozenset(t["vertices"]) for t in data.get("child_towns", [])}
    return e


def result_to_dict(result: SolveResult) -> Dict[str, Any]:
    witness = result.witness
    if isinstance(witness, dict):
        witness = {"open": list(witness["open"]),
                   "assign": [[v, w] for v, w in sorted(witness["assign"].items())]}
    data = {
        "problem": result.kind.value,
        "cost": result.cost,
        "witness": witness,
        "method": result.method,
        "feasible": result.feasible,
        "details": result.details,
    }
    if result.ratio_to_oracle is not None:
        data["ratio_to_oracle"] = result.ratio_to_oracle
    return data


# CSV

def save_to_csv(rows: Sequence[Dict[str, Any]], columns: Sequence[str], filename: str, output_dir: str = "output") -> str:
    """ One row per dict in `rows`; an empty row list gives a header-only file. """
    _create_output_dir(output_dir)
    filepath = os.path.join(output_dir, filename)
    logger.info(f"Saving data to CSV: {filepath}...")
    try:
        with open(filepath, 'w', newline='', encoding='utf-8') as csvfile:
            writer = csv.writer(csvfile)
            writer.writerow(columns)
            for row in rows:
                writer.writerow(['' if row.get(col) is None else row.get(col) for col in columns])
        logger.info(f"Successfully saved {len(rows)} rows to {filepath}")
    except IOError as e:
        logger.error(f"Error writing to CSV file {filepath}: {e}")
        raise
    return filepath
