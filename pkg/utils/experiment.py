# utils/experiment.py
import logging
import time
from concurrent.futures import ThreadPoolExecutor, as_completed
from typing import Any, Dict, List, Optional

import numpy as np

from highway.embed import Embedder, stretch_matrix, validate_embedding
from highway.graphcore import build_metric
from highway.spc import build_cover_ladder
from highway.towns import build_towns_decomposition, validate_towns
from models.data_models import HdConfig
from models.problem_models import ExperimentPlan, FixtureSpec
from utils.file_handler import save_to_csv, save_to_json
from utils.fixtures import generate_fixture

logger = logging.getLogger(__name__)

STATUS_OK = "ok"


class ExperimentRunner:
    """
    Runs every (fixture, c, eps, seed) cell of a plan through
    spc -> towns -> embed -> validate -> measure. Cells run on a thread pool;
    rows come back in plan order. A failing cell yields a row whose status
    names the failure, the rest of the batch carries on.
    """
    MAX_WORKERS = 4

    def __init__(self, plan: ExperimentPlan, max_workers: Optional[int] = None):
        self.plan = plan
        self.max_workers = max_workers or self.MAX_WORKERS
        logger.info(f"Initialized experiment runner for {plan} ({len(plan)} cells, {self.max_workers} workers).")

    @staticmethod
    def _base_row(fixture: FixtureSpec, c: float, eps: float, seed: int) -> Dict[str, Any]:
        return {"fixture": fixture.name, "c": c, "lambda": c - 4.0, "eps": eps, "seed": seed}

    def run_cell(self, fixture: FixtureSpec, c: float, eps: float, seed: int) -> Dict[str, Any]:
        row = self._base_row(fixture, c, eps, seed)
        start = time.perf_counter()
        graph = generate_fixture(fixture)
        m = build_metric(graph)
        row.update({"n": m.n, "alpha": m.aspect_ratio})
        cfg = HdConfig(c, eps, seed)

        ladder = build_cover_ladder(m, cfg)
        towns = build_towns_decomposition(ladder.metric, ladder)
        towns_report = validate_towns(towns, ladder.metric, ladder)
        if not towns_report.ok:
            row["status"] = f"violation: {', '.join(sorted(towns_report.kinds()))}"
            return row

        embedding = Embedder(towns, ladder, cfg, seed).embed()
        embedding = embedding.with_lengths({(u, v): float(m.dist[u, v]) for u, v in embedding.edges})
        report = validate_embedding(embedding, m)
        if not report.ok:
            row.update({"width": embedding.width, "status": f"violation: {', '.join(sorted(report.kinds()))}"})
            return row

        stretch = stretch_matrix(embedding, m)[np.triu_indices(m.n, k=1)]
        row.update({
            "width": embedding.width,
            "mean_stretch": float(stretch.mean()) if stretch.size else 1.0,
            "max_stretch": float(stretch.max()) if stretch.size else 1.0,
            "runtime_ms": round((time.perf_counter() - start) * 1000.0, 3),
            "status": STATUS_OK,
        })
        return row

    def run(self) -> List[Dict[str, Any]]:
        cells = self.plan.cells()
        rows: List[Optional[Dict[str, Any]]] = [None] * len(cells)
        if not cells:
            logger.warning("Experiment plan has no cells.")
            return []

        with ThreadPoolExecutor(max_workers=self.max_workers) as executor:
            futures = {executor.submit(self.run_cell, *cell): index for index, cell in enumerate(cells)}
            for future in as_completed(futures):
                index = futures[future]
                fixture, c, eps, seed = cells[index]
                try:
                    rows[index] = future.result()
                    logger.debug(f"  Finished {fixture.name} c={c} eps={eps} seed={seed}: {rows[index]['status']}")
                except Exception as e:
                    logger.error(f"  Error in cell {fixture.name} c={c} eps={eps} seed={seed}: {e}", exc_info=True)
                    row = self._base_row(fixture, c, eps, seed)
                    row["status"] = f"error: {type(e).__name__}: {e}"
                    rows[index] = row

        failed = sum(1 for row in rows if row["status"] != STATUS_OK)
        logger.info(f"Experiment finished: {len(rows)} cells, {failed} failed.")
        return rows

    def write(self, rows: List[Dict[str, Any]], output_dir: str, stem: str = "experiment") -> List[str]:
        csv_path = save_to_csv(rows, ExperimentPlan.CSV_COLUMNS, f"{stem}.csv", output_dir)
        summary = {
            "plan": {
                "fixtures": [{"name": f.name, "family": f.family, "params": f.params, "seed": f.seed}
                             for f in self.plan.fixtures],
                "c": self.plan.c_values,
                "eps": self.plan.eps_values,
                "seeds": self.plan.seeds,
            },
            "cells": len(rows),
            "ok": sum(1 for row in rows if row["status"] == STATUS_OK),
            "failures": [row for row in rows if row["status"] != STATUS_OK],
        }
        json_path = save_to_json(summary, f"{stem}.json", output_dir)
        return [csv_path, json_path]


def run_experiment(plan: ExperimentPlan, output_dir: str, max_workers: Optional[int] = None) -> List[Dict[str, Any]]:
    runner = ExperimentRunner(plan, max_workers)
    rows = runner.run()
    runner.write(rows, output_dir)
    return rows
