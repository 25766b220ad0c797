# utils/analyzer.py
import logging
import os
from typing import Dict, List, Optional

import numpy as np
import pandas as pd
from jinja2 import Environment, FileSystemLoader, select_autoescape

from models.problem_models import ExperimentPlan

logger = logging.getLogger(__name__)

TEMPLATE_DIR = os.path.dirname(os.path.abspath(__file__))
REPORT_TEMPLATE_NAME = "report_template.html"
REPORT_FILENAME = "experiment_report.html"
MONOTONE_TOL = 1e-9

FIXTURE_COL = 'fixture'
C_COL = 'c'
EPS_COL = 'eps'
SEED_COL = 'seed'
ALPHA_COL = 'alpha'
WIDTH_COL = 'width'
MEAN_STRETCH_COL = 'mean_stretch'
MAX_STRETCH_COL = 'max_stretch'
STATUS_COL = 'status'


def load_data(filepath: str) -> Optional[pd.DataFrame]:
    """ Experiment CSV with numeric columns converted; failed cells are dropped. """
    logger.info(f"Attempting to load data from: {filepath}")
    if not os.path.exists(filepath):
        logger.error(f"Error: Input CSV file not found at {filepath}")
        return None
    df = pd.read_csv(filepath)
    missing_cols = [col for col in ExperimentPlan.CSV_COLUMNS if col not in df.columns]
    if missing_cols:
        logger.error(f"Missing required columns in CSV: {missing_cols}")
        return None

    for col in ['n', ALPHA_COL, C_COL, 'lambda', EPS_COL, SEED_COL, WIDTH_COL,
                MEAN_STRETCH_COL, MAX_STRETCH_COL, 'runtime_ms']:
        df[col] = pd.to_numeric(df[col], errors='coerce')

    rows_before_drop = len(df)
    df = df[df[STATUS_COL] == 'ok'].copy()
    if len(df) < rows_before_drop:
        logger.warning(f"Dropped {rows_before_drop - len(df)} failed cells.")
    logger.info(f"Successfully loaded data with shape: {df.shape}")
    return df


def summarize(df: pd.DataFrame) -> pd.DataFrame:
    """ Per (fixture, c, eps) aggregates over seeds. """
    if df.empty:
        return pd.DataFrame(columns=[FIXTURE_COL, C_COL, EPS_COL, 'seeds', 'mean_stretch', 'max_stretch',
                                     'mean_width', 'max_width'])
    grouped = df.groupby([FIXTURE_COL, C_COL, EPS_COL], sort=True)
    summary = grouped.agg(
        seeds=(SEED_COL, 'nunique'),
        mean_stretch=(MEAN_STRETCH_COL, 'mean'),
        max_stretch=(MAX_STRETCH_COL, 'max'),
        mean_width=(WIDTH_COL, 'mean'),
        max_width=(WIDTH_COL, 'max'),
    ).reset_index()
    return summary


def check_eps_monotonicity(df: pd.DataFrame) -> List[Dict[str, object]]:
    """
    For every (fixture, c), the mean stretch over the seeds shared by all eps
    values must not grow as eps decreases. Returns one record per group.
    """
    results: List[Dict[str, object]] = []
    for (fixture, c), group in df.groupby([FIXTURE_COL, C_COL], sort=True):
        eps_values = sorted(group[EPS_COL].unique(), reverse=True)
        shared = set.intersection(*(set(group.loc[group[EPS_COL] == e, SEED_COL]) for e in eps_values))
        paired = group[group[SEED_COL].isin(shared)]
        means = [float(paired.loc[paired[EPS_COL] == e, MEAN_STRETCH_COL].mean()) for e in eps_values]
        monotone = all(b <= a * (1.0 + MONOTONE_TOL) for a, b in zip(means, means[1:]))
        if not monotone:
            logger.warning(f"Mean stretch on {fixture} (c={c}) is not monotone in eps: {dict(zip(eps_values, means))}")
        results.append({"fixture": fixture, "c": c, "eps": eps_values, "mean_stretch": means,
                        "paired_seeds": len(shared), "monotone": monotone})
    return results


def width_scaling_exponent(df: pd.DataFrame) -> Optional[float]:
    """ Slope of log(mean width) against log(aspect ratio) across fixtures; None with fewer than two ratios. """
    usable = df[(df[WIDTH_COL] > 0) & (df[ALPHA_COL] > 1)]
    points = usable.groupby(ALPHA_COL)[WIDTH_COL].mean()
    if len(points) < 2:
        logger.warning("Width scaling needs at least two distinct aspect ratios.")
        return None
    slope, _ = np.polyfit(np.log(points.index.to_numpy(dtype=float)), np.log(points.to_numpy(dtype=float)), 1)
    logger.info(f"Width vs aspect ratio log-log exponent: {slope:.4f} over {len(points)} ratios")
    return float(slope)


def generate_html_report(summary: pd.DataFrame,
                         monotonicity: List[Dict[str, object]],
                         exponent: Optional[float],
                         output_path: str) -> None:
    logger.info(f"Generating HTML report to: {output_path}")
    env = Environment(loader=FileSystemLoader(TEMPLATE_DIR), autoescape=select_autoescape(['html', 'xml']))
    template = env.get_template(REPORT_TEMPLATE_NAME)
    context = {
        'columns': list(summary.columns),
        'rows': summary.to_dict(orient='records'),
        'monotonicity': monotonicity,
        'exponent': exponent,
    }
    html_content = template.render(context)
    os.makedirs(os.path.dirname(os.path.abspath(output_path)), exist_ok=True)
    with open(output_path, 'w', encoding='utf-8') as f:
        f.write(html_content)
    logger.info(f"HTML report successfully generated and saved at: {output_path}")


def analyze(csv_path: str, output_dir: str) -> Optional[Dict[str, object]]:
    """ Summary, eps monotonicity and width scaling of one experiment CSV, plus the HTML report. """
    df = load_data(csv_path)
    if df is None:
        return None
    summary = summarize(df)
    monotonicity = check_eps_monotonicity(df) if not df.empty else []
    exponent = width_scaling_exponent(df) if not df.empty else None
    generate_html_report(summary, monotonicity, exponent, os.path.join(output_dir, REPORT_FILENAME))
    return {"summary": summary, "monotonicity": monotonicity, "exponent": exponent}
