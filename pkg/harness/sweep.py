import itertools
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Callable, Optional

import pandas as pd

from harness.config import SweepSpec, cell_config
from harness.io import save_run
from harness.runner import execute
from solver.series import RunSeries
from utils.helper import ChemofrontError, write_csv

logger = logging.getLogger(__name__)

PHASE_COLUMNS = ["verdict", "h_infinity_estimate", "final_sup_u", "l_star", "digest", "message"]


def sweep_cells(spec: SweepSpec) -> list[dict]:
    """Cartesian product of the axes in declaration order, last axis fastest."""
    paths = [axis.path for axis in spec.axes]
    return [dict(zip(paths, values)) for values in itertools.product(*(axis.values for axis in spec.axes))]


def _run_cell(
    spec: SweepSpec, index: int, assignments: dict, out: Optional[Path], allow_h1_violation: bool, metrics=None
) -> dict:
    row = dict(assignments)
    try:
        config = cell_config(spec.base, assignments)
        row["digest"] = config.digest()[:12]
        series = execute(config, allow_h1_violation)
        if out is not None:
            save_run(series, config, out / "cells")
        outcome = series.outcome
        row.update(
            verdict=outcome.verdict.value,
            h_infinity_estimate=outcome.h_infinity_estimate,
            final_sup_u=outcome.final_sup_u,
            l_star=outcome.l_star,
            message="",
        )
        if metrics is not None:
            row.update(metrics(series))
        logger.info(f"Sweep cell {index} {assignments}: {outcome.verdict.value}")
    except ChemofrontError as e:
        logger.warning(f"Sweep cell {index} {assignments} failed: {e}")
        _mark_failed(row, str(e))
    except Exception as e:
        logger.error(f"Sweep cell {index} {assignments} raised {type(e).__name__}: {e}", exc_info=True)
        _mark_failed(row, f"{type(e).__name__}: {e}")
    return row


def _mark_failed(row: dict, message: str):
    row.update(verdict="Error", h_infinity_estimate=math.nan, final_sup_u=math.nan, l_star=math.nan, message=message)
    row.setdefault("digest", "")


def run_sweep(
    spec: SweepSpec,
    out: Optional[Path] = None,
    jobs: Optional[int] = None,
    allow_h1_violation: bool = False,
    metrics: Optional[Callable[[RunSeries], dict]] = None,
) -> pd.DataFrame:
    """Phase table of Outcomes keyed by axis values, rows in cartesian-product order."""
    cells = sweep_cells(spec)
    jobs = jobs or spec.jobs
    logger.info(f"Sweep over {[a.path for a in spec.axes]}: {len(cells)} cells, {jobs} jobs")
    rows: list[Optional[dict]] = [None] * len(cells)
    with ThreadPoolExecutor(max_workers=jobs) as pool:
        futures = {pool.submit(_run_cell, spec, i, cell, out, allow_h1_violation, metrics): i for i, cell in enumerate(cells)}
        for future, i in futures.items():
            rows[i] = future.result()

    columns = [axis.path for axis in spec.axes] + PHASE_COLUMNS
    extra = sorted({key for row in rows for key in row} - set(columns))
    columns += extra
    table = pd.DataFrame(rows, columns=columns)
    if out is not None:
        write_csv(Path(out) / "phase_table.csv", table)
        logger.info(f"Wrote phase table to {Path(out) / 'phase_table.csv'}")
    return table
