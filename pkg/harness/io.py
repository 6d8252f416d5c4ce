import logging
from pathlib import Path
from typing import Optional

from harness.config import HARNESS_CONFIG, RunConfig
from solver.series import RunSeries
from utils.helper import write_csv, write_json

logger = logging.getLogger(__name__)


def run_directory(config: RunConfig, out: Optional[Path] = None) -> Path:
    """<out>/<label>/<digest12>; `out` falls back to the config, then to LAB_OUTPUT_DIR."""
    root = Path(out or config.output.directory or HARNESS_CONFIG["output_dir"])
    return root / config.output.label / config.digest()[:12]


def snapshot_name(t: float) -> str:
    return f"snapshot_t{t:.6g}.csv"


def save_run(series: RunSeries, config: RunConfig, out: Optional[Path] = None) -> Path:
    target = run_directory(config, out)
    write_csv(target / "series.csv", series.to_frame())
    for t, frame in series.snapshots:
        write_csv(target / snapshot_name(t), frame)
    manifest = {
        "digest": config.digest(),
        "config": config.model_dump(mode="json"),
        "outcome": series.outcome.model_dump(mode="json") if series.outcome else None,
        "samples": len(series),
        "snapshots": [snapshot_name(t) for t, _ in series.snapshots],
        **series.manifest,
    }
    write_json(target / "manifest.json", manifest)
    logger.info(f"Wrote {len(series)} samples and {len(series.snapshots)} snapshots to {target}")
    return target
