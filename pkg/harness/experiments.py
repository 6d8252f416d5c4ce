import logging
from pathlib import Path
from typing import Optional

from experiment_setup.presets import PRESETS, PresetRun
from harness.config import HARNESS_CONFIG
from utils.helper import ChemofrontError, ConfigError, error, write_json

logger = logging.getLogger(__name__)


def run_experiment(
    name: str,
    overrides: Optional[list[str]] = None,
    out: Optional[Path] = None,
    jobs: Optional[int] = None,
    allow_h1_violation: bool = False,
) -> dict:
    """Run a named preset and write <out>/<name>/summary.json with one envelope per assertion.

    Config errors propagate. A run failure inside the preset is recorded in the report
    together with the assertions gathered before it.
    """
    if name not in PRESETS:
        raise ConfigError(f"Unknown experiment preset {name!r}; choose from {sorted(PRESETS)}")
    root = Path(out or HARNESS_CONFIG["output_dir"]) / name
    run = PresetRun(
        name=name,
        out=root,
        overrides=list(overrides or []),
        jobs=jobs or HARNESS_CONFIG["jobs"],
        allow_h1_violation=allow_h1_violation,
    )
    logger.info(f"Experiment {name} start: overrides={run.overrides}, jobs={run.jobs}")
    failure = None
    try:
        PRESETS[name](run)
    except ConfigError:
        raise
    except ChemofrontError as e:
        logger.error(f"Experiment {name} aborted: {e}")
        failure = {"type": type(e).__name__, "exit_code": e.exit_code, "message": str(e), "dump": getattr(e, "dump", {})}
        run.results.append(error(f"run failed: {e}", {"assertion": "run-completed"}))

    passed = all(r["status"] == "ok" for r in run.results)
    report = {
        "preset": name,
        "passed": passed,
        "overrides": run.overrides,
        "assertions": run.results,
        "failure": failure,
    }
    write_json(root / "summary.json", report)
    logger.info(f"Experiment {name} done: {'passed' if passed else 'FAILED'} ({len(run.results)} assertions)")
    return report
