import sys
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

from experiment_setup.presets import PRESETS
from harness.cli import configure_logging
from harness.experiments import run_experiment


def run_all(out="results/presets", jobs=2, names=None):
    """Every preset in turn; prints one line per preset with its wall time."""
    summary = {}
    for name in names or sorted(PRESETS):
        print(f"\nStarting preset: {name}")
        start = time.perf_counter()
        report = run_experiment(name, out=Path(out), jobs=jobs)
        elapsed = time.perf_counter() - start
        failed = [r["data"]["assertion"] for r in report["assertions"] if r["status"] != "ok"]
        summary[name] = not failed
        status = "passed" if not failed else f"failed {failed}"
        print(f"{name}: {status} in {elapsed:.1f} s")
    return summary


if __name__ == "__main__":
    configure_logging("WARNING")
    results = run_all(names=sys.argv[1:] or None)
    sys.exit(0 if all(results.values()) else 4)
