import sys
import tempfile
import time
from pathlib import Path

sys.path.insert(0, str(Path(__file__).parent.parent))

from experiment_setup.presets import single_front
from harness.cli import configure_logging
from harness.config import SweepSpec, config_from_mapping
from harness.sweep import run_sweep

H0_VALUES = [0.3, 0.4, 0.6, 1.0, 1.5, 2.0, 3.0, 4.0]


def run_evaluation(jobs, t_end=10.0):
    """Wall time and cells/sec of the h0 dichotomy sweep at a given parallelism."""
    base = config_from_mapping(single_front(1.0, amp=0.1, t_end=t_end))
    spec = SweepSpec(base=base, axes=[{"path": "geometry.h0", "values": H0_VALUES}], jobs=jobs)

    print(f"\nStarting Evaluation: {jobs} jobs | {len(H0_VALUES)} cells | t_end={t_end}")
    with tempfile.TemporaryDirectory() as out:
        start = time.perf_counter()
        table = run_sweep(spec, Path(out))
        stop = time.perf_counter()

    print("\nEvaluation Results (Sweep)")
    print(f"Wall time: {stop - start:.2f} s")
    print(f"Throughput: {len(table) / (stop - start):.3f} cells/sec")
    print(table[["geometry.h0", "verdict", "h_infinity_estimate"]].to_string(index=False))
    return table


if __name__ == "__main__":
    configure_logging("WARNING")
    first = run_evaluation(1)
    second = run_evaluation(4)
    if not first["verdict"].equals(second["verdict"]):
        print("Verdicts differ between job counts")
