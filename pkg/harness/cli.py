import argparse
import json
import logging
import sys
import time
from pathlib import Path
from typing import Optional

sys.path.insert(0, str(Path(__file__).parent.parent))

from experiment_setup.presets import PRESETS
from harness.config import HARNESS_CONFIG, RunConfig, load_config, load_sweep
from harness.experiments import run_experiment
from harness.io import save_run
from harness.runner import execute
from harness.sweep import run_sweep
from model.coefficients import verify_bounds
from model.params import check_hypotheses
from numerics.spectrum import spectrum_report
from utils.helper import ChemofrontError, canonical_json

logger = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s - %(name)s - %(levelname)s - %(message)s"


def configure_logging(level: Optional[str] = None):
    logging.basicConfig(level=(level or HARNESS_CONFIG["log_level"]).upper(), format=LOG_FORMAT, force=True)


def _default_length(config: RunConfig) -> float:
    geometry = config.geometry
    if geometry.kind == "single":
        return geometry.h0
    if geometry.kind == "double":
        return 0.5 * (geometry.h0 - geometry.g0)
    if geometry.kind == "halfline":
        return geometry.L
    return geometry.l_plus - geometry.l_minus


class LabClient:
    """Command dispatcher behind the `chemofront` command line."""

    def __init__(self, out: Optional[Path] = None, jobs: Optional[int] = None, allow_h1_violation: bool = False):
        self.out = Path(out) if out else None
        self.jobs = jobs
        self.allow_h1_violation = allow_h1_violation

    def handle_command(self, args) -> int:
        started = time.perf_counter()
        try:
            if args.command == "run":
                self.run(args)
            elif args.command == "sweep":
                self.sweep(args)
            elif args.command == "spectrum":
                self.spectrum(args)
            elif args.command == "experiment":
                return self.experiment(args)
            elif args.command == "validate-config":
                self.validate_config(args)
            else:
                print(f"[ERROR] Unknown command {args.command}")
                return 2
            return 0
        except ChemofrontError as e:
            logger.error(
                f"{args.command} failed: {type(e).__name__}: {e}",
                extra={"command": args.command, "elapsed": f"{time.perf_counter() - started:.3f}s"},
            )
            print(f"[ERROR] {e}")
            return e.exit_code
        except Exception as e:
            logger.error(f"Unexpected error in {args.command}: {type(e).__name__}: {e}", exc_info=True)
            print(f"[ERROR] {type(e).__name__}: {e}")
            return 3

    def run(self, args):
        config = load_config(args.config, args.override)
        series = execute(config, self.allow_h1_violation)
        target = save_run(series, config, self.out)
        outcome = series.outcome
        print(f"[OK] {outcome.verdict.value}: h_inf={outcome.h_infinity_estimate:.6g}, sup_u={outcome.final_sup_u:.6g}")
        print(f"  results: {target}")

    def sweep(self, args):
        spec = load_sweep(args.config, args.override)
        out = self.out or Path(HARNESS_CONFIG["output_dir"]) / spec.base.output.label / "sweep"
        table = run_sweep(spec, out, self.jobs, self.allow_h1_violation)
        counts = table["verdict"].value_counts().to_dict()
        print(f"[OK] {len(table)} cells: {counts}")
        print(f"  phase table: {out / 'phase_table.csv'}")

    def spectrum(self, args):
        config = load_config(args.config, args.override)
        settings = config.spectrum
        length = args.length or _default_length(config)
        report = spectrum_report(
            config.coefficients, length, settings.grid_n, settings.horizon, settings.windows, settings.tol
        )
        print(json.dumps({"length": length, **report}, indent=2, sort_keys=True))

    def experiment(self, args) -> int:
        report = run_experiment(args.name, args.override, self.out, self.jobs, self.allow_h1_violation)
        for result in report["assertions"]:
            status = "OK" if result["status"] == "ok" else "FAIL"
            print(f"  [{status}] {result['data']['assertion']}")
        if report["passed"]:
            print(f"[OK] {args.name} passed")
            return 0
        print(f"[ERROR] {args.name} failed")
        failure = report["failure"]
        return failure["exit_code"] if failure else 4

    def validate_config(self, args):
        config = load_config(args.config, args.override)
        verify_bounds(config.coefficients)
        report = check_hypotheses(config.model, config.coefficients)
        payload = {"digest": config.digest(), "hypotheses": report.model_dump()}
        print(json.dumps(json.loads(canonical_json(payload)), indent=2, sort_keys=True))


def _add_run_options(parser: argparse.ArgumentParser, suppress: bool = False):
    # subcommand copies only set values, so options given before the subcommand survive
    default = {"default": argparse.SUPPRESS} if suppress else {}
    parser.add_argument("--out", type=Path, help="output directory root", **default)
    parser.add_argument("--jobs", type=int, help="parallel sweep cells", **default)
    parser.add_argument(
        "--allow-h1-violation", action="store_true", help="run configs that fail (H1)", **default
    )


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="chemofront", description="Free-boundary chemotaxis numerical lab")
    _add_run_options(parser)
    verbosity = parser.add_mutually_exclusive_group()
    verbosity.add_argument("--quiet", action="store_true")
    verbosity.add_argument("--verbose", action="store_true")
    common = argparse.ArgumentParser(add_help=False)
    _add_run_options(common, suppress=True)
    sub = parser.add_subparsers(dest="command", required=True)

    def with_config(name: str, help_text: str) -> argparse.ArgumentParser:
        cmd = sub.add_parser(name, help=help_text, parents=[common])
        cmd.add_argument("--config", type=Path, required=True)
        cmd.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
        return cmd

    with_config("run", "run one configuration")
    with_config("sweep", "run a sweep file and write its phase table")
    spectrum = with_config("spectrum", "principal spectrum interval and critical lengths")
    spectrum.add_argument("--length", type=float, help="half-length for the spectrum interval")
    with_config("validate-config", "print the config digest and hypothesis report")
    experiment = sub.add_parser("experiment", help="run a named preset", parents=[common])
    experiment.add_argument("name", choices=sorted(PRESETS))
    experiment.add_argument("--override", action="append", default=[], metavar="KEY=VALUE")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    level = "WARNING" if args.quiet else "DEBUG" if args.verbose else None
    configure_logging(level)
    client = LabClient(out=args.out, jobs=args.jobs, allow_h1_violation=args.allow_h1_violation)
    return client.handle_command(args)


if __name__ == "__main__":
    sys.exit(main())
