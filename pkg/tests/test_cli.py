import json
from pathlib import Path

import pytest
import yaml

from harness.cli import build_parser, main

CONFIGS = Path(__file__).resolve().parent.parent / "experiment_setup" / "configs"
SHORT = ["--override", "time.t_end=0.2", "--override", "grid.n=33"]


def test_validate_config_prints_digest(capsys):
    assert main(["validate-config", "--config", str(CONFIGS / "attraction_repulsion.yaml")]) == 0
    payload = json.loads(capsys.readouterr().out)
    assert len(payload["digest"]) == 64
    assert payload["hypotheses"]["h1_holds"] is True
    assert payload["hypotheses"]["h2_holds"] is True


def test_bad_config_exits_with_config_code(tmp_path, capsys):
    assert main(["validate-config", "--config", str(tmp_path / "missing.yaml")]) == 2
    assert "[ERROR]" in capsys.readouterr().out
    bad = tmp_path / "bad.yaml"
    bad.write_text(yaml.safe_dump({"geometry": {"kind": "single", "h0": -1.0}, "time": {"t_end": 1.0}}))
    assert main(["run", "--config", str(bad)]) == 2


def test_h1_violation_needs_flag(tmp_path):
    config = str(CONFIGS / "single_spreading.yaml")
    args = ["run", "--config", config, *SHORT, "--override", "model.chi1=2.0"]
    assert main(["--out", str(tmp_path), "--quiet", *args]) == 2
    assert main(["--out", str(tmp_path), "--quiet", "--allow-h1-violation", *args]) == 0


def test_run_writes_artifacts(tmp_path, capsys):
    config = str(CONFIGS / "single_vanishing.yaml")
    assert main(["--out", str(tmp_path), "--quiet", "run", "--config", config, *SHORT]) == 0
    assert "[OK] Undetermined" in capsys.readouterr().out
    (run_dir,) = (tmp_path / "single-vanishing").iterdir()
    assert (run_dir / "series.csv").exists()
    assert (run_dir / "snapshot_t0.csv").exists()
    manifest = json.loads((run_dir / "manifest.json").read_text())
    assert manifest["digest"].startswith(run_dir.name)
    assert manifest["outcome"]["verdict"] == "Undetermined"
    assert manifest["kind"] == "single"


def test_sweep_command(tmp_path, capsys):
    sweep = str(CONFIGS / "dichotomy_sweep.yaml")
    assert main(["--out", str(tmp_path), "--quiet", "--jobs", "2", "sweep", "--config", sweep, *SHORT]) == 0
    assert "7 cells" in capsys.readouterr().out
    assert (tmp_path / "phase_table.csv").exists()


@pytest.mark.slow
def test_spectrum_command(capsys):
    config = str(CONFIGS / "single_spreading.yaml")
    assert main(["--quiet", "spectrum", "--config", config, "--length", "2.0"]) == 0
    report = json.loads(capsys.readouterr().out)
    assert report["length"] == 2.0
    assert report["l_star"] == pytest.approx(1.5708, abs=1e-3)


def test_unknown_preset_rejected_by_parser():
    with pytest.raises(SystemExit):
        main(["experiment", "no-such-preset"])


def test_validate_config_checks_declared_bounds(tmp_path, capsys):
    data = yaml.safe_load((CONFIGS / "single_spreading.yaml").read_text())
    data["coefficients"] = {
        "kind": "time_only",
        "a": {"kind": "sin_periodic", "offset": 1.0, "amplitude": 0.5, "period": 1.0},
        "b": {"kind": "constant", "value": 1.0},
        "a_inf": 0.5,
        "a_sup": 1.2,
        "b_inf": 1.0,
        "b_sup": 1.0,
    }
    path = tmp_path / "loose.yaml"
    path.write_text(yaml.safe_dump(data))
    assert main(["validate-config", "--config", str(path)]) == 2
    assert "[ERROR]" in capsys.readouterr().out


def test_run_options_after_subcommand(tmp_path):
    config = str(CONFIGS / "single_vanishing.yaml")
    assert main(["--quiet", "run", "--config", config, *SHORT, "--out", str(tmp_path / "after")]) == 0
    assert list((tmp_path / "after" / "single-vanishing").iterdir())
    args = ["run", "--config", config, *SHORT, "--override", "model.chi1=2.0"]
    assert main(["--quiet", *args, "--out", str(tmp_path)]) == 2
    assert main(["--quiet", *args, "--out", str(tmp_path), "--allow-h1-violation"]) == 0


def test_run_options_before_subcommand_survive(tmp_path):
    args = build_parser().parse_args(["--out", str(tmp_path), "--jobs", "3", "sweep", "--config", "x.yaml"])
    assert args.out == tmp_path
    assert args.jobs == 3
    assert args.allow_h1_violation is False
    args = build_parser().parse_args(["sweep", "--config", "x.yaml", "--jobs", "2"])
    assert args.jobs == 2
    assert args.out is None
