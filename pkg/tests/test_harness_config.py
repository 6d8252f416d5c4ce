from pathlib import Path

import pytest
import yaml

from harness.config import (
    RunConfig,
    cell_config,
    config_from_mapping,
    load_config,
    load_sweep,
    parse_override,
)
from utils.helper import ConfigError

CONFIGS = Path(__file__).resolve().parent.parent / "experiment_setup" / "configs"


def base_mapping(**sections):
    data = {
        "geometry": {"kind": "single", "h0": 1.0},
        "time": {"t_end": 1.0},
    }
    data.update(sections)
    return data


def write_yaml(path: Path, data: dict) -> Path:
    path.write_text(yaml.safe_dump(data), encoding="utf-8")
    return path


def test_defaults_fill_in():
    config = config_from_mapping(base_mapping())
    assert config.grid.n == 129
    assert config.coefficients.a_inf == 1.0
    assert config.classification.eps_v < config.classification.delta_s
    assert config.checks.verdict


def test_shipped_configs_load():
    for path in sorted(CONFIGS.glob("*.yaml")):
        if path.name.endswith("_sweep.yaml"):
            load_sweep(path)
        else:
            assert isinstance(load_config(path), RunConfig)


def test_load_config_with_overrides(tmp_path):
    path = write_yaml(tmp_path / "run.yaml", base_mapping())
    config = load_config(path, ["geometry.h0=2.5", "model.chi1=0.2", "coefficients.a.value=3"])
    assert config.geometry.h0 == 2.5
    assert config.model.chi1 == 0.2
    # constant coefficients refill their bounds from the new value
    assert config.coefficients.a_inf == 3.0
    assert config.coefficients.a_sup == 3.0


def test_unknown_override_path(tmp_path):
    path = write_yaml(tmp_path / "run.yaml", base_mapping())
    with pytest.raises(ConfigError):
        load_config(path, ["geometry.h00=2.5"])
    with pytest.raises(ConfigError):
        load_config(path, ["no-equals-sign"])


def test_parse_override_reads_yaml_scalars():
    assert parse_override("grid.n=65") == ("grid.n", 65)
    assert parse_override("checks.bounds=false") == ("checks.bounds", False)
    assert parse_override("output.snapshot_times=[0, 1.5]") == ("output.snapshot_times", [0, 1.5])


def test_invalid_files(tmp_path):
    with pytest.raises(ConfigError):
        load_config(tmp_path / "missing.yaml")
    bad = tmp_path / "bad.yaml"
    bad.write_text("- just\n- a list\n", encoding="utf-8")
    with pytest.raises(ConfigError):
        load_config(bad)
    with pytest.raises(ConfigError):
        load_config(write_yaml(tmp_path / "extra.yaml", base_mapping(colour="blue")))


def test_threshold_ordering_enforced():
    with pytest.raises(ConfigError):
        config_from_mapping(base_mapping(classification={"eps_v": 1e-2, "delta_s": 1e-3}))


def test_geometry_validation():
    with pytest.raises(ConfigError):
        config_from_mapping(base_mapping(geometry={"kind": "double", "g0": 1.0, "h0": -1.0}))
    with pytest.raises(ConfigError):
        config_from_mapping(base_mapping(geometry={"kind": "double", "g0": 3.0, "h0": 7.0}))
    with pytest.raises(ConfigError):
        config_from_mapping(base_mapping(geometry={"kind": "double", "g0": -1.0, "h0": -0.5}))
    with pytest.raises(ConfigError):
        config_from_mapping(base_mapping(geometry={"kind": "fixed", "bc": "mixed", "l_minus": -1.0, "l_plus": 2.0}))
    with pytest.raises(ConfigError):
        config_from_mapping(
            base_mapping(geometry={"kind": "fixed", "bc": "mixed", "l_plus": 2.0}, model={"chi1": 0.1})
        )


def test_digest_ignores_output():
    a = config_from_mapping(base_mapping(output={"label": "first"}))
    b = config_from_mapping(base_mapping(output={"label": "second", "snapshot_times": [1.0]}))
    c = config_from_mapping(base_mapping(), ["geometry.h0=1.5"])
    assert a.digest() == b.digest()
    assert a.digest() != c.digest()
    assert len(a.digest()) == 64


def test_sweep_with_relative_base(tmp_path):
    write_yaml(tmp_path / "base.yaml", base_mapping())
    path = write_yaml(tmp_path / "sweep.yaml", {"base": "base.yaml", "axes": [{"path": "geometry.h0", "values": [0.5, 1.0]}]})
    spec = load_sweep(path, ["time.t_end=2.0"])
    assert spec.base.time.t_end == 2.0
    assert spec.axes[0].values == [0.5, 1.0]
    assert spec.jobs == 1


def test_sweep_axis_typo_rejected(tmp_path):
    write_yaml(tmp_path / "base.yaml", base_mapping())
    path = write_yaml(tmp_path / "sweep.yaml", {"base": "base.yaml", "axes": [{"path": "geometry.h_0", "values": [0.5]}]})
    with pytest.raises(ConfigError):
        load_sweep(path)
    path = write_yaml(
        tmp_path / "dupe.yaml",
        {"base": "base.yaml", "axes": [{"path": "grid.n", "values": [33]}, {"path": "grid.n", "values": [65]}]},
    )
    with pytest.raises(ConfigError):
        load_sweep(path)


def test_cell_config_assigns_values():
    base = config_from_mapping(base_mapping())
    cell = cell_config(base, {"geometry.h0": 3.0, "grid.n": 65})
    assert cell.geometry.h0 == 3.0
    assert cell.grid.n == 65
    assert base.geometry.h0 == 1.0
