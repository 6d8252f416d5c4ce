import logging
import os
from pathlib import Path
from typing import Annotated, Any, Literal, Optional, Union

import yaml
from dotenv import load_dotenv
from pydantic import BaseModel, ConfigDict, Field, ValidationError, field_validator, model_validator

from model.coefficients import CoefficientField, ConstantSampler, Sampler
from model.params import ModelParams
from solver.profiles import CosineProfile, Profile
from utils.helper import ConfigError, digest

load_dotenv()

logger = logging.getLogger(__name__)

HARNESS_CONFIG = {
    "output_dir": os.getenv("LAB_OUTPUT_DIR", "results"),
    "jobs": int(os.getenv("LAB_JOBS", "1")),
    "log_level": os.getenv("LAB_LOG_LEVEL", "INFO"),
}


class _Section(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)


class SingleGeometry(_Section):
    kind: Literal["single"] = "single"
    h0: float = Field(gt=0)


class DoubleGeometry(_Section):
    kind: Literal["double"] = "double"
    g0: float
    h0: float

    @model_validator(mode="after")
    def _check_order(self):
        if not self.g0 < 0.0 < self.h0:
            raise ValueError(f"fronts must straddle the origin: g0={self.g0} < 0 < h0={self.h0}")
        return self


class HalflineGeometry(_Section):
    kind: Literal["halfline"] = "halfline"
    L: float = Field(gt=0)


class FixedGeometry(_Section):
    """Scalar Fisher-KPP problem with drift beta on [l_minus, l_plus]."""

    kind: Literal["fixed"] = "fixed"
    bc: Literal["mixed", "dirichlet"]
    l_minus: float = 0.0
    l_plus: float
    beta: Sampler = ConstantSampler(value=0.0)

    @model_validator(mode="after")
    def _check_interval(self):
        if not self.l_minus < self.l_plus:
            raise ValueError(f"l_minus={self.l_minus} must be below l_plus={self.l_plus}")
        if self.bc == "mixed" and self.l_minus != 0.0:
            raise ValueError("mixed boundary conditions live on [0, l_plus]")
        return self


Geometry = Annotated[
    Union[SingleGeometry, DoubleGeometry, HalflineGeometry, FixedGeometry],
    Field(discriminator="kind"),
]


class GridSettings(_Section):
    n: int = Field(129, ge=5)


class TimeSettings(_Section):
    t_end: float = Field(gt=0)
    dt_max: float = Field(0.01, gt=0)
    dt_fixed: Optional[float] = Field(None, gt=0)
    h_max: Optional[float] = Field(None, gt=0)
    h_max_factor: float = Field(50.0, gt=0)
    sample_dt: float = Field(0.05, gt=0)
    check_every: int = Field(20, ge=1)
    transient: float = Field(0.0, ge=0)


class ClassificationThresholds(_Section):
    eps_v: float = Field(1e-6, gt=0)
    eps_h: float = Field(1e-8, gt=0)
    delta_s: float = Field(1e-3, gt=0)
    window_fraction: float = Field(0.2, gt=0, le=1)
    l_probe: Optional[float] = Field(None, gt=0)
    critical_length: Optional[float] = Field(None, gt=0)

    @model_validator(mode="after")
    def _exclusive_verdicts(self):
        if not self.eps_v < self.delta_s:
            raise ValueError(f"eps_v={self.eps_v} must be below delta_s={self.delta_s}")
        return self


class CheckSettings(_Section):
    bounds: bool = True
    diagnostics: bool = True
    eventual_bound: bool = False
    persistence: bool = False
    verdict: bool = True


class SpectrumSettings(_Section):
    grid_n: Optional[int] = Field(None, ge=8)
    horizon: Optional[float] = Field(None, gt=0)
    windows: Optional[int] = Field(None, ge=1)
    tol: float = Field(1e-4, gt=0)


class OutputSettings(_Section):
    directory: Optional[Path] = None
    label: str = "run"
    snapshot_times: list[float] = Field(default_factory=list)


class RunConfig(_Section):
    model: ModelParams = ModelParams()
    coefficients: CoefficientField = CoefficientField.constant(1.0, 1.0)
    geometry: Geometry
    initial: Profile = CosineProfile(amp=0.5)
    grid: GridSettings = GridSettings()
    time: TimeSettings
    classification: ClassificationThresholds = ClassificationThresholds()
    checks: CheckSettings = CheckSettings()
    spectrum: SpectrumSettings = SpectrumSettings()
    output: OutputSettings = OutputSettings()

    @model_validator(mode="after")
    def _check_geometry(self):
        if self.geometry.kind == "fixed" and not self.model.chemotaxis_free:
            raise ValueError("fixed-domain runs are scalar: set chi1 = chi2 = 0")
        if self.geometry.kind == "fixed" and self.geometry.bc == "dirichlet" and self.coefficients.kind != "constant":
            raise ValueError("Dirichlet fixed-domain runs take constant coefficients a0, b0")
        return self

    def digest(self) -> str:
        """SHA-256 of the canonical config; output paths do not change it."""
        return digest(self.model_dump(mode="json", exclude={"output"}))


class SweepAxis(_Section):
    path: str
    values: list[Any] = Field(min_length=1)


class SweepSpec(_Section):
    base: RunConfig
    axes: list[SweepAxis] = Field(min_length=1)
    jobs: int = Field(1, ge=1)

    @field_validator("axes")
    @classmethod
    def _distinct_paths(cls, axes):
        paths = [axis.path for axis in axes]
        if len(set(paths)) != len(paths):
            raise ValueError(f"duplicate sweep axes: {paths}")
        return axes

    @model_validator(mode="after")
    def _paths_exist(self):
        mapping = self.base.model_dump()
        for axis in self.axes:
            _lookup(mapping, axis.path)
        return self


def _lookup(mapping: dict, path: str):
    node = mapping
    for key in path.split("."):
        if not isinstance(node, dict) or key not in node:
            raise ConfigError(f"Unknown config path: {path}")
        node = node[key]
    return node


def set_path(mapping: dict, path: str, value):
    """Assign `value` at a dotted path that already exists in `mapping`."""
    _lookup(mapping, path)
    keys = path.split(".")
    node = mapping
    for key in keys[:-1]:
        node = node[key]
    node[keys[-1]] = value


def parse_override(text: str) -> tuple[str, Any]:
    if "=" not in text:
        raise ConfigError(f"Override must look like key=value, got {text!r}")
    key, raw = text.split("=", 1)
    key = key.strip()
    if not key:
        raise ConfigError(f"Override has an empty key: {text!r}")
    try:
        value = yaml.safe_load(raw) if raw.strip() else None
    except yaml.YAMLError as e:
        raise ConfigError(f"Override value for {key} is not a YAML scalar: {e}")
    return key, value


def _validate(model_cls, data, source: str):
    try:
        return model_cls.model_validate(data)
    except ValidationError as e:
        raise ConfigError(f"Invalid config {source}: {e}")
    except ValueError as e:
        raise ConfigError(f"Invalid config {source}: {e}")


def _read_yaml(path: Path) -> dict:
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"Config file not found: {path}")
    try:
        with path.open("r", encoding="utf-8") as fh:
            data = yaml.safe_load(fh) or {}
    except yaml.YAMLError as e:
        raise ConfigError(f"Config file {path} is not valid YAML: {e}")
    if not isinstance(data, dict):
        raise ConfigError(f"Config file {path} must hold a mapping")
    return data


def _refresh_constant_bounds(mapping: dict) -> dict:
    # constant coefficients carry their bounds; let the model refill them from the values
    coefficients = mapping.get("coefficients")
    if isinstance(coefficients, dict) and coefficients.get("kind") == "constant":
        for key in ("a_inf", "a_sup", "b_inf", "b_sup"):
            coefficients.pop(key, None)
    return mapping


def apply_overrides(config: RunConfig, overrides: Optional[list[str]] = None) -> RunConfig:
    if not overrides:
        return config
    mapping = config.model_dump()
    for text in overrides:
        key, value = parse_override(text)
        set_path(mapping, key, value)
        logger.info(f"Override {key} = {value!r}")
    _refresh_constant_bounds(mapping)
    return _validate(RunConfig, mapping, "after overrides")


def config_from_mapping(data: dict, overrides: Optional[list[str]] = None, source: str = "<mapping>") -> RunConfig:
    return apply_overrides(_validate(RunConfig, data, source), overrides)


def load_config(path, overrides: Optional[list[str]] = None) -> RunConfig:
    """YAML file -> validated RunConfig, then dotted `key=value` overrides."""
    return config_from_mapping(_read_yaml(path), overrides, source=str(path))


def load_sweep(path, overrides: Optional[list[str]] = None) -> SweepSpec:
    """Sweep file with `base` (mapping or path relative to the sweep file), `axes` and `jobs`."""
    path = Path(path)
    data = _read_yaml(path)
    base = data.get("base")
    if isinstance(base, str):
        data = {**data, "base": _read_yaml(path.parent / base)}
    spec = _validate(SweepSpec, data, str(path))
    if overrides:
        spec = spec.model_copy(update={"base": apply_overrides(spec.base, overrides)})
    return spec


def cell_config(base: RunConfig, assignments: dict[str, Any]) -> RunConfig:
    mapping = base.model_dump()
    for key, value in assignments.items():
        set_path(mapping, key, value)
    _refresh_constant_bounds(mapping)
    return _validate(RunConfig, mapping, f"sweep cell {assignments}")
