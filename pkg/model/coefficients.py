import logging
from pathlib import Path
from typing import Annotated, Literal, Optional, Union

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, PrivateAttr, model_validator
from scipy.interpolate import RegularGridInterpolator

from model.config import MODEL_CONFIG
from utils.helper import ConfigError

logger = logging.getLogger(__name__)


class ConstantSampler(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    kind: Literal["constant"] = "constant"
    value: float

    @property
    def space_dependent(self) -> bool:
        return False

    @property
    def time_dependent(self) -> bool:
        return False

    def __call__(self, t, x):
        return np.full(np.broadcast(np.asarray(t, dtype=float), np.asarray(x, dtype=float)).shape, self.value)


class SinPeriodicSampler(BaseModel):
    """offset + amplitude * sin(2*pi*t/period + phase), times cos(wavenumber*x) when wavenumber > 0."""

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    kind: Literal["sin_periodic"] = "sin_periodic"
    offset: float
    amplitude: float
    period: float = Field(gt=0)
    phase: float = 0.0
    wavenumber: float = Field(0.0, ge=0)

    @property
    def space_dependent(self) -> bool:
        return self.wavenumber > 0

    @property
    def time_dependent(self) -> bool:
        return self.amplitude != 0

    def __call__(self, t, x):
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        wave = np.sin(2.0 * np.pi * t / self.period + self.phase)
        if self.wavenumber > 0:
            wave = wave * np.cos(self.wavenumber * x)
        else:
            wave = np.broadcast_to(wave, np.broadcast(t, x).shape)
        return self.offset + self.amplitude * wave


class TabulatedSampler(BaseModel):
    """Bilinear interpolation of a (t, x, value) CSV table; t wraps modulo `period`, x is clamped."""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["tabulated"] = "tabulated"
    path: Path
    period: float = Field(gt=0)

    _ts: np.ndarray = PrivateAttr()
    _xs: np.ndarray = PrivateAttr()
    _interp: Optional[RegularGridInterpolator] = PrivateAttr(default=None)
    _values: np.ndarray = PrivateAttr()

    def model_post_init(self, __context):
        if not self.path.exists():
            raise ConfigError(f"Tabulated coefficient file not found: {self.path}")
        frame = pd.read_csv(self.path)
        missing = {"t", "x", "value"} - set(frame.columns)
        if missing:
            raise ConfigError(f"Tabulated coefficient file {self.path} lacks columns {sorted(missing)}")
        grid = frame.pivot_table(index="t", columns="x", values="value", aggfunc="first")
        if grid.isna().to_numpy().any():
            raise ConfigError(f"Tabulated coefficient file {self.path} is not a full (t, x) grid")
        self._ts = grid.index.to_numpy(dtype=float)
        self._xs = grid.columns.to_numpy(dtype=float)
        self._values = grid.to_numpy(dtype=float)
        if self._ts.size < 2:
            raise ConfigError(f"Tabulated coefficient file {self.path} needs at least two time rows")
        if self._xs.size > 1:
            self._interp = RegularGridInterpolator((self._ts, self._xs), self._values, method="linear")

    @property
    def space_dependent(self) -> bool:
        return self._xs.size > 1

    @property
    def time_dependent(self) -> bool:
        return True

    def __call__(self, t, x):
        t = np.asarray(t, dtype=float)
        x = np.asarray(x, dtype=float)
        t, x = np.broadcast_arrays(t, x)
        tw = np.clip(np.mod(t - self._ts[0], self.period) + self._ts[0], self._ts[0], self._ts[-1])
        if self._interp is None:
            return np.interp(tw, self._ts, self._values[:, 0])
        xc = np.clip(x, self._xs[0], self._xs[-1])
        pts = np.stack([tw.ravel(), xc.ravel()], axis=-1)
        return self._interp(pts).reshape(t.shape)


Sampler = Annotated[
    Union[ConstantSampler, SinPeriodicSampler, TabulatedSampler],
    Field(discriminator="kind"),
]


class CoefficientField(BaseModel):
    """Logistic coefficients a(t,x), b(t,x) with declared bounds."""

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    kind: Literal["constant", "time_only", "space_time"]
    a: Sampler
    b: Sampler
    period: float = Field(1.0, gt=0)
    a_inf: float
    a_sup: float
    b_inf: float
    b_sup: float
    window: tuple[float, float] = (0.0, MODEL_CONFIG["coeff_window_hi"])

    @model_validator(mode="before")
    @classmethod
    def _fill_constant_bounds(cls, data):
        if isinstance(data, dict) and data.get("kind") == "constant":
            a = data.get("a") or {}
            b = data.get("b") or {}
            a_val = a.get("value") if isinstance(a, dict) else getattr(a, "value", None)
            b_val = b.get("value") if isinstance(b, dict) else getattr(b, "value", None)
            data = dict(data)
            if a_val is not None:
                data.setdefault("a_inf", a_val)
                data.setdefault("a_sup", a_val)
            if b_val is not None:
                data.setdefault("b_inf", b_val)
                data.setdefault("b_sup", b_val)
        return data

    @model_validator(mode="after")
    def _check_h0(self):
        if self.a_inf <= 0 or self.b_inf <= 0:
            raise ValueError("(H0) requires a_inf > 0 and b_inf > 0")
        if self.a_inf > self.a_sup or self.b_inf > self.b_sup:
            raise ValueError("declared bounds must satisfy inf <= sup")
        if self.window[0] >= self.window[1]:
            raise ValueError("window must be an increasing pair")
        if self.kind == "constant" and not (isinstance(self.a, ConstantSampler) and isinstance(self.b, ConstantSampler)):
            raise ValueError("kind=constant needs constant samplers for a and b")
        if self.kind != "space_time" and (self.a.space_dependent or self.b.space_dependent):
            raise ValueError(f"kind={self.kind} cannot use space-dependent samplers")
        for name, sampler in (("a", self.a), ("b", self.b)):
            if sampler.kind != "constant" and sampler.time_dependent:
                ratio = self.period / sampler.period
                if abs(ratio - round(ratio)) > 1e-9 or round(ratio) < 1:
                    raise ValueError(f"period {self.period} is not a multiple of the period of {name}")
        return self

    @classmethod
    def constant(cls, a0: float, b0: float, **kwargs) -> "CoefficientField":
        return cls(kind="constant", a={"kind": "constant", "value": a0}, b={"kind": "constant", "value": b0}, **kwargs)

    @property
    def space_dependent(self) -> bool:
        return self.kind == "space_time"

    def a_at(self, t: float, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.a(t, x), dtype=float)

    def b_at(self, t: float, x: np.ndarray) -> np.ndarray:
        return np.asarray(self.b(t, x), dtype=float)


def verify_bounds(field: CoefficientField, n_samples: Optional[int] = None):
    """Spot-check the declared bounds on a uniform grid over one period x window."""
    n_samples = n_samples or MODEL_CONFIG["coeff_sample_points"]
    if field.kind == "constant":
        nt, nx = 1, 1
    elif field.kind == "time_only":
        nt, nx = n_samples, 1
    else:
        nt = nx = max(2, int(np.sqrt(n_samples)))
    ts = np.linspace(0.0, field.period, nt, endpoint=False)
    xs = np.linspace(field.window[0], field.window[1], nx)
    T, X = np.meshgrid(ts, xs, indexing="ij")
    for name, sampler, lo, hi in (
        ("a", field.a, field.a_inf, field.a_sup),
        ("b", field.b, field.b_inf, field.b_sup),
    ):
        values = np.asarray(sampler(T, X), dtype=float)
        if not np.all(np.isfinite(values)):
            raise ConfigError(f"Coefficient {name} produced non-finite samples")
        slack = MODEL_CONFIG["bound_rel_tol"] * max(1.0, abs(lo), abs(hi))
        observed_lo, observed_hi = float(values.min()), float(values.max())
        if observed_lo < lo - slack or observed_hi > hi + slack:
            raise ConfigError(
                f"Coefficient {name} escapes declared bounds [{lo}, {hi}]: sampled range [{observed_lo}, {observed_hi}]"
            )
        if observed_lo - lo > 0.01 * max(abs(lo), 1e-12) or hi - observed_hi > 0.01 * max(abs(hi), 1e-12):
            logger.warning(
                f"Declared bounds for {name} are loose: declared [{lo}, {hi}], sampled [{observed_lo}, {observed_hi}]"
            )
    return True


def mean_a(field: CoefficientField, x: Optional[np.ndarray] = None, samples: int = 2048) -> np.ndarray:
    """Time average of a over one period, per x (a scalar array when x is None)."""
    x = np.asarray(field.window[0] if x is None else x, dtype=float)
    if field.kind == "constant":
        return np.full(x.shape, field.a.value)
    # periodic trapezoid rule
    ts = np.linspace(0.0, field.period, samples, endpoint=False)
    values = field.a(ts[:, None], np.atleast_1d(x)[None, :])
    return np.mean(values, axis=0).reshape(x.shape)
