import logging
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Literal, Optional

import numpy as np

from model.coefficients import CoefficientField, verify_bounds
from model.params import HypothesisReport, ModelParams, check_hypotheses
from numerics.spectrum import find_l_star, find_l_star_star
from solver.config import SOLVER_CONFIG
from solver.series import RunSeries
from utils.helper import BoundViolationError, ConfigError, StabilityError

if TYPE_CHECKING:
    from harness.config import RunConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class RunContext:
    p: ModelParams
    c: CoefficientField
    report: HypothesisReport
    critical_length: float
    h_max: float
    config: Any
    digest: str


def prepare_context(
    config: "RunConfig",
    allow_h1_violation: bool = False,
    critical: Optional[Literal["l_star", "l_star_star"]] = "l_star",
) -> RunContext:
    p, c = config.model, config.coefficients
    verify_bounds(c)
    report = check_hypotheses(p, c)
    if not report.h1_holds:
        if not allow_h1_violation:
            raise ConfigError(
                f"(H1) fails with margin {report.margin_h1:.4g}; pass --allow-h1-violation to run anyway"
            )
        logger.warning(f"(H1) fails with margin {report.margin_h1:.4g}; blow-up guard at {SOLVER_CONFIG['blowup_cap']}")

    length = config.classification.critical_length
    if length is None and critical is not None:
        spec = config.spectrum
        finder = find_l_star if critical == "l_star" else find_l_star_star
        length = finder(c, spec.tol, n=spec.grid_n, horizon=spec.horizon)
    length = float(length) if length is not None else math.nan
    h_max = config.time.h_max
    if h_max is None:
        h_max = config.time.h_max_factor * length if np.isfinite(length) else math.inf
    return RunContext(p=p, c=c, report=report, critical_length=length, h_max=float(h_max), config=config, digest=config.digest())


class SampleClock:
    """Fires once per `every` time units, plus once at `t_end`."""

    def __init__(self, t0: float, every: float, t_end: float):
        self.t0 = t0
        self.every = every
        self.t_end = t_end
        self.next_t = t0 + every

    def due(self, t: float) -> bool:
        if t >= self.t_end - 1e-12:
            return True
        if t >= self.next_t - 1e-12:
            k = math.floor((t - self.t0) / self.every + 1e-9) + 1
            self.next_t = self.t0 + k * self.every
            return True
        return False


class SnapshotPlan:
    def __init__(self, times):
        self.pending = sorted(float(t) for t in times)

    def due(self, t: float) -> bool:
        hit = False
        while self.pending and t >= self.pending[0] - 1e-12:
            self.pending.pop(0)
            hit = True
        return hit


def window_inf_sup(x: np.ndarray, u: np.ndarray, lo: float, hi: float) -> tuple[float, float]:
    mask = (x >= lo - 1e-12) & (x <= hi + 1e-12)
    if not mask.any():
        return 0.0, 0.0
    return float(u[mask].min()), float(u[mask].max())


class BoundMonitor:
    """Runtime assertions of the uniform bound, the decay above M0, and the potential diagnostics."""

    def __init__(self, ctx: RunContext, sup_u0: float):
        self.ctx = ctx
        self.checks = ctx.config.checks
        self.tol = SOLVER_CONFIG["bound_tol"]
        M0 = ctx.report.M0
        self.M0 = M0
        self.ceiling = max(sup_u0, M0) + self.tol if M0 is not None else None
        self.guard = None if ctx.report.h1_holds else SOLVER_CONFIG["blowup_cap"]
        self.previous = sup_u0
        self.max_front_speed = 0.0

    def after_step(self, t: float, sup_u: float, front_speed: float = 0.0):
        self.max_front_speed = max(self.max_front_speed, front_speed)
        if self.guard is not None and sup_u > self.guard:
            raise StabilityError(f"blow-up guard: sup_u = {sup_u:.4g} > {self.guard} at t = {t:.4g}")

    def at_sample(self, sup_u: float, combo: dict, gradient: dict, dump: dict):
        if self.checks.bounds and self.ceiling is not None:
            if sup_u > self.ceiling:
                raise BoundViolationError(f"sup_u = {sup_u:.6g} exceeds max(|u0|, M0) bound {self.ceiling:.6g}", dump)
            if self.previous > self.M0 + self.tol and sup_u > self.previous + self.tol:
                raise BoundViolationError(
                    f"sup_u increased from {self.previous:.6g} to {sup_u:.6g} while above M0 = {self.M0:.6g}", dump
                )
        self.previous = sup_u
        if self.checks.diagnostics:
            for record in (combo, gradient):
                if not record["ok"]:
                    raise BoundViolationError(
                        f"{record['name']} residual {record['residual']:.3e} above tolerance {record['tolerance']:.3e}",
                        {**dump, "diagnostic": record},
                    )

    def finish(self, series: RunSeries, reached_end: bool):
        if not (self.checks.eventual_bound and reached_end and self.M0 is not None) or len(series) < 10:
            return
        sup = series.column("sup_u")
        tail = sup[-max(1, len(sup) // 10):]
        if tail.max() > self.M0 + self.tol:
            raise BoundViolationError(
                f"eventual bound: trailing sup_u {tail.max():.6g} exceeds M0 = {self.M0:.6g}",
                {"t_last": series.last("t"), "tail_max": float(tail.max())},
            )
