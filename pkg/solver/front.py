import logging
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Optional

import numpy as np
import pandas as pd
from scipy.integrate import trapezoid

from harness.classify import classify
from model.coefficients import CoefficientField
from model.params import ModelParams
from numerics.elliptic import PotentialPair, check_combo_bound, check_gradient_bound, solve_pair
from solver.config import SOLVER_CONFIG
from solver.helper import (
    accept_front_speed,
    check_dt,
    clamp_undershoot,
    face_gradient,
    implicit_diffusion,
    slope_at_right,
    stable_dt,
    transport_reaction,
    uniform_grid,
)
from solver.profiles import sample_profile, validate_initial_profile
from solver.runtime import BoundMonitor, SampleClock, SnapshotPlan, prepare_context, window_inf_sup
from solver.series import RunSeries, Verdict
from utils.helper import BoundViolationError, ConfigError

if TYPE_CHECKING:
    from harness.config import RunConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class FrontState:
    """Density on the straightened grid y = x/h in [0, 1]; u[-1] = 0 at the front."""

    t: float
    h: float
    u: np.ndarray
    v1: Optional[np.ndarray] = None
    v2: Optional[np.ndarray] = None
    h_prime: float = 0.0

    @property
    def grid_n(self) -> int:
        return self.u.size

    @property
    def dy(self) -> float:
        return 1.0 / (self.grid_n - 1)

    @property
    def y(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.grid_n)

    @property
    def x(self) -> np.ndarray:
        return self.h * self.y

    @property
    def sup_u(self) -> float:
        return float(self.u.max())


def make_initial_state(h0: float, profile, grid_n: int, p: Optional[ModelParams] = None, t0: float = 0.0) -> FrontState:
    if not h0 > 0:
        raise ConfigError(f"h0 must be positive, got {h0}")
    if grid_n < SOLVER_CONFIG["min_grid_n"]:
        raise ConfigError(f"grid_n={grid_n} is below the minimum of {SOLVER_CONFIG['min_grid_n']}")
    y, dy = uniform_grid(grid_n)
    u = sample_profile(profile, y)
    ok, message = validate_initial_profile(u, dy, left="neumann", right="dirichlet")
    if not ok:
        raise ConfigError(message)
    u = np.maximum(u, 0.0)
    u[-1] = 0.0
    state = FrontState(t=t0, h=float(h0), u=u)
    if p is not None:
        pair = solve_pair(u, p, h0)
        state = replace(state, v1=pair.v1, v2=pair.v2)
    return replace(state, h_prime=max(stefan_velocity(state, p.nu if p else 1.0), 0.0))


def stefan_velocity(s: FrontState, nu: float) -> float:
    """h' = -nu * u_x(h) with the second-order one-sided stencil in physical units."""
    return -nu * slope_at_right(s.u, s.dy) / s.h


def _potentials(s: FrontState, p: ModelParams) -> PotentialPair:
    if s.v1 is None or s.v2 is None:
        return solve_pair(s.u, p, s.h)
    return PotentialPair(v1=s.v1, v2=s.v2, grid_n=s.grid_n, h=s.h)


def _face_velocity(s: FrontState, h_prime: float, pair: PotentialPair, p: ModelParams) -> np.ndarray:
    y = s.y
    y_face = 0.5 * (y[:-1] + y[1:])
    drift = (p.chi1 * face_gradient(pair.v1, s.dy) - p.chi2 * face_gradient(pair.v2, s.dy)) / (s.h * s.h)
    return -y_face * h_prime / s.h + drift


def choose_dt(s: FrontState, p: ModelParams, c: CoefficientField, dt_max: float) -> float:
    pair = _potentials(s, p)
    h_prime = max(stefan_velocity(s, p.nu), 0.0)
    c_face = _face_velocity(s, h_prime, pair, p)
    return min(dt_max, stable_dt(c_face, s.dy, c.a_sup, c.b_sup, s.sup_u, h_prime / s.h))


def step(s: FrontState, dt: float, p: ModelParams, c: CoefficientField) -> FrontState:
    """One IMEX step: potentials, Stefan speed, transport and reaction, implicit diffusion, front update."""
    pair = _potentials(s, p)
    h_prime = accept_front_speed(stefan_velocity(s, p.nu))
    c_face = _face_velocity(s, h_prime, pair, p)
    dilution = h_prime / s.h
    check_dt(dt, stable_dt(c_face, s.dy, c.a_sup, c.b_sup, s.sup_u, dilution))

    x = s.x
    u_star = transport_reaction(
        s.u, dt, c_face, s.dy, c.a_at(s.t, x), c.b_at(s.t, x), dilution, "neumann", "dirichlet"
    )
    r = dt / (s.h * s.h * s.dy * s.dy)
    u_new = clamp_undershoot(implicit_diffusion(u_star, r, "neumann", "dirichlet"))
    h_new = s.h + dt * h_prime
    new_pair = solve_pair(u_new, p, h_new)
    return FrontState(t=s.t + dt, h=h_new, u=u_new, v1=new_pair.v1, v2=new_pair.v2, h_prime=h_prime)


def _snapshot(s: FrontState) -> pd.DataFrame:
    return pd.DataFrame({"y": s.y, "x": s.x, "u": s.u, "v1": s.v1, "v2": s.v2})


def _sample(series: RunSeries, monitor: BoundMonitor, s: FrontState, ctx, probe: float):
    pair = PotentialPair(v1=s.v1, v2=s.v2, grid_n=s.grid_n, h=s.h)
    combo = check_combo_bound(pair, s.u, ctx.p, ctx.report.M)
    gradient = check_gradient_bound(pair, s.u, ctx.p)
    x = s.x
    inf_w, sup_w = window_inf_sup(x, s.u, 0.0, probe)
    if s.h <= probe:
        inf_w = 0.0
    row = {
        "t": s.t,
        "h": s.h,
        "h_prime": s.h_prime,
        "sup_u": s.sup_u,
        "inf_u_window": inf_w,
        "sup_u_window": sup_w,
        "u_origin": float(s.u[0]),
        "mass": float(trapezoid(s.u, x)),
        "combo_residual": combo["residual"],
        "gradient_residual": gradient["residual"],
    }
    series.append(**row)
    monitor.at_sample(s.sup_u, combo, gradient, dump={**row, "u": s.u.tolist()})


def run(config: "RunConfig", allow_h1_violation: bool = False) -> tuple[RunSeries, FrontState]:
    """Evolve the single-front system until t_end, the h_max cap, or a decided verdict."""
    ctx = prepare_context(config, allow_h1_violation, critical="l_star")
    p, c = ctx.p, ctx.c
    time_cfg, thresholds = config.time, config.classification
    state = make_initial_state(config.geometry.h0, config.initial, config.grid.n, p)
    probe = thresholds.l_probe or ctx.critical_length

    series = RunSeries(config_digest=ctx.digest)
    monitor = BoundMonitor(ctx, state.sup_u)
    clock = SampleClock(state.t, time_cfg.sample_dt, time_cfg.t_end)
    snapshots = SnapshotPlan(config.output.snapshot_times)
    logger.info(
        f"Front run {ctx.digest[:12]} start: h0={state.h}, n={state.grid_n}, l*={ctx.critical_length:.6g}, h_max={ctx.h_max:.6g}"
    )

    _sample(series, monitor, state, ctx, probe)
    if snapshots.due(state.t):
        series.snapshots.append((state.t, _snapshot(state)))
    outcome = None
    reached_end = False
    samples = 1
    while True:
        if state.t >= time_cfg.t_end - 1e-12:
            reached_end = True
            break
        dt = time_cfg.dt_fixed or choose_dt(state, p, c, time_cfg.dt_max)
        dt = min(dt, time_cfg.t_end - state.t)
        state = step(state, dt, p, c)
        monitor.after_step(state.t, state.sup_u, state.h_prime)
        if snapshots.due(state.t):
            series.snapshots.append((state.t, _snapshot(state)))
        capped = state.h >= ctx.h_max
        if clock.due(state.t) or capped:
            _sample(series, monitor, state, ctx, probe)
            samples += 1
            if capped:
                logger.info(f"Front reached h_max={ctx.h_max:.6g} at t={state.t:.6g}")
                break
            if samples % time_cfg.check_every == 0:
                outcome = classify(series, ctx.critical_length, thresholds, ctx.h_max)
                if outcome.decided:
                    break

    monitor.finish(series, reached_end)
    outcome = classify(series, ctx.critical_length, thresholds, ctx.h_max)
    _check_verdict(ctx, outcome, state)
    logger.info(f"Front run {ctx.digest[:12]} done: verdict={outcome.verdict.value}, t={state.t:.6g}, h={state.h:.6g}")
    series.outcome = outcome
    series.final_state = state
    series.manifest = {
        "kind": "single",
        "grid_n": state.grid_n,
        "max_h_prime": monitor.max_front_speed,
        "hypotheses": ctx.report.model_dump(),
        "h_max": ctx.h_max,
    }
    return series, state


def _check_verdict(ctx, outcome, state: FrontState):
    if not (ctx.config.checks.verdict and ctx.report.h1_holds):
        return
    if outcome.verdict == Verdict.VANISHING and state.h > ctx.critical_length + SOLVER_CONFIG["h_inf_tol"]:
        raise BoundViolationError(
            f"vanishing run stalled at h = {state.h:.6g} above l* = {ctx.critical_length:.6g}",
            {"t": state.t, "h": state.h, "sup_u": state.sup_u},
        )
