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
    slope_at_left,
    slope_at_right,
    stable_dt,
    transport_reaction,
    uniform_grid,
)
from solver.profiles import sample_profile, validate_initial_profile
from solver.runtime import BoundMonitor, SampleClock, SnapshotPlan, prepare_context, window_inf_sup
from solver.series import Outcome, RunSeries, Verdict
from utils.helper import BoundViolationError, ConfigError, FrontCollapseError

if TYPE_CHECKING:
    from harness.config import RunConfig

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class DoubleFrontState:
    """Density on y in [0, 1] with x = g + y*(h - g); u vanishes at both ends."""

    t: float
    g: float
    h: float
    u: np.ndarray
    v1: Optional[np.ndarray] = None
    v2: Optional[np.ndarray] = None
    g_prime: float = 0.0
    h_prime: float = 0.0

    @property
    def grid_n(self) -> int:
        return self.u.size

    @property
    def dy(self) -> float:
        return 1.0 / (self.grid_n - 1)

    @property
    def width(self) -> float:
        return self.h - self.g

    @property
    def y(self) -> np.ndarray:
        return np.linspace(0.0, 1.0, self.grid_n)

    @property
    def x(self) -> np.ndarray:
        return self.g + self.width * self.y

    @property
    def sup_u(self) -> float:
        return float(self.u.max())


def front_velocities(s: DoubleFrontState, nu: float) -> tuple[float, float]:
    """(g', h') from mirrored one-sided stencils: g' = -nu*u_x(g), h' = -nu*u_x(h)."""
    g_prime = -nu * slope_at_left(s.u, s.dy) / s.width
    h_prime = -nu * slope_at_right(s.u, s.dy) / s.width
    return g_prime, h_prime


def make_double_state(g0: float, h0: float, profile, grid_n: int, p: Optional[ModelParams] = None) -> DoubleFrontState:
    if not g0 < h0:
        raise ConfigError(f"g0={g0} must be below h0={h0}")
    if grid_n < SOLVER_CONFIG["min_grid_n"]:
        raise ConfigError(f"grid_n={grid_n} is below the minimum of {SOLVER_CONFIG['min_grid_n']}")
    y, dy = uniform_grid(grid_n)
    u = sample_profile(profile, y, symmetric=True)
    ok, message = validate_initial_profile(u, dy, left="dirichlet", right="dirichlet")
    if not ok:
        raise ConfigError(message)
    u = np.maximum(u, 0.0)
    u[0] = u[-1] = 0.0
    state = DoubleFrontState(t=0.0, g=float(g0), h=float(h0), u=u)
    if p is not None:
        pair = solve_pair(u, p, state.width)
        state = replace(state, v1=pair.v1, v2=pair.v2)
    g_prime, h_prime = front_velocities(state, p.nu if p else 1.0)
    return replace(state, g_prime=min(g_prime, 0.0), h_prime=max(h_prime, 0.0))


def _potentials(s: DoubleFrontState, p: ModelParams) -> PotentialPair:
    if s.v1 is None or s.v2 is None:
        return solve_pair(s.u, p, s.width)
    return PotentialPair(v1=s.v1, v2=s.v2, grid_n=s.grid_n, h=s.width)


def _face_velocity(s: DoubleFrontState, g_prime: float, h_prime: float, pair: PotentialPair, p: ModelParams):
    y = s.y
    y_face = 0.5 * (y[:-1] + y[1:])
    mesh = ((1.0 - y_face) * g_prime + y_face * h_prime) / s.width
    drift = (p.chi1 * face_gradient(pair.v1, s.dy) - p.chi2 * face_gradient(pair.v2, s.dy)) / (s.width * s.width)
    return -mesh + drift


def _speeds(s: DoubleFrontState, nu: float) -> tuple[float, float]:
    g_prime, h_prime = front_velocities(s, nu)
    return -accept_front_speed(-g_prime, "-g'"), accept_front_speed(h_prime, "h'")


def choose_dt_double(s: DoubleFrontState, p: ModelParams, c: CoefficientField, dt_max: float) -> float:
    g_prime, h_prime = _speeds(s, p.nu)
    c_face = _face_velocity(s, g_prime, h_prime, _potentials(s, p), p)
    return min(dt_max, stable_dt(c_face, s.dy, c.a_sup, c.b_sup, s.sup_u, (h_prime - g_prime) / s.width))


def step_double(s: DoubleFrontState, dt: float, p: ModelParams, c: CoefficientField) -> DoubleFrontState:
    pair = _potentials(s, p)
    g_prime, h_prime = _speeds(s, p.nu)
    c_face = _face_velocity(s, g_prime, h_prime, pair, p)
    dilution = (h_prime - g_prime) / s.width
    check_dt(dt, stable_dt(c_face, s.dy, c.a_sup, c.b_sup, s.sup_u, dilution))

    x = s.x
    u_star = transport_reaction(
        s.u, dt, c_face, s.dy, c.a_at(s.t, x), c.b_at(s.t, x), dilution, "dirichlet", "dirichlet"
    )
    r = dt / (s.width * s.width * s.dy * s.dy)
    u_new = clamp_undershoot(implicit_diffusion(u_star, r, "dirichlet", "dirichlet"))
    g_new = s.g + dt * g_prime
    h_new = s.h + dt * h_prime
    if not g_new < h_new:
        raise FrontCollapseError(f"fronts crossed: g={g_new}, h={h_new}")
    new_pair = solve_pair(u_new, p, h_new - g_new)
    return DoubleFrontState(
        t=s.t + dt, g=g_new, h=h_new, u=u_new, v1=new_pair.v1, v2=new_pair.v2, g_prime=g_prime, h_prime=h_prime
    )


def _snapshot(s: DoubleFrontState) -> pd.DataFrame:
    return pd.DataFrame({"y": s.y, "x": s.x, "u": s.u, "v1": s.v1, "v2": s.v2})


def _sample(series: RunSeries, monitor: BoundMonitor, s: DoubleFrontState, ctx, probe: float):
    pair = PotentialPair(v1=s.v1, v2=s.v2, grid_n=s.grid_n, h=s.width)
    combo = check_combo_bound(pair, s.u, ctx.p, ctx.report.M)
    gradient = check_gradient_bound(pair, s.u, ctx.p)
    x = s.x
    mid = 0.5 * (s.g + s.h)
    inf_w, sup_w = window_inf_sup(x, s.u, mid - probe, mid + probe)
    if 0.5 * s.width <= probe:
        inf_w = 0.0
    row = {
        "t": s.t,
        "g": s.g,
        "h": s.h,
        "g_prime": s.g_prime,
        "h_prime": s.h_prime,
        "width": s.width,
        "sup_u": s.sup_u,
        "inf_u_window": inf_w,
        "sup_u_window": sup_w,
        "mass": float(trapezoid(s.u, x)),
        "combo_residual": combo["residual"],
        "gradient_residual": gradient["residual"],
    }
    series.append(**row)
    monitor.at_sample(s.sup_u, combo, gradient, dump={**row, "u": s.u.tolist()})


def run_double(config: "RunConfig", allow_h1_violation: bool = False) -> tuple[RunSeries, Outcome]:
    """Evolve the two-front system; the run stops once both -g and h reach h_max."""
    ctx = prepare_context(config, allow_h1_violation, critical="l_star_star")
    p, c = ctx.p, ctx.c
    time_cfg, thresholds = config.time, config.classification
    geometry = config.geometry
    state = make_double_state(geometry.g0, geometry.h0, config.initial, config.grid.n, p)
    probe = thresholds.l_probe or 1.0

    series = RunSeries(config_digest=ctx.digest)
    monitor = BoundMonitor(ctx, state.sup_u)
    clock = SampleClock(state.t, time_cfg.sample_dt, time_cfg.t_end)
    snapshots = SnapshotPlan(config.output.snapshot_times)
    logger.info(
        f"Double-front run {ctx.digest[:12]} start: [{state.g}, {state.h}], l**={ctx.critical_length:.6g}, h_max={ctx.h_max:.6g}"
    )

    _sample(series, monitor, state, ctx, probe)
    if snapshots.due(state.t):
        series.snapshots.append((state.t, _snapshot(state)))
    reached_end = False
    samples = 1
    while True:
        if state.t >= time_cfg.t_end - 1e-12:
            reached_end = True
            break
        dt = time_cfg.dt_fixed or choose_dt_double(state, p, c, time_cfg.dt_max)
        dt = min(dt, time_cfg.t_end - state.t)
        state = step_double(state, dt, p, c)
        monitor.after_step(state.t, state.sup_u, max(state.h_prime, -state.g_prime))
        if snapshots.due(state.t):
            series.snapshots.append((state.t, _snapshot(state)))
        capped = min(-state.g, state.h) >= ctx.h_max
        if clock.due(state.t) or capped:
            _sample(series, monitor, state, ctx, probe)
            samples += 1
            if capped:
                break
            if samples % time_cfg.check_every == 0:
                if classify(series, ctx.critical_length, thresholds, ctx.h_max).decided:
                    break

    monitor.finish(series, reached_end)
    outcome = classify(series, ctx.critical_length, thresholds, ctx.h_max)
    _check_verdict(ctx, outcome, state)
    logger.info(f"Double-front run {ctx.digest[:12]} done: verdict={outcome.verdict.value}, width={state.width:.6g}")
    series.outcome = outcome
    series.final_state = state
    series.manifest = {
        "kind": "double",
        "grid_n": state.grid_n,
        "max_h_prime": monitor.max_front_speed,
        "hypotheses": ctx.report.model_dump(),
        "h_max": ctx.h_max,
    }
    return series, outcome


def _check_verdict(ctx, outcome: Outcome, state: DoubleFrontState):
    if not (ctx.config.checks.verdict and ctx.report.h1_holds):
        return
    dump = {"t": state.t, "g": state.g, "h": state.h, "sup_u": state.sup_u}
    if outcome.verdict == Verdict.VANISHING and state.width > ctx.critical_length + SOLVER_CONFIG["h_inf_tol"]:
        raise BoundViolationError(
            f"vanishing run stalled at width {state.width:.6g} above l** = {ctx.critical_length:.6g}", dump
        )
    if outcome.verdict == Verdict.SPREADING and not (-state.g >= ctx.h_max and state.h >= ctx.h_max):
        raise BoundViolationError(f"spreading verdict with a front inside the cap {ctx.h_max:.6g}", dump)
