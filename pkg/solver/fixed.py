import logging
import math
from dataclasses import dataclass, replace
from typing import TYPE_CHECKING, Callable, Optional, Union

import numpy as np
import pandas as pd
from scipy.integrate import solve_ivp, trapezoid

from model.coefficients import CoefficientField, ConstantSampler, verify_bounds
from model.params import ModelParams
from numerics.elliptic import PotentialPair, check_combo_bound, check_gradient_bound, solve_pair
from numerics.spectrum import DirichletDirichlet, MixedNeumannDirichlet, richardson_eigenvalue
from numerics.tridiag import EndKind
from solver.config import SOLVER_CONFIG
from solver.helper import (
    check_dt,
    clamp_undershoot,
    face_gradient,
    implicit_diffusion,
    stable_dt,
    transport_reaction,
    uniform_grid,
)
from solver.profiles import sample_profile, validate_initial_profile
from solver.runtime import BoundMonitor, SampleClock, SnapshotPlan, prepare_context, window_inf_sup
from solver.series import Outcome, RunSeries, Verdict
from utils.helper import BoundViolationError, ConfigError, NonConvergenceError

if TYPE_CHECKING:
    from harness.config import RunConfig

logger = logging.getLogger(__name__)

_SCALAR = ModelParams(chi1=0.0, chi2=0.0)


@dataclass(frozen=True)
class HalfLineState:
    """Density on the fixed interval [x0, x0 + L] with its two potentials."""

    t: float
    L: float
    u: np.ndarray
    v1: Optional[np.ndarray] = None
    v2: Optional[np.ndarray] = None
    x0: float = 0.0

    @property
    def grid_n(self) -> int:
        return self.u.size

    @property
    def dx(self) -> float:
        return self.L / (self.grid_n - 1)

    @property
    def x(self) -> np.ndarray:
        return self.x0 + np.linspace(0.0, self.L, self.grid_n)

    @property
    def sup_u(self) -> float:
        return float(self.u.max())


def _beta_terms(beta, t: float, x: np.ndarray, dx: float):
    if beta is None:
        return np.zeros(x.size - 1), np.zeros(x.size), 0.0
    nodes = np.broadcast_to(np.asarray(beta(t, x), dtype=float), x.shape)
    faces = 0.5 * (nodes[:-1] + nodes[1:])
    beta_x = np.gradient(nodes, dx, edge_order=2)
    return faces, beta_x, float(np.abs(nodes).max())


def fixed_step(
    s: HalfLineState,
    dt: float,
    p: ModelParams,
    c: CoefficientField,
    left: EndKind,
    right: EndKind,
    beta=None,
) -> HalfLineState:
    """IMEX step on a fixed interval; beta*u_x enters as -d/dx(-beta*u) - beta_x*u."""
    x = s.x
    if s.v1 is None or s.v2 is None:
        pair = solve_pair(s.u, p, s.L)
    else:
        pair = PotentialPair(v1=s.v1, v2=s.v2, grid_n=s.grid_n, h=s.L)
    beta_face, beta_x, _ = _beta_terms(beta, s.t, x, s.dx)
    c_face = -beta_face + p.chi1 * face_gradient(pair.v1, s.dx) - p.chi2 * face_gradient(pair.v2, s.dx)
    check_dt(dt, stable_dt(c_face, s.dx, c.a_sup, c.b_sup, s.sup_u, float(np.abs(beta_x).max())))
    u_star = transport_reaction(s.u, dt, c_face, s.dx, c.a_at(s.t, x), c.b_at(s.t, x), beta_x, left, right)
    u_new = clamp_undershoot(implicit_diffusion(u_star, dt / (s.dx * s.dx), left, right))
    new_pair = solve_pair(u_new, p, s.L)
    return replace(s, t=s.t + dt, u=u_new, v1=new_pair.v1, v2=new_pair.v2)


def _fixed_dt(s: HalfLineState, p: ModelParams, c: CoefficientField, dt_max: float, beta=None) -> float:
    pair = solve_pair(s.u, p, s.L) if s.v1 is None else PotentialPair(v1=s.v1, v2=s.v2, grid_n=s.grid_n, h=s.L)
    beta_face, beta_x, _ = _beta_terms(beta, s.t, s.x, s.dx)
    c_face = -beta_face + p.chi1 * face_gradient(pair.v1, s.dx) - p.chi2 * face_gradient(pair.v2, s.dx)
    return min(dt_max, stable_dt(c_face, s.dx, c.a_sup, c.b_sup, s.sup_u, float(np.abs(beta_x).max())))


def _evolve(
    state: HalfLineState,
    time_cfg,
    p: ModelParams,
    c: CoefficientField,
    left: EndKind,
    right: EndKind,
    on_sample: Callable[[HalfLineState], None],
    beta=None,
    snapshots: Optional[SnapshotPlan] = None,
    series: Optional[RunSeries] = None,
    after_step: Optional[Callable[[HalfLineState], None]] = None,
) -> HalfLineState:
    clock = SampleClock(state.t, time_cfg.sample_dt, time_cfg.t_end)
    on_sample(state)
    while state.t < time_cfg.t_end - 1e-12:
        dt = time_cfg.dt_fixed or _fixed_dt(state, p, c, time_cfg.dt_max, beta)
        dt = min(dt, time_cfg.t_end - state.t)
        state = fixed_step(state, dt, p, c, left, right, beta)
        if after_step is not None:
            after_step(state)
        if snapshots is not None and series is not None and snapshots.due(state.t):
            series.snapshots.append((state.t, _snapshot(state)))
        if clock.due(state.t):
            on_sample(state)
    return state


def _snapshot(s: HalfLineState) -> pd.DataFrame:
    return pd.DataFrame({"x": s.x, "u": s.u, "v1": s.v1, "v2": s.v2})


def _initial(u0, n: int, left: EndKind, right: EndKind) -> np.ndarray:
    y, dy = uniform_grid(n)
    if isinstance(u0, (np.ndarray, list, tuple)):
        u = np.asarray(u0, dtype=float)
    else:
        u = sample_profile(u0, y, symmetric=left == "dirichlet")
    if u.size != n:
        raise ConfigError(f"initial vector has {u.size} nodes, expected {n}")
    ok, message = validate_initial_profile(u, dy, left=left, right=right)
    if not ok:
        raise ConfigError(message)
    u = np.maximum(u, 0.0)
    if left == "dirichlet":
        u[0] = 0.0
    if right == "dirichlet":
        u[-1] = 0.0
    return u


def persists(series: RunSeries, threshold: float = 1e-3, eps_v: float = 1e-6, window_fraction: float = 0.2) -> Optional[bool]:
    """True when the trailing window keeps sup_u above `threshold`, False when it stays below eps_v."""
    if len(series) == 0:
        return None
    t = series.column("t")
    mask = t >= t[-1] - window_fraction * (t[-1] - t[0]) - 1e-12
    sup_u = series.column("sup_u")[mask]
    if sup_u.min() > threshold:
        return True
    if sup_u.max() < eps_v:
        return False
    return None


def _fixed_outcome(series: RunSeries, l_star: float, length: float, thresholds) -> Outcome:
    flag = persists(series, thresholds.delta_s, thresholds.eps_v, thresholds.window_fraction)
    verdict = {True: Verdict.PERSISTS, False: Verdict.DECAYS, None: Verdict.UNDETERMINED}[flag]
    return Outcome(verdict=verdict, h_infinity_estimate=length, final_sup_u=series.last("sup_u"), l_star=l_star)


def run_halfline(config: "RunConfig", allow_h1_violation: bool = False) -> RunSeries:
    """Truncated half-line system with Neumann closure at x = L."""
    ctx = prepare_context(config, allow_h1_violation, critical="l_star")
    p, c = ctx.p, ctx.c
    L = float(config.geometry.L)
    if L < 20.0 * ctx.critical_length:
        raise ConfigError(f"truncation L={L} is below 20*l* = {20.0 * ctx.critical_length:.6g}")
    u0 = _initial(config.initial, config.grid.n, "neumann", "neumann")
    pair = solve_pair(u0, p, L)
    state = HalfLineState(t=0.0, L=L, u=u0, v1=pair.v1, v2=pair.v2)

    report = ctx.report
    check_persistence = bool(config.checks.persistence and report.h2_holds and u0.min() > 0)
    interior = state.x <= (1.0 - SOLVER_CONFIG["boundary_layer"]) * L
    lo = (report.m0 or 0.0) - SOLVER_CONFIG["persistence_tol"]
    hi = (report.M0 or math.inf) + 1.0 + SOLVER_CONFIG["persistence_tol"]
    probe = config.classification.l_probe or ctx.critical_length

    series = RunSeries(config_digest=ctx.digest)
    monitor = BoundMonitor(ctx, state.sup_u)
    logger.info(f"Half-line run {ctx.digest[:12]} start: L={L}, n={state.grid_n}, persistence check={check_persistence}")

    def on_sample(s: HalfLineState):
        pp = PotentialPair(v1=s.v1, v2=s.v2, grid_n=s.grid_n, h=s.L)
        combo = check_combo_bound(pp, s.u, p, report.M)
        gradient = check_gradient_bound(pp, s.u, p)
        inf_w, sup_w = window_inf_sup(s.x, s.u, 0.0, probe)
        row = {
            "t": s.t,
            "sup_u": s.sup_u,
            "inf_u_interior": float(s.u[interior].min()),
            "sup_u_interior": float(s.u[interior].max()),
            "inf_u_window": inf_w,
            "sup_u_window": sup_w,
            "u_origin": float(s.u[0]),
            "mass": float(trapezoid(s.u, s.x)),
            "combo_residual": combo["residual"],
            "gradient_residual": gradient["residual"],
        }
        series.append(**row)
        monitor.at_sample(s.sup_u, combo, gradient, dump=row)
        if check_persistence and s.t >= config.time.transient:
            if row["inf_u_interior"] < lo or row["sup_u_interior"] > hi:
                raise BoundViolationError(
                    f"interior density [{row['inf_u_interior']:.6g}, {row['sup_u_interior']:.6g}] left [{lo:.6g}, {hi:.6g}]",
                    row,
                )

    state = _evolve(
        state,
        config.time,
        p,
        c,
        "neumann",
        "neumann",
        on_sample,
        snapshots=SnapshotPlan(config.output.snapshot_times),
        series=series,
        after_step=lambda s: monitor.after_step(s.t, s.sup_u),
    )
    monitor.finish(series, reached_end=True)
    series.outcome = _fixed_outcome(series, ctx.critical_length, L, config.classification)
    series.final_state = state
    series.manifest = {"kind": "halfline", "grid_n": state.grid_n, "hypotheses": report.model_dump(), "L": L}
    logger.info(f"Half-line run {ctx.digest[:12]} done: verdict={series.outcome.verdict.value}")
    return series


def truncation_drift(config: "RunConfig", allow_h1_violation: bool = False) -> float:
    """Interior sup-difference between the half-line run on [0, L] and on [0, 2L] at equal spacing."""
    base = run_halfline(config, allow_h1_violation)
    doubled_config = config.model_copy(
        update={
            "geometry": config.geometry.model_copy(update={"L": 2.0 * config.geometry.L}),
            "grid": config.grid.model_copy(update={"n": 2 * config.grid.n - 1}),
        }
    )
    doubled = run_halfline(doubled_config, allow_h1_violation)
    u1 = base.final_state.u
    # same spacing on [0, 2L], so node j sits at the same x in both runs
    u2 = doubled.final_state.u[: u1.size]
    interior = base.final_state.x <= (1.0 - SOLVER_CONFIG["boundary_layer"]) * config.geometry.L
    return float(np.abs(u1[interior] - u2[interior]).max())


def _scalar_run(
    beta,
    c: CoefficientField,
    bc,
    u0,
    config: "RunConfig",
    left: EndKind,
    right: EndKind,
    a_ref: float,
) -> RunSeries:
    verify_bounds(c)
    n = len(u0) if isinstance(u0, (np.ndarray, list, tuple)) else config.grid.n
    u = _initial(u0, n, left, right)
    state = HalfLineState(t=0.0, L=bc.length, u=u, v1=np.zeros(n), v2=np.zeros(n), x0=bc.left)
    series = RunSeries(config_digest=config.digest())

    def on_sample(s: HalfLineState):
        series.append(t=s.t, sup_u=s.sup_u, u_origin=float(s.u[0]), mass=float(trapezoid(s.u, s.x)))

    state = _evolve(state, config.time, _SCALAR, c, left, right, on_sample, beta=beta)
    lam = richardson_eigenvalue(a_ref, bc)
    series.outcome = _fixed_outcome(series, math.nan, bc.length, config.classification)
    series.final_state = state
    series.manifest = {"kind": f"fixed_{bc.kind}", "grid_n": n, "principal_eigenvalue": lam}

    beta_sup = max(_beta_terms(beta, t, state.x, state.dx)[2] for t in np.linspace(0.0, state.t, 64))
    if config.checks.verdict and u.max() > 0 and lam > 0 and beta_sup <= SOLVER_CONFIG["beta_small"]:
        if series.outcome.verdict == Verdict.DECAYS:
            raise BoundViolationError(
                f"density decayed although the principal eigenvalue {lam:.6g} is positive",
                {"t": state.t, "sup_u": state.sup_u},
            )
    logger.info(f"Fixed {bc.kind} run on length {bc.length:.6g}: verdict={series.outcome.verdict.value}, lambda={lam:.6g}")
    return series


def run_fixed_mixed(beta, c: CoefficientField, l: float, u0, config: "RunConfig") -> RunSeries:
    """u_t = u_xx + beta*u_x + u(a - b*u) with u_x(0) = u(l) = 0."""
    return _scalar_run(beta, c, MixedNeumannDirichlet(l=l), u0, config, "neumann", "dirichlet", c.a_inf)


def run_fixed_dirichlet(beta, a0: float, b0: float, l1: float, l2: float, u0, config: "RunConfig") -> RunSeries:
    """u_t = u_xx + beta*u_x + u(a0 - b0*u) with u(l1) = u(l2) = 0."""
    bc = DirichletDirichlet(l_minus=l1, l_plus=l2)
    return _scalar_run(beta, CoefficientField.constant(a0, b0), bc, u0, config, "dirichlet", "dirichlet", a0)


class PeriodicOrbit:
    """Positive periodic solution of u' = u(a(t) - b(t)u), callable on any t."""

    def __init__(self, period: float, a: Callable, b: Callable, solution=None, value: Optional[float] = None):
        self.period = period
        self._a = a
        self._b = b
        self._solution = solution
        self._value = value

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        if self._solution is None:
            return np.full(t.shape, self._value)
        return self._solution(np.mod(t, self.period)).reshape(t.shape)

    @property
    def start(self) -> float:
        return float(self(0.0))

    def _raw(self, t):
        if self._solution is None:
            return np.full(np.shape(t), self._value)
        return self._solution(t).reshape(np.shape(t))

    def residual(self, ts) -> np.ndarray:
        """|u' - u(a - b u)| with a fourth-order centered derivative of the integrated orbit."""
        tm = np.mod(np.asarray(ts, dtype=float), self.period)
        d = 1e-3 * self.period
        deriv = (-self._raw(tm + 2 * d) + 8 * self._raw(tm + d) - 8 * self._raw(tm - d) + self._raw(tm - 2 * d)) / (12 * d)
        u = self._raw(tm)
        return np.abs(deriv - u * (self._a(tm) - self._b(tm) * u))


def _as_time_function(sampler: Union[float, Callable]) -> Callable:
    if isinstance(sampler, (int, float)):
        value = float(sampler)
        return lambda t: np.full(np.shape(t), value)
    if hasattr(sampler, "kind"):
        return lambda t: np.asarray(sampler(t, 0.0), dtype=float)
    return lambda t: np.asarray(sampler(t), dtype=float)


def _is_constant(sampler) -> bool:
    return isinstance(sampler, (int, float, ConstantSampler)) or (
        hasattr(sampler, "time_dependent") and not sampler.time_dependent
    )


def logistic_entire_solution(a_t, b_t, period: float) -> PeriodicOrbit:
    """Fixed point of the period map of u' = u(a(t) - b(t)u), by damped iteration from a_inf/b_sup."""
    if not period > 0:
        raise ConfigError(f"period must be positive, got {period}")
    a = _as_time_function(a_t)
    b = _as_time_function(b_t)
    ts = np.linspace(0.0, period, 1024, endpoint=False)
    a_samples, b_samples = a(ts), b(ts)
    if a_samples.min() <= 0 or b_samples.min() <= 0:
        raise ConfigError("logistic coefficients must be positive")
    if _is_constant(a_t) and _is_constant(b_t):
        return PeriodicOrbit(period, a, b, value=float(a_samples[0] / b_samples[0]))

    def rhs(t, u):
        return u * (a(t) - b(t) * u)

    def period_map(u0: float) -> float:
        sol = solve_ivp(rhs, (0.0, period), [u0], method="DOP853", rtol=1e-12, atol=1e-14)
        if not sol.success:
            raise NonConvergenceError(f"period-map integration failed: {sol.message}")
        return float(sol.y[0, -1])

    theta = SOLVER_CONFIG["ode_damping"]
    u = float(a_samples.min() / b_samples.max())
    for k in range(SOLVER_CONFIG["ode_max_iter"]):
        nxt = (1.0 - theta) * u + theta * period_map(u)
        if abs(nxt - u) < SOLVER_CONFIG["ode_tol"]:
            u = nxt
            break
        u = nxt
    else:
        raise NonConvergenceError(f"period map did not converge in {SOLVER_CONFIG['ode_max_iter']} iterations")
    logger.info(f"Logistic periodic orbit: u(0) = {u:.12g} after {k + 1} iterations")

    # one period on each side so the orbit and its stencils never straddle a seam
    sol = solve_ivp(rhs, (-period, 2.0 * period), [u], method="DOP853", rtol=1e-12, atol=1e-14, dense_output=True)
    if not sol.success:
        raise NonConvergenceError(f"orbit integration failed: {sol.message}")
    return PeriodicOrbit(period, a, b, solution=sol.sol)
