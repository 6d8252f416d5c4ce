import logging
import math
from typing import Annotated, Callable, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator
from scipy.linalg import LinAlgError, eigh_tridiagonal
from scipy.optimize import brentq

from model.coefficients import CoefficientField
from numerics.config import NUMERICS_CONFIG
from numerics.tridiag import symmetric_laplacian, symmetrizer
from utils.helper import BracketError, ConfigError, NonConvergenceError, OverflowGuardError

logger = logging.getLogger(__name__)


class MixedNeumannDirichlet(BaseModel):
    """u_x(0) = 0, u(l) = 0 on [0, l]."""

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    kind: Literal["mixed"] = "mixed"
    l: float = Field(gt=0)

    @property
    def left(self) -> float:
        return 0.0

    @property
    def length(self) -> float:
        return self.l


class DirichletDirichlet(BaseModel):
    """u(l_minus) = u(l_plus) = 0."""

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    kind: Literal["dirichlet"] = "dirichlet"
    l_minus: float
    l_plus: float

    @model_validator(mode="after")
    def _check_order(self):
        if not self.l_minus < self.l_plus:
            raise ValueError(f"l_minus={self.l_minus} must be below l_plus={self.l_plus}")
        return self

    @property
    def left(self) -> float:
        return self.l_minus

    @property
    def length(self) -> float:
        return self.l_plus - self.l_minus


BoundaryKind = Annotated[Union[MixedNeumannDirichlet, DirichletDirichlet], Field(discriminator="kind")]


class SpectrumInterval(BaseModel):
    model_config = ConfigDict(frozen=True)

    lambda_min: float
    lambda_max: float
    horizon_used: float
    window_count: int

    @model_validator(mode="after")
    def _check_order(self):
        if self.lambda_min > self.lambda_max:
            raise ValueError("lambda_min must not exceed lambda_max")
        return self


AProfile = Union[float, Callable[[np.ndarray], np.ndarray]]


def _check_bc(bc):
    if not isinstance(bc, (MixedNeumannDirichlet, DirichletDirichlet)):
        raise ConfigError(f"Unsupported boundary kind: {bc!r}")


def _nodes(bc, n: int, index: np.ndarray) -> np.ndarray:
    return bc.left + index * (bc.length / (n - 1))


def _profile_values(a_profile: AProfile, x: np.ndarray) -> np.ndarray:
    if callable(a_profile):
        return np.broadcast_to(np.asarray(a_profile(x), dtype=float), x.shape).astype(float)
    return np.full(x.shape, float(a_profile))


def principal_eigenvalue_autonomous(a_profile: AProfile, bc, n: Optional[int] = None) -> float:
    """Largest eigenvalue of d^2/dx^2 + a(x) under `bc` on an n-node grid."""
    _check_bc(bc)
    n = n or NUMERICS_CONFIG["eig_grid_n"]
    if n < 8:
        raise ConfigError(f"grid size n={n} is below the minimum of 8")
    diag, off, index = symmetric_laplacian(n, bc.length, bc.kind)
    a_vals = _profile_values(a_profile, _nodes(bc, n, index))
    if not np.all(np.isfinite(a_vals)):
        raise ConfigError("a_profile produced non-finite values")
    m = index.size
    try:
        top = eigh_tridiagonal(diag + a_vals, off, eigvals_only=True, select="i", select_range=(m - 1, m - 1))
    except LinAlgError as e:
        raise NonConvergenceError(f"tridiagonal eigensolver did not converge: {e}")
    return float(top[0])


def richardson_eigenvalue(a_profile: AProfile, bc, n1: Optional[int] = None, n2: Optional[int] = None) -> float:
    """Second-order Richardson extrapolation of the principal eigenvalue from two grids."""
    n1 = n1 or NUMERICS_CONFIG["richardson_n1"]
    n2 = n2 or NUMERICS_CONFIG["richardson_n2"]
    lam1 = principal_eigenvalue_autonomous(a_profile, bc, n1)
    lam2 = principal_eigenvalue_autonomous(a_profile, bc, n2)
    ratio = ((n2 - 1) / (n1 - 1)) ** 2
    return (ratio * lam2 - lam1) / (ratio - 1.0)


def spectrum_interval(
    c: CoefficientField,
    bc,
    n: Optional[int] = None,
    horizon: Optional[float] = None,
    windows: Optional[int] = None,
) -> SpectrumInterval:
    """Min/max of windowed growth exponents of u_t = u_xx + a(t,x)u under `bc`.

    Strang splitting with exact diffusion through the eigendecomposition of the symmetrized
    Laplacian and half-steps of exp(dt*a/2). The state is renormalized every step.
    """
    _check_bc(bc)
    n = n or NUMERICS_CONFIG["interval_grid_n"]
    horizon = horizon or NUMERICS_CONFIG["horizon"]
    windows = windows or NUMERICS_CONFIG["windows"]
    if n < 8:
        raise ConfigError(f"grid size n={n} is below the minimum of 8")
    if windows < 4:
        raise ConfigError(f"windows={windows} is below the minimum of 4")

    burn_fraction = NUMERICS_CONFIG["burn_in_fraction"]
    autonomous = c.kind == "constant"
    if autonomous:
        if horizon < 100.0:
            raise ConfigError(f"horizon={horizon} is below 100 time units for constant coefficients")
        burn = burn_fraction * horizon
        window_len = (horizon - burn) / windows
        steps_per_window = max(1, math.ceil(window_len / NUMERICS_CONFIG["autonomous_dt"]))
        dt = window_len / steps_per_window
        burn_steps = math.ceil(burn / dt)
    else:
        period = c.period
        if horizon < 10.0 * period * (1 - 1e-12):
            raise ConfigError(f"horizon={horizon} is below 10 periods of {period}")
        steps_per_period = NUMERICS_CONFIG["steps_per_period"]
        dt = period / steps_per_period
        burn_periods = math.ceil(burn_fraction * horizon / period - 1e-9)
        window_periods = max(1, math.floor((horizon / period - burn_periods) / windows + 1e-9))
        steps_per_window = window_periods * steps_per_period
        burn_steps = burn_periods * steps_per_period

    diag, off, index = symmetric_laplacian(n, bc.length, bc.kind)
    x = _nodes(bc, n, index)
    evals, evecs = eigh_tridiagonal(diag, off)
    top = evals[-1]
    # shifted so the leading mode never underflows on short intervals
    propagator = (evecs * np.exp(dt * (evals - top))) @ evecs.T

    w = 1.0 / symmetrizer(index.size, bc.kind)
    w /= np.linalg.norm(w)
    total_steps = burn_steps + windows * steps_per_window
    log_growth = np.empty(total_steps)
    a0 = float(c.a.value) if autonomous else 0.0
    half_next = None if autonomous else np.exp(0.5 * dt * c.a_at(0.0, x))

    for k in range(total_steps):
        if autonomous:
            w = propagator @ w
            shift = dt * (top + a0)
        else:
            half_now = half_next
            half_next = np.exp(0.5 * dt * c.a_at((k + 1) * dt, x))
            w = half_next * (propagator @ (half_now * w))
            shift = dt * top
        norm = np.linalg.norm(w)
        if not np.isfinite(norm) or norm <= 0.0:
            raise OverflowGuardError(f"renormalization failed at step {k} (norm={norm}); check horizon and dt")
        w /= norm
        log_growth[k] = shift + math.log(norm)

    window_len = steps_per_window * dt
    rates = log_growth[burn_steps:].reshape(windows, steps_per_window).sum(axis=1) / window_len
    interval = SpectrumInterval(
        lambda_min=float(rates.min()),
        lambda_max=float(rates.max()),
        horizon_used=total_steps * dt,
        window_count=windows,
    )
    if c.kind in ("constant", "time_only"):
        spread = interval.lambda_max - interval.lambda_min
        if spread > NUMERICS_CONFIG["estimator_tol"]:
            logger.warning(f"Spectrum interval did not collapse: width {spread:.3e} on {bc!r}")
    return interval


def _find_root(f: Callable[[float], float], hi0: float, tol: float, label: str) -> float:
    lo = NUMERICS_CONFIG["bracket_lo"]
    hi = hi0
    f_lo = f(lo)
    for _ in range(NUMERICS_CONFIG["bracket_expansions"]):
        if f_lo < 0:
            break
        lo /= 10.0
        f_lo = f(lo)
    f_hi = f(hi)
    for _ in range(NUMERICS_CONFIG["bracket_expansions"]):
        if f_hi > 0:
            break
        hi *= 10.0
        f_hi = f(hi)
    if f_lo >= 0 or f_hi <= 0:
        raise BracketError(f"{label}: no sign change on [{lo}, {hi}] (f={f_lo}, {f_hi})")
    try:
        root = brentq(f, lo, hi, xtol=tol)
    except ValueError as e:
        raise BracketError(f"{label}: {e}")
    except RuntimeError as e:
        raise NonConvergenceError(f"{label}: {e}")
    logger.info(f"{label} = {root:.6f} (bracket [{lo}, {hi}])")
    return float(root)


def _upper_bracket(c: CoefficientField) -> float:
    return 1e3 * max(1.0, 1.0 / math.sqrt(c.a_inf))


def find_l_star(
    c: CoefficientField,
    tol: Optional[float] = None,
    n: Optional[int] = None,
    horizon: Optional[float] = None,
) -> float:
    """Critical half-length where lambda_min(a, l) changes sign under mixed conditions."""
    tol = tol or NUMERICS_CONFIG["estimator_tol"]

    def lam(l: float) -> float:
        bc = MixedNeumannDirichlet(l=l)
        if c.kind == "constant":
            return richardson_eigenvalue(c.a.value, bc)
        return spectrum_interval(c, bc, n=n, horizon=horizon).lambda_min

    return _find_root(lam, _upper_bracket(c), tol, "l_star")


def _placements(c: CoefficientField, length: float) -> np.ndarray:
    lo, hi = c.window
    if c.kind != "space_time" or hi - lo <= length:
        return np.array([lo])
    return np.linspace(lo, hi - length, NUMERICS_CONFIG["placements"])


def find_l_star_star(
    c: CoefficientField,
    tol: Optional[float] = None,
    n: Optional[int] = None,
    horizon: Optional[float] = None,
) -> float:
    """Critical length where lambda_min(a, l_-, l_- + L) changes sign for every placement."""
    tol = tol or NUMERICS_CONFIG["estimator_tol"]

    def lam(length: float) -> float:
        if c.kind == "constant":
            return richardson_eigenvalue(c.a.value, DirichletDirichlet(l_minus=0.0, l_plus=length))
        worst = math.inf
        for left in _placements(c, length):
            bc = DirichletDirichlet(l_minus=float(left), l_plus=float(left) + length)
            worst = min(worst, spectrum_interval(c, bc, n=n, horizon=horizon).lambda_min)
        return worst

    return _find_root(lam, _upper_bracket(c), tol, "l_star_star")


def spectrum_report(
    c: CoefficientField,
    l: float,
    grid_n: Optional[int] = None,
    horizon: Optional[float] = None,
    windows: Optional[int] = None,
    tol: Optional[float] = None,
) -> dict:
    grid_n = grid_n or NUMERICS_CONFIG["interval_grid_n"]
    horizon = horizon or NUMERICS_CONFIG["horizon"]
    interval = spectrum_interval(c, MixedNeumannDirichlet(l=l), n=grid_n, horizon=horizon, windows=windows)
    return {
        "lambda_min": interval.lambda_min,
        "lambda_max": interval.lambda_max,
        "l_star": find_l_star(c, tol, n=grid_n, horizon=horizon),
        "l_star_star": find_l_star_star(c, tol, n=grid_n, horizon=horizon),
        "grid_n": grid_n,
        "horizon": interval.horizon_used,
    }
