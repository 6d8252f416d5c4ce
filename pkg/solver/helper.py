import logging

import numpy as np
from scipy.linalg import solve_banded

from numerics.tridiag import EndKind, banded_operator
from solver.config import SOLVER_CONFIG
from utils.helper import FrontCollapseError, StabilityError

logger = logging.getLogger(__name__)


def uniform_grid(n: int) -> tuple[np.ndarray, float]:
    return np.linspace(0.0, 1.0, n), 1.0 / (n - 1)


def implicit_diffusion(rhs: np.ndarray, r: float, left: EndKind, right: EndKind) -> np.ndarray:
    """Backward Euler for u_t = k*u_yy: solves (I - r*D2) u = rhs with r = dt*k/dy^2."""
    n = rhs.size
    b = rhs.copy()
    if left == "dirichlet":
        b[0] = 0.0
    if right == "dirichlet":
        b[-1] = 0.0
    ab = banded_operator(n, 1.0 + 2.0 * r, -r, left, right)
    return solve_banded((1, 1), ab, b)


def _ghosts(u: np.ndarray, left: EndKind, right: EndKind) -> np.ndarray:
    # even reflection across a Neumann end, odd across a Dirichlet end
    g_left = u[1] if left == "neumann" else -u[1]
    g_right = u[-2] if right == "neumann" else -u[-2]
    return np.concatenate(([g_left], u, [g_right]))


def van_leer_slopes(u: np.ndarray, left: EndKind, right: EndKind) -> np.ndarray:
    d = np.diff(_ghosts(u, left, right))
    back, fwd = d[:-1], d[1:]
    prod = back * fwd
    with np.errstate(invalid="ignore", divide="ignore"):
        slope = np.where(prod > 0, 2.0 * prod / (back + fwd), 0.0)
    return slope


def flux_divergence(u: np.ndarray, c_face: np.ndarray, dy: float, left: EndKind, right: EndKind) -> np.ndarray:
    """d/dy (c*u) at the nodes with upwind MUSCL face values limited by van Leer.

    `c_face` holds the velocity at the n-1 interior faces. Neumann ends close with zero
    boundary flux over a half cell; Dirichlet nodes get no update.
    """
    slope = van_leer_slopes(u, left, right)
    from_left = u[:-1] + 0.5 * slope[:-1]
    from_right = u[1:] - 0.5 * slope[1:]
    flux = c_face * np.where(c_face > 0, from_left, from_right)
    div = np.zeros_like(u)
    div[1:-1] = (flux[1:] - flux[:-1]) / dy
    if left == "neumann":
        div[0] = 2.0 * flux[0] / dy
    if right == "neumann":
        div[-1] = -2.0 * flux[-1] / dy
    return div


def face_gradient(v: np.ndarray, dy: float) -> np.ndarray:
    return (v[1:] - v[:-1]) / dy


def slope_at_right(u: np.ndarray, dy: float) -> float:
    return (3.0 * u[-1] - 4.0 * u[-2] + u[-3]) / (2.0 * dy)


def slope_at_left(u: np.ndarray, dy: float) -> float:
    return (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dy)


def accept_front_speed(speed: float, label: str = "h'") -> float:
    """Clamp a front speed that should be nonnegative; larger negative values abort."""
    if not np.isfinite(speed):
        raise StabilityError(f"{label} is not finite")
    if speed < -SOLVER_CONFIG["front_tol"]:
        raise FrontCollapseError(f"{label} = {speed:.3e} is negative beyond tolerance")
    return max(speed, 0.0)


def stable_dt(c_face: np.ndarray, dy: float, a_sup: float, b_sup: float, sup_u: float, dilution: float) -> float:
    """Largest dt allowed by the advective CFL and the explicit reaction bound."""
    vmax = float(np.abs(c_face).max()) if c_face.size else 0.0
    limit = np.inf if vmax == 0 else SOLVER_CONFIG["cfl"] * dy / vmax
    rate = a_sup + b_sup * max(sup_u, 0.0) + abs(dilution)
    if rate > 0:
        limit = min(limit, SOLVER_CONFIG["reaction_fraction"] / rate)
    return limit


def check_dt(dt: float, limit: float):
    if dt <= 0 or not np.isfinite(dt):
        raise StabilityError(f"invalid time step dt={dt}")
    if dt > limit * (1.0 + 1e-9):
        raise StabilityError(f"dt={dt:.3e} exceeds the stability limit {limit:.3e}")


def transport_reaction(
    u: np.ndarray,
    dt: float,
    c_face: np.ndarray,
    dy: float,
    a: np.ndarray,
    b: np.ndarray,
    dilution,
    left: EndKind,
    right: EndKind,
) -> np.ndarray:
    """Explicit half of the IMEX step: limited transport, then the logistic source minus dilution."""
    u_star = u - dt * flux_divergence(u, c_face, dy, left, right)
    return u_star + dt * u_star * (a - b * u_star - dilution)


def clamp_undershoot(u: np.ndarray) -> np.ndarray:
    if not np.all(np.isfinite(u)):
        raise StabilityError("non-finite density after step")
    low = float(u.min())
    if low < -SOLVER_CONFIG["clamp_floor"]:
        raise StabilityError(f"negative density {low:.3e} beyond the clamp floor")
    if low < 0:
        u = np.maximum(u, 0.0)
    return u
