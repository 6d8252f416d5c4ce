import logging
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np
from numpy.polynomial.legendre import leggauss
from scipy.linalg import circulant, solve_banded
from scipy.special import erf

from model.params import ModelParams, gradient_constant
from numerics.config import NUMERICS_CONFIG
from numerics.tridiag import banded_operator
from utils.helper import ConfigError, QuadratureBudgetError

logger = logging.getLogger(__name__)


@dataclass(frozen=True)
class PotentialPair:
    v1: np.ndarray
    v2: np.ndarray
    grid_n: int
    h: float

    @property
    def dx(self) -> float:
        return self.h / (self.grid_n - 1)


def _check_inputs(u: np.ndarray, lam: float, mu: float, h: float) -> np.ndarray:
    u = np.asarray(u, dtype=float)
    if u.ndim != 1 or u.size < 3:
        raise ConfigError(f"source must be a 1-D grid vector with at least 3 nodes, got shape {u.shape}")
    if not np.all(np.isfinite(u)):
        raise ConfigError("source u has non-finite entries")
    if lam <= 0 or mu < 0 or h <= 0:
        raise ConfigError(f"invalid potential parameters lambda={lam}, mu={mu}, h={h}")
    return u


def solve_potential(u: np.ndarray, lam: float, mu: float, h: float) -> np.ndarray:
    """Solve v'' - lam*v + mu*u = 0 on [0, h] with v' = 0 at both ends."""
    u = _check_inputs(u, lam, mu, h)
    n = u.size
    dx = h / (n - 1)
    if mu == 0:
        return np.zeros(n)
    ab = banded_operator(n, 2.0 + lam * dx * dx, -1.0, "neumann", "neumann")
    return solve_banded((1, 1), ab, mu * dx * dx * u)


def solve_pair(u: np.ndarray, p: ModelParams, h: float) -> PotentialPair:
    u = np.asarray(u, dtype=float)
    return PotentialPair(
        v1=solve_potential(u, p.lambda1, p.mu1, h),
        v2=solve_potential(u, p.lambda2, p.mu2, h),
        grid_n=u.size,
        h=h,
    )


def _hat_heat_kernel(offsets: np.ndarray, sigma: np.ndarray, dx: float) -> np.ndarray:
    """Heat kernel at time sigma^2 convolved with the lattice hat function, at r = offsets*dx.

    Rows follow `sigma`, columns follow `offsets`. Uses the second antiderivative
    F(r) = r*P(r) + 2*sigma^2*G(r) of the Gaussian, evaluated on the non-positive side.
    """
    r = -np.abs(offsets)[None, :] * dx
    s = sigma[:, None]

    def F(q):
        gauss = np.exp(-q * q / (4.0 * s * s)) / np.sqrt(4.0 * np.pi * s * s)
        cdf = 0.5 * (1.0 + erf(q / (2.0 * s)))
        return q * cdf + 2.0 * s * s * gauss

    return (F(r + dx) - 2.0 * F(r) + F(r - dx)) / dx


def potential_oracle_reflection(
    u: np.ndarray,
    lam: float,
    mu: float,
    h: float,
    quad_n: Optional[int] = None,
) -> np.ndarray:
    """Heat-kernel representation of the Neumann potential through the even 2h-periodic extension of u.

    v(x) = mu * int_0^inf e^{-lam s} (G_s * u~)(x) ds, with s = sigma^2, two Gauss-Legendre panels
    in sigma, and the z-integral taken exactly for the piecewise-linear interpolant of u~.
    """
    u = _check_inputs(u, lam, mu, h)
    quad_n = quad_n or NUMERICS_CONFIG["oracle_quad_n"]
    if quad_n < 64:
        raise ConfigError(f"quad_n={quad_n} is below the minimum of 64")
    n = u.size
    dx = h / (n - 1)
    period = 2 * (n - 1)
    sigma_max = math.sqrt(math.log(1.0 / NUMERICS_CONFIG["oracle_tail"]) / lam)
    images = math.ceil(6.0 * sigma_max / h) + 2

    nodes, weights = leggauss(quad_n)
    sigma_c = min(4.0 * dx, 0.5 * sigma_max)
    panels = [(0.0, sigma_c), (sigma_c, sigma_max)]
    sigma = np.concatenate([0.5 * (b - a) * nodes + 0.5 * (b + a) for a, b in panels])
    wts = np.concatenate([0.5 * (b - a) * weights for a, b in panels])

    lattice = sigma.size * 2 * images * period
    if lattice > NUMERICS_CONFIG["oracle_budget"]:
        raise QuadratureBudgetError(
            f"oracle needs {lattice} lattice evaluations, budget is {NUMERICS_CONFIG['oracle_budget']}"
        )

    offsets = np.arange(-images * period, images * period)
    kernel = _hat_heat_kernel(offsets, sigma, dx)
    folded = kernel.reshape(sigma.size, 2 * images, period).sum(axis=1)
    s_weights = mu * wts * 2.0 * sigma * np.exp(-lam * sigma * sigma)
    row = s_weights @ folded

    idx = np.arange(period)
    extended = u[np.where(idx <= n - 1, idx, period - idx)]
    return (circulant(row) @ extended)[:n]


def _record(name: str, value: float, bound: float, tolerance: float) -> dict:
    residual = value - bound
    return {
        "name": name,
        "value": float(value),
        "bound": float(bound),
        "residual": float(residual),
        "tolerance": float(tolerance),
        "ok": bool(residual <= tolerance),
    }


def diagnostic_tolerance(dx: float, p: ModelParams, sup_u: float) -> float:
    scale = p.chi1 * p.mu1 + p.chi2 * p.mu2
    return NUMERICS_CONFIG["diagnostic_scale"] * dx * dx * max(1.0, scale * sup_u)


def check_combo_bound(pp: PotentialPair, u: np.ndarray, p: ModelParams, M: float) -> dict:
    """max(chi2*lambda2*v2 - chi1*lambda1*v1) against M*max(u)."""
    u = np.asarray(u, dtype=float)
    sup_u = float(u.max()) if u.size else 0.0
    combo = p.chi2 * p.lambda2 * pp.v2 - p.chi1 * p.lambda1 * pp.v1
    return _record("combo", float(combo.max()), M * sup_u, diagnostic_tolerance(pp.dx, p, sup_u))


def check_gradient_bound(pp: PotentialPair, u: np.ndarray, p: ModelParams) -> dict:
    """Centered-difference max-norm of d/dx (chi2*v2 - chi1*v1) against C*max(u)."""
    u = np.asarray(u, dtype=float)
    sup_u = float(u.max()) if u.size else 0.0
    w = p.chi2 * pp.v2 - p.chi1 * pp.v1
    grad = np.zeros_like(w)
    grad[1:-1] = (w[2:] - w[:-2]) / (2.0 * pp.dx)
    value = float(np.abs(grad).max())
    return _record("gradient", value, gradient_constant(p) * sup_u, diagnostic_tolerance(pp.dx, p, sup_u))
