import math
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field

from model.coefficients import CoefficientField
from utils.helper import HypothesisViolationError


class ModelParams(BaseModel):
    """Chemotaxis and Stefan constants of the free-boundary system."""

    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)

    chi1: float = Field(0.0, ge=0, description="attraction sensitivity")
    chi2: float = Field(0.0, ge=0, description="repulsion sensitivity")
    lambda1: float = Field(1.0, gt=0, description="attractant decay")
    lambda2: float = Field(1.0, gt=0, description="repellent decay")
    mu1: float = Field(1.0, ge=0, description="attractant production")
    mu2: float = Field(1.0, ge=0, description="repellent production")
    nu: float = Field(1.0, gt=0, description="Stefan front coefficient")

    @property
    def chemotaxis_free(self) -> bool:
        return self.chi1 * self.mu1 == 0 and self.chi2 * self.mu2 == 0


class HypothesisReport(BaseModel):
    model_config = ConfigDict(frozen=True)

    M: float
    K: float
    M0: Optional[float]
    m0: Optional[float]
    h1_holds: bool
    h2_holds: bool
    h3_holds: bool
    margin_h1: float
    margin_h2: float
    margin_h3: float
    gradient_constant: float


def _pos(x: float) -> float:
    return max(x, 0.0)


def compute_M(p: ModelParams) -> float:
    a1 = p.chi1 * p.mu1
    a2 = p.chi2 * p.mu2
    core = _pos(a2 * p.lambda2 - a1 * p.lambda1)
    first = (core + a1 * _pos(p.lambda1 - p.lambda2)) / p.lambda2
    second = (core + a2 * _pos(p.lambda1 - p.lambda2)) / p.lambda1
    return min(first, second)


def compute_K(p: ModelParams) -> float:
    a1 = p.chi1 * p.mu1
    a2 = p.chi2 * p.mu2
    core = abs(a1 * p.lambda1 - a2 * p.lambda2)
    first = (core + a1 * abs(p.lambda1 - p.lambda2)) / p.lambda2
    second = (core + a2 * abs(p.lambda1 - p.lambda2)) / p.lambda1
    return min(first, second)


def gradient_constant(p: ModelParams) -> float:
    """Constant C with ||d/dx (chi2 v2 - chi1 v1)||_inf <= C ||u||_inf."""
    a1 = p.chi1 * p.mu1
    a2 = p.chi2 * p.mu2
    s1, s2 = math.sqrt(p.lambda1), math.sqrt(p.lambda2)
    cross = 2.0 * s1 * s2
    first = abs(a2 - a1) / (2.0 * s2) + a1 * abs(s1 - s2) / cross
    second = abs(a1 - a2) / (2.0 * s1) + a2 * abs(s2 - s1) / cross
    return min(first, second)


def _h1_rhs(p: ModelParams, M: float) -> float:
    return p.chi1 * p.mu1 - p.chi2 * p.mu2 + M


def _h2_rhs(p: ModelParams, c: CoefficientField, M: float) -> float:
    return (1.0 + c.a_sup / c.a_inf) * p.chi1 * p.mu1 - p.chi2 * p.mu2 + M


def _h3_rhs(p: ModelParams, K: float) -> float:
    return p.chi1 * p.mu1 - p.chi2 * p.mu2 + K


def compute_M0(p: ModelParams, c: CoefficientField) -> float:
    M = compute_M(p)
    denom = c.b_inf + p.chi2 * p.mu2 - p.chi1 * p.mu1 - M
    if denom <= 0:
        raise HypothesisViolationError(f"(H1) fails: b_inf + chi2*mu2 - chi1*mu1 - M = {denom} <= 0")
    return c.a_sup / denom


def compute_m0(p: ModelParams, c: CoefficientField) -> float:
    M = compute_M(p)
    a1 = p.chi1 * p.mu1
    a2 = p.chi2 * p.mu2
    first = c.b_inf - a1 + a2 - M
    if first <= 0:
        raise HypothesisViolationError(f"(H1) fails: b_inf - chi1*mu1 + chi2*mu2 - M = {first} <= 0")
    numer = c.a_inf * (c.b_inf - (1.0 + c.a_sup / c.a_inf) * a1 + a2 - M)
    return numer / (first * (c.b_sup - a1 + a2))


def check_hypotheses(p: ModelParams, c: CoefficientField) -> HypothesisReport:
    M = compute_M(p)
    K = compute_K(p)
    margin_h1 = c.b_inf - _h1_rhs(p, M)
    margin_h2 = c.b_inf - _h2_rhs(p, c, M)
    margin_h3 = c.b_inf - _h3_rhs(p, K)
    h1 = margin_h1 > 0
    M0 = compute_M0(p, c) if h1 else None
    m0 = compute_m0(p, c) if h1 else None
    return HypothesisReport(
        M=M,
        K=K,
        M0=M0,
        m0=m0,
        h1_holds=h1,
        h2_holds=margin_h2 > 0,
        h3_holds=margin_h3 > 0,
        margin_h1=margin_h1,
        margin_h2=margin_h2,
        margin_h3=margin_h3,
        gradient_constant=gradient_constant(p),
    )
