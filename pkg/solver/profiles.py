from typing import Annotated, Literal, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from solver.config import SOLVER_CONFIG


class _Profile(BaseModel):
    model_config = ConfigDict(frozen=True, extra="forbid", allow_inf_nan=False)


class CosineProfile(_Profile):
    """amp*cos(pi*z/2)."""

    kind: Literal["cosine"] = "cosine"
    amp: float = Field(1.0, ge=0)

    def sample(self, z: np.ndarray) -> np.ndarray:
        return self.amp * np.cos(0.5 * np.pi * z)


class QuadraticProfile(_Profile):
    """amp*(1 - z^2)."""

    kind: Literal["quadratic"] = "quadratic"
    amp: float = Field(1.0, ge=0)

    def sample(self, z: np.ndarray) -> np.ndarray:
        return self.amp * (1.0 - z * z)


class BumpProfile(_Profile):
    """amp*(1 - s^2)^3 with s = (z - center)/width, zero for |s| >= 1."""

    kind: Literal["bump"] = "bump"
    amp: float = Field(1.0, ge=0)
    center: float = 0.0
    width: float = Field(0.5, gt=0)

    def sample(self, z: np.ndarray) -> np.ndarray:
        s = (z - self.center) / self.width
        return self.amp * np.where(np.abs(s) < 1.0, (1.0 - s * s) ** 3, 0.0)


class ConstantProfile(_Profile):
    """Flat value; only compatible with fixed domains that have no Dirichlet end."""

    kind: Literal["constant"] = "constant"
    value: float = Field(ge=0)

    def sample(self, z: np.ndarray) -> np.ndarray:
        return np.full(np.shape(z), self.value, dtype=float)


class TabulatedProfile(_Profile):
    """Linear interpolation of `values` on a uniform table over z in [0, 1]."""

    kind: Literal["tabulated"] = "tabulated"
    values: list[float] = Field(min_length=2)

    def sample(self, z: np.ndarray) -> np.ndarray:
        table = np.linspace(0.0, 1.0, len(self.values))
        return np.interp(z, table, np.asarray(self.values, dtype=float))


Profile = Annotated[
    Union[CosineProfile, QuadraticProfile, BumpProfile, ConstantProfile, TabulatedProfile],
    Field(discriminator="kind"),
]


def sample_profile(profile, y: np.ndarray, symmetric: bool = False) -> np.ndarray:
    """Sample on the straightened grid; symmetric mirrors the profile about y = 1/2."""
    z = np.abs(2.0 * y - 1.0) if symmetric else y
    return np.asarray(profile.sample(z), dtype=float)


def validate_initial_profile(u: np.ndarray, dy: float, left: str = "neumann", right: str = "dirichlet") -> tuple[bool, str]:
    if not np.all(np.isfinite(u)):
        return False, "Initial profile has non-finite values"
    if u.min() < -SOLVER_CONFIG["clamp_floor"]:
        return False, f"Initial profile is negative (min {u.min():.3e})"
    scale = max(1.0, float(u.max()))
    if right == "dirichlet" and abs(u[-1]) > SOLVER_CONFIG["clamp_floor"] * scale:
        return False, f"Initial profile does not vanish at the right end (u={u[-1]:.3e})"
    if left == "dirichlet" and abs(u[0]) > SOLVER_CONFIG["clamp_floor"] * scale:
        return False, f"Initial profile does not vanish at the left end (u={u[0]:.3e})"
    if left == "neumann":
        slope = (-3.0 * u[0] + 4.0 * u[1] - u[2]) / (2.0 * dy)
        if abs(slope) > SOLVER_CONFIG["compat_tol"] * scale:
            return False, f"Initial profile has nonzero slope {slope:.3e} at the left end"
    return True, ""
