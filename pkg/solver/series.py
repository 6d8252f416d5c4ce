from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, ConfigDict

from utils.helper import RunFailureError


class Verdict(str, Enum):
    SPREADING = "Spreading"
    VANISHING = "Vanishing"
    UNDETERMINED = "Undetermined"
    # fixed-domain runs
    PERSISTS = "Persists"
    DECAYS = "Decays"


class Outcome(BaseModel):
    model_config = ConfigDict(frozen=True)

    verdict: Verdict
    h_infinity_estimate: float
    final_sup_u: float
    l_star: float

    @property
    def decided(self) -> bool:
        return self.verdict in (Verdict.SPREADING, Verdict.VANISHING)


@dataclass
class RunSeries:
    """Sampled time series of a run plus the artifacts written next to it."""

    config_digest: str = ""
    rows: list[dict] = field(default_factory=list)
    snapshots: list[tuple[float, pd.DataFrame]] = field(default_factory=list)
    outcome: Optional[Outcome] = None
    final_state: Any = None
    manifest: dict = field(default_factory=dict)

    def append(self, **row):
        if self.rows and not row["t"] > self.rows[-1]["t"]:
            raise RunFailureError(f"series time must increase: {row['t']} after {self.rows[-1]['t']}")
        self.rows.append(row)

    def column(self, name: str) -> np.ndarray:
        return np.array([r[name] for r in self.rows], dtype=float)

    def has(self, name: str) -> bool:
        return bool(self.rows) and name in self.rows[0]

    def last(self, name: str) -> float:
        return float(self.rows[-1][name])

    def to_frame(self) -> pd.DataFrame:
        return pd.DataFrame(self.rows)

    def __len__(self):
        return len(self.rows)
