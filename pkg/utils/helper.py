import hashlib
import json
import time
from pathlib import Path
from typing import Any, Optional

import pandas as pd


class ChemofrontError(RuntimeError):
    """Base class for every error raised by the lab."""

    exit_code = 3


class ConfigError(ChemofrontError):
    exit_code = 2


class HypothesisViolationError(ConfigError):
    pass


class RunFailureError(ChemofrontError):
    exit_code = 3


class StabilityError(RunFailureError):
    pass


class FrontCollapseError(RunFailureError):
    pass


class NonConvergenceError(RunFailureError):
    pass


class BracketError(RunFailureError):
    pass


class OverflowGuardError(RunFailureError):
    pass


class QuadratureBudgetError(RunFailureError):
    pass


class BoundViolationError(ChemofrontError):
    """A runtime assertion of the theory failed; `dump` holds the offending state."""

    exit_code = 4

    def __init__(self, message: str, dump: Optional[dict] = None):
        super().__init__(message)
        self.dump = dump or {}


def success(payload=None):
    return {
        "status": "ok",
        "timestamp": time.time(),
        "data": payload,
    }


def error(message: str, payload=None):
    return {
        "status": "error",
        "timestamp": time.time(),
        "message": message,
        "data": payload,
    }


def canonical_json(data: Any) -> str:
    return json.dumps(data, sort_keys=True, separators=(",", ":"))


def digest(data: Any) -> str:
    return hashlib.sha256(canonical_json(data).encode("utf-8")).hexdigest()


def write_json(path: Path, data: Any):
    try:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        with path.open("w", encoding="utf-8", newline="\n") as fh:
            json.dump(data, fh, indent=2, sort_keys=True, default=_json_default)
            fh.write("\n")
    except OSError as e:
        raise RunFailureError(f"write_json failed for {path}: {e}")


def write_csv(path: Path, frame: pd.DataFrame):
    try:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        frame.to_csv(path, index=False, lineterminator="\n", float_format="%.12g")
    except OSError as e:
        raise RunFailureError(f"write_csv failed for {path}: {e}")


def _json_default(value):
    # numpy scalars and arrays
    if hasattr(value, "tolist"):
        return value.tolist()
    if isinstance(value, Path):
        return str(value)
    raise TypeError(f"Object of type {type(value).__name__} is not JSON serializable")
