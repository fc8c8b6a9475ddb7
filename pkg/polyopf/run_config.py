"""Run configuration with persistent storage."""

import dataclasses
import json
import math
try:
    import tomllib
except ModuleNotFoundError:  # Python < 3.11
    import tomli as tomllib
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, Optional, Tuple

from .config import (
    DIGS_EPS,
    DIGS_MAX_ITER,
    DIGS_TIME_BUDGET,
    FEAS_TOL,
    GAP_TOL,
    MERGE_THRESHOLD,
)
from .errors import ConfigError

METHODS = ("dense", "sparse", "digs", "lavaei-low")
FORMULATIONS = ("op2", "op4")
OUTPUTS = ("table", "json", "csv")
QUADRATIC_ONLY = ("digs", "lavaei-low")
DECOMPOSABLE = ("dense", "lavaei-low")


def parse_override(text: str) -> Tuple[str, float]:
    """``"V2max=1.022"`` -> ``("V2max", 1.022)``."""
    key, sep, value = text.partition("=")
    key = key.strip()
    if not sep or not key:
        raise ConfigError(f"override {text!r} is not of the form KEY=VALUE")
    try:
        return key, float(value)
    except ValueError:
        raise ConfigError(f"override {key} has a non-numeric value {value.strip()!r}") from None


def parse_method_spec(spec: str) -> Tuple[str, str, int]:
    """``"sparse-op4-2"`` -> ``("sparse", "op4", 2)``."""
    try:
        method, formulation, level = spec.rsplit("-", 2)
        return method, formulation, int(level)
    except ValueError:
        raise ConfigError(f"method spec {spec!r} is not METHOD-FORMULATION-LEVEL") from None


def _toml_value(value: Any) -> str:
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, int):
        return str(value)
    if isinstance(value, float):
        if math.isnan(value):
            return "nan"
        if math.isinf(value):
            return "inf" if value > 0 else "-inf"
        return repr(value)
    return json.dumps(str(value))


@dataclass
class RunConfig:
    """One case x formulation x method x level run."""

    case: str = "WB2"
    overrides: Dict[str, float] = field(default_factory=dict)
    formulation: str = "op2"
    method: str = "sparse"
    level: int = 1
    eps: float = DIGS_EPS
    max_iter: int = DIGS_MAX_ITER
    time_budget: float = DIGS_TIME_BUDGET
    output: str = "table"
    decompose: bool = False
    merge_threshold: int = MERGE_THRESHOLD
    feas_tol: float = FEAS_TOL
    gap_tol: float = GAP_TOL
    jobs: int = 1
    _config_path: Optional[Path] = field(default=None, repr=False, compare=False)

    @property
    def spec(self) -> str:
        return f"{self.method}-{self.formulation}-{self.level}"

    def validate(self) -> "RunConfig":
        """Raise ConfigError on an invalid combination; returns self."""
        if self.method not in METHODS:
            raise ConfigError(f"unknown method {self.method!r} (choose from {', '.join(METHODS)})")
        if self.formulation not in FORMULATIONS:
            raise ConfigError(f"unknown formulation {self.formulation!r} (choose from {', '.join(FORMULATIONS)})")
        if self.output not in OUTPUTS:
            raise ConfigError(f"unknown output format {self.output!r} (choose from {', '.join(OUTPUTS)})")
        if self.method in QUADRATIC_ONLY and self.formulation != "op2":
            raise ConfigError(f"method {self.method} requires formulation op2")
        if self.decompose and self.method not in DECOMPOSABLE:
            raise ConfigError(f"--decompose applies to {' and '.join(DECOMPOSABLE)} only")
        if self.level < 1:
            raise ConfigError(f"level must be at least 1, got {self.level}")
        if not self.eps >= 0:
            raise ConfigError(f"eps must be nonnegative, got {self.eps}")
        if self.max_iter < 0:
            raise ConfigError(f"max_iter must be nonnegative, got {self.max_iter}")
        if self.time_budget <= 0:
            raise ConfigError(f"time budget must be positive, got {self.time_budget}")
        if self.jobs < 1:
            raise ConfigError(f"jobs must be at least 1, got {self.jobs}")
        if not self.case:
            raise ConfigError("no case given")
        return self

    def with_method(self, spec: str) -> "RunConfig":
        method, formulation, level = parse_method_spec(spec)
        return dataclasses.replace(self, method=method, formulation=formulation, level=level)

    def with_override(self, key: str, value: float) -> "RunConfig":
        return dataclasses.replace(self, overrides={**self.overrides, key: float(value)})

    def to_dict(self) -> Dict[str, Any]:
        """Convert to dictionary for JSON serialization."""
        data = {f.name: getattr(self, f.name) for f in dataclasses.fields(self) if not f.name.startswith("_")}
        data["overrides"] = dict(self.overrides)
        return data

    @classmethod
    def from_dict(cls, data: Dict[str, Any]) -> "RunConfig":
        known = {f.name for f in dataclasses.fields(cls) if not f.name.startswith("_")}
        unknown = sorted(set(data) - known)
        if unknown:
            raise ConfigError(f"unknown configuration keys: {', '.join(unknown)}")
        values = dict(data)
        try:
            if "overrides" in values:
                values["overrides"] = {str(k): float(v) for k, v in dict(values["overrides"]).items()}
            for name in ("level", "max_iter", "merge_threshold", "jobs"):
                if name in values:
                    values[name] = int(values[name])
            for name in ("eps", "time_budget", "feas_tol", "gap_tol"):
                if name in values:
                    values[name] = float(values[name])
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"invalid configuration value: {exc}") from exc
        return cls(**values)

    def save(self, path: Optional[Path] = None) -> None:
        """Write the configuration as ``key = value`` lines with an ``[overrides]`` table."""
        path = path or self._config_path
        if path is None:
            raise ValueError("No config path specified")
        path = Path(path)
        data = self.to_dict()
        overrides = data.pop("overrides")
        lines = [f"{key} = {_toml_value(value)}" for key, value in data.items()]
        lines.append("")
        lines.append("[overrides]")
        lines += [f"{json.dumps(key)} = {_toml_value(float(value))}" for key, value in overrides.items()]
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text("\n".join(lines) + "\n")
        self._config_path = path

    @classmethod
    def load(cls, path: Path) -> "RunConfig":
        """Load a configuration file; a missing file yields the defaults."""
        path = Path(path)
        if not path.exists():
            config = cls()
            config._config_path = path
            return config
        try:
            with open(path, "rb") as f:
                data = tomllib.load(f)
        except tomllib.TOMLDecodeError as exc:
            raise ConfigError(f"{path}: {exc}") from exc
        config = cls.from_dict(data)
        config._config_path = path
        return config
