# Copyright 2026 hardy-cert contributors
# See LICENSE file for licensing details.

"""Run configuration: a flat YAML mapping validated into a ``RunConfig``."""

import logging
from enum import Enum
from typing import Any

import pydantic
import yaml
from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator

from conditions import Condition
from norms import NormMethod
from weights import WeightSpec

logger = logging.getLogger(__name__)


class ConfigError(ValueError):
    """Configuration could not be parsed or validated."""

    def __init__(self, message: str, line: int | None = None, field: str | None = None):
        super().__init__(message)
        self.line = line
        self.field = field


class Command(str, Enum):
    """Top-level commands."""

    NORM = "norm"
    CONDITIONS = "conditions"
    CERTIFY = "certify"
    CARLEMAN = "carleman"
    WIRTINGER = "wirtinger"
    SWEEP = "sweep"
    COUNTEREXAMPLE = "counterexample"


class OutputFormat(str, Enum):
    """Report formats."""

    TABLE = "table"
    CSV = "csv"
    JSONL = "jsonl"


# commands whose p grid is an operator-norm exponent
NEEDS_P_ABOVE_ONE = frozenset({Command.NORM, Command.CERTIFY, Command.CARLEMAN})

# commands that can write their trace or spectrum to `dump`
DUMPS_TRACE = frozenset({Command.NORM, Command.CERTIFY, Command.WIRTINGER})


def _as_list(value: Any) -> Any:
    if value is None or isinstance(value, list):
        return value
    if isinstance(value, str):
        return [part.strip() for part in value.split(",") if part.strip()]
    return [value]


class RunConfig(BaseModel):
    """Validated run description."""

    model_config = ConfigDict(extra="forbid", frozen=True, use_enum_values=False)

    command: Command = Field(description="What to run.")
    weights: str = Field(default="constant", description="Weight family, KIND[:PARAM].")
    p: list[float] = Field(default_factory=lambda: [2.0], description="Exponent grid.")
    L: list[float] | None = Field(default=None, description="Condition constant grid.")
    alpha: list[float] | None = Field(default=None, description="Power exponent grid.")
    N: int = Field(default=1000, ge=1, description="Truncation order / prefix length.")
    condition: Condition | None = Field(default=None, description="Condition to check.")
    method: NormMethod = Field(default=NormMethod.POWER_ITERATION, description="Norm method.")
    a: float = Field(default=1.0, gt=0, description="Wirtinger form parameter a.")
    b: float = Field(default=1.0, gt=0, description="Wirtinger form parameter b.")
    tol: float = Field(default=1e-12, gt=0, description="Iteration tolerance.")
    max_iter: int = Field(default=10_000, ge=1, description="Iteration cap.")
    restarts: int = Field(default=8, ge=0, description="Random optimizer restarts.")
    samples: int = Field(default=1000, ge=0, description="Random vectors for form checks.")
    seed: int = Field(default=0, ge=0, description="Seed for every random draw.")
    out: str | None = Field(default=None, description="Report path; stdout when unset.")
    dump: str | None = Field(default=None, description="Raw trace or spectrum path.")
    format: OutputFormat = Field(default=OutputFormat.TABLE, description="Report format.")

    @field_validator("p", "L", "alpha", mode="before")
    @classmethod
    def _split_grid(cls, value: Any) -> Any:
        return _as_list(value)

    @field_validator("p")
    @classmethod
    def _nonempty(cls, value: list[float]) -> list[float]:
        if not value:
            raise ValueError("grid must not be empty")
        return value

    @field_validator("weights")
    @classmethod
    def _parse_weights(cls, value: str) -> str:
        WeightSpec.parse(value)
        return value

    @model_validator(mode="after")
    def _check_ranges(self) -> "RunConfig":
        if self.command in NEEDS_P_ABOVE_ONE or self.condition in (
            Condition.CARTLIDGE,
            Condition.THM13,
            Condition.COR14,
        ):
            bad = [p for p in self.p if not p > 1]
            if bad:
                msg = f"{self.command.value} requires p > 1, got p={bad[0]}"
                raise ConfigError(msg, field="p")
        if self.command is Command.COUNTEREXAMPLE:
            bad = [p for p in self.p if not 0 < p < 1]
            if bad:
                msg = f"counterexample requires 0 < p < 1, got p={bad[0]}"
                raise ConfigError(msg, field="p")
        if self.condition is Condition.REVERSED_LS:
            bad = [p for p in self.p if not 0 < p <= 1 / 3]
            if bad:
                msg = f"reversed_LS requires 0 < p <= 1/3, got p={bad[0]}"
                raise ConfigError(msg, field="p")
        if self.condition is Condition.THM61:
            if any(not 0 <= a <= 1 for a in self.alpha or []):
                raise ConfigError("thm61 requires alpha in [0, 1]", field="alpha")
            if any(p < 2 for p in self.p):
                raise ConfigError("thm61 requires p >= 2", field="p")
        if self.alpha is not None and any(a <= -1 for a in self.alpha):
            raise ConfigError("power weights require alpha > -1", field="alpha")
        if self.dump is not None and self.command not in DUMPS_TRACE:
            commands = ", ".join(sorted(c.value for c in DUMPS_TRACE))
            raise ConfigError(f"dump is supported by {commands} only", field="dump")
        if self.method is NormMethod.EIGEN and self.command is Command.NORM:
            if any(p != 2 for p in self.p):
                raise ConfigError("the eigen method computes the p = 2 norm only", field="p")
        return self


def _validate(data: dict[str, Any]) -> RunConfig:
    try:
        return RunConfig.model_validate(data)
    except pydantic.ValidationError as e:
        first = e.errors()[0]
        # cross-field checks name their field on the wrapped error
        cause = first.get("ctx", {}).get("error")
        field = getattr(cause, "field", None) or ".".join(str(part) for part in first["loc"])
        field = field or "config"
        msg = f"invalid value for {field}: {first['msg']}"
        logger.debug("Config validation failed: %s", e)
        raise ConfigError(msg, field=field) from e


def load_mapping(text: str) -> dict[str, Any]:
    """Parse a config document into a plain mapping, without validation."""
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as e:
        mark = getattr(e, "problem_mark", None)
        line = mark.line + 1 if mark is not None else None
        where = f"line {line}: " if line is not None else ""
        raise ConfigError(f"{where}malformed config: {e}", line=line) from e
    if data is None:
        return {}
    if not isinstance(data, dict):
        raise ConfigError("config must be a mapping of key: value lines", line=1)
    return data


def parse_config(text: str, overrides: dict[str, Any] | None = None) -> RunConfig:
    """Parse and validate a config document.

    Args:
        text: flat YAML mapping.
        overrides: values that replace the document's keys (command-line flags);
            None values are ignored.

    Raises:
        ConfigError: with ``line`` set for syntax errors and ``field`` set for
            validation errors.
    """
    data = load_mapping(text)
    data.update({k: v for k, v in (overrides or {}).items() if v is not None})
    return _validate(data)


def dump_config(config: RunConfig) -> str:
    """Render ``config`` as a document that ``parse_config`` reads back unchanged."""
    data = config.model_dump(mode="json", exclude_none=True)
    return yaml.safe_dump(data, sort_keys=False, default_flow_style=None)
