"""Run configuration.

Values are resolved with the precedence

    command-line flag > ``--config`` file > ``SYMMETRIA_*`` environment > default

A ``.env`` file in the working directory is loaded into the environment
first (existing variables win).
"""
from __future__ import annotations

import logging
import os
from dataclasses import asdict, dataclass, fields, replace
from pathlib import Path
from typing import Any, Mapping, Optional

from dotenv import find_dotenv, load_dotenv

from .errors import ParseError, ValidationError

logger = logging.getLogger(__name__)

__all__ = ["RunConfig", "ENV_PREFIX", "load_config_file", "resolve_config", "thread_limit"]

ENV_PREFIX = "SYMMETRIA_"

_TRUE = {"1", "true", "yes", "on"}
_FALSE = {"0", "false", "no", "off"}


@dataclass(frozen=True)
class RunConfig:
    k: int = 13
    d_max: int = 25
    c: Optional[int] = None
    q_multiplier: float = 1000.0
    t_steps: int = 50
    mu: float = 1.0
    tau_gap: float = 1e-3
    eps_sign: float = 1e-6
    correction: bool = True
    max_iter: int = 200
    tol_grad: float = 1e-7
    # the pipeline is deterministic; recorded in reports only
    seed: Optional[int] = None
    min_active: int = 3
    hessian: str = "fd"
    one_based_ground_truth: bool = False
    verbose: bool = False
    threads: Optional[int] = None

    def validate(self) -> "RunConfig":
        if self.k < 3:
            raise ValidationError(f"k must be >= 3, got {self.k}", element="k")
        if self.d_max < 2:
            raise ValidationError(f"d_max must be >= 2, got {self.d_max}", element="d_max")
        if self.c is not None and self.c < 1:
            raise ValidationError(f"c must be >= 1, got {self.c}", element="c")
        for name in ("q_multiplier", "t_steps", "tau_gap", "eps_sign", "max_iter", "tol_grad", "min_active"):
            if getattr(self, name) <= 0:
                raise ValidationError(f"{name} must be positive, got {getattr(self, name)}", element=name)
        if self.mu < 0:
            raise ValidationError(f"mu must be non-negative, got {self.mu}", element="mu")
        if self.hessian not in ("fd", "analytic"):
            raise ValidationError(f"hessian must be 'fd' or 'analytic', got {self.hessian!r}", element="hessian")
        if self.threads is not None and self.threads < 1:
            raise ValidationError(f"threads must be >= 1, got {self.threads}", element="threads")
        return self

    def with_overrides(self, **overrides: Any) -> "RunConfig":
        return replace(self, **{k: v for k, v in overrides.items() if v is not None})

    def to_dict(self) -> dict:
        return asdict(self)


_FIELD_TYPES = {f.name: f.type for f in fields(RunConfig)}


def _coerce(name: str, raw: Any) -> Any:
    if not isinstance(raw, str):
        return raw
    text = raw.strip()
    kind = _FIELD_TYPES[name]
    optional = kind.startswith("Optional")
    if optional and text.lower() in ("", "none", "null"):
        return None
    try:
        if "bool" in kind:
            if text.lower() in _TRUE:
                return True
            if text.lower() in _FALSE:
                return False
            raise ValueError(text)
        if "int" in kind:
            return int(text)
        if "float" in kind:
            return float(text)
    except ValueError as exc:
        raise ValidationError(f"cannot interpret {text!r} for {name}", element=name) from exc
    return text


def load_config_file(path: str | Path) -> dict[str, Any]:
    """``key = value`` lines; ``#`` starts a comment, dashes in keys become underscores."""
    path = Path(path)
    if not path.exists():
        raise FileNotFoundError(path)
    values: dict[str, Any] = {}
    for lineno, raw in enumerate(path.read_text(encoding="utf-8").splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ParseError(f"expected 'key = value', got {raw.strip()!r}", path=str(path), line=lineno)
        key, value = (part.strip() for part in line.split("=", 1))
        key = key.lower().replace("-", "_")
        if key not in _FIELD_TYPES:
            raise ParseError(f"unknown configuration key {key!r}", path=str(path), line=lineno)
        values[key] = _coerce(key, value)
    return values


def _from_env(environ: Mapping[str, str]) -> dict[str, Any]:
    values: dict[str, Any] = {}
    for name in _FIELD_TYPES:
        raw = environ.get(ENV_PREFIX + name.upper())
        if raw is not None:
            values[name] = _coerce(name, raw)
    return values


def resolve_config(
    overrides: Optional[Mapping[str, Any]] = None,
    config_file: Optional[str | Path] = None,
    environ: Optional[Mapping[str, str]] = None,
) -> RunConfig:
    """Merge all configuration sources and validate the result.

    ``None`` values in ``overrides`` mean "flag not given".
    """
    if environ is None:
        load_dotenv(find_dotenv(usecwd=True), override=False)
        environ = os.environ
    values = _from_env(environ)
    if config_file is not None:
        values.update(load_config_file(config_file))
    for key, value in (overrides or {}).items():
        if value is not None:
            values[key] = _coerce(key, value)
    config = RunConfig(**values).validate()
    logger.debug("Resolved configuration: %s", config)
    return config


def thread_limit(config: Optional[RunConfig] = None) -> int:
    """Worker count: ``config.threads``, else ``SYMMETRIA_THREADS``, else the CPU count."""
    if config is not None and config.threads is not None:
        return config.threads
    raw = os.getenv(ENV_PREFIX + "THREADS")
    if raw:
        try:
            value = int(raw)
        except ValueError as exc:
            raise ValidationError(f"SYMMETRIA_THREADS must be an integer, got {raw!r}", element="threads") from exc
        if value >= 1:
            return value
    return os.cpu_count() or 1
