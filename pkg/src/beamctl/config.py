"""Experiment config files: one flat `key = value` pair per line.

Flat on purpose: every run is describable by a handful of scalars, and a
flat file diffs cleanly between runs.  Full-line comments start with '#'.
Keys are typed per command; unknown keys, duplicates, type mismatches and
missing required keys are all rejected with the offending line number.

xi is written as a rational 'p/q' so the strategic test stays exact; only
the simulate command also accepts a bare float.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import ConfigError
from .modal import ModalState

__all__ = ["ExperimentConfig", "parse_config", "initial_state", "COMMANDS"]

COMMANDS = ("simulate", "observability", "strategic-check", "control", "sweep")

_PRESETS = ("smooth-decay", "single-mode", "coeffs")


def _parse_int(text: str) -> int:
    return int(text, 10)


def _parse_float(text: str) -> float:
    value = float(text)
    if not math.isfinite(value):
        raise ValueError("value must be finite")
    return value


def _parse_rational(text: str) -> tuple[int, int]:
    if "/" not in text:
        raise ValueError("expected a rational like 1/3")
    num_s, den_s = text.split("/", 1)
    num, den = int(num_s.strip(), 10), int(den_s.strip(), 10)
    if den <= 0:
        raise ValueError("denominator must be positive")
    if not 0 < num < den:
        raise ValueError(f"{num}/{den} must lie strictly inside (0, 1)")
    g = math.gcd(num, den)
    return num // g, den // g


def _parse_point(text: str):
    # rational preferred; floats tolerated for plain simulation points
    if "/" in text:
        return _parse_rational(text)
    value = _parse_float(text)
    if not 0.0 < value < 1.0:
        raise ValueError(f"point {value} must lie strictly inside (0, 1)")
    return value


def _parse_int_list(text: str) -> tuple[int, ...]:
    items = [s.strip() for s in text.split(",") if s.strip()]
    if not items:
        raise ValueError("expected a comma-separated list of integers")
    return tuple(int(s, 10) for s in items)


def _parse_float_list(text: str) -> tuple[float, ...]:
    items = [s.strip() for s in text.split(",") if s.strip()]
    if not items:
        raise ValueError("expected a comma-separated list of numbers")
    return tuple(float(s) for s in items)


def _parse_data_spec(text: str) -> tuple[str, int | None]:
    parts = text.split()
    kind = parts[0]
    if kind not in _PRESETS:
        raise ValueError(f"data preset must be one of {_PRESETS}, got {kind!r}")
    if kind == "single-mode":
        if len(parts) != 2:
            raise ValueError("single-mode needs a mode index, e.g. 'single-mode 3'")
        k = int(parts[1], 10)
        if k < 0:
            raise ValueError("mode index must be nonnegative")
        return kind, k
    if len(parts) != 1:
        raise ValueError(f"preset {kind!r} takes no arguments")
    return kind, None


def _choice(*options: str):
    def parse(text: str) -> str:
        if text not in options:
            raise ValueError(f"expected one of {options}, got {text!r}")
        return text

    return parse


# key -> (parser, required, default); defaults are applied after parsing.
_COMMON = {
    "m_modes": (_parse_int, False, 16),
    "T": (_parse_float, False, 2.0),
}

_DATA_KEYS = {
    "data": (_parse_data_spec, False, ("smooth-decay", None)),
    "data_a": (_parse_float_list, False, None),
    "data_beta": (_parse_float_list, False, None),
}

_SCHEMAS: dict[str, dict] = {
    "simulate": {
        **_COMMON,
        **_DATA_KEYS,
        "xi": (_parse_point, True, None),
        "grid": (_parse_int, False, 2048),
    },
    "observability": {
        **_COMMON,
        "xi": (_parse_rational, True, None),
        "n": (_parse_int, True, None),
        "m_max": (_parse_int, False, 32),
        "b_step": (_parse_float, False, 0.01),
        "t_step": (_parse_float, False, 0.01),
        "t_max": (_parse_float, False, 10.0),
    },
    "strategic-check": {
        "xi": (_parse_rational, True, None),
    },
    "control": {
        **_COMMON,
        **_DATA_KEYS,
        "xi": (_parse_rational, True, None),
        "region": (_choice("internal", "pointwise"), False, "internal"),
        "n": (_parse_int, False, None),
        "epsilon": (_parse_float, False, None),
        "grid": (_parse_int, False, 2048),
    },
    "sweep": {
        **_COMMON,
        **_DATA_KEYS,
        "xi": (_parse_rational, True, None),
        "n_list": (_parse_int_list, True, None),
        "epsilon": (_parse_float, False, None),
        "grid": (_parse_int, False, 2048),
    },
}


@dataclass(frozen=True)
class ExperimentConfig:
    """Typed parameters for one command run plus provenance for messages."""

    command: str
    path: str
    values: dict = field(default_factory=dict)
    lines: dict = field(default_factory=dict)

    def __getitem__(self, key: str):
        return self.values[key]

    def get(self, key: str, default=None):
        return self.values.get(key, default)

    def line_of(self, key: str) -> int | None:
        return self.lines.get(key)


def parse_config(path, command: str) -> ExperimentConfig:
    """Read and validate a config file against the command's schema."""
    if command not in _SCHEMAS:
        raise ConfigError(f"unknown command {command!r}; expected one of {COMMANDS}")
    schema = _SCHEMAS[command]
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read config: {exc}", path=str(path)) from None
    values: dict = {}
    lines: dict = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if "=" not in line:
            raise ConfigError(
                f"expected 'key = value', got {line!r}", line=lineno, path=str(path)
            )
        key, _, value_text = line.partition("=")
        key = key.strip()
        value_text = value_text.strip()
        if key not in schema:
            raise ConfigError(
                f"unknown key {key!r} for command {command!r}", line=lineno, path=str(path)
            )
        if key in values:
            raise ConfigError(f"duplicate key {key!r}", line=lineno, path=str(path))
        parser = schema[key][0]
        try:
            values[key] = parser(value_text)
        except ValueError as exc:
            raise ConfigError(
                f"bad value for {key!r}: {exc}", line=lineno, path=str(path)
            ) from None
        lines[key] = lineno
    for key, (_, required, default) in schema.items():
        if key in values:
            continue
        if required:
            raise ConfigError(f"missing required key {key!r}", path=str(path))
        if default is not None:
            values[key] = default
    _validate_semantics(command, values, lines, str(path))
    return ExperimentConfig(command, str(path), values, lines)


def _validate_semantics(command: str, values: dict, lines: dict, path: str) -> None:
    def err(key: str, message: str):
        raise ConfigError(message, line=lines.get(key), path=path)

    if "m_modes" in values and values["m_modes"] < 1:
        err("m_modes", "m_modes must be at least 1")
    if "T" in values and not values["T"] > 0:
        err("T", "T must be positive")
    if "grid" in values and values["grid"] < 2:
        err("grid", "grid must have at least 2 samples")
    if "n" in values and values.get("n") is not None and values["n"] < 1:
        err("n", "n must be a positive integer")
    if "epsilon" in values and values.get("epsilon") is not None and values["epsilon"] < 0:
        err("epsilon", "epsilon must be nonnegative")
    if command == "control":
        if values["region"] == "internal" and values.get("n") is None:
            raise ConfigError(
                "internal control needs a window size key 'n'", path=path
            )
    if command == "sweep":
        ns = values["n_list"]
        if any(n < 1 for n in ns):
            err("n_list", "window sizes must be positive integers")
        if any(b <= a for a, b in zip(ns, ns[1:])):
            err("n_list", "n_list must be strictly increasing")
    if command == "observability":
        for key in ("b_step", "t_step", "t_max"):
            if not values[key] > 0:
                err(key, f"{key} must be positive")
        if values["m_max"] < 1:
            err("m_max", "m_max must be at least 1")
    data = values.get("data")
    if data is not None:
        kind, _ = data
        if kind == "coeffs" and values.get("data_a") is None:
            raise ConfigError("data = coeffs needs a data_a list", path=path)
        if kind != "coeffs" and (
            values.get("data_a") is not None or values.get("data_beta") is not None
        ):
            raise ConfigError(
                "data_a/data_beta are only meaningful with data = coeffs", path=path
            )
    da, db = values.get("data_a"), values.get("data_beta")
    if da is not None and db is not None and len(da) != len(db):
        err("data_beta", "data_a and data_beta must have the same length")


def initial_state(config: ExperimentConfig, m_modes: int) -> ModalState:
    """Build the initial data the config describes, padded to m_modes."""
    kind, arg = config.get("data", ("smooth-decay", None))
    if kind == "smooth-decay":
        a = 1.0 / (np.arange(m_modes) + 1.0) ** 2
        return ModalState(a, np.zeros(m_modes))
    if kind == "single-mode":
        if arg >= m_modes:
            raise ConfigError(
                f"single-mode index {arg} is outside the truncation {m_modes}",
                line=config.line_of("data"),
                path=config.path,
            )
        a = np.zeros(m_modes)
        a[arg] = 1.0
        return ModalState(a, np.zeros(m_modes))
    # coeffs
    da = config.get("data_a")
    db = config.get("data_beta")
    if len(da) > m_modes:
        raise ConfigError(
            f"data_a holds {len(da)} modes, truncation is {m_modes}",
            line=config.line_of("data_a"),
            path=config.path,
        )
    a = np.zeros(m_modes)
    a[: len(da)] = da
    beta = np.zeros(m_modes)
    if db is not None:
        beta[: len(db)] = db
    return ModalState(a, beta)
