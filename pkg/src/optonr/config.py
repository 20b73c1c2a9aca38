"""Run configuration: unit-suffixed keys in laboratory units.

Two equivalent text forms are accepted: a JSON object, or ``key = value``
pairs separated by newlines or commas (``#`` starts a comment).  Frequencies
are ordinary frequencies (nu = omega / 2 pi); every dimensional key carries
its unit as a suffix, e.g. ``J_GHz``, ``p_in_mW``, ``omega_d_THz``.
"""
from __future__ import annotations

import json
import math
import re
from dataclasses import dataclass, field, fields, replace

from .model import TWO_PI, SystemParams

FREQ_UNITS = {"THz": 1e12, "GHz": 1e9, "MHz": 1e6, "kHz": 1e3, "Hz": 1.0}
POWER_UNITS = {"W": 1.0, "mW": 1e-3, "uW": 1e-6}

# quantity -> (kind, canonical unit)
QUANTITIES = {
    "omega_d": ("freq", "THz"),
    "gamma1": ("freq", "GHz"),
    "gamma2": ("freq", "GHz"),
    "J": ("freq", "GHz"),
    "omega_m": ("freq", "GHz"),
    "delta1": ("freq", "GHz"),
    "delta2": ("freq", "GHz"),
    "g": ("freq", "MHz"),
    "gamma_m": ("freq", "MHz"),
    "p_in": ("power", "mW"),
    "power_start": ("power", "mW"),
    "power_stop": ("power", "mW"),
    "detuning_start": ("freq", "GHz"),
    "detuning_stop": ("freq", "GHz"),
}
DIMENSIONLESS = {"eta1": float, "eta2": float, "points": int}
CHOICES = {
    "sweep_axis": ("power", "detuning"),
    "traversal": ("up", "down", "both"),
    "direction": ("forward", "backward", "both"),
    "spacing": ("linear", "log"),
    "branch": ("lowest", "highest", "continued"),
    "format": ("csv", "json"),
}
STRINGS = {"out"}


class ConfigError(ValueError):
    def __init__(self, message: str, key: str | None = None, line: int | None = None):
        where = []
        if key is not None:
            where.append(f"key {key!r}")
        if line is not None:
            where.append(f"line {line}")
        super().__init__(f"{', '.join(where)}: {message}" if where else message)
        self.key = key
        self.line = line


@dataclass(frozen=True)
class RunConfig:
    """Canonical laboratory-unit configuration; field names are the canonical keys."""

    omega_d_THz: float = 200.0
    gamma1_GHz: float = 1.0
    gamma2_GHz: float = 1.0
    eta1: float = 0.7
    eta2: float = 0.7
    J_GHz: float = 3.0
    g_MHz: float = 0.8
    omega_m_GHz: float = 6.0
    gamma_m_MHz: float = 5.0
    delta1_GHz: float = 4.0
    delta2_GHz: float = 4.0
    p_in_mW: float = 15.0
    sweep_axis: str = "power"
    power_start_mW: float = 0.0
    power_stop_mW: float = 50.0
    detuning_start_GHz: float = -10.0
    detuning_stop_GHz: float = 15.0
    points: int = 401
    spacing: str = "linear"
    traversal: str = "both"
    direction: str = "both"
    branch: str = "continued"
    format: str = "csv"
    out: str = ""
    explicit: frozenset = field(default=frozenset(), compare=False, repr=False)

    def params(self) -> SystemParams:
        ghz, mhz = TWO_PI * 1e9, TWO_PI * 1e6
        return SystemParams(
            omega_d=TWO_PI * 1e12 * self.omega_d_THz,
            gamma1=ghz * self.gamma1_GHz,
            gamma2=ghz * self.gamma2_GHz,
            eta1=self.eta1,
            eta2=self.eta2,
            J=ghz * self.J_GHz,
            g=mhz * self.g_MHz,
            omega_m=ghz * self.omega_m_GHz,
            gamma_m=mhz * self.gamma_m_MHz,
            delta1=ghz * self.delta1_GHz,
            delta2=ghz * self.delta2_GHz,
        )

    @property
    def p_in(self) -> float:
        return self.p_in_mW * 1e-3

    def with_overrides(self, overrides: dict, mark_explicit: bool = False) -> "RunConfig":
        cfg = replace(self, **overrides)
        if mark_explicit:
            cfg = replace(cfg, explicit=self.explicit | frozenset(overrides))
        return cfg

    def validate(self) -> "RunConfig":
        try:
            self.params()
        except ValueError as exc:
            name = str(exc).split(" ", 1)[0]
            key = _canonical_key(name) if name in QUANTITIES else name
            raise ConfigError(str(exc), key=key) from None
        if self.p_in_mW < 0:
            raise ConfigError("must be nonnegative", key="p_in_mW")
        if self.points < 2:
            raise ConfigError("a sweep needs at least two points", key="points")
        if self.power_start_mW < 0 or self.power_stop_mW < 0:
            raise ConfigError("sweep powers must be nonnegative", key="power_start_mW")
        return self


def _canonical_key(quantity: str) -> str:
    kind, unit = QUANTITIES[quantity]
    return f"{quantity}_{unit}"


_SUFFIX = re.compile(r"^(?P<q>.+?)_(?P<u>THz|GHz|MHz|kHz|Hz|mW|uW|W)$")


def _convert(key: str, value, line):
    """Map one raw key/value to (canonical field, canonical value)."""
    if key in DIMENSIONLESS:
        cast = DIMENSIONLESS[key]
        try:
            if isinstance(value, bool):
                raise TypeError
            v = cast(value)
            if cast is int and float(value) != v:
                raise ValueError
        except (TypeError, ValueError):
            raise ConfigError(f"expected a {cast.__name__}, got {value!r}", key, line) from None
        if cast is float and not math.isfinite(v):
            raise ConfigError("must be finite", key, line)
        if key in ("eta1", "eta2") and not (0.0 < v <= 1.0):
            raise ConfigError(f"out of range (0, 1]: {v!r}", key, line)
        return key, v
    if key in CHOICES:
        if value not in CHOICES[key]:
            raise ConfigError(f"expected one of {', '.join(CHOICES[key])}, got {value!r}", key, line)
        return key, value
    if key in STRINGS:
        return key, str(value)
    if key in QUANTITIES:
        raise ConfigError("missing unit suffix (e.g. " + _canonical_key(key) + ")", key, line)
    m = _SUFFIX.match(key)
    if not m or m.group("q") not in QUANTITIES:
        raise ConfigError("unknown key", key, line)
    quantity, unit = m.group("q"), m.group("u")
    kind, canonical = QUANTITIES[quantity]
    table = FREQ_UNITS if kind == "freq" else POWER_UNITS
    if unit not in table:
        raise ConfigError(f"unit {unit} does not apply to a {'frequency' if kind == 'freq' else 'power'}", key, line)
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"expected a number, got {value!r}", key, line)
    v = float(value)
    if not math.isfinite(v):
        raise ConfigError("must be finite", key, line)
    if unit != canonical:
        v = v * table[unit] / table[canonical]
    return f"{quantity}_{canonical}", v


def _parse_scalar(text: str):
    text = text.strip()
    if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
        return text[1:-1]
    try:
        return json.loads(text)
    except json.JSONDecodeError:
        return text


def _key_value_pairs(text: str):
    for lineno, raw in enumerate(text.splitlines(), start=1):
        body = raw.split("#", 1)[0]
        for chunk in body.split(","):
            chunk = chunk.strip()
            if not chunk:
                continue
            if "=" in chunk:
                key, value = chunk.split("=", 1)
            elif ":" in chunk:
                key, value = chunk.split(":", 1)
            else:
                raise ConfigError(f"expected 'key = value', got {chunk!r}", line=lineno)
            yield key.strip(), _parse_scalar(value), lineno


def _json_pairs(text: str):
    try:
        obj = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON: {exc.msg}", line=exc.lineno) from None
    if not isinstance(obj, dict):
        raise ConfigError("top level must be an object")
    lines = text.splitlines()
    for key, value in obj.items():
        lineno = next((i for i, l in enumerate(lines, start=1) if f'"{key}"' in l), None)
        yield key, value, lineno


def parse_config(text: str) -> RunConfig:
    """Parse configuration text; omitted keys take the baseline values."""
    stripped = text.strip()
    pairs = _json_pairs(stripped) if stripped.startswith("{") else _key_value_pairs(text)
    values: dict = {}
    where: dict = {}
    for key, value, lineno in pairs:
        name, v = _convert(key, value, lineno)
        if name in values:
            raise ConfigError(f"duplicate setting (first at line {where[name]})", key, lineno)
        values[name] = v
        where[name] = lineno
    cfg = RunConfig(**values, explicit=frozenset(values))
    try:
        return cfg.validate()
    except ConfigError as exc:
        if exc.key in where:
            raise ConfigError(str(exc).split(": ", 1)[-1], exc.key, where[exc.key]) from None
        raise


def load_config(path: str) -> RunConfig:
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


def emit(config: RunConfig) -> str:
    """Serialize to the JSON form; ``parse_config(emit(c)) == c``."""
    data = {f.name: getattr(config, f.name) for f in fields(config) if f.name != "explicit"}
    return json.dumps(data, indent=2) + "\n"
