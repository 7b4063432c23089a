"""
Run configuration: a strict key = value text format.

Grammar
-------
::

    file     := line*
    line     := blank | comment | section | entry
    comment  := ('#' | ';') text
    section  := '[' name ']'          name in SECTIONS, purely for grouping
    entry    := key '=' value         key in KEYS, at most once per file

Keys share one namespace regardless of section. Lists are comma separated.
Booleans accept true/false, yes/no, on/off, 1/0. Every error names the line.
"""

import math
from dataclasses import dataclass, fields

from .errors import ConfigError

COMMANDS = ("kernel", "invert", "response", "fdt", "commutator", "correlator", "simulate")
FAMILIES = ("exp-cutoff", "gaussian-cutoff", "tabulated")
METHODS = ("volterra", "laplace", "both")
SECTIONS = ("run", "coupling", "model", "numerics", "grids", "simulation", "output")


def _float(text):
    value = float(text)
    if not math.isfinite(value):
        raise ValueError("must be finite")
    return value


def _int(text):
    value = float(text)
    if value != int(value):
        raise ValueError("must be an integer")
    return int(value)


def _bool(text):
    low = text.lower()
    if low in ("true", "yes", "on", "1"):
        return True
    if low in ("false", "no", "off", "0"):
        return False
    raise ValueError("must be a boolean (true/false)")


def _floats(text):
    parts = [p.strip() for p in text.split(",") if p.strip()]
    if not parts:
        raise ValueError("must be a non-empty comma-separated list")
    return tuple(_float(p) for p in parts)


def _text(text):
    if not text:
        raise ValueError("must not be empty")
    return text


def _choice(options):
    def parse(text):
        if text not in options:
            raise ValueError(f"must be one of {', '.join(options)}")
        return text

    return parse


def _optional(parse):
    def wrapped(text):
        return None if text.lower() in ("auto", "none", "") else parse(text)

    return wrapped


def _positive(v):
    return v is None or v > 0


def _nonneg(v):
    return v is None or v >= 0


def _at_least(n):
    return lambda v: v >= n


# key -> (parser, check, description of the admissible range)
KEYS = {
    "command": (_choice(COMMANDS), None, ""),
    "family": (_choice(FAMILIES), None, ""),
    "lambda": (_float, _nonneg, ">= 0"),
    "cutoff": (_float, _positive, "> 0"),
    "table": (_optional(_text), None, ""),
    "m": (_float, _positive, "> 0"),
    "k": (_float, None, ""),
    "u_max": (_float, _positive, "> 0"),
    "u_count": (_int, _at_least(2), ">= 2"),
    "kernel_table": (_optional(_text), None, ""),
    "omega_min": (_optional(_float), _nonneg, ">= 0"),
    "omega_max": (_optional(_float), _positive, "> 0"),
    "omega_count": (_int, _at_least(1), ">= 1"),
    "method": (_choice(METHODS), None, ""),
    "t_max": (_float, _positive, "> 0"),
    "dt": (_optional(_float), _positive, "> 0"),
    "laplace_nodes": (_int, _at_least(16), ">= 16"),
    "tol": (_float, lambda v: 0 < v < 1, "in (0, 1)"),
    "output_count": (_int, _at_least(2), ">= 2"),
    "k_values": (_floats, None, ""),
    "omega_offsets": (_floats, lambda v: all(x > 1e-6 for x in v), "all > 1e-6"),
    "dx_values": (_floats, None, ""),
    "dt_values": (_floats, None, ""),
    "k_cut": (_float, _positive, "> 0"),
    "k_max": (_float, _positive, "> 0"),
    "nx": (_int, lambda v: v >= 4 and not v & (v - 1), "a power of two >= 4"),
    "dx": (_float, _positive, "> 0"),
    "sim_dt": (_float, _positive, "> 0"),
    "T": (_float, _positive, "> 0"),
    "n_omega": (_int, _at_least(1), ">= 1"),
    "reservoir_omega_max": (_float, _positive, "> 0"),
    "k_mode": (_int, _nonneg, ">= 0"),
    "noise": (_bool, None, ""),
    "band": (_int, _nonneg, ">= 0"),
    "record_dt": (_float, _positive, "> 0"),
    "seed": (_int, _nonneg, ">= 0"),
    "out": (_text, None, ""),
    "figures": (_bool, None, ""),
}


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration; every field has a documented default."""

    command: str
    family: str = "exp-cutoff"
    lam: float = 1.0
    cutoff: float = 1.0
    table: str = None
    m: float = 1.0
    k: float = 0.0
    u_max: float = 10.0
    u_count: int = 201
    kernel_table: str = None
    omega_min: float = None
    omega_max: float = None
    omega_count: int = 16
    method: str = "both"
    t_max: float = 20.0
    dt: float = None
    laplace_nodes: int = 32
    tol: float = 1e-12
    output_count: int = 200
    k_values: tuple = (0.0, 0.5, 1.0)
    omega_offsets: tuple = (0.1, 0.5, 1.0, 2.0)
    dx_values: tuple = (-2.0, -1.0, 0.0, 1.0, 2.0)
    dt_values: tuple = (-1.9, -0.95, 0.0, 0.95, 1.9)
    k_cut: float = 200.0
    k_max: float = 20.0
    nx: int = 256
    dx: float = 0.1
    sim_dt: float = 0.005
    T: float = 10.0
    n_omega: int = 200
    reservoir_omega_max: float = 20.0
    k_mode: int = 1
    noise: bool = False
    band: int = 8
    record_dt: float = 0.05
    seed: int = 0
    out: str = "out"
    figures: bool = True

    def replace(self, **changes):
        values = {f.name: getattr(self, f.name) for f in fields(self)}
        values.update(changes)
        return RunConfig(**values)


# config key -> dataclass field, where the names differ
_FIELD = {"lambda": "lam"}
_KEY = {v: k for k, v in _FIELD.items()}


def _check_cross(values, lines):
    if values.get("family") == "tabulated" and not values.get("table"):
        raise ConfigError("family=tabulated needs a 'table' path", lines.get("family"), "family")
    lo, hi = values.get("omega_min"), values.get("omega_max")
    if lo is not None and hi is not None and not lo < hi:
        raise ConfigError("omega_min must be below omega_max", lines.get("omega_min"), "omega_min")


def parse_config(text, command=None):
    """
    Parse configuration text into a RunConfig.

    Parameters
    ----------
    text : str
    command : str, optional
        Command supplied elsewhere (e.g. on the command line). A differing
        ``command`` key in the text is an error.

    Raises
    ------
    ConfigError
        On any syntax error, unknown or repeated key, or out-of-range value;
        the message starts with the line number.
    """
    values, lines = {}, {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line[0] in "#;":
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError(f"malformed section header {line!r}", lineno)
            name = line[1:-1].strip()
            if name not in SECTIONS:
                raise ConfigError(f"unknown section [{name}]; expected one of {', '.join(SECTIONS)}", lineno)
            continue
        if "=" not in line:
            raise ConfigError(f"expected 'key = value', got {line!r}", lineno)
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key not in KEYS:
            raise ConfigError(f"unknown key {key!r}", lineno, key)
        if key in values:
            raise ConfigError(f"key {key!r} repeated (first on line {lines[key]})", lineno, key)
        parse, check, allowed = KEYS[key]
        try:
            parsed = parse(value)
        except ValueError as exc:
            raise ConfigError(f"{key!r}: {value!r} {exc}", lineno, key) from None
        if check is not None and parsed is not None and not check(parsed):
            raise ConfigError(f"{key!r} must be {allowed}, got {value}", lineno, key)
        values[key] = parsed
        lines[key] = lineno
    if command is not None:
        if "command" in values and values["command"] != command:
            raise ConfigError(
                f"config says command={values['command']} but {command} was requested", lines["command"], "command"
            )
        values["command"] = command
    if "command" not in values:
        raise ConfigError("missing required key 'command'", None, "command")
    _check_cross(values, lines)
    return RunConfig(**{_FIELD.get(k, k): v for k, v in values.items()})


def _format(value):
    if value is None:
        return "auto"
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, tuple):
        return ", ".join(repr(float(v)) for v in value)
    return str(value)


def serialize(cfg, skip=()):
    """Text form of a RunConfig listing every key; `parse_config` reads it back equal.

    Keys named in `skip` are left out (their defaults apply on re-reading).
    """
    out = []
    for f in fields(cfg):
        if _KEY.get(f.name, f.name) in skip:
            continue
        out.append(f"{_KEY.get(f.name, f.name)} = {_format(getattr(cfg, f.name))}")
    return "\n".join(out) + "\n"
