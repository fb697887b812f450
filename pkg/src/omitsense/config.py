"""Unit-annotated configuration documents.

A configuration is a small INI-style text file. Lines before the first
``[section]`` header belong to ``[device]``. Every physical value is written
as ``number unit``; lists are comma separated (``0, 1.428, 2.857 fg``) or a
``linspace(start, stop, n)`` followed by the unit.

Frequencies are angular by default: ``omega_m = 1.4 GHz`` is read as
1.4 rad/ns. Appending ``_over_2pi`` to a key marks an ordinary frequency,
which is multiplied by 2*pi on ingest (``kappa_over_2pi = 50 MHz``).
"""
from __future__ import annotations

import configparser
import math
import re
from dataclasses import dataclass, field

import numpy as np

from .errors import ConfigError

TWO_PI = 2.0 * math.pi

_FREQUENCY = {"Hz": 1e-9, "kHz": 1e-6, "MHz": 1e-3, "GHz": 1.0}
_LENGTH = {"nm": 1e3, "pm": 1.0}
_MASS = {"pg": 1.0, "fg": 1e-3}
_POWER = {"W": 1e12, "uW": 1e6, "nW": 1e3, "pW": 1.0}
_TIME = {"ns": 1.0, "us": 1e3}

# dimension names used by the key schema
FREQ, LENGTH, MASS, POWER, TIME, COUPLING, NUMBER = (
    "frequency", "length", "mass", "power", "time", "coupling", "number",
)

DEVICE_KEYS = {
    "m_eff": MASS,
    "omega_m": FREQ,
    "gamma_m": FREQ,
    "kappa": FREQ,
    "kappa_ex": FREQ,
    "g_coupling": COUPLING,
    "pump_wavelength": LENGTH,
    "pump_power": POWER,
    "probe_power": POWER,
    "detuning_bar_target": FREQ,
}

SECTION_KEYS = {
    "device": DEVICE_KEYS,
    "steady": {"powers": POWER, "reference_power": POWER},
    "spectrum": {"dprime": FREQ},
    "kst": {"kappa": FREQ, "shift": FREQ},
    "beta": {"kappa": FREQ, "g_eps_scale": NUMBER},
    "linearity": {"kappa": FREQ, "threshold": MASS},
    "simulation": {
        "duration": TIME,
        "transient_cut": TIME,
        "solver_rel_tol": NUMBER,
        "solver_abs_tol": NUMBER,
        "record_stride": NUMBER,
        "mass": MASS,
    },
    "sense": {"masses": MASS, "workers": NUMBER},
}

_LINSPACE = re.compile(r"^linspace\(\s*([^,]+),\s*([^,]+),\s*([^,)]+)\s*\)$")


def unit_scale(unit, dimension, angular=True, key=None):
    """Factor converting a value in ``unit`` to internal units."""
    if dimension == NUMBER:
        if unit:
            raise ConfigError(f"unexpected unit {unit!r} for a plain number", key=key)
        return 1.0
    if not unit:
        raise ConfigError("value needs a unit", key=key)
    if dimension == FREQ:
        if unit == "rad/ns":
            if not angular:
                raise ConfigError("rad/ns is an angular unit; drop the _over_2pi suffix", key=key)
            return 1.0
        if unit in _FREQUENCY:
            return _FREQUENCY[unit] * (1.0 if angular else TWO_PI)
    elif dimension == COUPLING:
        if unit == "rad/ns/pm":
            return 1.0
        num, _, den = unit.partition("/")
        if num in _FREQUENCY and den in _LENGTH:
            return _FREQUENCY[num] / _LENGTH[den]
    else:
        table = {LENGTH: _LENGTH, MASS: _MASS, POWER: _POWER, TIME: _TIME}[dimension]
        if unit in table:
            return table[unit]
    raise ConfigError(f"unknown unit {unit!r} for a {dimension}", key=key)


def _to_float(text, key):
    try:
        return float(text)
    except ValueError:
        raise ConfigError(f"cannot parse number {text!r}", key=key) from None


def parse_value(text, dimension, angular=True, key=None):
    """Parse ``'<numbers> [unit]'`` into a float or a 1-D array (internal units)."""
    text = text.strip()
    if not text:
        raise ConfigError("empty value", key=key)
    body, unit = text, ""
    head, _, tail = text.rpartition(" ")
    if head and not _looks_numeric(tail):
        body, unit = head.strip(), tail.strip()
    scale = unit_scale(unit, dimension, angular=angular, key=key)
    match = _LINSPACE.match(body)
    if match:
        start, stop, num = (_to_float(g, key) for g in match.groups())
        if num < 1 or num != int(num):
            raise ConfigError("linspace needs a positive integer count", key=key)
        return np.linspace(start, stop, int(num)) * scale
    if "," in body:
        items = [s for s in (p.strip() for p in body.split(",")) if s]
        return np.array([_to_float(s, key) for s in items]) * scale
    return _to_float(body, key) * scale


def _looks_numeric(token):
    try:
        float(token.rstrip(","))
        return True
    except ValueError:
        return token.endswith(")")


@dataclass
class ConfigDocument:
    """Parsed configuration: ``sections[name][key]`` in internal units."""

    sections: dict = field(default_factory=dict)
    text: str = ""

    def section(self, name):
        return self.sections.get(name, {})

    def get(self, section, key, default=None):
        return self.sections.get(section, {}).get(key, default)

    def has(self, section, key):
        return key in self.sections.get(section, {})


def parse_config(text):
    """Parse configuration text; unknown sections or keys are rejected."""
    parser = configparser.ConfigParser(
        interpolation=None, strict=False, comment_prefixes=("#", ";"), inline_comment_prefixes=("#",)
    )
    parser.optionxform = str
    try:
        parser.read_string("[device]\n" + text)
    except configparser.Error as exc:
        raise ConfigError(f"malformed config: {exc}") from None

    sections = {}
    for name in parser.sections():
        if name not in SECTION_KEYS:
            raise ConfigError(f"unknown section [{name}]", key=name)
        schema = SECTION_KEYS[name]
        out = {}
        for raw_key, raw_value in parser.items(name):
            key, angular = raw_key, True
            if raw_key.endswith("_over_2pi"):
                key, angular = raw_key[: -len("_over_2pi")], False
            if key not in schema:
                raise ConfigError(f"unknown key in [{name}]", key=raw_key)
            dim = schema[key]
            if not angular and dim != FREQ:
                raise ConfigError("_over_2pi only applies to frequencies", key=raw_key)
            if key in out:
                raise ConfigError("given twice (with and without _over_2pi)", key=raw_key)
            out[key] = parse_value(raw_value, dim, angular=angular, key=raw_key)
        sections[name] = out
    return ConfigDocument(sections=sections, text=text)


def load_config(path):
    with open(path, encoding="utf-8") as fh:
        return parse_config(fh.read())


_SERIAL_UNITS = {
    MASS: "pg", FREQ: "rad/ns", LENGTH: "pm", POWER: "pW", COUPLING: "rad/ns/pm",
}


def format_params(params):
    """Render :class:`~omitsense.model.SystemParams` as config text in internal units.

    Floats are written with ``repr`` so that re-parsing is exact.
    """
    lines = ["[device]"]
    for key, dim in DEVICE_KEYS.items():
        value = getattr(params, key)
        if value is None:
            continue
        lines.append(f"{key} = {float(value)!r} {_SERIAL_UNITS[dim]}")
    return "\n".join(lines) + "\n"
