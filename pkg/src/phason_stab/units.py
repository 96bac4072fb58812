"""Parsing of unit-annotated quantities such as ``"0.05GPa"`` or ``"5100 kg/m^3"``.

Only the handful of dimensions the model needs are known.  Values come back
in SI.  Bare numbers are rejected for dimensional quantities.
"""

from __future__ import annotations

import re

from .errors import ConfigError

__all__ = ["DIMENSIONS", "parse_quantity", "format_quantity"]

_PREFIX = {"": 1.0, "k": 1e3, "M": 1e6, "G": 1e9}

# dimension -> {normalized unit spelling: factor to SI}
DIMENSIONS: dict[str, dict[str, float]] = {
    "stress": {f"{p}Pa": f for p, f in _PREFIX.items()},
    "stress/area": {f"{p}Pa/m^2": f for p, f in _PREFIX.items()},
    "friction": {f"{p}Pa*s/m^2": f for p, f in _PREFIX.items()},
    "density": {"kg/m^3": 1.0, "g/cm^3": 1e3},
    "wavenumber": {"1/m": 1.0, "rad/m": 1.0},
    "time": {"s": 1.0, "ms": 1e-3},
    "frequency": {"rad/s": 1.0, "1/s": 1.0},
}

SI_UNIT = {
    "stress": "Pa",
    "stress/area": "Pa/m^2",
    "friction": "Pa*s/m^2",
    "density": "kg/m^3",
    "wavenumber": "1/m",
    "time": "s",
    "frequency": "rad/s",
}

_NUMBER = r"[-+]?(?:\d+\.?\d*|\.\d+)(?:[eE][-+]?\d+)?"
_QUANTITY = re.compile(rf"^\s*({_NUMBER})\s*(.*?)\s*$")


def _normalize_unit(unit: str) -> str:
    u = unit.replace(" ", "").replace("·", "*").replace("⋅", "*")
    u = u.replace("²", "^2").replace("³", "^3").replace("**", "^")
    u = re.sub(r"m(\d)", r"m^\1", u)
    u = u.replace("Pas/", "Pa*s/")
    return u


def parse_quantity(text, dimension: str) -> float:
    """Return the SI value of ``text`` interpreted in ``dimension``.

    >>> parse_quantity("0.05GPa", "stress")
    50000000.0
    """
    if dimension not in DIMENSIONS:
        raise ValueError(f"unknown dimension {dimension!r}")
    if not isinstance(text, str):
        raise ConfigError(f"{text!r} has no unit annotation (expected {dimension}, e.g. "
                          f"'{SI_UNIT[dimension]}')")
    m = _QUANTITY.match(text)
    if not m:
        raise ConfigError(f"cannot parse quantity {text!r}")
    number, unit = m.groups()
    if not unit:
        raise ConfigError(f"{text!r} has no unit annotation (expected {dimension})")
    unit = _normalize_unit(unit)
    table = DIMENSIONS[dimension]
    if unit not in table:
        raise ConfigError(
            f"unit {unit!r} in {text!r} is not a {dimension} unit; "
            f"known: {', '.join(sorted(table))}"
        )
    return float(number) * table[unit]


def format_quantity(value: float, dimension: str) -> str:
    return f"{value!r}{SI_UNIT[dimension]}"
