from __future__ import annotations

import math
import re
from typing import TYPE_CHECKING

import numpy as np
from scipy import constants

if TYPE_CHECKING:  # pragma: no cover
    from .models import FrequencyGrid

# Magnus coefficients over liquid water (Buck form, as used for ITU humidity conversions).
_MAGNUS_A = 6.1121
_MAGNUS_B = 18.678
_MAGNUS_C = 257.14
_MAGNUS_D = 234.5

_GRID_PATTERN = re.compile(r"^\s*(?P<start>[^:]+):(?P<stop>[^:]+):(?P<n>[^:]+)\s*$")
_SI_SUFFIXES = {"": 1.0, "k": 1e3, "M": 1e6, "G": 1e9, "T": 1e12}
_FREQUENCY_PATTERN = re.compile(r"^(?P<value>[-+0-9.eE]+)\s*(?P<prefix>[kMGT]?)(?:Hz)?$")


class RangeError(ValueError):
    """Raised when a value lies outside the validity range of a model."""


def format_float(value: float) -> str:
    """Format ``value`` in scientific notation with nine significant digits.

    The representation does not depend on the active locale, which keeps the
    CSV outputs byte-identical across machines.
    """

    return f"{float(value):.8e}"


def parse_frequency(value: str) -> float:
    """Parse ``value`` as a frequency in Hz, accepting ``k``/``M``/``G``/``T`` prefixes."""

    raw = value.strip()
    match = _FREQUENCY_PATTERN.match(raw)
    if not match:
        raise ValueError(f"Invalid frequency '{value}'")
    try:
        number = float(match.group("value"))
    except ValueError as exc:
        raise ValueError(f"Invalid frequency '{value}'") from exc
    return number * _SI_SUFFIXES[match.group("prefix")]


def parse_grid_spec(spec: str) -> "FrequencyGrid":
    """Parse ``f_start:f_stop:n`` into a :class:`FrequencyGrid`."""

    from .models import FrequencyGrid

    match = _GRID_PATTERN.match(spec)
    if not match:
        raise ValueError(f"Invalid grid spec '{spec}', expected f_start:f_stop:n")
    try:
        n_points = int(match.group("n"))
    except ValueError as exc:
        raise ValueError(f"Invalid point count in grid spec '{spec}'") from exc
    f_start = parse_frequency(match.group("start"))
    f_stop = parse_frequency(match.group("stop"))
    return FrequencyGrid(f_start=f_start, f_stop=f_stop, n_points=n_points)


def db_to_linear(value_db: float | np.ndarray) -> float | np.ndarray:
    result = np.power(10.0, np.asarray(value_db, dtype=float) / 10.0)
    return float(result) if result.ndim == 0 else result


def linear_to_db(value: float | np.ndarray) -> float | np.ndarray:
    array = np.asarray(value, dtype=float)
    if np.any(array <= 0):
        raise ValueError("linear_to_db requires positive values")
    result = 10.0 * np.log10(array)
    return float(result) if result.ndim == 0 else result


def saturation_vapor_pressure_hpa(temperature_k: float) -> float:
    """Saturation water vapour pressure over liquid water in hPa (Magnus form)."""

    t_c = temperature_k - 273.15
    return _MAGNUS_A * math.exp((_MAGNUS_B - t_c / _MAGNUS_D) * t_c / (_MAGNUS_C + t_c))


def wavenumber_to_hz(wavenumber_cm: float | np.ndarray) -> float | np.ndarray:
    return wavenumber_cm * constants.c * 100.0


def hz_to_wavenumber(frequency_hz: float | np.ndarray) -> float | np.ndarray:
    return frequency_hz / (constants.c * 100.0)
