from __future__ import annotations

import bisect
import io
import json
import logging
import math
from enum import Enum
from importlib import resources
from pathlib import Path
from typing import IO, Iterable, List, Sequence

from .models import (
    SATURATION_VALID_RANGE_K,
    AltitudeProfile,
    AtmosphereState,
    SpectralLine,
    Species,
    WeatherCoefficients,
    WeatherCondition,
    WeatherKind,
    saturation_vapor_density,
)
from .units import RangeError, hz_to_wavenumber

LOGGER = logging.getLogger(__name__)

__all__ = [
    "CatalogError",
    "CatalogFormat",
    "FieldParseError",
    "NoLinesInBandError",
    "RecordLengthError",
    "atmosphere_at",
    "builtin_catalog_bytes",
    "default_profile",
    "format_builtin_line",
    "indoor_state",
    "load_builtin_catalog",
    "load_catalog",
    "load_weather_coefficients",
    "parse_line_catalog",
    "parse_weather_condition",
    "saturation_vapor_density",
    "sea_surface_state",
    "serialize_builtin_table",
    "standard_state",
    "write_builtin_table",
]

HITRAN_RECORD_LENGTH = 160
MAX_LINE_WAVENUMBER = hz_to_wavenumber(15e12)

# (name, start, stop) byte offsets of the 160-character HITRAN 2004 record.
HITRAN_FIELDS: tuple[tuple[str, int, int], ...] = (
    ("molecule", 0, 2),
    ("isotopologue", 2, 3),
    ("wavenumber", 3, 15),
    ("intensity", 15, 25),
    ("einstein_a", 25, 35),
    ("gamma_air", 35, 40),
    ("gamma_self", 40, 45),
    ("lower_state_energy", 45, 55),
    ("n_air", 55, 59),
    ("delta_air", 59, 67),
)

BUILTIN_COLUMNS = (
    "species",
    "nu_cm",
    "S_ref",
    "gamma_air",
    "gamma_self",
    "n_air",
    "E_lower",
    "delta_air",
    "iso",
)

STANDARD_PRESSURE_ATM = 1.0
STANDARD_TEMPERATURE_K = 290.0
STANDARD_VAPOR_DENSITY = 7.5

PRESSURE_SCALE_HEIGHT_KM = 7.7
VAPOR_SCALE_HEIGHT_KM = 2.0
VAPOR_TAPER_KM = (10.0, 12.0)
LAPSE_RATE_K_KM = 6.5
TROPOPAUSE_KM = 11.0


class CatalogError(ValueError):
    """Raised when a line catalog cannot be parsed."""


class RecordLengthError(CatalogError):
    """Raised when a catalog record has the wrong length or column count."""

    def __init__(self, index: int, length: int, expected: str) -> None:
        super().__init__(f"record {index}: wrong record length {length} (expected {expected})")
        self.index = index
        self.length = length


class FieldParseError(CatalogError):
    """Raised when a numeric catalog field cannot be parsed."""

    def __init__(self, index: int, field: str, offset: int, raw: str) -> None:
        super().__init__(f"record {index}: cannot parse field '{field}' at offset {offset}: {raw!r}")
        self.index = index
        self.field = field
        self.offset = offset


class NoLinesInBandError(CatalogError):
    """Raised when no catalog line is left inside the requested band."""


class CatalogFormat(str, Enum):
    HITRAN_PAR = "hitran_par"
    BUILTIN_TABLE = "builtin_table"


def _decode(stream: IO[bytes] | bytes | str) -> str:
    if isinstance(stream, str):
        return stream
    data = stream if isinstance(stream, bytes) else stream.read()
    return data.decode("ascii")


def _isotopologue(raw: str, index: int) -> int:
    char = raw.strip()
    if char.isdigit():
        value = int(char)
        return 10 if value == 0 else value
    if len(char) == 1 and char.isalpha():
        return 11 + ord(char.upper()) - ord("A")
    raise FieldParseError(index, "isotopologue", 2, raw)


def _hitran_record(record: str, index: int) -> SpectralLine:
    values: dict[str, float] = {}
    for name, start, stop in HITRAN_FIELDS:
        raw = record[start:stop]
        if name == "isotopologue":
            continue
        try:
            values[name] = float(raw)
        except ValueError as exc:
            raise FieldParseError(index, name, start, raw) from exc
    try:
        return SpectralLine(
            species=int(values["molecule"]),
            isotopologue=_isotopologue(record[2:3], index),
            center_wavenumber=values["wavenumber"],
            intensity_ref=values["intensity"],
            air_halfwidth_ref=values["gamma_air"],
            self_halfwidth_ref=values["gamma_self"],
            temperature_exponent=values["n_air"],
            lower_state_energy=values["lower_state_energy"],
            pressure_shift=values["delta_air"],
        )
    except ValueError as exc:
        raise CatalogError(f"record {index}: {exc}") from exc


def _species_code(raw: str, index: int) -> int:
    try:
        return int(Species[raw.upper()])
    except KeyError:
        pass
    try:
        return int(raw)
    except ValueError as exc:
        raise FieldParseError(index, "species", 0, raw) from exc


def _builtin_record(record: str, index: int) -> SpectralLine:
    columns = record.split()
    if len(columns) not in (8, 9):
        raise RecordLengthError(index, len(columns), "8 or 9 columns")
    species = _species_code(columns[0], index)
    numbers: list[float] = []
    for position, (name, raw) in enumerate(zip(BUILTIN_COLUMNS[1:8], columns[1:8]), start=1):
        try:
            numbers.append(float(raw))
        except ValueError as exc:
            raise FieldParseError(index, name, position, raw) from exc
    isotopologue = 1
    if len(columns) == 9:
        try:
            isotopologue = int(columns[8])
        except ValueError as exc:
            raise FieldParseError(index, "iso", 8, columns[8]) from exc
    nu, intensity, gamma_air, gamma_self, n_air, e_lower, delta = numbers
    try:
        return SpectralLine(
            species=species,
            isotopologue=isotopologue,
            center_wavenumber=nu,
            intensity_ref=intensity,
            air_halfwidth_ref=gamma_air,
            self_halfwidth_ref=gamma_self,
            temperature_exponent=n_air,
            lower_state_energy=e_lower,
            pressure_shift=delta,
        )
    except ValueError as exc:
        raise CatalogError(f"record {index}: {exc}") from exc


def parse_line_catalog(
    stream: IO[bytes] | bytes | str,
    fmt: CatalogFormat | str = CatalogFormat.BUILTIN_TABLE,
    *,
    window: tuple[float, float] | None = None,
) -> List[SpectralLine]:
    """Parse a HITRAN ``.par`` stream or a builtin table into sorted lines.

    ``window`` is an inclusive ``(f_low, f_high)`` band in Hz; lines whose
    centre frequency falls outside it are dropped. Lines above 15 THz are
    always dropped.
    """

    fmt = CatalogFormat(fmt)
    text = _decode(stream)
    lines: List[SpectralLine] = []
    for index, raw in enumerate(text.splitlines()):
        record = raw.rstrip("\r")
        if fmt is CatalogFormat.HITRAN_PAR:
            if not record.strip():
                continue
            if len(record) != HITRAN_RECORD_LENGTH:
                raise RecordLengthError(index, len(record), str(HITRAN_RECORD_LENGTH))
            line = _hitran_record(record, index)
        else:
            stripped = record.strip()
            if not stripped or stripped.startswith("#"):
                continue
            line = _builtin_record(stripped, index)

        if line.center_wavenumber > MAX_LINE_WAVENUMBER:
            LOGGER.debug("Dropping line at %.6f 1/cm above 15 THz", line.center_wavenumber)
            continue
        if window is not None:
            frequency = line.center_frequency_hz
            if not window[0] <= frequency <= window[1]:
                continue
        lines.append(line)

    if not lines:
        if window is not None:
            raise NoLinesInBandError(
                f"no lines in band [{window[0]:g}, {window[1]:g}] Hz"
            )
        raise NoLinesInBandError("catalog contains no lines")

    lines.sort(key=lambda line: line.center_wavenumber)
    return lines


def format_builtin_line(line: SpectralLine) -> str:
    """Serialise ``line`` as one builtin-table row with exact float round trip."""

    try:
        species = Species(line.species).name
    except ValueError:
        species = str(line.species)
    columns = [
        species,
        repr(float(line.center_wavenumber)),
        repr(float(line.intensity_ref)),
        repr(float(line.air_halfwidth_ref)),
        repr(float(line.self_halfwidth_ref)),
        repr(float(line.temperature_exponent)),
        repr(float(line.lower_state_energy)),
        repr(float(line.pressure_shift)),
    ]
    if line.isotopologue != 1:
        columns.append(str(line.isotopologue))
    return " ".join(columns)


def write_builtin_table(lines: Iterable[SpectralLine], stream: IO[str]) -> None:
    stream.write("# " + " ".join(BUILTIN_COLUMNS) + "\n")
    for line in lines:
        stream.write(format_builtin_line(line) + "\n")


def _data_file(name: str):
    return resources.files("thz_absorption").joinpath("data").joinpath(name)


def builtin_catalog_bytes() -> bytes:
    return _data_file("builtin_lines.txt").read_bytes()


def load_builtin_catalog(window: tuple[float, float] | None = None) -> List[SpectralLine]:
    return parse_line_catalog(builtin_catalog_bytes(), CatalogFormat.BUILTIN_TABLE, window=window)


def _infer_format(path: Path) -> CatalogFormat:
    if path.suffix.lower() == ".par":
        return CatalogFormat.HITRAN_PAR
    return CatalogFormat.BUILTIN_TABLE


def load_catalog(
    paths: Sequence[Path] | None = None,
    *,
    fmt: CatalogFormat | str | None = None,
    window: tuple[float, float] | None = None,
) -> tuple[List[SpectralLine], bytes]:
    """Load and merge catalogs; returns the lines and the raw bytes read.

    Without ``paths`` the builtin table is used.
    """

    if not paths:
        data = builtin_catalog_bytes()
        return parse_line_catalog(data, CatalogFormat.BUILTIN_TABLE, window=window), data

    merged: List[SpectralLine] = []
    chunks: list[bytes] = []
    for path in paths:
        data = Path(path).read_bytes()
        chunks.append(data)
        path_format = CatalogFormat(fmt) if fmt is not None else _infer_format(Path(path))
        try:
            merged.extend(parse_line_catalog(data, path_format, window=window))
        except NoLinesInBandError:
            LOGGER.warning("Catalog %s has no lines in the requested band", path)
    if not merged:
        raise NoLinesInBandError("no lines in band across the supplied catalogs")
    merged.sort(key=lambda line: line.center_wavenumber)
    return merged, b"\0".join(chunks)


def standard_state() -> AtmosphereState:
    """Sea-level reference: 1 atm, 290 K, 7.5 g/m³."""

    return AtmosphereState(
        pressure_atm=STANDARD_PRESSURE_ATM,
        temperature_k=STANDARD_TEMPERATURE_K,
        water_vapor_density=STANDARD_VAPOR_DENSITY,
        label="standard",
    )


def sea_surface_state(temperature_k: float = 293.15, pressure_atm: float = 1.0) -> AtmosphereState:
    """Saturated marine boundary layer at ``temperature_k``."""

    return AtmosphereState(
        pressure_atm=pressure_atm,
        temperature_k=temperature_k,
        water_vapor_density=saturation_vapor_density(temperature_k),
        label="sea-surface",
    )


def indoor_state(
    temperature_k: float = 296.0,
    relative_humidity: float = 0.5,
    pressure_atm: float = 1.0,
) -> AtmosphereState:
    if not 0 <= relative_humidity <= 1:
        raise ValueError("relative humidity must lie in [0, 1]")
    return AtmosphereState(
        pressure_atm=pressure_atm,
        temperature_k=temperature_k,
        water_vapor_density=relative_humidity * saturation_vapor_density(temperature_k),
        label="indoor",
    )


def _profile_vapor(surface_density: float, altitude_km: float) -> float:
    taper_start, taper_stop = VAPOR_TAPER_KM
    if altitude_km <= taper_start:
        return surface_density * math.exp(-altitude_km / VAPOR_SCALE_HEIGHT_KM)
    if altitude_km >= taper_stop:
        return 0.0
    at_start = surface_density * math.exp(-taper_start / VAPOR_SCALE_HEIGHT_KM)
    return at_start * (taper_stop - altitude_km) / (taper_stop - taper_start)


def default_profile(
    surface: AtmosphereState | None = None,
    *,
    top_km: float = 30.0,
    step_km: float = 0.5,
) -> AltitudeProfile:
    """Exponential troposphere above ``surface`` sampled every ``step_km``.

    Vapour is capped at saturation so that warm saturated surfaces stay
    physical in the cold upper troposphere.
    """

    if surface is None:
        surface = standard_state()
    if not step_km > 0 or not top_km > 0:
        raise ValueError("top_km and step_km must be positive")

    count = int(round(top_km / step_km))
    samples: list[tuple[float, AtmosphereState]] = []
    low, high = SATURATION_VALID_RANGE_K
    for i in range(count + 1):
        altitude = round(i * step_km, 9)
        temperature = surface.temperature_k - LAPSE_RATE_K_KM * min(altitude, TROPOPAUSE_KM)
        vapor = _profile_vapor(surface.water_vapor_density, altitude)
        if low <= temperature <= high and altitude > 0:
            vapor = min(vapor, saturation_vapor_density(temperature))
        samples.append(
            (
                altitude,
                AtmosphereState(
                    pressure_atm=surface.pressure_atm * math.exp(-altitude / PRESSURE_SCALE_HEIGHT_KM),
                    temperature_k=temperature,
                    water_vapor_density=vapor,
                    oxygen_mixing_ratio=surface.oxygen_mixing_ratio,
                    supersaturated=surface.supersaturated if altitude == 0 else False,
                    other_mixing_ratios=surface.other_mixing_ratios,
                    label=f"{altitude:g} km",
                ),
            )
        )
    return AltitudeProfile(tuple(samples))


def _log_lerp(a: float, b: float, fraction: float) -> float:
    if a > 0 and b > 0:
        return math.exp(math.log(a) + (math.log(b) - math.log(a)) * fraction)
    return a + (b - a) * fraction


def atmosphere_at(profile: AltitudeProfile, altitude_km: float) -> AtmosphereState:
    """Interpolate ``profile`` at ``altitude_km``; no extrapolation."""

    altitudes = profile.altitudes
    if not altitudes[0] <= altitude_km <= altitudes[-1]:
        raise RangeError(
            f"altitude {altitude_km:g} km outside profile range [{altitudes[0]:g}, {altitudes[-1]:g}] km"
        )
    position = bisect.bisect_left(altitudes, altitude_km)
    if altitudes[position] == altitude_km:
        return profile.samples[position][1]

    low_alt, low = profile.samples[position - 1]
    high_alt, high = profile.samples[position]
    fraction = (altitude_km - low_alt) / (high_alt - low_alt)
    temperature = low.temperature_k + (high.temperature_k - low.temperature_k) * fraction
    vapor = _log_lerp(low.water_vapor_density, high.water_vapor_density, fraction)

    supersaturated = low.supersaturated or high.supersaturated
    lower, upper = SATURATION_VALID_RANGE_K
    if not supersaturated and lower <= temperature <= upper:
        supersaturated = vapor > saturation_vapor_density(temperature)

    high_other = dict(high.other_mixing_ratios)
    low_other = dict(low.other_mixing_ratios)
    other = tuple(
        (code, low_other.get(code, 0.0) + (high_other.get(code, 0.0) - low_other.get(code, 0.0)) * fraction)
        for code in sorted(set(low_other) | set(high_other))
    )
    return AtmosphereState(
        pressure_atm=_log_lerp(low.pressure_atm, high.pressure_atm, fraction),
        temperature_k=temperature,
        water_vapor_density=vapor,
        oxygen_mixing_ratio=low.oxygen_mixing_ratio
        + (high.oxygen_mixing_ratio - low.oxygen_mixing_ratio) * fraction,
        supersaturated=supersaturated,
        other_mixing_ratios=other,
        label=f"{altitude_km:g} km",
    )


def load_weather_coefficients(path: Path | None = None) -> WeatherCoefficients:
    """Read the weather coefficient file (the shipped one when ``path`` is None)."""

    if path is None:
        payload = json.loads(_data_file("weather.json").read_text(encoding="utf-8"))
    else:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    try:
        rain = payload["rain"]
        fog = payload["fog"]
        sand = payload["sand"]
        coefficients = WeatherCoefficients(
            rain_frequency_ghz=tuple(float(v) for v in rain["frequency_ghz"]),
            rain_k=tuple(float(v) for v in rain["k"]),
            rain_alpha=tuple(float(v) for v in rain["alpha"]),
            fog_slope=float(fog["slope_db_km_per_ghz"]),
            fog_max=float(fog["max_db_km"]),
            fog_visibility_scale_km=float(fog["visibility_scale_km"]),
            fog_visibility_exponent=float(fog["visibility_exponent"]),
            sand_slope=float(sand["slope_db_km_per_ghz"]),
            sand_max=float(sand["max_db_km"]),
            defaults={
                WeatherKind.RAIN.value: float(rain["default_rate_mm_h"]),
                WeatherKind.FOG.value: float(fog["default_visibility_m"]),
                WeatherKind.SAND.value: float(sand["default_density_g_m3"]),
            },
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise ValueError(f"Invalid weather coefficient file: {exc}") from exc

    sizes = {len(coefficients.rain_frequency_ghz), len(coefficients.rain_k), len(coefficients.rain_alpha)}
    if len(sizes) != 1 or len(coefficients.rain_frequency_ghz) < 2:
        raise ValueError("rain coefficient table needs matching frequency, k and alpha lists")
    if any(b <= a for a, b in zip(coefficients.rain_frequency_ghz, coefficients.rain_frequency_ghz[1:])):
        raise ValueError("rain coefficient frequencies must be increasing")
    if min(coefficients.rain_k + coefficients.rain_alpha) < 0:
        raise ValueError("rain coefficients must be non-negative")
    return coefficients


def parse_weather_condition(text: str, coefficients: WeatherCoefficients | None = None) -> WeatherCondition:
    """Parse ``clear``, ``rain[:mm/h]``, ``fog[:visibility m]`` or ``sand[:g/m³]``."""

    name, _, raw_value = text.strip().partition(":")
    try:
        kind = WeatherKind(name.strip().lower())
    except ValueError as exc:
        raise ValueError(f"Unknown weather condition '{text}'") from exc
    if kind is WeatherKind.CLEAR:
        if raw_value:
            raise ValueError("clear weather takes no parameter")
        return WeatherCondition(kind)

    if coefficients is None:
        coefficients = load_weather_coefficients()
    if raw_value:
        try:
            value = float(raw_value)
        except ValueError as exc:
            raise ValueError(f"Invalid weather parameter in '{text}'") from exc
    else:
        value = coefficients.defaults[kind.value]
    return WeatherCondition(kind, value, coefficients)


def serialize_builtin_table(lines: Iterable[SpectralLine]) -> bytes:
    buffer = io.StringIO()
    write_builtin_table(lines, buffer)
    return buffer.getvalue().encode("ascii")
