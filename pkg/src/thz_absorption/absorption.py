from __future__ import annotations

import io
import logging
import math
from dataclasses import dataclass
from enum import Enum
from functools import lru_cache
from importlib import resources
from typing import Sequence

import numpy as np

from .catalog import NoLinesInBandError
from .models import CONSTANTS, AbsorptionSpectrum, AtmosphereState, FrequencyGrid, SpectralLine, Species, species_label
from .units import RangeError, db_to_linear, hz_to_wavenumber

LOGGER = logging.getLogger(__name__)

# 1/cm -> dB/km: 1e5 cm per km times 10·log10(e).
NEPER_CM_TO_DB_KM = 1e5 * 10.0 * math.log10(math.e)
DEFAULT_CUTOFF_HZ = 750e9
DEFAULT_GUARD_HALFWIDTHS = 50.0
INTENSITY_VALID_RANGE_K = (150.0, 350.0)
ITU_VALID_RANGE_HZ = (1e9, 1e12)
ITU_REFERENCE_OXYGEN_RATIO = 0.209
_CHUNK_POINTS = 2048


class SpectrumMethod(str, Enum):
    LBL = "lbl"
    ITU = "itu"
    HYBRID = "hybrid"


def partition_exponent(species: int) -> float:
    return 1.5 if species == Species.H2O else 1.0


def line_halfwidth(line: SpectralLine, atm: AtmosphereState) -> float:
    """Pressure-broadened Lorentz half width in 1/cm."""

    self_pressure = atm.water_partial_pressure_atm
    foreign = max(atm.pressure_atm - self_pressure, 0.0)
    scale = (CONSTANTS.t0 / atm.temperature_k) ** line.temperature_exponent
    return scale * (line.air_halfwidth_ref * foreign + line.self_halfwidth_ref * self_pressure) / CONSTANTS.p0_atm


def line_intensity(line: SpectralLine, temperature_k: float) -> float:
    """Line intensity at ``temperature_k`` scaled from the 296 K catalog value."""

    low, high = INTENSITY_VALID_RANGE_K
    if not low <= temperature_k <= high:
        raise RangeError(f"temperature {temperature_k:g} K outside [{low:g}, {high:g}] K")
    t0 = CONSTANTS.t0
    if temperature_k == t0:
        return line.intensity_ref
    c2 = CONSTANTS.c2
    partition = (t0 / temperature_k) ** partition_exponent(line.species)
    boltzmann = math.exp(-c2 * line.lower_state_energy * (1.0 / temperature_k - 1.0 / t0))
    stimulated = -math.expm1(-c2 * line.center_wavenumber / temperature_k) / -math.expm1(
        -c2 * line.center_wavenumber / t0
    )
    return line.intensity_ref * partition * boltzmann * stimulated


def vvw_shape(wavenumber: np.ndarray, center: np.ndarray, halfwidth: np.ndarray) -> np.ndarray:
    """Van Vleck-Weisskopf line shape in cm (area-normalised near the centre)."""

    ratio = (wavenumber / center) ** 2
    minus = halfwidth / ((wavenumber - center) ** 2 + halfwidth**2)
    plus = halfwidth / ((wavenumber + center) ** 2 + halfwidth**2)
    return ratio * (minus + plus) / math.pi


@dataclass(frozen=True)
class _LineArrays:
    species: np.ndarray
    center: np.ndarray
    strength: np.ndarray
    halfwidth: np.ndarray


def _line_arrays(catalog: Sequence[SpectralLine], atm: AtmosphereState) -> _LineArrays:
    species = np.array([line.species for line in catalog], dtype=int)
    density = np.array([atm.number_density(line.species) for line in catalog])
    intensity = np.array([line_intensity(line, atm.temperature_k) for line in catalog])
    center = np.array([line.center_wavenumber + line.pressure_shift * atm.pressure_atm for line in catalog])
    halfwidth = np.array([line_halfwidth(line, atm) for line in catalog])
    return _LineArrays(species=species, center=center, strength=density * intensity, halfwidth=halfwidth)


def _warn_missing_abundance(catalog: Sequence[SpectralLine], atm: AtmosphereState) -> None:
    missing: dict[int, int] = {}
    for line in catalog:
        if line.species not in (Species.H2O, Species.O2) and atm.number_density(line.species) == 0.0:
            missing[line.species] = missing.get(line.species, 0) + 1
    for code, count in sorted(missing.items()):
        LOGGER.warning(
            "Ignoring %d lines of %s: no mixing ratio in the atmosphere", count, species_label(code)
        )


def line_sum(
    catalog: Sequence[SpectralLine],
    atm: AtmosphereState,
    frequencies_hz: np.ndarray | Sequence[float] | float,
    *,
    cutoff_hz: float = DEFAULT_CUTOFF_HZ,
) -> dict[int, np.ndarray]:
    """Per-species absorption coefficient in dB/km at ``frequencies_hz``.

    Lines are summed in catalog order for every frequency, so splitting the
    frequencies across calls gives bitwise-identical results.
    """

    nu = np.atleast_1d(hz_to_wavenumber(np.asarray(frequencies_hz, dtype=float)))
    cutoff = hz_to_wavenumber(cutoff_hz)
    result = {int(Species.H2O): np.zeros(nu.size), int(Species.O2): np.zeros(nu.size)}
    if not catalog:
        return result

    arrays = _line_arrays(catalog, atm)
    for code in np.unique(arrays.species):
        mask = (arrays.species == code) & (arrays.strength > 0)
        if int(code) not in result:
            if not np.any(mask):
                continue
            result[int(code)] = np.zeros(nu.size)
        if not np.any(mask):
            continue
        center = arrays.center[mask][:, None]
        halfwidth = arrays.halfwidth[mask][:, None]
        strength = arrays.strength[mask][:, None]
        for start in range(0, nu.size, _CHUNK_POINTS):
            chunk = nu[None, start : start + _CHUNK_POINTS]
            offset = chunk - center
            edge = center + np.where(offset >= 0, cutoff, -cutoff)
            shape = vvw_shape(chunk, center, halfwidth) - vvw_shape(edge, center, halfwidth)
            shape = np.where(np.abs(offset) <= cutoff, np.maximum(shape, 0.0), 0.0)
            result[int(code)][start : start + _CHUNK_POINTS] = np.sum(strength * shape, axis=0)

    for code in result:
        result[code] = result[code] * NEPER_CM_TO_DB_KM
    return result


def _require_lines_near(
    catalog: Sequence[SpectralLine],
    atm: AtmosphereState,
    f_start: float,
    f_stop: float,
    guard: float,
) -> None:
    nu_start = hz_to_wavenumber(f_start)
    nu_stop = hz_to_wavenumber(f_stop)
    for line in catalog:
        margin = guard * line_halfwidth(line, atm)
        if nu_start - margin <= line.center_wavenumber <= nu_stop + margin:
            return
    raise NoLinesInBandError(
        f"no lines within {guard:g} half widths of [{f_start:g}, {f_stop:g}] Hz"
    )


def _spectrum_from_species(grid: FrequencyGrid, by_species: dict[int, np.ndarray], provenance: str) -> AbsorptionSpectrum:
    ordered = {code: np.maximum(by_species[code], 0.0) for code in sorted(by_species)}
    total = np.sum([ordered[code] for code in ordered], axis=0)
    return AbsorptionSpectrum(grid=grid, k_total=total, k_by_species=ordered, provenance=provenance)


def _provenance(method: str, atm: AtmosphereState, n_lines: int | None = None) -> str:
    parts = [
        method,
        f"p={atm.pressure_atm:g}atm",
        f"T={atm.temperature_k:g}K",
        f"rho={atm.water_vapor_density:g}g/m3",
    ]
    if n_lines is not None:
        parts.append(f"lines={n_lines}")
    return " ".join(parts)


def absorption_coefficient(
    catalog: Sequence[SpectralLine],
    atm: AtmosphereState,
    grid: FrequencyGrid,
    *,
    cutoff_hz: float = DEFAULT_CUTOFF_HZ,
    guard_halfwidths: float = DEFAULT_GUARD_HALFWIDTHS,
) -> AbsorptionSpectrum:
    """Line-by-line absorption spectrum of ``atm`` on ``grid``."""

    _require_lines_near(catalog, atm, grid.f_start, grid.f_stop, guard_halfwidths)
    _warn_missing_abundance(catalog, atm)
    by_species = line_sum(catalog, atm, grid.frequencies, cutoff_hz=cutoff_hz)
    return _spectrum_from_species(grid, by_species, _provenance("lbl", atm, len(catalog)))


def _read_itu_table(name: str) -> np.ndarray:
    text = resources.files("thz_absorption").joinpath("data").joinpath(name).read_text(encoding="ascii")
    return np.genfromtxt(io.StringIO(text), delimiter=";", comments="#")


@lru_cache(maxsize=None)
def itu_tables() -> tuple[np.ndarray, np.ndarray]:
    """Oxygen and water vapour ITU line tables as ``(n, 7)`` arrays."""

    return _read_itu_table("itu_oxygen.csv"), _read_itu_table("itu_water.csv")


def _itu_shape(f: np.ndarray, fi: np.ndarray, width: np.ndarray, delta: np.ndarray) -> np.ndarray:
    lower = (width - delta * (fi - f)) / ((fi - f) ** 2 + width**2)
    upper = (width - delta * (fi + f)) / ((fi + f) ** 2 + width**2)
    return f / fi * (lower + upper)


def itu_line_sum(atm: AtmosphereState, frequencies_hz: np.ndarray) -> dict[int, np.ndarray]:
    """Oxygen and water vapour specific attenuation (dB/km) from the ITU line tables."""

    f = np.atleast_1d(np.asarray(frequencies_hz, dtype=float)) / 1e9
    low, high = ITU_VALID_RANGE_HZ
    if f.size and (f.min() < low / 1e9 or f.max() > high / 1e9):
        raise RangeError("ITU line tables are valid from 1 GHz to 1 THz")
    oxygen, water = itu_tables()
    theta = 300.0 / atm.temperature_k
    dry = atm.dry_pressure_atm * 1013.25
    vapor = atm.water_vapor_density * atm.temperature_k / 216.7

    fo = oxygen[:, 0][:, None]
    a1, a2, a3, a4, a5, a6 = (oxygen[:, i][:, None] for i in range(1, 7))
    strength = a1 * 1e-7 * dry * theta**3 * np.exp(a2 * (1.0 - theta))
    width = a3 * 1e-4 * (dry * theta ** (0.8 - a4) + 1.1 * vapor * theta)
    width = np.sqrt(width**2 + 2.25e-6)
    delta = (a5 + a6 * theta) * 1e-4 * (dry + vapor) * theta**0.8
    oxygen_db = 0.182 * f * np.sum(strength * _itu_shape(f[None, :], fo, width, delta), axis=0)
    oxygen_db = oxygen_db * atm.oxygen_mixing_ratio / ITU_REFERENCE_OXYGEN_RATIO

    fw = water[:, 0][:, None]
    b1, b2, b3, b4, b5, b6 = (water[:, i][:, None] for i in range(1, 7))
    strength = b1 * 0.1 * vapor * theta**3.5 * np.exp(b2 * (1.0 - theta))
    width = b3 * 1e-4 * (dry * theta**b4 + b5 * vapor * theta**b6)
    width = 0.535 * width + np.sqrt(0.217 * width**2 + 2.1316e-12 * fw**2 / theta)
    water_db = 0.182 * f * np.sum(strength * _itu_shape(f[None, :], fw, width, 0.0), axis=0)

    return {int(Species.H2O): np.maximum(water_db, 0.0), int(Species.O2): np.maximum(oxygen_db, 0.0)}


def itu_absorption_coefficient(atm: AtmosphereState, grid: FrequencyGrid) -> AbsorptionSpectrum:
    return _spectrum_from_species(grid, itu_line_sum(atm, grid.frequencies), _provenance("itu", atm))


def hybrid_absorption_coefficient(
    catalog: Sequence[SpectralLine],
    atm: AtmosphereState,
    grid: FrequencyGrid,
    *,
    split_hz: float = 1e12,
    cutoff_hz: float = DEFAULT_CUTOFF_HZ,
) -> AbsorptionSpectrum:
    """ITU tables up to ``split_hz`` and catalog line-by-line above it."""

    frequencies = grid.frequencies
    low_band = frequencies <= split_hz
    by_species = itu_line_sum(atm, frequencies[low_band])
    if np.all(low_band):
        return _spectrum_from_species(grid, by_species, _provenance("hybrid", atm, len(catalog)))

    upper_band = frequencies[~low_band]
    _require_lines_near(catalog, atm, float(upper_band[0]), float(upper_band[-1]), DEFAULT_GUARD_HALFWIDTHS)
    _warn_missing_abundance(catalog, atm)
    upper = line_sum(catalog, atm, upper_band, cutoff_hz=cutoff_hz)
    combined: dict[int, np.ndarray] = {}
    for code in sorted(set(by_species) | set(upper)):
        values = np.zeros(frequencies.size)
        values[low_band] = by_species.get(code, 0.0)
        values[~low_band] = upper.get(code, 0.0)
        combined[code] = values
    return _spectrum_from_species(grid, combined, _provenance("hybrid", atm, len(catalog)))


def compute_spectrum(
    method: SpectrumMethod | str,
    catalog: Sequence[SpectralLine],
    atm: AtmosphereState,
    grid: FrequencyGrid,
) -> AbsorptionSpectrum:
    method = SpectrumMethod(method)
    if method is SpectrumMethod.ITU:
        return itu_absorption_coefficient(atm, grid)
    if method is SpectrumMethod.HYBRID:
        return hybrid_absorption_coefficient(catalog, atm, grid)
    return absorption_coefficient(catalog, atm, grid)


def point_coefficient(
    method: SpectrumMethod | str,
    catalog: Sequence[SpectralLine],
    atm: AtmosphereState,
    frequency_hz: float,
) -> float:
    """Total k in dB/km at a single frequency (no guard-band check)."""

    method = SpectrumMethod(method)
    use_itu = method is SpectrumMethod.ITU or (method is SpectrumMethod.HYBRID and frequency_hz <= 1e12)
    by_species = itu_line_sum(atm, [frequency_hz]) if use_itu else line_sum(catalog, atm, [frequency_hz])
    return float(sum(by_species[code][0] for code in sorted(by_species)))


def absorption_loss_db(k_db_km: float, distance_km: float) -> float:
    """Absorption loss k·d in dB."""

    if k_db_km < 0 or distance_km < 0:
        raise ValueError("absorption loss requires k >= 0 and d >= 0")
    return k_db_km * distance_km


def transmittance(loss_db: float | np.ndarray) -> float | np.ndarray:
    """Power transmittance 10^(-loss/10)."""

    return db_to_linear(-np.asarray(loss_db, dtype=float))
