from __future__ import annotations

import csv
import hashlib
import json
import logging
import shutil
from pathlib import Path
from typing import Any, Iterable, Mapping, Sequence

import numpy as np

from .models import AbsorptionSpectrum, LinkBudget, Pulse, SecrecyResult, SpectralWindow, Species
from .units import format_float

LOGGER = logging.getLogger(__name__)

CACHE_DIRNAME = ".cache"
CACHE_MANIFEST = "files.json"

SPECTRUM_HEADER = ["f_hz", "k_total_db_km", "k_h2o_db_km", "k_o2_db_km"]
LINK_BUDGET_HEADER = [
    "distance_m",
    "f_hz",
    "spreading_loss_db",
    "absorption_loss_db",
    "weather_loss_db",
    "received_power_w",
    "thermal_noise_w",
    "absorption_noise_w",
    "snr",
    "capacity_bps",
    "capacity_bps_hz",
]
PULSE_HEADER = ["t_s", "re", "im"]
WINDOWS_HEADER = ["f_low_hz", "f_high_hz", "distance_m", "threshold_db"]
SWEEP_HEADER = ["scheme", "d_e_m", "c_b", "c_e", "secrecy_bps_hz", "covert", "chosen_f_hz"]
TSOOK_HEADER = ["p_one", "capacity_bit", "optimum"]
ALTITUDE_SWEEP_HEADER = ["altitude_km", "f_hz", "k_total_db_km", "zenith_loss_db"]


def ensure_output_dir(path: Path) -> Path:
    path.mkdir(parents=True, exist_ok=True)
    return path


def output_path(out_dir: Path, name: str) -> Path:
    return ensure_output_dir(out_dir) / name


def altitude_label(altitude_km: float) -> str:
    return f"{altitude_km:g}"


def k_spectrum_filename(altitude_km: float) -> str:
    return f"k-spectrum-{altitude_label(altitude_km)}km.csv"


def write_csv(path: Path, header: Sequence[str], rows: Iterable[Sequence[str]]) -> Path:
    with path.open("w", newline="", encoding="ascii") as handle:
        writer = csv.writer(handle, lineterminator="\n")
        writer.writerow(header)
        writer.writerows(rows)
    return path


def write_spectrum_csv(path: Path, spectrum: AbsorptionSpectrum) -> Path:
    water = spectrum.species(Species.H2O)
    oxygen = spectrum.species(Species.O2)
    rows = (
        [format_float(f), format_float(k), format_float(w), format_float(o)]
        for f, k, w, o in zip(spectrum.frequencies, spectrum.k_total, water, oxygen)
    )
    return write_csv(path, SPECTRUM_HEADER, rows)


def write_link_budget_csv(path: Path, budgets: Iterable[LinkBudget]) -> Path:
    rows = (
        [
            format_float(budget.distance_m),
            format_float(budget.frequency_hz),
            format_float(budget.spreading_loss_db),
            format_float(budget.absorption_loss_db),
            format_float(budget.weather_loss_db),
            format_float(budget.received_power_w),
            format_float(budget.thermal_noise_w),
            format_float(budget.absorption_noise_w),
            format_float(budget.snr),
            format_float(budget.capacity_bps),
            format_float(budget.capacity_bps_hz),
        ]
        for budget in budgets
    )
    return write_csv(path, LINK_BUDGET_HEADER, rows)


def write_pulse_csv(path: Path, pulse: Pulse) -> Path:
    rows = (
        [format_float(t), format_float(value.real), format_float(value.imag)]
        for t, value in zip(pulse.times, pulse.samples)
    )
    return write_csv(path, PULSE_HEADER, rows)


def write_windows_csv(path: Path, windows: Iterable[SpectralWindow]) -> Path:
    rows = (
        [
            format_float(window.f_low),
            format_float(window.f_high),
            format_float(window.distance_m),
            format_float(window.threshold_db),
        ]
        for window in windows
    )
    return write_csv(path, WINDOWS_HEADER, rows)


def write_weather_csv(path: Path, frequencies: np.ndarray, columns: Sequence[tuple[str, np.ndarray]]) -> Path:
    header = ["f_hz", *(label for label, _ in columns)]
    rows = (
        [format_float(f), *(format_float(values[index]) for _, values in columns)]
        for index, f in enumerate(frequencies)
    )
    return write_csv(path, header, rows)


def write_sweep_csv(path: Path, results: Iterable[SecrecyResult]) -> Path:
    rows = (
        [
            result.scheme.value,
            format_float(result.d_e_m),
            format_float(result.c_b),
            format_float(result.c_e),
            format_float(result.secrecy_rate),
            "true" if result.covert else "false",
            format_float(result.chosen_frequency_hz),
        ]
        for result in results
    )
    return write_csv(path, SWEEP_HEADER, rows)


def write_tsook_csv(path: Path, probabilities: np.ndarray, capacities: np.ndarray, optimum_index: int) -> Path:
    rows = (
        [format_float(p), format_float(value), "*" if index == optimum_index else ""]
        for index, (p, value) in enumerate(zip(probabilities, capacities))
    )
    return write_csv(path, TSOOK_HEADER, rows)


def write_altitude_sweep_csv(path: Path, rows: Iterable[tuple[float, float, float, float]]) -> Path:
    formatted = ([format_float(value) for value in row] for row in rows)
    return write_csv(path, ALTITUDE_SWEEP_HEADER, formatted)


def write_resolved_config(path: Path, resolved: Mapping[str, Any]) -> Path:
    path.write_text(json.dumps(resolved, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return path


def cache_key(command: str, resolved: Mapping[str, Any], data: bytes) -> str:
    """SHA-256 over the command, the canonical config JSON and the input data bytes."""

    digest = hashlib.sha256()
    digest.update(command.encode("utf-8"))
    digest.update(b"\0")
    digest.update(json.dumps(resolved, sort_keys=True, separators=(",", ":")).encode("utf-8"))
    digest.update(b"\0")
    digest.update(data)
    return digest.hexdigest()


def cache_dir(out_dir: Path, command: str, key: str) -> Path:
    return out_dir / CACHE_DIRNAME / f"{command}-{key}"


def restore_cached(entry: Path, out_dir: Path) -> list[Path] | None:
    """Copy cached files into ``out_dir``; ``None`` when the entry is missing or incomplete."""

    manifest = entry / CACHE_MANIFEST
    if not manifest.is_file():
        return None
    try:
        names = json.loads(manifest.read_text(encoding="utf-8"))
    except json.JSONDecodeError:
        LOGGER.warning("Ignoring corrupt cache manifest %s", manifest)
        return None
    if not all((entry / name).is_file() for name in names):
        LOGGER.warning("Ignoring incomplete cache entry %s", entry)
        return None
    restored = []
    for name in names:
        target = ensure_output_dir(out_dir) / name
        shutil.copyfile(entry / name, target)
        restored.append(target)
    return restored


def store_cached(entry: Path, files: Sequence[Path]) -> None:
    entry.mkdir(parents=True, exist_ok=True)
    for path in files:
        shutil.copyfile(path, entry / path.name)
    (entry / CACHE_MANIFEST).write_text(json.dumps([path.name for path in files]) + "\n", encoding="utf-8")
