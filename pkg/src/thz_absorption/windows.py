from __future__ import annotations

import logging
from typing import Iterable, List, Sequence

import numpy as np

from .models import AbsorptionSpectrum, SpectralWindow

LOGGER = logging.getLogger(__name__)

DEFAULT_THRESHOLD_DB = 10.0
DEFAULT_MIN_BANDWIDTH_HZ = 1e9


def _bridge_gaps(passing: np.ndarray, max_gap: int) -> np.ndarray:
    """Mark failing runs of at most ``max_gap`` points between passing points as passing."""

    bridged = passing.copy()
    index = 0
    size = passing.size
    while index < size:
        if passing[index]:
            index += 1
            continue
        stop = index
        while stop < size and not passing[stop]:
            stop += 1
        if 0 < index and stop < size and stop - index <= max_gap:
            bridged[index:stop] = True
        index = stop
    return bridged


def _runs(mask: np.ndarray) -> list[tuple[int, int]]:
    """Inclusive ``(start, stop)`` index pairs of the True runs of ``mask``."""

    padded = np.concatenate(([False], mask, [False])).astype(np.int8)
    edges = np.flatnonzero(np.diff(padded))
    return [(int(start), int(stop) - 1) for start, stop in zip(edges[::2], edges[1::2])]


def absorption_loss_profile(spectrum: AbsorptionSpectrum, distance_m: float) -> np.ndarray:
    if distance_m < 0:
        raise ValueError("distance must be non-negative")
    return spectrum.k_total * distance_m / 1000.0


def find_windows(
    spectrum: AbsorptionSpectrum,
    distance_m: float,
    threshold_db: float = DEFAULT_THRESHOLD_DB,
    *,
    min_bandwidth_hz: float = DEFAULT_MIN_BANDWIDTH_HZ,
    merge_gaps: int = 0,
) -> List[SpectralWindow]:
    """Maximal grid runs whose absorption loss k·d stays at or below ``threshold_db``.

    ``merge_gaps`` bridges failing runs of up to that many grid points; the
    default keeps every point of a window under the threshold. Windows that
    span less than ``min_bandwidth_hz`` (or a single grid point) are dropped.
    """

    if not threshold_db > 0:
        raise ValueError("threshold_db must be positive")
    if merge_gaps < 0:
        raise ValueError("merge_gaps must be non-negative")

    loss = absorption_loss_profile(spectrum, distance_m)
    passing = loss <= threshold_db
    if merge_gaps:
        passing = _bridge_gaps(passing, merge_gaps)

    frequencies = spectrum.frequencies
    windows: List[SpectralWindow] = []
    for start, stop in _runs(passing):
        if stop == start:
            continue
        f_low = float(frequencies[start])
        f_high = float(frequencies[stop])
        if f_high - f_low < min_bandwidth_hz:
            LOGGER.debug("Dropping %.6g Hz wide window at %.6g Hz", f_high - f_low, f_low)
            continue
        windows.append(
            SpectralWindow(
                f_low=f_low,
                f_high=f_high,
                max_total_loss_db=float(loss[start : stop + 1].max()),
                distance_m=float(distance_m),
                threshold_db=float(threshold_db),
                mean_k_db_km=float(spectrum.k_total[start : stop + 1].mean()),
            )
        )
    return windows


def adaptive_band(
    spectrum: AbsorptionSpectrum,
    distance_m: float,
    required_bandwidth_hz: float,
    threshold_db: float = DEFAULT_THRESHOLD_DB,
    *,
    min_bandwidth_hz: float = DEFAULT_MIN_BANDWIDTH_HZ,
) -> SpectralWindow | None:
    """Window with the lowest mean k among those wide enough; ties go to the lowest band."""

    if not required_bandwidth_hz > 0:
        raise ValueError("required bandwidth must be positive")
    candidates = [
        window
        for window in find_windows(spectrum, distance_m, threshold_db, min_bandwidth_hz=min_bandwidth_hz)
        if window.bandwidth_hz >= required_bandwidth_hz
    ]
    if not candidates:
        return None
    return min(candidates, key=lambda window: (window.mean_k_db_km, window.f_low))


def total_bandwidth(windows: Iterable[SpectralWindow]) -> float:
    return float(sum(window.bandwidth_hz for window in windows))


def window_union_mask(spectrum: AbsorptionSpectrum, windows: Sequence[SpectralWindow]) -> np.ndarray:
    """Grid points covered by any of ``windows``."""

    frequencies = spectrum.frequencies
    mask = np.zeros(frequencies.size, dtype=bool)
    for window in windows:
        mask |= (frequencies >= window.f_low) & (frequencies <= window.f_high)
    return mask
