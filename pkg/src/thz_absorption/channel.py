from __future__ import annotations

import logging
import math
from typing import Callable, Sequence

import numpy as np

from .absorption import SpectrumMethod, point_coefficient, transmittance
from .catalog import atmosphere_at
from .models import (
    CONSTANTS,
    AbsorptionSpectrum,
    AltitudeProfile,
    AtmosphereState,
    ChannelResponse,
    LinkBudget,
    LinkGeometry,
    Pulse,
    SpectralLine,
    WeatherCondition,
    next_power_of_two,
)
from .units import db_to_linear, linear_to_db

LOGGER = logging.getLogger(__name__)

SpectrumEngine = Callable[[AtmosphereState], float]

PULSE_SUPPORT_SIGMAS = 6.0
ZERO_PADDING_FACTOR = 4


class ChannelError(ValueError):
    """Raised when a channel cannot be evaluated on the supplied grid."""


def spreading_loss_db(frequency_hz: float | np.ndarray, distance_m: float | np.ndarray) -> float | np.ndarray:
    """Friis free-space spreading loss 20·log10(4π·f·d/c)."""

    f = np.asarray(frequency_hz, dtype=float)
    d = np.asarray(distance_m, dtype=float)
    if np.any(f <= 0) or np.any(d <= 0):
        raise ValueError("spreading loss requires positive frequency and distance")
    return linear_to_db((4.0 * math.pi * f * d / CONSTANTS.c) ** 2)


def weather_loss_db(weather: WeatherCondition, frequency_hz: float | np.ndarray, distance_m: float) -> float | np.ndarray:
    return weather.attenuation_db_km(frequency_hz) * distance_m / 1000.0


def thermal_noise_power(temperature_k: float, bandwidth_hz: float) -> float:
    return CONSTANTS.k_b * temperature_k * bandwidth_hz


def absorption_noise(
    emissivity: float | np.ndarray,
    ideal_received_power_w: float | np.ndarray,
    temperature_k: float,
    bandwidth_hz: float,
    coupling: float = 1.0,
) -> float | np.ndarray:
    """Molecular absorption noise η·ε·P_rx_ideal + k_B·T·ε·B."""

    return coupling * emissivity * ideal_received_power_w + CONSTANTS.k_b * temperature_k * emissivity * bandwidth_hz


def _ideal_received_power(geometry: LinkGeometry, tx_power_w: float, frequency_hz: float | np.ndarray):
    return tx_power_w * geometry.gain_linear * db_to_linear(-spreading_loss_db(frequency_hz, geometry.distance_m))


def absorption_noise_power(
    tx_power_w: float,
    geometry: LinkGeometry,
    k_db_km: float,
    bandwidth_hz: float,
    temperature_k: float,
) -> float:
    """Absorption noise at the receiver of ``geometry`` for a carrier with coefficient ``k_db_km``.

    The signal-induced part uses the received power without absorption, so it
    is exactly linear in ``tx_power_w``.
    """

    if tx_power_w < 0 or k_db_km < 0 or bandwidth_hz <= 0 or temperature_k <= 0:
        raise ValueError("absorption noise requires non-negative power and k, positive B and T")
    emissivity = 1.0 - transmittance(k_db_km * geometry.distance_km)
    ideal = float(_ideal_received_power(geometry, tx_power_w, geometry.carrier_hz))
    return float(absorption_noise(emissivity, ideal, temperature_k, bandwidth_hz, geometry.self_noise_coupling))


def capacity(snr: float | np.ndarray, bandwidth_hz: float) -> float | np.ndarray:
    """Shannon capacity B·log2(1 + snr) in bit/s."""

    snr_array = np.asarray(snr, dtype=float)
    if np.any(snr_array < 0):
        raise ValueError("snr must be non-negative")
    result = bandwidth_hz * np.log2(1.0 + snr_array)
    return float(result) if result.ndim == 0 else result


def link_terms(
    geometry: LinkGeometry,
    frequency_hz: float | np.ndarray,
    k_db_km: float | np.ndarray,
    temperature_k: float,
    *,
    tx_power_w: float | None = None,
) -> dict[str, float | np.ndarray]:
    """Budget terms for one or many carriers; arrays broadcast over frequency."""

    power = geometry.tx_power_w if tx_power_w is None else tx_power_w
    spreading = spreading_loss_db(frequency_hz, geometry.distance_m)
    absorption = np.asarray(k_db_km, dtype=float) * geometry.distance_km
    weather = weather_loss_db(geometry.weather, frequency_hz, geometry.distance_m)
    received = power * geometry.gain_linear * db_to_linear(-(spreading + absorption + weather))
    ideal = power * geometry.gain_linear * db_to_linear(-spreading)
    emissivity = 1.0 - transmittance(absorption)
    thermal = thermal_noise_power(temperature_k, geometry.bandwidth_hz)
    absorption_noise_w = absorption_noise(
        emissivity, ideal, temperature_k, geometry.bandwidth_hz, geometry.self_noise_coupling
    )
    snr = received / (thermal + absorption_noise_w)
    return {
        "spreading_loss_db": spreading,
        "absorption_loss_db": absorption,
        "weather_loss_db": weather,
        "received_power_w": received,
        "thermal_noise_w": thermal,
        "absorption_noise_w": absorption_noise_w,
        "snr": snr,
    }


def link_budget(
    geometry: LinkGeometry,
    k_db_km: float,
    temperature_k: float,
    *,
    frequency_hz: float | None = None,
    tx_power_w: float | None = None,
) -> LinkBudget:
    """Narrowband budget at ``frequency_hz`` (the carrier by default)."""

    if k_db_km < 0:
        raise ValueError("absorption coefficient must be non-negative")
    frequency = geometry.carrier_hz if frequency_hz is None else frequency_hz
    terms = link_terms(geometry, frequency, k_db_km, temperature_k, tx_power_w=tx_power_w)
    snr = float(terms["snr"])
    rate = capacity(snr, geometry.bandwidth_hz)
    return LinkBudget(
        distance_m=geometry.distance_m,
        frequency_hz=frequency,
        spreading_loss_db=float(terms["spreading_loss_db"]),
        absorption_loss_db=float(terms["absorption_loss_db"]),
        weather_loss_db=float(terms["weather_loss_db"]),
        received_power_w=float(terms["received_power_w"]),
        thermal_noise_w=float(terms["thermal_noise_w"]),
        absorption_noise_w=float(terms["absorption_noise_w"]),
        snr=snr,
        capacity_bps=rate,
        capacity_bps_hz=rate / geometry.bandwidth_hz,
    )


def point_engine(
    catalog: Sequence[SpectralLine],
    frequency_hz: float,
    method: SpectrumMethod | str = SpectrumMethod.LBL,
) -> SpectrumEngine:
    """Build a callable returning k (dB/km) at ``frequency_hz`` for a given atmosphere."""

    def engine(atm: AtmosphereState) -> float:
        return point_coefficient(method, catalog, atm, frequency_hz)

    return engine


def slant_absorption_db(
    profile: AltitudeProfile,
    geometry: LinkGeometry,
    spectrum_engine: SpectrumEngine,
    n_segments: int,
) -> float:
    """Midpoint Riemann sum of k·d along a straight path between the link altitudes."""

    if n_segments < 1:
        raise ValueError("n_segments must be at least 1")
    segment_km = geometry.distance_km / n_segments
    climb = geometry.rx_altitude_km - geometry.tx_altitude_km
    total = 0.0
    for index in range(n_segments):
        altitude = geometry.tx_altitude_km + climb * (index + 0.5) / n_segments
        total += spectrum_engine(atmosphere_at(profile, altitude)) * segment_km
    return total


def channel_transfer_function(
    spectrum: AbsorptionSpectrum,
    distance_m: float,
    weather: WeatherCondition | None = None,
    *,
    frequencies: np.ndarray | None = None,
) -> ChannelResponse:
    """Complex gain over the spectrum grid (or ``frequencies`` inside it).

    Spreading loss is clamped at 0 dB so that |H| stays in (0, 1] in the
    near field.
    """

    if not distance_m > 0:
        raise ValueError("distance must be positive")
    grid_frequencies = spectrum.frequencies
    if frequencies is None:
        freqs = grid_frequencies
        k = spectrum.k_total
    else:
        freqs = np.asarray(frequencies, dtype=float)
        if freqs.size == 0 or freqs.min() < grid_frequencies[0] or freqs.max() > grid_frequencies[-1]:
            raise ChannelError("requested frequencies are not covered by the spectrum grid")
        k = np.interp(freqs, grid_frequencies, spectrum.k_total)
    loss = np.maximum(spreading_loss_db(freqs, distance_m), 0.0) + k * distance_m / 1000.0
    if weather is not None:
        loss = loss + weather_loss_db(weather, freqs, distance_m)
    gain = np.sqrt(transmittance(loss)) * np.exp(-2j * math.pi * freqs * distance_m / CONSTANTS.c)
    return ChannelResponse(frequencies=freqs, gain=gain, distance_m=distance_m)


def gaussian_pulse(
    carrier_hz: float,
    rms_duration_s: float,
    sample_period_s: float,
    *,
    min_samples: int = 1024,
) -> Pulse:
    """Gaussian pulse whose power envelope has rms width ``rms_duration_s``."""

    if not rms_duration_s > 0 or not sample_period_s > 0:
        raise ValueError("rms duration and sample period must be positive")
    support = math.ceil(2 * PULSE_SUPPORT_SIGMAS * rms_duration_s / sample_period_s)
    size = next_power_of_two(max(min_samples, ZERO_PADDING_FACTOR * support, 2))
    times = (np.arange(size) - size // 2) * sample_period_s
    envelope = np.exp(-(times**2) / (4.0 * rms_duration_s**2))
    return Pulse(sample_period_s=sample_period_s, samples=envelope.astype(complex), carrier_hz=carrier_hz)


def propagate_pulse(pulse: Pulse, response: ChannelResponse) -> Pulse:
    """Filter ``pulse`` through ``response`` in the retarded-time frame.

    The free-space delay d/c is removed, so the output stays centred in the
    sample window; only the carrier phase of the delay is kept.
    """

    if response.is_identity:
        return Pulse(pulse.sample_period_s, pulse.samples.copy(), pulse.carrier_hz)

    size = pulse.samples.size
    absolute = pulse.carrier_hz + np.fft.fftfreq(size, pulse.sample_period_s)
    if absolute.min() < response.frequencies[0] or absolute.max() > response.frequencies[-1]:
        raise ChannelError(
            f"pulse band [{absolute.min():g}, {absolute.max():g}] Hz exceeds the channel grid "
            f"[{response.frequencies[0]:g}, {response.frequencies[-1]:g}] Hz"
        )
    magnitude = np.interp(absolute, response.frequencies, np.abs(response.gain))
    carrier_phase = np.exp(-2j * math.pi * pulse.carrier_hz * response.distance_m / CONSTANTS.c)
    spectrum = np.fft.fft(pulse.samples) * magnitude * carrier_phase
    return Pulse(pulse.sample_period_s, np.fft.ifft(spectrum), pulse.carrier_hz)


def rms_width(pulse: Pulse) -> float:
    """Root second central moment of |samples|² in time."""

    power = np.abs(pulse.samples) ** 2
    total = power.sum()
    if total <= 0:
        raise ValueError("pulse carries no energy")
    times = pulse.times
    mean = float(np.dot(times, power) / total)
    return math.sqrt(float(np.dot((times - mean) ** 2, power) / total))


def rectangular_width(pulse: Pulse) -> float:
    """Width of the rectangle with the same rms duration (√12·rms)."""

    return math.sqrt(12.0) * rms_width(pulse)


def pulse_energy(pulse: Pulse) -> float:
    return float(np.sum(np.abs(pulse.samples) ** 2) * pulse.sample_period_s)


def spectral_energy(pulse: Pulse) -> float:
    spectrum = np.fft.fft(pulse.samples)
    return float(np.sum(np.abs(spectrum) ** 2) * pulse.sample_period_s / pulse.samples.size)
