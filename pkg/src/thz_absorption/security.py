from __future__ import annotations

import dataclasses
import logging
import math
from typing import Iterable, List, Sequence

import numpy as np

from .channel import (
    channel_transfer_function,
    gaussian_pulse,
    link_terms,
    propagate_pulse,
    rectangular_width,
    spreading_loss_db,
    weather_loss_db,
)
from .models import (
    CONSTANTS,
    AbsorptionSpectrum,
    Pulse,
    RanTiming,
    Scheme,
    SecrecyResult,
    SecurityScenario,
)
from .units import db_to_linear

LOGGER = logging.getLogger(__name__)


def secrecy_rate(c_b: float, c_e: float) -> float:
    """Secrecy rate max(0, C_B - C_E) in bit/s/Hz."""

    if c_b < 0 or c_e < 0:
        raise ValueError("capacities must be non-negative")
    return max(0.0, c_b - c_e)


def _result(
    scenario: SecurityScenario,
    scheme: Scheme,
    snr_b: float,
    snr_e: float,
    frequency_hz: float,
) -> SecrecyResult:
    c_b = math.log2(1.0 + snr_b)
    c_e = math.log2(1.0 + snr_e)
    return SecrecyResult(
        scheme=scheme,
        d_e_m=scenario.d_e_m,
        c_b=c_b,
        c_e=c_e,
        secrecy_rate=secrecy_rate(c_b, c_e),
        covert=snr_e <= scenario.snr_covert,
        chosen_frequency_hz=frequency_hz,
        snr_b=snr_b,
        snr_e=snr_e,
    )


def _infeasible(scenario: SecurityScenario, scheme: Scheme, frequency_hz: float, snr_b: float, snr_e: float, reason: str) -> SecrecyResult:
    LOGGER.debug("%s infeasible at d_E=%g m: %s", scheme.value, scenario.d_e_m, reason)
    return SecrecyResult(
        scheme=scheme,
        d_e_m=scenario.d_e_m,
        c_b=0.0,
        c_e=0.0,
        secrecy_rate=0.0,
        covert=snr_e <= scenario.snr_covert,
        chosen_frequency_hz=frequency_hz,
        snr_b=snr_b,
        snr_e=snr_e,
        feasible=False,
        reason=reason,
    )


def _terms(scenario: SecurityScenario, distance_m: float, frequency_hz, k_db_km):
    geometry = scenario.geometry(distance_m, carrier_hz=float(np.atleast_1d(frequency_hz)[0]))
    return link_terms(geometry, frequency_hz, k_db_km, scenario.noise_temperature_k)


def baseline_secrecy(scenario: SecurityScenario, spectrum: AbsorptionSpectrum) -> SecrecyResult:
    """Plain transmission at the scenario carrier."""

    k = spectrum.at(scenario.carrier_hz)
    snr_b = float(_terms(scenario, scenario.d_b_m, scenario.carrier_hz, k)["snr"])
    snr_e = float(_terms(scenario, scenario.d_e_m, scenario.carrier_hz, k)["snr"])
    return _result(scenario, Scheme.BASELINE, snr_b, snr_e, scenario.carrier_hz)


def tan_secrecy(scenario: SecurityScenario, spectrum: AbsorptionSpectrum) -> SecrecyResult:
    """Transmitter-side AN: a fraction of the transmit power is noise on the same LoS path."""

    baseline = baseline_secrecy(scenario, spectrum)
    fraction = scenario.an_fraction
    if fraction == 0.0:
        return dataclasses.replace(baseline, scheme=Scheme.TAN)

    k = spectrum.at(scenario.carrier_hz)
    sinr = []
    for distance in (scenario.d_b_m, scenario.d_e_m):
        terms = _terms(scenario, distance, scenario.carrier_hz, k)
        received = float(terms["received_power_w"])
        noise = float(terms["thermal_noise_w"]) + float(terms["absorption_noise_w"])
        sinr.append((1.0 - fraction) * received / (noise + fraction * received))
    return _result(scenario, Scheme.TAN, sinr[0], sinr[1], scenario.carrier_hz)


def apm_select_frequency(spectrum: AbsorptionSpectrum, scenario: SecurityScenario) -> SecrecyResult:
    """Absorption peak modulation: carrier on the grid maximising the secrecy rate.

    Only frequencies where the LU reaches ``snr_min`` qualify; ties resolve to
    the lowest frequency.
    """

    frequencies = spectrum.frequencies
    k = spectrum.k_total
    snr_b = np.asarray(_terms(scenario, scenario.d_b_m, frequencies, k)["snr"], dtype=float)
    snr_e = np.asarray(_terms(scenario, scenario.d_e_m, frequencies, k)["snr"], dtype=float)
    feasible = snr_b >= scenario.snr_min
    if not np.any(feasible):
        best = int(np.argmax(snr_b))
        return _infeasible(
            scenario,
            Scheme.APM,
            float(frequencies[best]),
            float(snr_b[best]),
            float(snr_e[best]),
            f"no grid frequency reaches snr_min={scenario.snr_min:g} at the LU",
        )
    secrecy = np.maximum(np.log2(1.0 + snr_b) - np.log2(1.0 + snr_e), 0.0)
    choice = int(np.argmax(np.where(feasible, secrecy, -np.inf)))
    return _result(scenario, Scheme.APM, float(snr_b[choice]), float(snr_e[choice]), float(frequencies[choice]))


def _width_after(pulse: Pulse, spectrum: AbsorptionSpectrum, distance_m: float, scenario: SecurityScenario) -> float:
    response = channel_transfer_function(spectrum, distance_m, scenario.weather)
    return rectangular_width(propagate_pulse(pulse, response))


def _interval_overlap(a_low: float, a_high: float, b_low: float, b_high: float) -> float:
    return max(0.0, min(a_high, b_high) - max(a_low, b_low))


def ran_pulse(scenario: SecurityScenario, timing: RanTiming) -> Pulse:
    center = scenario.carrier_hz if timing.pulse_center_hz is None else timing.pulse_center_hz
    return gaussian_pulse(center, timing.rms_duration_s, timing.sample_period_s, min_samples=timing.min_samples)


def ran_secrecy(
    scenario: SecurityScenario,
    spectrum: AbsorptionSpectrum,
    timing: RanTiming | None = None,
) -> SecrecyResult:
    """SIC-free receiver AN: the LU jams outside a quiet window around its own pulses.

    Pulse widths come from propagating a Gaussian pulse through the absorption
    channel and converting rms durations to rectangular widths.
    """

    timing = timing or RanTiming()
    baseline = baseline_secrecy(scenario, spectrum)
    if scenario.an_power_w == 0.0:
        return dataclasses.replace(baseline, scheme=Scheme.RAN)

    pulse = ran_pulse(scenario, timing)
    width_b = _width_after(pulse, spectrum, scenario.d_b_m, scenario)
    width_si = _width_after(pulse, spectrum, timing.self_loop_m, scenario)

    required = width_b / 2 + timing.guard_s + width_si / 2
    if not required < timing.slot_offset_s:
        return _infeasible(
            scenario,
            Scheme.RAN,
            scenario.carrier_hz,
            baseline.snr_b,
            baseline.snr_e,
            f"time separation needs {required:.4g} s but the AN slot offset is {timing.slot_offset_s:.4g} s",
        )
    if not 2 * timing.slot_offset_s < 1.0 / timing.symbol_rate_hz:
        return _infeasible(
            scenario,
            Scheme.RAN,
            scenario.carrier_hz,
            baseline.snr_b,
            baseline.snr_e,
            f"AN slot offset {timing.slot_offset_s:.4g} s does not fit the symbol period "
            f"{1.0 / timing.symbol_rate_hz:.4g} s",
        )

    k = spectrum.at(scenario.carrier_hz)
    eve = _terms(scenario, scenario.d_e_m, scenario.carrier_hz, k)
    if scenario.d_e_m >= scenario.d_b_m:
        # Behind the LU the quiet window travels with the pulse, and the SIC-free
        # front end re-radiates what it receives: Eve sees at least the LU's SNR.
        snr_e = max(float(eve["snr"]), baseline.snr_b)
        LOGGER.debug("RAN d_E=%g m: eavesdropper beyond the LU, no AN protection", scenario.d_e_m)
        return _result(scenario, Scheme.RAN, baseline.snr_b, snr_e, scenario.carrier_hz)

    an_distance = scenario.d_b_m - scenario.d_e_m
    width_e = _width_after(pulse, spectrum, scenario.d_e_m, scenario)
    width_an = _width_after(pulse, spectrum, an_distance, scenario)

    shift = 2.0 * an_distance / CONSTANTS.c
    quiet = max(0.0, timing.slot_offset_s - width_an / 2)
    covered = _interval_overlap(-width_e / 2, width_e / 2, shift - quiet, shift + quiet)
    jammed_fraction = 1.0 - covered / width_e

    noise_e = float(eve["thermal_noise_w"]) + float(eve["absorption_noise_w"])
    if jammed_fraction > 0.0:
        # AN leaves the LU on its receive antenna and shares the eavesdropper's gain.
        an_loss = (
            max(float(spreading_loss_db(scenario.carrier_hz, an_distance)), 0.0)
            + k * an_distance / 1000.0
            + float(weather_loss_db(scenario.weather, scenario.carrier_hz, an_distance))
        )
        interference = scenario.an_power_w * db_to_linear(2 * scenario.rx_gain_db - an_loss)
        noise_e += jammed_fraction * interference
    sinr_e = float(eve["received_power_w"]) / noise_e
    LOGGER.debug(
        "RAN d_E=%g m: widths B=%.3g E=%.3g AN=%.3g s, jammed fraction %.3f",
        scenario.d_e_m,
        width_b,
        width_e,
        width_an,
        jammed_fraction,
    )
    return _result(scenario, Scheme.RAN, baseline.snr_b, sinr_e, scenario.carrier_hz)


def evaluate_scheme(
    scenario: SecurityScenario,
    spectrum: AbsorptionSpectrum,
    timing: RanTiming | None = None,
) -> SecrecyResult:
    if scenario.scheme is Scheme.TAN:
        return tan_secrecy(scenario, spectrum)
    if scenario.scheme is Scheme.APM:
        return apm_select_frequency(spectrum, scenario)
    if scenario.scheme is Scheme.RAN:
        return ran_secrecy(scenario, spectrum, timing)
    return baseline_secrecy(scenario, spectrum)


def sweep_eavesdropper(
    template: SecurityScenario,
    d_e_values: Sequence[float],
    schemes: Iterable[Scheme | str],
    spectrum: AbsorptionSpectrum,
    timing: RanTiming | None = None,
) -> List[SecrecyResult]:
    """One result per (scheme, d_E), scheme-major, in the order given."""

    if any(not value > 0 for value in d_e_values):
        raise ValueError("eavesdropper distances must be positive")
    results: List[SecrecyResult] = []
    for scheme in (Scheme(value) for value in schemes):
        for d_e in d_e_values:
            scenario = dataclasses.replace(template, d_e_m=float(d_e), scheme=scheme)
            results.append(evaluate_scheme(scenario, spectrum, timing))
    return results


def ran_pulse_trace(
    scenario: SecurityScenario,
    spectrum: AbsorptionSpectrum,
    timing: RanTiming | None = None,
) -> Pulse:
    """Information pulse as received by the LU (retarded time)."""

    timing = timing or RanTiming()
    pulse = ran_pulse(scenario, timing)
    return propagate_pulse(pulse, channel_transfer_function(spectrum, scenario.d_b_m, scenario.weather))
