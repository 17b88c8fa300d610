import math
import warnings

import numpy as np
import pytest

from thz_absorption.absorption import absorption_coefficient
from thz_absorption.catalog import default_profile, load_builtin_catalog, parse_weather_condition, standard_state
from thz_absorption.channel import (
    ChannelError,
    absorption_noise_power,
    capacity,
    channel_transfer_function,
    gaussian_pulse,
    link_budget,
    link_terms,
    point_engine,
    propagate_pulse,
    pulse_energy,
    rectangular_width,
    rms_width,
    slant_absorption_db,
    spectral_energy,
    spreading_loss_db,
    thermal_noise_power,
)
from thz_absorption.models import CONSTANTS, AbsorptionSpectrum, ChannelResponse, FrequencyGrid, LinkGeometry, is_power_of_two


def make_geometry(distance_m: float = 10.0, **overrides) -> LinkGeometry:
    values = dict(
        distance_m=distance_m,
        carrier_hz=300e9,
        bandwidth_hz=10e9,
        tx_power_w=1e-3,
        tx_gain_db=20.0,
        rx_gain_db=20.0,
    )
    values.update(overrides)
    return LinkGeometry(**values)


def test_spreading_loss_spot_value():
    assert spreading_loss_db(300e9, 10.0) == pytest.approx(101.99, abs=0.01)


def test_spreading_loss_is_quadratic():
    assert spreading_loss_db(600e9, 10.0) - spreading_loss_db(300e9, 10.0) == pytest.approx(20 * math.log10(2))
    assert spreading_loss_db(300e9, 20.0) - spreading_loss_db(300e9, 10.0) == pytest.approx(20 * math.log10(2))


def test_spreading_loss_rejects_non_positive():
    with pytest.raises(ValueError):
        spreading_loss_db(300e9, 0.0)


def test_thermal_noise_and_capacity():
    assert thermal_noise_power(290.0, 1e9) == pytest.approx(4.0e-12, rel=1e-3)
    assert capacity(1.0, 1e9) == pytest.approx(1e9)
    assert capacity(np.array([0.0, 3.0]), 1.0) == pytest.approx([0.0, 2.0])
    with pytest.raises(ValueError):
        capacity(-1.0, 1e9)


def test_absorption_noise_is_linear_in_transmit_power():
    geometry = make_geometry(50.0)
    floor = absorption_noise_power(0.0, geometry, 10.0, 10e9, 290.0)
    single = absorption_noise_power(1e-3, geometry, 10.0, 10e9, 290.0)
    double = absorption_noise_power(2e-3, geometry, 10.0, 10e9, 290.0)
    assert double - floor == pytest.approx(2 * (single - floor), rel=1e-9)
    assert floor > 0


def test_absorption_noise_vanishes_without_absorption():
    assert absorption_noise_power(1e-3, make_geometry(), 0.0, 10e9, 290.0) == 0.0


def test_link_budget_terms_are_consistent():
    geometry = make_geometry(100.0)
    budget = link_budget(geometry, 5.0, 290.0)
    assert budget.absorption_loss_db == pytest.approx(0.5)
    assert budget.total_loss_db == pytest.approx(budget.spreading_loss_db + 0.5)
    assert budget.received_power_w == pytest.approx(1e-3 * 1e4 / 10 ** (budget.total_loss_db / 10))
    assert budget.snr == pytest.approx(budget.received_power_w / budget.noise_w)
    assert budget.capacity_bps == pytest.approx(10e9 * math.log2(1 + budget.snr))
    assert budget.capacity_bps_hz == pytest.approx(math.log2(1 + budget.snr))


def test_weather_lowers_snr():
    clear = link_budget(make_geometry(100.0), 5.0, 290.0)
    rainy = link_budget(make_geometry(100.0, weather=parse_weather_condition("rain:25")), 5.0, 290.0)
    assert rainy.weather_loss_db > 0
    assert rainy.snr < clear.snr


def test_self_noise_coupling_zero_keeps_reemission_floor():
    coupled = link_budget(make_geometry(100.0), 50.0, 290.0)
    floor_only = link_budget(make_geometry(100.0, self_noise_coupling=0.0), 50.0, 290.0)
    assert floor_only.absorption_noise_w < coupled.absorption_noise_w
    assert floor_only.snr > coupled.snr


def test_slant_absorption_with_constant_engine():
    profile = default_profile(standard_state())
    geometry = make_geometry(10_000.0, tx_altitude_km=0.0, rx_altitude_km=10.0)
    assert slant_absorption_db(profile, geometry, lambda atm: 5.0, 16) == pytest.approx(50.0)
    with pytest.raises(ValueError):
        slant_absorption_db(profile, geometry, lambda atm: 5.0, 0)


def test_slant_absorption_converges_with_segments():
    profile = default_profile(standard_state())
    geometry = make_geometry(10_000.0, tx_altitude_km=0.0, rx_altitude_km=10.0)

    def engine(atm):
        return 10.0 * atm.water_vapor_density + atm.pressure_atm

    reference = slant_absorption_db(profile, geometry, engine, 4096)
    assert slant_absorption_db(profile, geometry, engine, 128) == pytest.approx(
        slant_absorption_db(profile, geometry, engine, 64), rel=5e-3
    )
    errors = [abs(slant_absorption_db(profile, geometry, engine, n) - reference) for n in (4, 16, 64, 256)]
    assert all(b <= a for a, b in zip(errors, errors[1:]))


def test_horizontal_path_absorbs_less_aloft():
    profile = default_profile(standard_state())
    engine = point_engine(load_builtin_catalog(), 410e9)
    sea_level = slant_absorption_db(profile, make_geometry(1000.0), engine, 4)
    aloft = slant_absorption_db(profile, make_geometry(1000.0, tx_altitude_km=10.0, rx_altitude_km=10.0), engine, 4)
    assert sea_level > aloft > 0


def test_snr_and_capacity_fall_with_distance():
    budgets = [link_budget(make_geometry(d), 5.0, 290.0) for d in (1.0, 2.0, 5.0, 10.0, 50.0, 100.0, 500.0)]
    assert all(b.snr <= a.snr for a, b in zip(budgets, budgets[1:]))
    assert all(b.capacity_bps <= a.capacity_bps for a, b in zip(budgets, budgets[1:]))


def test_opaque_path_gives_zero_snr_without_overflow():
    geometry = make_geometry(100.0)
    with warnings.catch_warnings(), np.errstate(over="raise", divide="raise", invalid="raise"):
        warnings.simplefilter("error")
        budget = link_budget(geometry, 1e6, 290.0)
        terms = link_terms(geometry, np.array([300e9, 310e9]), np.array([0.0, 1e6]), 290.0)
    assert budget.received_power_w == 0.0
    assert budget.snr == 0.0
    assert terms["snr"][0] > 0
    assert terms["snr"][1] == 0.0


def test_transfer_function_magnitude_and_grid_checks():
    grid = FrequencyGrid(300e9, 400e9, 11)
    spectrum = AbsorptionSpectrum.constant(grid, 20.0)
    near = channel_transfer_function(spectrum, 1.0)
    far = channel_transfer_function(spectrum, 10.0)
    assert np.all(np.abs(near.gain) <= 1.0)
    assert np.all(np.abs(far.gain) < np.abs(near.gain))
    with pytest.raises(ChannelError):
        channel_transfer_function(spectrum, 1.0, frequencies=np.array([250e9]))


def test_transfer_function_phase_gives_line_of_sight_delay():
    spectrum = AbsorptionSpectrum.constant(FrequencyGrid(300e9, 301e9, 101), 5.0)
    response = channel_transfer_function(spectrum, 10.0)
    phase = np.unwrap(np.angle(response.gain))
    delay = -np.gradient(phase, 2 * math.pi * response.frequencies)
    assert delay == pytest.approx(np.full(delay.size, 10.0 / CONSTANTS.c), rel=1e-6)


def test_gaussian_pulse_shape():
    pulse = gaussian_pulse(1.3e12, 5e-12, 2e-12)
    assert is_power_of_two(pulse.samples.size)
    assert pulse.samples.size >= 1024
    assert rms_width(pulse) == pytest.approx(5e-12, rel=1e-6)
    assert rectangular_width(pulse) == pytest.approx(math.sqrt(12) * 5e-12, rel=1e-6)


def test_identity_response_returns_input():
    pulse = gaussian_pulse(1.3e12, 5e-12, 2e-12)
    output = propagate_pulse(pulse, ChannelResponse.identity(np.array([1e12, 2e12])))
    assert np.array_equal(output.samples, pulse.samples)


@pytest.fixture(scope="module")
def high_band():
    grid = FrequencyGrid(1.0e12, 1.7e12, 701)
    spectrum = absorption_coefficient(load_builtin_catalog(), standard_state(), grid)
    frequencies = spectrum.frequencies
    band = (frequencies >= 1.3e12) & (frequencies <= 1.4e12)
    carrier = float(frequencies[band][np.argmin(spectrum.k_total[band])])
    return spectrum, carrier


def test_pulse_broadens_with_distance(high_band):
    spectrum, carrier = high_band
    pulse = gaussian_pulse(carrier, 5e-12, 2e-12)
    widths = [rms_width(propagate_pulse(pulse, channel_transfer_function(spectrum, d))) for d in (1, 5, 10, 20, 50)]
    assert all(b > a for a, b in zip(widths, widths[1:]))


def test_pulse_width_constant_without_absorption(high_band):
    spectrum, carrier = high_band
    flat = AbsorptionSpectrum.constant(spectrum.grid, 0.0)
    pulse = gaussian_pulse(carrier, 5e-12, 2e-12)
    widths = [rms_width(propagate_pulse(pulse, channel_transfer_function(flat, d))) for d in (1, 5, 10, 20, 50)]
    assert max(widths) == pytest.approx(min(widths), rel=1e-3)


def test_propagation_preserves_parseval(high_band):
    spectrum, carrier = high_band
    pulse = gaussian_pulse(carrier, 5e-12, 2e-12)
    received = propagate_pulse(pulse, channel_transfer_function(spectrum, 20.0))
    assert pulse_energy(received) == pytest.approx(spectral_energy(received), rel=1e-9)
    assert pulse_energy(received) < pulse_energy(pulse)


def test_pulse_band_must_fit_the_grid():
    spectrum = AbsorptionSpectrum.constant(FrequencyGrid(1.3e12, 1.4e12, 11), 1.0)
    pulse = gaussian_pulse(1.35e12, 5e-12, 2e-12)
    with pytest.raises(ChannelError):
        propagate_pulse(pulse, channel_transfer_function(spectrum, 1.0))
