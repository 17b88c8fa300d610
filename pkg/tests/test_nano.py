import numpy as np
import pytest

from thz_absorption.models import TsOokRegime
from thz_absorption.nano import (
    capacity_curve,
    monte_carlo_capacity,
    optimize_source,
    symbol_rate_capacity,
    symbol_snr,
    ts_ook_capacity,
)


def make_regime(self_noise: float = 2.0) -> TsOokRegime:
    return TsOokRegime(pulse_energy=4.0, thermal_noise=1.0, self_noise=self_noise)


def test_symbol_snr():
    regime = make_regime()
    assert symbol_snr(regime, 1) == pytest.approx(4.0 / 3.0)
    assert symbol_snr(regime, 0) == 0.0
    with pytest.raises(ValueError):
        symbol_snr(regime, 2)


def test_capacity_vanishes_for_deterministic_sources():
    regime = make_regime()
    assert ts_ook_capacity(regime, 0.0) == 0.0
    assert ts_ook_capacity(regime, 1.0) == 0.0
    with pytest.raises(ValueError):
        ts_ook_capacity(regime, 1.5)


def test_calibrated_regime_capacity():
    assert ts_ook_capacity(make_regime(), 0.45) == pytest.approx(0.3406, abs=1e-3)


def test_symmetric_noise_gives_uniform_source():
    assert optimize_source(make_regime(self_noise=0.0)) == pytest.approx(0.5, abs=0.01)


@pytest.mark.parametrize("self_noise", [0.5, 1.0, 2.0])
def test_self_noise_favours_silence(self_noise):
    assert optimize_source(make_regime(self_noise)) < 0.5


def test_calibrated_optimum_near_forty_five_percent():
    assert optimize_source(make_regime()) == pytest.approx(0.45, abs=0.05)


def test_optimum_agrees_with_grid_search():
    regime = make_regime()
    probabilities, capacities = capacity_curve(regime, 1001)
    best = optimize_source(regime)
    assert probabilities[int(np.argmax(capacities))] == pytest.approx(best, abs=2e-3)
    assert ts_ook_capacity(regime, best) == pytest.approx(capacities.max(), abs=1e-3)


def test_capacity_curve_shape():
    probabilities, capacities = capacity_curve(make_regime())
    assert probabilities.size == 101
    assert capacities[0] == 0.0 and capacities[-1] == 0.0
    assert np.all(capacities >= 0)
    with pytest.raises(ValueError):
        capacity_curve(make_regime(), 1)


def test_monte_carlo_agrees_with_quadrature():
    regime = make_regime()
    estimate = monte_carlo_capacity(regime, 0.45, 200_000, seed=3)
    assert estimate == pytest.approx(ts_ook_capacity(regime, 0.45), abs=0.01)


def test_symbol_rate_capacity_scales_with_spreading():
    regime = make_regime()
    rate = symbol_rate_capacity(regime, 0.45, 1e-13)
    assert rate == pytest.approx(ts_ook_capacity(regime, 0.45) / (100 * 1e-13))
    with pytest.raises(ValueError):
        symbol_rate_capacity(regime, 0.45, 0.0)


def test_scaled_regime_keeps_thermal_noise():
    scaled = make_regime().scaled(2.0)
    assert (scaled.pulse_energy, scaled.thermal_noise, scaled.self_noise) == (8.0, 1.0, 4.0)
    with pytest.raises(ValueError):
        make_regime().scaled(0.0)
