import numpy as np
import pytest

from thz_absorption.models import saturation_vapor_density
from thz_absorption.units import (
    RangeError,
    db_to_linear,
    format_float,
    hz_to_wavenumber,
    linear_to_db,
    parse_frequency,
    parse_grid_spec,
    saturation_vapor_pressure_hpa,
    wavenumber_to_hz,
)


def test_format_float_uses_nine_significant_digits():
    assert format_float(0.1) == "1.00000000e-01"
    assert format_float(1) == "1.00000000e+00"
    assert format_float(-123456789.0) == "-1.23456789e+08"


@pytest.mark.parametrize(
    ("text", "expected"),
    [
        ("1.5THz", 1.5e12),
        ("300G", 300e9),
        ("300GHz", 300e9),
        ("1e11", 1e11),
        ("20 M", 20e6),
    ],
)
def test_parse_frequency_accepts_prefixes(text, expected):
    assert parse_frequency(text) == pytest.approx(expected, rel=1e-12)


def test_parse_frequency_rejects_garbage():
    with pytest.raises(ValueError, match="Invalid frequency"):
        parse_frequency("fast")


def test_parse_grid_spec_builds_grid():
    grid = parse_grid_spec("0.1THz:2THz:1901")
    assert grid.f_start == pytest.approx(1e11)
    assert grid.f_stop == pytest.approx(2e12)
    assert grid.n_points == 1901
    assert grid.spacing == pytest.approx(1e9)


@pytest.mark.parametrize("spec", ["1e11:2e11", "1e11:2e11:x", "2e11:1e11:10", "1e11:2e11:1"])
def test_parse_grid_spec_rejects_malformed(spec):
    with pytest.raises(ValueError):
        parse_grid_spec(spec)


def test_decibel_conversions():
    assert db_to_linear(20) == pytest.approx(100.0)
    assert linear_to_db(1000) == pytest.approx(30.0)
    values = db_to_linear(np.array([0.0, 10.0]))
    assert values == pytest.approx([1.0, 10.0])


def test_linear_to_db_rejects_non_positive():
    with pytest.raises(ValueError):
        linear_to_db(0.0)


def test_saturation_values():
    assert saturation_vapor_pressure_hpa(273.15) == pytest.approx(6.1121)
    assert saturation_vapor_density(293.15) == pytest.approx(17.28, abs=0.02)
    assert saturation_vapor_density(273.15) == pytest.approx(4.85, abs=0.01)


def test_saturation_density_outside_validity_range():
    with pytest.raises(RangeError):
        saturation_vapor_density(100.0)


def test_wavenumber_conversion_inverts():
    assert wavenumber_to_hz(1.0) == pytest.approx(29.9792458e9)
    assert hz_to_wavenumber(wavenumber_to_hz(18.5)) == pytest.approx(18.5, rel=1e-15)
