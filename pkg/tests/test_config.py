import json

import pytest

from thz_absorption.config import (
    ConfigError,
    RunConfig,
    cache_relevant_dict,
    load_calibration,
    load_run_config,
    resolved_config_dict,
)
from thz_absorption.models import Scheme


def test_calibration_profile_is_applied():
    config = load_run_config()
    assert config.security.carrier_hz == pytest.approx(410e9)
    assert config.security.tx_gain_db == 20.0
    assert config.tsook.self_noise == 2.0
    assert config.security.schemes == tuple(scheme.value for scheme in Scheme)
    assert all(isinstance(d, float) for d in config.security.d_e_m)
    assert RunConfig().security.carrier_hz == pytest.approx(300e9)


def test_calibration_sections_are_known():
    assert set(load_calibration()) == {"security", "ran", "tsook"}


def test_overrides_win_over_file(tmp_path):
    path = tmp_path / "run.json"
    path.write_text(json.dumps({"security": {"d_b_m": 12}, "tsook": {"n_points": 11}}), encoding="utf-8")
    config = load_run_config(path, {"tsook.n_points": 21, "grid": "0.3THz:0.5THz:21"})
    assert config.security.d_b_m == 12.0
    assert config.tsook.n_points == 21
    assert config.grid == "0.3THz:0.5THz:21"


def test_unknown_field_is_rejected():
    with pytest.raises(ConfigError, match="unknown configuration field 'security.bogus'"):
        load_run_config(overrides={"security.bogus": 1})


def test_wrong_type_names_the_field():
    with pytest.raises(ConfigError, match="'tsook.n_points' expects int"):
        load_run_config(overrides={"tsook.n_points": 2.5})
    with pytest.raises(ConfigError, match="'security.d_e_m' expects a list"):
        load_run_config(overrides={"security.d_e_m": 5})


def test_invalid_json_file(tmp_path):
    path = tmp_path / "broken.json"
    path.write_text("{not json", encoding="utf-8")
    with pytest.raises(ConfigError, match="not valid JSON"):
        load_run_config(path)


@pytest.mark.parametrize(
    ("overrides", "message"),
    [
        ({"altitudes_km": []}, "altitudes_km: must not be empty"),
        ({"grid": "2THz:1THz:10"}, "grid:"),
        ({"method": "exact"}, "unknown method"),
        ({"weather.conditions": ["hail"]}, r"weather.conditions\[0\]"),
        ({"security.schemes": ["jam"]}, "unknown scheme 'jam'"),
        ({"windows.merge_gaps": -1}, "windows.merge_gaps"),
        ({"atmosphere.preset": "mars"}, "unknown preset"),
    ],
)
def test_validation_errors(overrides, message):
    with pytest.raises(ConfigError, match=message):
        load_run_config(overrides=overrides)


def test_optional_fields_accept_null():
    config = load_run_config(overrides={"windows.required_bandwidth_hz": None, "ran.pulse_center_hz": 4e11})
    assert config.windows.required_bandwidth_hz is None
    assert config.ran.timing().pulse_center_hz == pytest.approx(4e11)


def test_resolved_dict_and_cache_fields():
    config = load_run_config(overrides={"output.directory": "elsewhere"})
    resolved = resolved_config_dict(config)
    assert resolved["altitudes_km"] == [0.0, 10.0, 20.0]
    assert resolved["output"]["directory"] == "elsewhere"
    relevant = cache_relevant_dict(config)
    assert "directory" not in relevant["output"]
    assert "cache" not in relevant["output"]
    assert cache_relevant_dict(load_run_config()) == relevant
