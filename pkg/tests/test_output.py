import json

import numpy as np

from thz_absorption.models import AbsorptionSpectrum, FrequencyGrid, Scheme, SecrecyResult
from thz_absorption.output import (
    altitude_label,
    cache_dir,
    cache_key,
    k_spectrum_filename,
    restore_cached,
    store_cached,
    write_resolved_config,
    write_spectrum_csv,
    write_sweep_csv,
    write_tsook_csv,
)


def make_result(scheme: Scheme, d_e: float, secrecy: float) -> SecrecyResult:
    return SecrecyResult(
        scheme=scheme,
        d_e_m=d_e,
        c_b=4.0,
        c_e=4.0 - secrecy,
        secrecy_rate=secrecy,
        covert=False,
        chosen_frequency_hz=410e9,
        snr_b=15.0,
        snr_e=1.0,
    )


def test_k_spectrum_filename_uses_compact_altitude():
    assert k_spectrum_filename(0.0) == "k-spectrum-0km.csv"
    assert k_spectrum_filename(10.0) == "k-spectrum-10km.csv"
    assert k_spectrum_filename(0.5) == "k-spectrum-0.5km.csv"
    assert [altitude_label(a) for a in (0.0, 10.0, 2.5)] == ["0", "10", "2.5"]


def test_write_spectrum_csv(tmp_path):
    grid = FrequencyGrid(100e9, 200e9, 2)
    water = np.array([1.0, 2.0])
    oxygen = np.array([0.5, 0.25])
    spectrum = AbsorptionSpectrum(grid=grid, k_total=water + oxygen, k_by_species={1: water, 7: oxygen})
    path = write_spectrum_csv(tmp_path / "k.csv", spectrum)
    assert path.read_text(encoding="ascii").splitlines() == [
        "f_hz,k_total_db_km,k_h2o_db_km,k_o2_db_km",
        "1.00000000e+11,1.50000000e+00,1.00000000e+00,5.00000000e-01",
        "2.00000000e+11,2.25000000e+00,2.00000000e+00,2.50000000e-01",
    ]
    assert b"\r\n" not in path.read_bytes()


def test_write_sweep_csv(tmp_path):
    results = [make_result(Scheme.BASELINE, 2.0, 0.0), make_result(Scheme.RAN, 2.0, 2.5)]
    lines = write_sweep_csv(tmp_path / "sweep.csv", results).read_text(encoding="ascii").splitlines()
    assert lines[0] == "scheme,d_e_m,c_b,c_e,secrecy_bps_hz,covert,chosen_f_hz"
    assert lines[2] == "ran,2.00000000e+00,4.00000000e+00,1.50000000e+00,2.50000000e+00,false,4.10000000e+11"


def test_write_tsook_csv_flags_optimum(tmp_path):
    probabilities = np.array([0.0, 0.5, 1.0])
    capacities = np.array([0.0, 0.3, 0.0])
    lines = write_tsook_csv(tmp_path / "tsook.csv", probabilities, capacities, 1).read_text().splitlines()
    assert lines[0] == "p_one,capacity_bit,optimum"
    assert lines[2].endswith(",*")
    assert [line.endswith(",") for line in (lines[1], lines[3])] == [True, True]


def test_resolved_config_is_sorted_json(tmp_path):
    path = write_resolved_config(tmp_path / "cfg.json", {"b": 1, "a": [1, 2]})
    text = path.read_text(encoding="utf-8")
    assert text.index('"a"') < text.index('"b"')
    assert json.loads(text) == {"a": [1, 2], "b": 1}


def test_cache_key_tracks_command_config_and_data():
    base = cache_key("tsook", {"x": 1}, b"lines")
    assert base == cache_key("tsook", {"x": 1}, b"lines")
    assert base != cache_key("weather", {"x": 1}, b"lines")
    assert base != cache_key("tsook", {"x": 2}, b"lines")
    assert base != cache_key("tsook", {"x": 1}, b"other lines")
    assert len(base) == 64


def test_store_and_restore_cached_files(tmp_path):
    out_dir = tmp_path / "out"
    out_dir.mkdir()
    produced = out_dir / "result.csv"
    produced.write_bytes(b"a,b\n1,2\n")
    entry = cache_dir(out_dir, "tsook", "abc")
    assert restore_cached(entry, out_dir) is None

    store_cached(entry, [produced])
    produced.unlink()
    restored = restore_cached(entry, out_dir)
    assert restored == [produced]
    assert produced.read_bytes() == b"a,b\n1,2\n"


def test_restore_ignores_incomplete_entry(tmp_path, caplog):
    entry = tmp_path / "entry"
    entry.mkdir()
    (entry / "files.json").write_text('["missing.csv"]', encoding="utf-8")
    with caplog.at_level("WARNING"):
        assert restore_cached(entry, tmp_path) is None
    assert "incomplete cache entry" in caplog.text
