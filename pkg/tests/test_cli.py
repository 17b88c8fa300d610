import csv
import json

import pytest

from thz_absorption.cli import CliError, build_overrides, main, parse_arguments

SMALL_GRID = "0.3THz:0.5THz:201"


def read_rows(path):
    with path.open(newline="", encoding="ascii") as handle:
        return list(csv.reader(handle))


def run(tmp_path, *argv):
    return main([*argv, "--out", str(tmp_path)])


def test_build_overrides_keeps_only_given_flags():
    args = parse_arguments(["tsook", "--points", "11", "--svg"])
    assert build_overrides(args) == {"output.svg": True, "tsook.n_points": 11}


def test_build_overrides_rejects_bad_grid():
    args = parse_arguments(["weather", "--grid", "1THz:2THz"])
    with pytest.raises(CliError, match="--grid"):
        build_overrides(args)


def test_tsook_writes_curve_and_resolved_config(tmp_path, capsys):
    assert run(tmp_path, "tsook") == 0
    rows = read_rows(tmp_path / "tsook.csv")
    assert rows[0] == ["p_one", "capacity_bit", "optimum"]
    assert len(rows) == 102
    optimum = [row for row in rows[1:] if row[2] == "*"]
    assert len(optimum) == 1
    assert float(optimum[0][0]) == pytest.approx(0.45, abs=0.02)
    resolved = json.loads((tmp_path / "tsook-resolved-config.json").read_text(encoding="utf-8"))
    assert resolved["tsook"]["self_noise"] == 2.0
    assert "tsook: wrote 1 file(s)" in capsys.readouterr().out


def test_weather_columns(tmp_path):
    assert run(tmp_path, "weather", "--grid", SMALL_GRID) == 0
    rows = read_rows(tmp_path / "weather.csv")
    assert ",".join(rows[0]) == "f_hz,clear,rain:25,rain:5,fog:100,sand:1"
    assert len(rows) == 202
    assert all(float(row[1]) == 0.0 for row in rows[1:])
    assert all(float(row[2]) > float(row[3]) > 0 for row in rows[1:])


def test_weather_svg(tmp_path):
    pytest.importorskip("matplotlib")
    assert run(tmp_path, "weather", "--grid", SMALL_GRID, "--svg") == 0
    assert (tmp_path / "weather.svg").is_file()


def test_unknown_weather_condition_is_a_usage_error(tmp_path, capsys):
    assert run(tmp_path, "weather", "--conditions", "hail") == 2
    assert "Unknown weather condition 'hail'" in capsys.readouterr().err


def test_empty_altitude_list_is_a_usage_error(tmp_path):
    assert run(tmp_path, "k-spectrum", "--altitudes", "") == 2


def test_bad_grid_is_a_usage_error(tmp_path, capsys):
    assert run(tmp_path, "k-spectrum", "--grid", "abc") == 2
    assert capsys.readouterr().err.startswith("Error: --grid")


def test_k_spectrum_writes_one_file_per_altitude(tmp_path):
    assert run(tmp_path, "k-spectrum", "--grid", SMALL_GRID) == 0
    names = sorted(path.name for path in tmp_path.glob("k-spectrum-*km.csv"))
    assert names == ["k-spectrum-0km.csv", "k-spectrum-10km.csv", "k-spectrum-20km.csv"]
    surface = read_rows(tmp_path / "k-spectrum-0km.csv")
    high = read_rows(tmp_path / "k-spectrum-20km.csv")
    assert surface[0] == ["f_hz", "k_total_db_km", "k_h2o_db_km", "k_o2_db_km"]
    assert len(surface) == 202
    assert sum(float(row[1]) for row in high[1:]) < sum(float(row[1]) for row in surface[1:])


def test_itu_outside_its_range_is_a_runtime_error(tmp_path, capsys):
    assert run(tmp_path, "k-spectrum", "--method", "itu", "--altitudes", "0") == 1
    assert "Error: k-spectrum:" in capsys.readouterr().err


def test_missing_catalog_is_a_runtime_error(tmp_path):
    assert run(tmp_path, "k-spectrum", "--catalog", str(tmp_path / "missing.par")) == 1


def test_loss_rows_cover_every_distance(tmp_path):
    assert run(tmp_path, "loss", "--grid", "0.3THz:0.4THz:11", "--distances", "1,10") == 0
    rows = read_rows(tmp_path / "loss.csv")
    assert rows[0][:3] == ["distance_m", "f_hz", "spreading_loss_db"]
    assert len(rows) == 1 + 2 * 11
    near = [row for row in rows[1:] if float(row[0]) == 1.0]
    far = [row for row in rows[1:] if float(row[0]) == 10.0]
    assert float(far[0][2]) - float(near[0][2]) == pytest.approx(20.0)


def test_windows_command(tmp_path):
    assert run(tmp_path, "windows", "--distances", "10,1000", "--required-bandwidth", "5G") == 0
    rows = read_rows(tmp_path / "windows.csv")
    assert rows[0] == ["f_low_hz", "f_high_hz", "distance_m", "threshold_db"]
    assert {float(row[2]) for row in rows[1:]} == {10.0, 1000.0}
    assert all(float(row[1]) > float(row[0]) for row in rows[1:])


def test_altitude_sweep_rows(tmp_path):
    assert run(tmp_path, "altitude-sweep", "--altitudes", "0,10", "--frequencies", "410G", "--segments", "10") == 0
    rows = read_rows(tmp_path / "altitude-sweep.csv")
    assert len(rows) == 3
    assert float(rows[1][3]) > float(rows[2][3]) > 0


def test_secrecy_sweep_is_deterministic(tmp_path):
    first = tmp_path / "first"
    second = tmp_path / "second"
    assert run(first, "secrecy-sweep", "--d-e", "5,20", "--no-cache") == 0
    assert run(second, "secrecy-sweep", "--d-e", "5,20", "--no-cache") == 0
    for name in ("secrecy-sweep.csv", "ran-pulse.csv"):
        assert (first / name).read_bytes() == (second / name).read_bytes()
    assert not (first / ".cache").exists()


def test_secrecy_sweep_cache_hit(tmp_path, capsys):
    assert run(tmp_path, "secrecy-sweep", "--d-e", "5", "--schemes", "baseline,ran") == 0
    original = (tmp_path / "secrecy-sweep.csv").read_bytes()
    (tmp_path / "secrecy-sweep.csv").unlink()
    capsys.readouterr()
    assert run(tmp_path, "secrecy-sweep", "--d-e", "5", "--schemes", "baseline,ran") == 0
    assert "secrecy-sweep: restored 2 file(s)" in capsys.readouterr().out
    assert (tmp_path / "secrecy-sweep.csv").read_bytes() == original


def test_equal_distances_give_zero_secrecy(tmp_path):
    assert run(tmp_path, "secrecy-sweep", "--d-e", "10") == 0
    rows = read_rows(tmp_path / "secrecy-sweep.csv")
    assert [row[0] for row in rows[1:]] == ["baseline", "tan", "apm", "ran"]
    assert all(float(row[4]) == 0.0 for row in rows[1:])


def test_infeasible_ran_timing_fails(tmp_path, capsys):
    config = tmp_path / "ran.json"
    config.write_text(json.dumps({"ran": {"slot_offset_s": 1e-12}}), encoding="utf-8")
    out = tmp_path / "out"
    assert main(["secrecy-sweep", "--config", str(config), "--d-e", "5", "--out", str(out)]) == 1
    assert "RAN infeasible" in capsys.readouterr().err
    assert (out / "secrecy-sweep.csv").is_file()
    assert not (out / ".cache").exists()
