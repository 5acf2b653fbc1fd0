import json
import os
import stat
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from horizonpcm.cli import main
from horizonpcm.horizon import HorizonPolicy, run_simulation
from horizonpcm.io import (DataError, load_system, manifest_without_timestamp, read_ledger,
                           read_prices, write_ledger, write_system)
from horizonpcm.pricing import compute_lmps
from horizonpcm.system import SynthParams, synth_system


@pytest.fixture(scope="module")
def week(tmp_path_factory):
    spec, series = synth_system(SynthParams(zones=3, hours=168), seed=1)
    path = write_system(spec, series, tmp_path_factory.mktemp("sys"))
    return spec, series, path


@pytest.fixture
def readonly_dir(tmp_path):
    d = tmp_path / "locked"
    d.mkdir()
    d.chmod(stat.S_IRUSR | stat.S_IXUSR)
    # root ignores mode bits; fall back to a location the kernel refuses
    target = d if not os.access(d, os.W_OK) else Path("/sys/horizonpcm-results")
    yield target
    d.chmod(stat.S_IRWXU)


def test_system_round_trip(week):
    spec, series, path = week
    spec2, series2 = load_system(path)
    assert spec2 == spec
    assert series2.equals(series)
    assert load_system(path.parent)[0] == spec


def rewrite(path, name, edit):
    f = path.parent / name
    lines = f.read_text().splitlines()
    f.write_text("\n".join(edit(lines)) + "\n")
    return f


def copy_system(week, tmp_path):
    spec, series, _ = week
    return write_system(spec, series, tmp_path / "copy")


def test_duplicate_hour_names_timestamp(week, tmp_path):
    path = copy_system(week, tmp_path)
    rewrite(path, "load.csv", lambda ls: ls[:3] + [ls[2]] + ls[3:])
    with pytest.raises(DataError) as err:
        load_system(path)
    stamp = (path.parent / "load.csv").read_text().splitlines()[2].split(",")[0]
    assert err.value.line == 4
    assert f"duplicate hour {stamp}" in str(err.value)
    assert "load.csv:4:" in str(err.value)


@pytest.mark.parametrize("edit,rule", [
    (lambda ls: ls[:1] + ["2050-13-01T00:00:00" + ls[1][19:]] + ls[2:], "malformed timestamp"),
    (lambda ls: [ls[0] + ",ghost"] + [r + ",1.0" for r in ls[1:]], "unknown entity column"),
    (lambda ls: ls[:1] + [ls[1].rsplit(",", 1)[0] + ",abc"] + ls[2:], "non-numeric value"),
    (lambda ls: ls[:2] + ls[3:], "missing hour"),
])
def test_series_parse_errors(week, tmp_path, edit, rule):
    path = copy_system(week, tmp_path)
    rewrite(path, "load.csv", edit)
    with pytest.raises(DataError, match=rule):
        load_system(path)


def test_unresolved_series_key(week, tmp_path):
    path = copy_system(week, tmp_path)
    data = json.loads(path.read_text())
    data["vre"][0]["availability_series_key"] = "nowhere"
    path.write_text(json.dumps(data, indent=2))
    with pytest.raises(DataError, match="unresolved series key"):
        load_system(path)


@pytest.fixture(scope="module")
def short_run():
    spec3, series3 = synth_system(SynthParams(zones=3, hours=72), seed=1)
    ledger = run_simulation(spec3, series3, HorizonPolicy.traditional())
    return spec3, series3, ledger, compute_lmps(spec3, series3, ledger)


def test_ledger_round_trip_is_bit_exact(short_run, tmp_path):
    _, _, ledger, prices = short_run
    write_ledger(ledger, tmp_path / "r", prices)
    back = read_ledger(tmp_path / "r")
    assert back.equals(ledger)
    assert read_prices(tmp_path / "r").lmp.tobytes() == prices.lmp.tobytes()


def test_repeated_writes_are_byte_identical(short_run, tmp_path):
    _, _, ledger, prices = short_run
    for name in ("a", "b"):
        write_ledger(ledger, tmp_path / name, prices)
    files = sorted(p.name for p in (tmp_path / "a").iterdir())
    assert files == sorted(p.name for p in (tmp_path / "b").iterdir())
    for f in files:
        if f != "manifest.json":
            assert (tmp_path / "a" / f).read_bytes() == (tmp_path / "b" / f).read_bytes()
    assert manifest_without_timestamp(tmp_path / "a") == manifest_without_timestamp(tmp_path / "b")
    m = json.loads((tmp_path / "a" / "manifest.json").read_text())
    assert {"created", "settings", "policy", "seeds", "inputs", "files", "version"} <= set(m)
    for name in ("windows.csv", "thermal.csv", "storage.csv", "flows.csv", "prices.csv"):
        assert name in m["files"]


def test_write_to_read_only_directory_fails_with_path(short_run, readonly_dir):
    _, _, ledger, _ = short_run
    with pytest.raises(OSError) as err:
        write_ledger(ledger, readonly_dir / "out")
    assert "horizonpcm-results" in str(err.value) or "locked" in str(err.value)


# ---------------------------------------------------------------- CLI

def test_cli_usage_errors(capsys):
    assert main(["run", "x", "--window-hours", "24", "--advance-hours", "48", "--out", "o"]) == 2
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and err[0].startswith("error: usage:")
    assert main(["run", "x", "--bogus", "--out", "o"]) == 2
    assert main([]) == 2


def test_cli_data_error_is_one_line(tmp_path, capsys):
    assert main(["validate", str(tmp_path / "missing.json")]) == 1
    err = capsys.readouterr().err.strip().splitlines()
    assert len(err) == 1 and err[0].startswith("error: data:")


def test_cli_synth_validate_run_lmp_report(tmp_path, capsys):
    sysdir = tmp_path / "sys"
    assert main(["synth", "--zones", "3", "--hours", "168", "--seed", "1",
                 "--out", str(sysdir)]) == 0
    assert main(["validate", str(sysdir)]) == 0
    out = tmp_path / "run"
    assert main(["run", str(sysdir), "--out", str(out)]) == 0
    for f in ("manifest.json", "windows.csv", "thermal.csv", "storage.csv", "flows.csv",
              "summary.json"):
        assert (out / f).exists(), f
    assert main(["lmp", str(out)]) == 0
    assert (out / "prices.csv").exists()
    m = json.loads((out / "manifest.json").read_text())
    assert "prices.csv" in m["files"]
    rep = tmp_path / "rep"
    assert main(["report", str(out), "--compare", str(out), "--out", str(rep)]) == 0
    s = json.loads((rep / "summary.json").read_text())
    assert s["cumulative_tpc_delta"] == [0.0] * 7
    assert "lmp" in s
    for f in ("daily_net_load.csv", "soc_histogram.csv", "dispatch_week.csv"):
        assert (rep / f).exists()
    led = read_ledger(out)
    assert len(led.windows) == 7


def test_cli_twin_on_degenerate_instance(tmp_path, capsys):
    out = tmp_path / "twin"
    code = main(["twin", "--instance", "twin_storage", "--tie-break-a", "lex_forward",
                 "--tie-break-b", "lex_reverse", "--out", str(out)])
    assert code == 0
    line = json.loads(capsys.readouterr().out.strip().splitlines()[-1])
    assert line["dispatch_distance"] > 0
    comp = json.loads((out / "comparison.json").read_text())
    assert comp["max_objective_rel_diff"] <= 2e-4
    assert (out / "a" / "manifest.json").exists() and (out / "b" / "manifest.json").exists()
    assert comp["runs"]["a"]["dir"] == "a"


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "horizonpcm", "run", "nowhere", "--out",
                           str(tmp_path), "--advance-hours", "72"], capture_output=True,
                          text=True)
    assert proc.returncode == 2
    assert proc.stderr.count("\n") == 1


def test_report_tables_follow_ledger(tmp_path, short_run):
    _, _, ledger, prices = short_run
    write_ledger(ledger, tmp_path / "r", prices)
    assert main(["report", str(tmp_path / "r"), "--out", str(tmp_path / "o")]) == 0
    rows = (tmp_path / "o" / "dispatch_week.csv").read_text().splitlines()
    assert len(rows) == 73
    daily = np.loadtxt(tmp_path / "o" / "daily_net_load.csv", delimiter=",", skiprows=1)
    assert daily.shape == (3, 3)
