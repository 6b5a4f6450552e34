import os

import numpy as np
import pytest

from vp1d.cli import main
from vp1d.fields import read_field_csv, write_field_csv
from vp1d.run import SERIES_COLUMNS, load_run, read_series

SMALL = """
[profile]
name = quartic_bump
epsilon = {eps}
[grid]
nx = {nx}
nv = 128
{extra_grid}
[time]
final_time_periods = 1
steps_per_period = 40
[solver]
method = {method}
particle_rows = 32
"""


def write_cfg(tmp_path, name, eps=-0.1, nx=256, method="semilagrangian", extra_grid=""):
    path = tmp_path / name
    path.write_text(SMALL.format(eps=eps, nx=nx, method=method, extra_grid=extra_grid))
    return str(path)


@pytest.fixture(scope="module")
def small_run(tmp_path_factory):
    tmp = tmp_path_factory.mktemp("cli")
    cfg = write_cfg(tmp, "small.ini")
    out = str(tmp / "out")
    assert main(["run", cfg, "-o", out]) == 0
    return tmp, cfg, out


def test_run_writes_artifacts(small_run):
    _, _, out = small_run
    names = set(os.listdir(out))
    for required in ("config.echo", "series.csv", "theory.csv", "field_history.npz", "status",
                     "plot_series.gp"):
        assert required in names
    assert sum(n.startswith("fields_t") for n in names) == 4
    assert sum(n.startswith("snapshot_t") for n in names) == 4
    with open(os.path.join(out, "series.csv")) as fh:
        assert fh.readline().strip().split(",") == list(SERIES_COLUMNS)
    series = read_series(out)
    assert len(series["t"]) == 41
    assert open(os.path.join(out, "status")).read().strip() == "ok"


def test_run_is_deterministic(small_run, tmp_path):
    _, cfg, out = small_run
    again = str(tmp_path / "again")
    assert main(["run", cfg, "-o", again]) == 0
    with open(os.path.join(out, "series.csv"), "rb") as a, open(os.path.join(again, "series.csv"), "rb") as b:
        assert a.read() == b.read()


def test_steady_run_verifies(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "steady.ini", eps=0.0)
    out = str(tmp_path / "steady")
    assert main(["run", cfg, "-o", out]) == 0
    assert main(["verify", out]) == 0
    text = capsys.readouterr().out
    assert "steady_field: PASS" in text and "ALL CHECKS PASSED" in text
    assert open(os.path.join(out, "report.txt")).readline().strip() == "status: PASS"


def test_undersized_domain_exits_2(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "tiny.ini", nx=64, extra_grid="x_extent = 1.5")
    out = str(tmp_path / "tiny")
    assert main(["run", cfg, "-o", out]) == 2
    assert "SupportOverflowError" in capsys.readouterr().err
    assert open(os.path.join(out, "status")).read().startswith("FAILED")


def test_config_error_exits_1(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "bad.ini", eps=-2.0)
    assert main(["run", cfg]) == 1
    assert "configuration error" in capsys.readouterr().err
    assert main(["run", str(tmp_path / "missing.ini")]) == 1


def test_verify_missing_directory(tmp_path):
    assert main(["verify", str(tmp_path / "nothing")]) == 1


def test_corrupted_snapshot_fails_theorem1(small_run, tmp_path, capsys):
    import shutil
    _, _, out = small_run
    bad = str(tmp_path / "bad")
    shutil.copytree(out, bad)
    main(["verify", bad])
    assert "theorem1_exterior_density: PASS" in capsys.readouterr().out
    run = load_run(bad)
    path = sorted(p for p in os.listdir(bad) if p.startswith("fields_t"))[-1]
    fs = read_field_csv(os.path.join(bad, path), 0.0, run.xgrid)
    fs.rho[-5] = 1.0
    write_field_csv(os.path.join(bad, path), fs)
    assert main(["verify", bad]) == 1
    assert "theorem1_exterior_density: FAIL" in capsys.readouterr().out


def test_compare_self_and_incompatible(small_run, tmp_path, capsys):
    tmp, _, out = small_run
    assert main(["compare", out, out, "--report", str(tmp_path)]) == 0
    text = capsys.readouterr().out
    assert "compare_rho: PASS value=0.000000e+00" in text
    assert "compare_E: PASS value=0.000000e+00" in text
    assert (tmp_path / "checks.csv").exists()
    other_cfg = write_cfg(tmp_path, "other.ini", nx=128)
    other = str(tmp_path / "other")
    assert main(["run", other_cfg, "-o", other]) == 0
    assert main(["compare", out, other]) == 1
    assert "grids differ" in capsys.readouterr().err


def test_theory_prints_constants(small_run, capsys):
    _, cfg, _ = small_run
    assert main(["theory", cfg, "--rows", "5"]) == 0
    lines = capsys.readouterr().out.splitlines()
    assert lines[0].startswith("E0: 0.05333")
    assert lines[1] == "omega: 1"
    table = lines[lines.index("t,R_t,E_exterior") + 1:]
    assert len(table) == 5
    r = np.array([float(row.split(",")[1]) for row in table])
    assert r[0] == pytest.approx(1.0) and np.all(np.diff(r) > 0)


def test_both_methods_layout(tmp_path, capsys):
    cfg = write_cfg(tmp_path, "both.ini", method="both")
    out = str(tmp_path / "both")
    assert main(["run", cfg, "-o", out]) == 0
    assert os.path.isdir(os.path.join(out, "semilagrangian"))
    assert os.path.isdir(os.path.join(out, "deltaf-pic"))
    main(["verify", out])
    text = capsys.readouterr().out
    assert "deltaf-pic/theorem2_field_pos_frequency: PASS" in text
    assert "compare_rho:" in text
