import csv
import os
import subprocess
import sys
from pathlib import Path

import numpy as np
import pytest

from casimir_nems.cli import EXIT_IO, EXIT_OK, EXIT_VALIDATION, emit_curve_csv, main
from casimir_nems.errors import ConfigurationError
from casimir_nems.sensor import BalanceTable

CONFIGS = Path(__file__).resolve().parents[1] / "configs"


def read_csv(path):
    lines = [l for l in Path(path).read_text().splitlines() if not l.startswith("#")]
    return list(csv.DictReader(lines))


def test_equilibria_report(tmp_path, capsys):
    assert main(["equilibria", "--config", str(CONFIGS / "si-au-rough-1-5.yaml"), "--out", str(tmp_path)]) == EXIT_OK
    out = capsys.readouterr().out
    assert "2 equilibrium position(s)" in out
    rows = read_csv(tmp_path / "si-au-rough-1-5_equilibria.csv")
    rough = [r for r in rows if r["surface"] == "rough"]
    assert [r["stability"] for r in rough] == ["unstable", "stable"]
    assert all(abs(float(r["residual_Pa"])) < 1e-3 for r in rows)


def test_collapse_report(tmp_path, capsys):
    assert main(["collapse", "--config", str(CONFIGS / "si-si.yaml"), "--out", str(tmp_path)]) == EXIT_OK
    p = float(read_csv(tmp_path / "si-si_collapse.csv")[0]["p_crit_Pa"])
    assert 2979 < p < 3000


def test_sweep_columns_and_header(tmp_path):
    assert main(["sweep", "--config", str(CONFIGS / "si-au.yaml"), "--out", str(tmp_path),
                 "--set", "sweep.points=11"]) == EXIT_OK
    path = tmp_path / "si-au_curve.csv"
    text = path.read_text()
    for key in ("config_hash:", "temperature_K: 300.0", "extrapolation: membrane=none plate=drude",
                "tolerances:", "roughness_m:"):
        assert key in text
    rows = read_csv(path)
    assert len(rows) == 11
    assert list(rows[0]) == ["z_nm", "f_Pa", "p_tot_rough_Pa", "p_tot_smooth_Pa"]
    assert rows[0]["z_nm"] == "70.0000"


def test_outputs_are_deterministic(tmp_path):
    args = ["--config", str(CONFIGS / "si-au.yaml"), "--set", "sweep.points=21"]
    main(["sweep", *args, "--out", str(tmp_path / "a")])
    main(["sweep", *args, "--out", str(tmp_path / "b")])
    assert (tmp_path / "a" / "si-au_curve.csv").read_bytes() == (tmp_path / "b" / "si-au_curve.csv").read_bytes()


def test_calibrate_voltage(tmp_path):
    assert main(["calibrate-voltage", "--config", str(CONFIGS / "electrostatic.yaml"), "--out", str(tmp_path)]) == 0
    row = read_csv(tmp_path / "electrostatic_voltage.csv")[0]
    assert row["stable_root_nm"] == "164.5000"
    assert 0.05 < float(row["voltage_V"]) < 0.2


def test_fig2_right_curve_reproduces_outward_shift(tmp_path):
    main(["sweep", "--config", str(CONFIGS / "electrostatic-rough-1-10.yaml"), "--out", str(tmp_path)])
    rows = read_csv(tmp_path / "electrostatic-rough-1-10_curve.csv")
    z = np.array([float(r["z_nm"]) for r in rows])
    f = np.array([float(r["f_Pa"]) for r in rows])

    def first_crossing(p):
        g = f - p
        i = np.nonzero(np.sign(g[:-1]) != np.sign(g[1:]))[0][0]
        return z[i] - g[i] * (z[i + 1] - z[i]) / (g[i + 1] - g[i])

    rough = first_crossing(np.array([float(r["p_tot_rough_Pa"]) for r in rows]))
    smooth = first_crossing(np.array([float(r["p_tot_smooth_Pa"]) for r in rows]))
    assert 3.0 < rough - smooth < 5.0


def test_empty_grid_exit_code(tmp_path, capsys):
    code = main(["sweep", "--config", str(CONFIGS / "si-au.yaml"), "--set", "sweep.points=0", "--out", str(tmp_path)])
    assert code == EXIT_VALIDATION
    assert "sweep.points" in capsys.readouterr().err


def test_sweep_without_grid(tmp_path):
    code = main(["sweep", "--config", str(CONFIGS / "si-au.yaml"), "--set", "sweep=", "--out", str(tmp_path)])
    assert code == EXIT_VALIDATION


def test_invalid_config_exit_code(tmp_path):
    code = main(["equilibria", "--config", str(CONFIGS / "si-au.yaml"), "--set", "measured_pressure=5 kPa",
                 "--out", str(tmp_path)])
    assert code == EXIT_VALIDATION


@pytest.mark.skipif(os.geteuid() == 0, reason="root can write anywhere")
def test_unwritable_directory_permissions(tmp_path):
    locked = tmp_path / "locked"
    locked.mkdir(mode=0o500)
    code = main(["collapse", "--config", str(CONFIGS / "si-si.yaml"), "--out", str(locked / "x")])
    assert code == EXIT_IO


def test_unwritable_path_exit_code(tmp_path):
    blocker = tmp_path / "file"
    blocker.write_text("")
    code = main(["sweep", "--config", str(CONFIGS / "si-au.yaml"), "--set", "sweep.points=3",
                 "--out", str(blocker / "sub")])
    assert code == EXIT_IO


def test_emit_one_row(tmp_path):
    table = BalanceTable(np.array([1e-7]), np.array([1.0]), np.array([2.0]), np.array([2.0]))
    path = emit_curve_csv(table, tmp_path / "one.csv", ["hello"])
    lines = path.read_text().splitlines()
    assert lines[0] == "# hello"
    data = [l for l in lines if not l.startswith("#")]
    assert data == ["z_nm,f_Pa,p_tot_rough_Pa,p_tot_smooth_Pa", "100.0000,1.000000000e+00,2.000000000e+00,2.000000000e+00"]


def test_emit_empty_table_rejected(tmp_path):
    empty = BalanceTable(np.array([]), np.array([]), np.array([]), np.array([]))
    with pytest.raises(ConfigurationError):
        emit_curve_csv(empty, tmp_path / "e.csv")


def test_module_entry_point(tmp_path):
    proc = subprocess.run([sys.executable, "-m", "casimir_nems", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and "casimir-nems" in proc.stdout
