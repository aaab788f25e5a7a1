from __future__ import annotations

import json
import subprocess
import sys

import pytest

from wbflux.cli import load_config, main, parse_config_text
from wbflux.errors import ConfigError


def out_args(tmp_path, name="out"):
    return ["--output-dir", str(tmp_path / name)]


def test_presets_lists_all(capsys):
    assert main(["presets"]) == 0
    text = capsys.readouterr().out
    for pid in ("tc1_equilibrium", "tc2_riemann", "tc3_zero", "tc4_discontinuous_z"):
        assert pid in text


def test_run_tc1_manifest(tmp_path):
    code = main(["run", "--preset", "tc1", "--scheme", "well_balanced", "--dx", "0.1", *out_args(tmp_path)])
    assert code == 0
    manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
    assert manifest["num_error"] <= 1e-8
    assert manifest["cfl_observed_ok"] is True
    assert manifest["n_cells"] == 40 and manifest["status"] == "ok"
    assert (tmp_path / "out" / "final.csv").read_text().startswith("x,u\n")
    assert (tmp_path / "out" / "snapshots.dat").exists()


def test_run_outputs_are_reproducible(tmp_path):
    args = ["run", "--preset", "tc2", "--dx", "0.1", "--set", "horizon=0.75"]
    assert main([*args, *out_args(tmp_path, "a")]) == 0
    assert main([*args, *out_args(tmp_path, "b")]) == 0
    for name in ("final.csv", "snapshots.dat", "snapshots_snap00_t0.25.csv"):
        assert (tmp_path / "a" / name).read_bytes() == (tmp_path / "b" / name).read_bytes()


def test_missing_config_file(tmp_path, capsys):
    path = tmp_path / "nope.toml"
    assert main(["run", "--config", str(path), *out_args(tmp_path)]) == 3
    assert str(path) in capsys.readouterr().err


def test_unknown_key_is_named(tmp_path, capsys):
    cfg = tmp_path / "bad.toml"
    cfg.write_text('preset = "tc1"\nbogus_key = 1\n')
    assert main(["run", "--config", str(cfg), *out_args(tmp_path)]) == 3
    assert "bogus_key" in capsys.readouterr().err


def test_config_file_and_flag_precedence(tmp_path):
    cfg = tmp_path / "run.toml"
    cfg.write_text('preset = "tc1"\ndx = 0.2\nscheme = "standard"\nsnapshot_times = [0.5, 1.0]\n')
    loaded = load_config(str(cfg), {"dx": 0.1}, ["scheme=well_balanced"])
    assert loaded["dx"] == 0.1
    assert loaded["scheme"] == "well_balanced"
    assert loaded["snapshot_times"] == [0.5, 1.0]


def test_parse_config_rejects_bad_types():
    with pytest.raises(ConfigError):
        parse_config_text('dx = "small"\n')
    assert parse_config_text("dx = 1\n")["dx"] == 1.0


def test_blowup_exit_code(tmp_path):
    code = main([
        "run", "--preset", "tc2", "--scheme", "standard", "--dx", "0.1", "--dt-mode", "explicit",
        "--dt", "2.5", "--set", "horizon=25", *out_args(tmp_path),
    ])
    assert code == 2
    manifest = json.loads((tmp_path / "out" / "manifest.json").read_text())
    assert manifest["status"] == "blowup"


def test_custom_model_run(tmp_path):
    cfg = tmp_path / "custom.toml"
    cfg.write_text(
        'model = "custom"\nf = "u + u**3"\ndf = "1 + 3*u**2"\nb = "1 + 0*u"\nd = "u + u**3"\n'
        'd_prime_min = 1.0\nb_lipschitz = 0.0\nz = "cos_bump"\ndomain = [0.0, 4.0]\nhorizon = 0.2\n'
        'u0 = "0.5 + 0*x"\nu_l = "0.5 + 0*t"\nu_r = "0.5 + 0*t"\ndx = 0.1\n'
    )
    assert main(["run", "--config", str(cfg), *out_args(tmp_path)]) == 0


def test_table_rows_subset(tmp_path, capsys):
    code = main(["table", "--preset", "tc1", "--scheme", "well_balanced", "--rows", "1-2", *out_args(tmp_path)])
    assert code == 0
    csv_text = (tmp_path / "out" / "table_tc1_equilibrium_well_balanced.csv").read_text()
    assert len(csv_text.splitlines()) == 3


def test_table_tight_tolerance_fails(tmp_path):
    args = ["table", "--preset", "tc3", "--rows", "1", *out_args(tmp_path)]
    assert main(args) == 0
    assert main([*args, "--tolerance", "1e-5"]) == 1


def test_table_reports_gated_rows(tmp_path, capsys):
    code = main(["table", "--preset", "tc1", "--rows", "1,3", "--dt-source", "adaptive", *out_args(tmp_path)])
    assert code == 0
    assert "GATED" in capsys.readouterr().out


def test_convergence_command(tmp_path, capsys):
    code = main(["convergence", "--preset", "tc1", "--set", "dx_list=[0.2, 0.1]", *out_args(tmp_path)])
    assert code == 0
    lines = capsys.readouterr().out.strip().splitlines()
    assert lines[0] == "dx,dt,l1_error,num_error,eoc,wall_time_s"
    assert float(lines[2].split(",")[4]) == pytest.approx(1.0, abs=0.1)


def test_entropy_check_defaults(tmp_path):
    assert main(["entropy-check", "--samples", "300", *out_args(tmp_path)]) == 0


def test_entropy_check_cfl_violation(tmp_path):
    assert main(["entropy-check", "--samples", "300", "--cfl", "5", *out_args(tmp_path)]) == 1


def test_entropy_check_zero_samples(tmp_path):
    assert main(["entropy-check", "--samples", "0", *out_args(tmp_path)]) == 3


def test_module_entry_point():
    proc = subprocess.run([sys.executable, "-m", "wbflux.cli", "--version"], capture_output=True, text=True)
    assert proc.returncode == 0 and proc.stdout.startswith("wbflux ")
