import json
import math

import numpy as np
import pytest

from tripod_memory import cli, files
from tripod_memory.checks import gaussian_envelope
from tripod_memory.config import ConfigError, RunConfig, format_config, load_config, parse_config
from tripod_memory.model import Grid, GridMismatch, InvalidDrive

SMALL = "T = 10\nL = 3\nn_t = 32\nn_z = 32\n"


def _write(tmp_path, text, name="run.cfg"):
    path = tmp_path / name
    path.write_text(text)
    return str(path)


def test_parse_defaults_and_comments():
    cfg = parse_config("# comment\n\nT = 12   # trailing\nn_t = 64\ndirection = forward\n")
    assert cfg.T == 12.0 and cfg.n_t == 64 and cfg.direction == "forward"
    assert cfg.L == RunConfig().L


def test_round_trip_format():
    cfg = RunConfig(T=7.5, theta=0.3, workers=2)
    assert parse_config(format_config(cfg)) == cfg


@pytest.mark.parametrize("text, fragment", [
    ("bogus = 1\n", "'bogus'"),
    ("T = 1\nT = 2\n", "duplicate key 'T'"),
    ("n_t = many\n", "'n_t'"),
    ("T 10\n", "expected 'key = value'"),
    ("omega_r1 = 1\n", "missing"),
    ("theta = 0.1\nomega_r1 = 1\nomega_r2 = 0\nomega_r3 = 0\nomega_r4 = 1\n", "either theta"),
])
def test_parse_errors_name_the_problem(text, fragment):
    with pytest.raises(ConfigError) as info:
        parse_config(text)
    assert fragment in str(info.value)


def test_explicit_rabi_quadruple():
    cfg = parse_config("omega_r1 = 0.6\nomega_r2 = 0.8\nomega_r3 = 0.6\nomega_r4 = 0.8\n")
    mem = cfg.validated()
    assert not mem.unitary and cfg.theta is None


def test_validation_before_compute():
    with pytest.raises(InvalidDrive):
        parse_config("omega_r1 = 0.8\nomega_r2 = 0.8\nomega_r3 = 0.8\nomega_r4 = 0.8\n").validated()
    with pytest.raises(ConfigError):
        RunConfig(direction="up").validated()
    with pytest.raises(ConfigError):
        RunConfig(theta=3.0).validated()


def test_envelope_csv_round_trip(tmp_path):
    g = Grid(10, 3, 16, 8)
    env = gaussian_envelope(g) * (1 + 0.5j)
    path = tmp_path / "a.csv"
    path.write_text(files.envelope_csv(env))
    back = files.read_envelope(path, g)
    np.testing.assert_array_equal(back.samples, env.samples)
    with pytest.raises(GridMismatch):
        files.read_envelope(path, Grid(10, 3, 32, 8))
    with pytest.raises(GridMismatch):
        files.read_envelope(path, Grid(11, 3, 16, 8))


def test_json_is_plain_and_stable():
    text = files.json_text({"b": np.float64(1.5), "a": [np.int64(2), math.nan], "c": np.bool_(True)})
    assert json.loads(text) == {"a": [2, None], "b": 1.5, "c": True}
    assert text.index('"a"') < text.index('"b"')


def test_write_all_leaves_no_temp_files(tmp_path):
    files.write_all(tmp_path / "out", {"x.csv": "1\n", "y.json": "{}\n"})
    assert sorted(p.name for p in (tmp_path / "out").iterdir()) == ["x.csv", "y.json"]


def test_cmd_kernel_outputs(tmp_path, capsys):
    out = tmp_path / "out"
    assert cli.main(["kernel", _write(tmp_path, SMALL), "-o", str(out)]) == 0
    rows, cols, entries = files.read_kernel_csv(out / "kernel.csv")
    assert entries.shape == (32, 32) and rows.size == 32 and cols.size == 32
    meta = json.loads((out / "kernel.json").read_text())
    assert meta["symmetry_defect"] < 1e-3 and meta["input_time_reversed"] is True
    assert len(meta["time_weights"]) == 32


def test_cmd_kernel_uncoupled_is_zero(tmp_path):
    out = tmp_path / "out"
    assert cli.main(["kernel", _write(tmp_path, SMALL + "coupling = 0\n"), "-o", str(out)]) == 0
    _, _, entries = files.read_kernel_csv(out / "kernel.csv")
    assert not entries.any()


def test_bad_key_exits_2(tmp_path, capsys):
    assert cli.main(["modes", _write(tmp_path, "T = 10\nLength = 3\n"), "-o", str(tmp_path)]) == 2
    assert "'Length'" in capsys.readouterr().err
    assert not (tmp_path / "modes.csv").exists()


def test_missing_config_exits_2(tmp_path):
    assert cli.main(["validate", str(tmp_path / "nope.cfg")]) == 2


def test_cmd_modes(tmp_path, capsys):
    out = tmp_path / "out"
    assert cli.main(["modes", _write(tmp_path, SMALL + "n_modes = 3\n"), "-o", str(out)]) == 0
    table = np.loadtxt(out / "eigenvalues.csv", delimiter=",", skiprows=1)
    assert table.shape == (32, 5) and table[0, 1] >= 0.99
    shapes = np.loadtxt(out / "modes.csv", delimiter=",", skiprows=1)
    assert shapes.shape == (32, 4)
    summary = json.loads((out / "modes.json").read_text())
    assert summary["gram_defect"] < 1e-6 and summary["completeness_residual"] < 1e-9
    assert "lambda" in capsys.readouterr().out


def test_cmd_modes_minimal_grid(tmp_path):
    out = tmp_path / "out"
    assert cli.main(["modes", _write(tmp_path, "n_t = 2\nn_z = 8\n"), "-o", str(out)]) == 0
    table = np.loadtxt(out / "eigenvalues.csv", delimiter=",", skiprows=1)
    assert table.shape == (2, 5)


def test_cmd_modes_vanishing_length(tmp_path):
    out = tmp_path / "out"
    assert cli.main(["modes", _write(tmp_path, "L = 1e-6\nn_t = 16\nn_z = 8\n"), "-o", str(out)]) == 0
    table = np.loadtxt(out / "eigenvalues.csv", delimiter=",", skiprows=1)
    assert table[:, 1].max() < 1e-6


def test_cmd_split_mode_report(tmp_path):
    out = tmp_path / "out"
    text = "T = 10\nL = 3\nn_t = 128\nn_z = 128\ntheta = 0.7853981633974483\n"
    assert cli.main(["split", _write(tmp_path, text), "-o", str(out), "--mode", "1"]) == 0
    report = json.loads((out / "report.json").read_text())
    assert report["mode"]["comparison"]["max_entry_error"] < 1e-2
    assert report["unitary_drive"] is True


def test_cmd_split_with_envelopes(tmp_path):
    g = Grid(10, 3, 32, 32)
    (tmp_path / "a1.csv").write_text(files.envelope_csv(gaussian_envelope(g)))
    out = tmp_path / "out"
    args = ["split", _write(tmp_path, SMALL), "-o", str(out), "--a1", str(tmp_path / "a1.csv")]
    assert cli.main(args) == 0
    a_plus = files.read_envelope(out / "a_plus.csv", g)
    a_minus = files.read_envelope(out / "a_minus.csv", g)
    report = json.loads((out / "report.json").read_text())
    assert report["protocol"]["output_energy"] == pytest.approx(a_plus.norm2() + a_minus.norm2())
    assert "mode" not in report


def test_cmd_split_rejects_misaligned_envelope(tmp_path):
    (tmp_path / "a1.csv").write_text(files.envelope_csv(gaussian_envelope(Grid(10, 3, 16, 16))))
    args = ["split", _write(tmp_path, SMALL), "-o", str(tmp_path), "--a1", str(tmp_path / "a1.csv")]
    assert cli.main(args) == 2


def test_validate_exit_codes(tmp_path, capsys):
    assert cli.main(["validate", _write(tmp_path, "n_t = 128\nn_z = 128\n")]) == 0
    listing = capsys.readouterr().out
    for name in ("conservation", "symmetry", "refinement", "passivity", "orthonormality",
                 "completeness", "composition", "splitter"):
        assert name in listing
    assert cli.main(["validate", _write(tmp_path, "n_t = 8\nn_z = 8\n", "coarse.cfg")]) == 1
    assert cli.main(["validate", _write(tmp_path, "coupling = 0\nn_t = 32\nn_z = 32\n", "zero.cfg")]) == 0


def test_sweep_outputs(tmp_path):
    text = "T_min = 5\nT_max = 10\nL_min = 1\nL_max = 3\nn_T = 2\nn_L = 3\nsweep_n = 32\n"
    out = tmp_path / "out"
    assert cli.main(["sweep", _write(tmp_path, text), "-o", str(out), "--workers", "2"]) == 0
    rows = np.loadtxt(out / "sweep.csv", delimiter=",", skiprows=1)
    assert rows.shape == (6, 5)
    summary = json.loads((out / "sweep.json").read_text())
    assert summary["best"]["lambda1"] == pytest.approx(rows[:, 2].max())
