"""Command-line tests: subcommands, outputs and exit codes."""

import json

import numpy as np
import pytest

from waveguide_imaging.controllers import load_data, load_scenario, load_volume
from waveguide_imaging.main import EXIT_INPUT, EXIT_NUMERICAL, EXIT_OK, build_parser, main
from waveguide_imaging.models import NoiseRecord
from waveguide_imaging.physics import eval_reference_field, scenario_amplitudes


def test_version_flag(capsys):
    with pytest.raises(SystemExit) as info:
        main(["--version"])
    assert info.value.code == 0
    assert "waveguide-imaging v" in capsys.readouterr().out


def test_parser_lists_commands():
    """Every subcommand is registered."""
    parser = build_parser()
    help_text = parser.format_help()
    for command in ("scenario", "modes", "field", "greens-check", "synthesize", "rtm", "l1",
                    "run", "export"):
        assert command in help_text


def test_scenario_validate(scenario_file, capsys):
    assert main(["scenario", "validate", str(scenario_file)]) == EXIT_OK
    assert "valid" in capsys.readouterr().out


def test_scenario_validate_reports_violations(tmp_path, scenario_dict, capsys):
    """Invalid scenarios exit with 1 and list each violation."""
    scenario_dict["geometry"]["L2"] = 0.0
    scenario_dict["array"]["spacing"] = -0.1
    path = tmp_path / "bad.json"
    path.write_text(json.dumps(scenario_dict), encoding="utf-8")
    assert main(["scenario", "validate", str(path)]) == EXIT_INPUT
    err = capsys.readouterr().err
    assert err.startswith("error:")
    assert "geometry.L2" in err and "spacing" in err


def test_missing_file_exits_with_input_error(tmp_path, capsys):
    assert main(["modes", str(tmp_path / "missing.json")]) == EXIT_INPUT
    assert "error:" in capsys.readouterr().err


def test_scenario_preset(tmp_path):
    """Presets are written as loadable scenario files."""
    path = tmp_path / "shell.json"
    assert main(["scenario", "preset", "shell", "--aperture", "full", "--out", str(path)]) == EXIT_OK
    scenario = load_scenario(path)
    assert scenario.reflector.kind == "shell"
    assert scenario.array.size == pytest.approx((13.9, 14.2))


def test_modes_listing(scenario_file, capsys):
    """The mode table lists the retained count and the lattice size."""
    assert main(["modes", str(scenario_file), "--limit", "3", "--verify"]) == EXIT_OK
    out = capsys.readouterr().out
    assert "20 propagating modes, 21 index pairs counted (first 3 shown)" in out
    assert "retained budget M = 12" in out
    assert "checks passed" in out


def test_field_command(scenario_file, tmp_path, capsys):
    """Reference-field samples are printed and mirrored to CSV."""
    out_csv = tmp_path / "field.csv"
    code = main(["field", str(scenario_file), "--point", "1.0", "0.9", "-2.3",
                 "--point", "0.5", "0.5", "-1.0", "--out", str(out_csv)])
    assert code == EXIT_OK
    assert "E1" in capsys.readouterr().out
    table = np.loadtxt(out_csv, delimiter=",", skiprows=1)
    assert table.shape == (2, 9)


def test_field_on_source_plane(scenario_file, capsys):
    """Evaluating on the source plane is a geometry error."""
    code = main(["field", str(scenario_file), "--point", "1.0", "0.9", "-6.0"])
    assert code == EXIT_INPUT


def test_field_needs_points(scenario_file, tmp_path):
    assert main(["field", str(scenario_file)]) == EXIT_INPUT
    assert main(["field", str(scenario_file), "--plane", "x3=-2.5"]) == EXIT_INPUT
    assert main(["field", str(scenario_file), "--plane", "y=1",
                 "--out", str(tmp_path / "f.csv")]) == EXIT_INPUT


def test_field_plane_slice(scenario_file, tmp_path):
    """A plane slice covers the window grid and matches point evaluation."""
    axial = tmp_path / "axial.csv"
    assert main(["field", str(scenario_file), "--plane", "x1=1.0", "--out", str(axial)]) == EXIT_OK
    header = axial.read_text(encoding="utf-8").splitlines()[0]
    assert header == "x1,x2,x3,abs_1,abs_2,abs_3"
    table = np.loadtxt(axial, delimiter=",", skiprows=1)
    assert table.shape == (9, 6)
    assert np.all(table[:, 0] == 1.0)
    assert sorted(set(table[:, 2])) == [-3.0, -2.5, -2.0]
    scenario = load_scenario(scenario_file)
    direct = eval_reference_field(table[:, :3], scenario_amplitudes(scenario))
    assert np.allclose(table[:, 3:], np.abs(direct), rtol=1e-12)
    cross = tmp_path / "cross.csv"
    assert main(["field", str(scenario_file), "--plane", "x3=-2.5", "--out", str(cross)]) == EXIT_OK
    table = np.loadtxt(cross, delimiter=",", skiprows=1)
    assert table.shape == (9, 6)
    assert np.allclose(table[:, 2], -2.5)


def test_modes_csv_table(scenario_file, tmp_path):
    """The optional mode table holds the retained modes sorted by wavenumber."""
    out_csv = tmp_path / "modes.csv"
    assert main(["modes", str(scenario_file), "--out", str(out_csv)]) == EXIT_OK
    lines = out_csv.read_text(encoding="utf-8").splitlines()
    assert lines[0] == "n1,n2,lambda,beta,multiplicity"
    table = np.loadtxt(out_csv, delimiter=",", skiprows=1)
    assert table.shape == (12, 5)
    assert np.all(np.diff(table[:, 3]) <= 0)
    assert set(table[:, 4]) <= {1.0, 3.0}


def test_numeric_options_are_checked(scenario_file, tmp_path, capsys):
    """Nonpositive counts and pitches exit with an input error."""
    assert main(["greens-check", str(scenario_file), "--pairs", "0"]) == EXIT_INPUT
    assert "--pairs must be positive" in capsys.readouterr().err
    assert main(["modes", str(scenario_file), "--limit", "-1"]) == EXIT_INPUT
    assert main(["synthesize", str(scenario_file), "--out", str(tmp_path / "d.wgid"),
                 "--born", "2", "--born-pitch", "0.1", "0"]) == EXIT_INPUT
    assert not (tmp_path / "d.wgid").exists()


def test_output_directory_must_not_be_a_file(scenario_file, tmp_path):
    """Data files and output directories are checked before any stage runs."""
    data_path = tmp_path / "data.wgid"
    assert main(["synthesize", str(scenario_file), "--out", str(data_path)]) == EXIT_OK
    blocker = tmp_path / "blocker"
    blocker.write_text("", encoding="utf-8")
    assert main(["rtm", str(scenario_file), "--data", str(data_path),
                 "--out", str(blocker)]) == EXIT_INPUT
    assert main(["rtm", str(scenario_file), "--data", str(tmp_path / "none.wgid"),
                 "--out", str(tmp_path / "rtm")]) == EXIT_INPUT


def test_greens_check_command(scenario_file, capsys):
    assert main(["greens-check", str(scenario_file), "--pairs", "10"]) == EXIT_OK
    assert "PASS" in capsys.readouterr().out


def test_synthesize_rtm_l1_export(scenario_file, tmp_path, capsys):
    """The single-stage commands chain through their files."""
    data_path = tmp_path / "data.wgid"
    assert main(["synthesize", str(scenario_file), "--out", str(data_path), "--csv"]) == EXIT_OK
    assert (tmp_path / "data.csv").exists()
    data = load_data(data_path)
    assert data.values.shape == (72, 2)

    out_dir = tmp_path / "images"
    assert main(["rtm", str(scenario_file), "--data", str(data_path), "--out", str(out_dir),
                 "--export"]) == EXIT_OK
    rtm = load_volume(out_dir / "rtm.wgiv")
    assert rtm.grid.shape == (3, 3, 3)
    assert (out_dir / "figures" / "rtm_axial.json").exists()

    matrix = tmp_path / "matrix.wgim"
    assert main(["l1", str(scenario_file), "--data", str(data_path), "--matrix", str(matrix),
                 "--out", str(out_dir), "--epsilon", "1e-3"]) == EXIT_OK
    assert matrix.exists()
    report = json.loads((out_dir / "l1_report.json").read_text())
    assert set(report) >= {"iterations", "residual", "lambda", "converged"}
    # second call reuses the cache
    assert main(["l1", str(scenario_file), "--data", str(data_path), "--matrix", str(matrix),
                 "--out", str(out_dir), "--epsilon", "1e-3"]) == EXIT_OK
    assert main(["l1", str(scenario_file), "--data", str(data_path), "--matrix", str(matrix),
                 "--out", str(out_dir), "--parameterization", "diagonal"]) == EXIT_INPUT

    figures = tmp_path / "figures"
    assert main(["export", str(out_dir / "l1.wgiv"), "--scenario", str(scenario_file),
                 "--out", str(figures), "--y3", "-2.0"]) == EXIT_OK
    sidecar = json.loads((figures / "l1_cross-range.json").read_text())
    assert sidecar["value"] == pytest.approx(-2.0)
    capsys.readouterr()


def test_synthesize_born_and_noise(scenario_file, tmp_path, capsys):
    """Born-series data with noise print the update norms."""
    out = tmp_path / "born.wgid"
    code = main(["synthesize", str(scenario_file), "--out", str(out), "--born", "2",
                 "--born-pitch", "0.125", "0.25", "--snr", "20", "--seed", "3"])
    assert code == EXIT_OK
    assert "Born update norms" in capsys.readouterr().out
    data = load_data(out)
    assert data.values.shape == (72, 2)
    assert data.noise == NoiseRecord(20.0, 3)


def test_strict_l1_exit_code(scenario_file, tmp_path):
    """Non-convergence in strict mode is a numerical failure."""
    data_path = tmp_path / "data.wgid"
    main(["synthesize", str(scenario_file), "--out", str(data_path)])
    code = main(["l1", str(scenario_file), "--data", str(data_path), "--out", str(tmp_path),
                 "--lam", "1e-6", "--max-iter", "1", "--tol", "0", "--strict"])
    assert code == EXIT_NUMERICAL


def test_stale_matrix_cache(scenario_file, scenario_dict, tmp_path):
    """A cache built for another scenario is refused."""
    data_path = tmp_path / "data.wgid"
    matrix = tmp_path / "matrix.wgim"
    main(["synthesize", str(scenario_file), "--out", str(data_path)])
    main(["l1", str(scenario_file), "--data", str(data_path), "--matrix", str(matrix),
          "--out", str(tmp_path), "--epsilon", "0.1"])
    scenario_dict["modes"]["budget"] = 11
    other = tmp_path / "other.json"
    other.write_text(json.dumps(scenario_dict), encoding="utf-8")
    code = main(["l1", str(other), "--data", str(data_path), "--matrix", str(matrix),
                 "--out", str(tmp_path)])
    assert code == EXIT_INPUT
    assert main(["l1", str(other), "--data", str(data_path), "--matrix", str(matrix),
                 "--out", str(tmp_path), "--refresh", "--epsilon", "0.1"]) == EXIT_OK


def test_run_command(scenario_file, tmp_path, capsys):
    """The run command prints one timing row per stage."""
    out_dir = tmp_path / "run"
    assert main(["run", str(scenario_file), "--out", str(out_dir),
                 "--stages", "modes", "synthesize", "rtm"]) == EXIT_OK
    out = capsys.readouterr().out
    for stage in ("modes", "synthesize", "rtm"):
        assert stage in out
    assert (out_dir / "manifest.json").exists()
