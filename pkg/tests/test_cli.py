"""CSV emission, configuration handling, and exit codes of the CLI."""

import ast
import csv
import io

import pytest

import ptsinh.cli as cli


def _run(capsys, argv):
    rc = cli.main(argv)
    captured = capsys.readouterr()
    return rc, captured.out, captured.err


def _parse_csv(text):
    comments = [l for l in text.splitlines() if l.startswith("#")]
    body = "\n".join(l for l in text.splitlines() if not l.startswith("#"))
    rows = list(csv.reader(io.StringIO(body)))
    return comments, rows[0], rows[1:]


SOLVE_ARGS = ["solve", "--alpha", "2", "--n", "600", "--x-max", "8", "--e-max", "6"]


def test_solve_csv_structure(capsys):
    rc, out, _ = _run(capsys, SOLVE_ARGS)
    assert rc == 0
    comments, header, rows = _parse_csv(out)
    assert header == ["level_index", "E", "y_used", "n", "x_max", "est_error"]
    assert any(c.startswith("# alpha=2.0") for c in comments)
    assert len(rows) == 2
    e0 = float(rows[0][1])
    assert e0 == pytest.approx(1.21141, abs=1e-3)
    assert float(rows[0][5]) < 1e-3  # Richardson error estimate
    # shortest-round-trip float formatting
    assert rows[0][1] == repr(e0)


def test_solve_deterministic_output(capsys):
    _, out1, _ = _run(capsys, SOLVE_ARGS)
    _, out2, _ = _run(capsys, SOLVE_ARGS)
    assert out1 == out2


def test_solve_no_real_eigenvalues_warns(capsys):
    rc, out, err = _run(
        capsys, ["solve", "--alpha", "4", "--y", "0", "--n", "600",
                 "--x-max", "8", "--e-max", "6"]
    )
    assert rc == 0
    _, _, rows = _parse_csv(out)
    assert rows == []
    assert "no real eigenvalues" in err


def test_invalid_parameters_exit_2(capsys):
    rc, _, err = _run(capsys, ["solve", "--alpha", "-1"])
    assert rc == 2
    assert "alpha" in err


def test_missing_config_file_exit_2(capsys):
    rc, _, _ = _run(capsys, ["solve", "--alpha", "2", "--config", "/nonexistent.cfg"])
    assert rc == 2


def test_unknown_config_key_exit_2(tmp_path):
    cfg = tmp_path / "bad.cfg"
    cfg.write_text("not_a_flag = 1\n")
    with pytest.raises(SystemExit) as exc:
        cli.main(["solve", "--alpha", "2", "--config", str(cfg)])
    assert exc.value.code == 2


def test_config_file_with_flag_override(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# a comment\nalpha = 2\nn = 600\nx_max = 8\ne_max = 6\n")
    rc, out, _ = _run(capsys, ["solve", "--config", str(cfg), "--n", "500"])
    assert rc == 0
    comments, _, rows = _parse_csv(out)
    assert "# n=500" in comments  # flag beat the file
    assert rows[0][3] == "500"


def test_numerical_failure_exit_3(capsys, monkeypatch):
    def boom(*args, **kwargs):
        raise cli.RpmConvergenceError("forced")

    monkeypatch.setattr(cli, "convergence_table", boom)
    rc, _, err = _run(capsys, ["rpm", "--alpha", "2", "--seed-e", "1.2",
                               "--d-max", "3", "--precision", "60"])
    assert rc == 3
    assert "numerical failure" in err


def test_contour_rows(capsys):
    rc, out, _ = _run(capsys, ["contour", "--alpha-from", "2", "--alpha-to", "4",
                               "--alpha-step", "1"])
    assert rc == 0
    _, header, rows = _parse_csv(out)
    assert header == ["alpha", "y_opt", "y_plus", "y_minus"]
    data = {float(r[0]): float(r[1]) for r in rows}
    assert data[2.0] == 0.0
    assert data[4.0] == pytest.approx(-0.7853981633974483)


def test_veff_pt_symmetric_csv(capsys):
    rc, out, _ = _run(capsys, ["veff", "--alpha", "3", "--samples", "41"])
    assert rc == 0
    _, _, rows = _parse_csv(out)
    re = [float(r[1]) for r in rows]
    im = [float(r[2]) for r in rows]
    assert re == pytest.approx(re[::-1])       # even real part
    assert im == pytest.approx([-v for v in im[::-1]])  # odd imaginary part


def test_rpm_csv(capsys):
    rc, out, _ = _run(capsys, ["rpm", "--alpha", "2", "--seed-e", "1.2",
                               "--d-min", "2", "--d-max", "3", "--shift-d", "1",
                               "--precision", "60"])
    assert rc == 0
    _, header, rows = _parse_csv(out)
    assert header == ["D", "E", "f0", "converged_digits"]
    assert rows[0][0] == "2"
    assert rows[0][1].startswith("1.2136165232")


def test_rpm_odd_alpha_requires_f0_seed(capsys):
    rc, _, err = _run(capsys, ["rpm", "--alpha", "1", "--seed-e", "1.76"])
    assert rc == 2
    assert "seed-f0" in err


def test_table_preset_and_plot_script(tmp_path, capsys):
    out_csv = tmp_path / "fig2.csv"
    script = tmp_path / "fig2_plot.py"
    rc, _, _ = _run(capsys, ["table", "fig2", "--output", str(out_csv),
                             "--plot-script", str(script)])
    assert rc == 0
    comments, header, rows = _parse_csv(out_csv.read_text())
    assert "# preset=fig2" in comments
    assert header == ["alpha", "y_opt", "y_plus", "y_minus"]
    assert len(rows) == 121
    # the emitted plot script is valid python and references only the CSV
    tree = ast.parse(script.read_text())
    assert str(out_csv) in script.read_text()
    assert tree.body


def test_plot_script_needs_file_output(capsys):
    rc, _, err = _run(capsys, ["table", "fig2", "--plot-script", "x.py"])
    assert rc == 2
    assert "--output" in err


def test_lf_line_endings(tmp_path, capsys):
    out_csv = tmp_path / "s.csv"
    rc, _, _ = _run(capsys, SOLVE_ARGS + ["--output", str(out_csv)])
    assert rc == 0
    raw = out_csv.read_bytes()
    assert b"\r" not in raw
    assert raw.endswith(b"\n")
