import io
import re
import xml.etree.ElementTree as ET

import numpy as np
import pytest

from krylov_errest.cli import main
from krylov_errest.experiments import RunConfig, load_matrix, start_vector
from krylov_errest.errors import InputError
from krylov_errest.report import format_value, read_trace_csv, write_svg
from krylov_errest.sparse_ops import read_vector, write_matrix_market

SCI = re.compile(r"^-?\d\.\d{9}e[+-]\d{2,3}$")


def run(*argv):
    out = io.StringIO()
    code = main([str(a) for a in argv], stream=out)
    return code, out.getvalue()


def csv_lines(path):
    return path.read_text().splitlines()


def test_format_value():
    assert format_value(None) == ""
    assert format_value(-0.0) == "0.000000000e+00"
    assert SCI.match(format_value(1 / 3))


def test_approx_identity(tmp_path):
    code, out = run("approx", "--matrix", "gen:identity:N=5", "--tau", "1", "--out", tmp_path)
    assert code == 0 and "converged at m=1" in out
    (vec,) = tmp_path.glob("*.vec")
    v = start_vector(load_matrix("gen:identity:N=5"))
    np.testing.assert_allclose(read_vector(vec), np.exp(-1) * v, rtol=1e-15)


def test_csv_schema(tmp_path):
    code, _ = run("approx", "--matrix", "gen:diag:N=50,a=0,b=4", "--method", "lanczos",
                  "--tau", "0.5", "--out", tmp_path)
    assert code == 0
    (csv,) = tmp_path.glob("*.csv")
    lines = csv_lines(csv)
    assert lines[0] == "step,xi1_rel,xi2_rel,true_rel,wall_ms"
    for i, line in enumerate(lines[1:], start=1):
        step, *vals = line.split(",")
        assert int(step) == i
        assert all(SCI.match(x) for x in vals)


def test_oracle_off_leaves_true_rel_empty(tmp_path):
    code, _ = run("approx", "--matrix", "gen:convdiff:n=4", "--tau", "0.04",
                  "--oracle", "off", "--out", tmp_path)
    assert code == 0
    rows = read_trace_csv(next(tmp_path.glob("*.csv")))
    assert all(r["true_rel"] is None for r in rows)
    assert rows[-1]["xi2_rel"] <= 1e-12


def test_svg_is_well_formed_and_self_contained(tmp_path):
    run("approx", "--matrix", "gen:diag:N=50,a=0,b=4", "--tau", "1", "--out", tmp_path)
    (svg,) = tmp_path.glob("*.svg")
    root = ET.parse(svg).getroot()
    assert root.tag.endswith("svg")
    text = svg.read_text()
    assert "href" not in text and "<image" not in text and "@import" not in text
    assert len(root.findall("{http://www.w3.org/2000/svg}polyline")) >= 3


def test_svg_handles_zero_and_missing(tmp_path):
    p = write_svg({"a": [(1, 0.0), (2, None), (3, float("nan")), (4, 1e-3)]}, tmp_path / "x.svg")
    ET.parse(p)


def test_deterministic_csv(tmp_path):
    for d in ("a", "b"):
        run("approx", "--matrix", "gen:diag:N=80,a=0,b=10", "--tau", "0.3", "--seed", "5",
            "--out", tmp_path / d)
    a = next((tmp_path / "a").glob("*.csv"))
    b = next((tmp_path / "b").glob("*.csv"))
    strip = lambda p: [line.rsplit(",", 1)[0] for line in csv_lines(p)]
    assert strip(a) == strip(b)


def test_seed_changes_vector():
    src = load_matrix("gen:diag:N=10,a=0,b=1")
    assert not np.array_equal(start_vector(src, "random", 1), start_vector(src, "random", 2))
    np.testing.assert_array_equal(start_vector(src, "random", 1), start_vector(src, "random", 1))


def test_matrix_market_path_matches_generator(tmp_path):
    gen = "gen:convdiff:n=8"
    write_matrix_market(load_matrix(gen).A, tmp_path / "cd.mtx")
    h2 = str((1 / 9) ** 2)
    run("approx", "--matrix", gen, "--tau", h2, "--vector", "ones", "--out", tmp_path / "g")
    run("approx", "--matrix", tmp_path / "cd.mtx", "--tau", h2, "--vector", "ones",
        "--out", tmp_path / "f")
    g = read_trace_csv(next((tmp_path / "g").glob("*.csv")))
    f = read_trace_csv(next((tmp_path / "f").glob("*.csv")))
    assert len(g) == len(f)
    for r, s in zip(g, f):
        for key in ("xi1_rel", "xi2_rel", "true_rel"):
            assert s[key] == pytest.approx(r[key], rel=1e-13, abs=1e-300)


def test_missing_file_exit_1(tmp_path, capsys):
    code, _ = run("approx", "--matrix", tmp_path / "missing.mtx")
    assert code == 1
    assert "error" in capsys.readouterr().err


@pytest.mark.parametrize("argv", [
    ["approx"],
    ["approx", "--matrix", "gen:diag:N=5", "--method", "gmres"],
    ["approx", "--matrix", "gen:diag:N=5", "--tau", "-1"],
    ["approx", "--matrix", "gen:diag:N=5", "--eps", "0"],
    ["approx", "--matrix", "gen:nothing:N=5"],
    ["approx", "--matrix", "gen:diag:N=x"],
    ["approx", "--matrix", "gen:diag:N=5", "--oracle", "maybe"],
    ["experiment", "ex9"],
    ["frobnicate"],
])
def test_usage_errors_exit_1(argv):
    assert run(*argv)[0] == 1


def test_unconverged_exit_2(tmp_path):
    code, out = run("approx", "--matrix", "gen:diag:N=200,a=0,b=40", "--tau", "1",
                    "--max-dim", "5", "--out", tmp_path)
    assert code == 2 and "NOT converged" in out
    assert next(tmp_path.glob("*.csv")).exists()


def test_restart_method(tmp_path):
    code, _ = run("approx", "--matrix", "gen:convdiff:n=4", "--tau", "0.04",
                  "--method", "restart:6", "--out", tmp_path)
    assert code == 0
    steps = [r["step"] for r in read_trace_csv(next(tmp_path.glob("*.csv")))]
    assert steps == list(range(6, 6 * len(steps) + 1, 6))


def test_nodes_flag_reports_terms(tmp_path):
    code, out = run("approx", "--matrix", "gen:diag:N=60,a=0,b=4", "--tau", "1", "--eps", "1e-6",
                    "--nodes", "ritz", "--out", tmp_path)
    assert code == 0 and "ritz nodes" in out


def test_bounds_symmetric_columns(tmp_path):
    code, _ = run("bounds", "--matrix", "gen:diag:N=64,a=0,b=4", "--method", "lanczos",
                  "--tau", "0.5", "--out", tmp_path)
    assert code == 0
    path = next(tmp_path.glob("bounds_*.csv"))
    assert csv_lines(path)[0] == ("step,xi1_rel,xi2_rel,true_rel,wall_ms,bound41,bound42,"
                                  "bound43,bound44,gamma1,gamma2,gamma3,mu2,true_err")
    for r in read_trace_csv(path):
        for key in ("bound41", "bound42", "bound43", "bound44"):
            assert r[key] is not None and r[key] >= r["true_err"]


def test_bounds_nonsymmetric_columns_empty(tmp_path):
    code, _ = run("bounds", "--matrix", "gen:convdiff:n=4", "--tau", "0.1", "--out", tmp_path)
    assert code == 0
    for r in read_trace_csv(next(tmp_path.glob("bounds_*.csv"))):
        assert r["bound42"] is None and r["bound44"] is None
        assert r["bound41"] >= r["true_err"] and r["bound43"] >= r["true_err"]


def test_bounds_reject_cos(tmp_path, capsys):
    code, _ = run("bounds", "--matrix", "gen:convdiff:n=4", "--function", "cos", "--out", tmp_path)
    assert code == 1
    assert "exponential-only" in capsys.readouterr().err


def test_experiment_writes_artifacts(tmp_path):
    code, out = run("experiment", "ex2", "--out", tmp_path)
    assert code == 0
    assert len(list(tmp_path.glob("ex2_*.csv"))) == 1
    assert len(list(tmp_path.glob("ex2_*.svg"))) == 1


def test_experiment_function_override(tmp_path):
    code, _ = run("experiment", "ex1", "--tau", "0.1", "--function", "sin", "--out", tmp_path)
    assert code == 0
    (csv,) = tmp_path.glob("*.csv")
    assert "_sin_tau0.1_" in csv.name


def test_runconfig_validation():
    with pytest.raises(InputError):
        RunConfig(matrix="gen:identity:N=2", taus=())
    with pytest.raises(InputError):
        RunConfig(matrix="gen:identity:N=2", method="restart:1")
    with pytest.raises(InputError):
        RunConfig(matrix="gen:identity:N=2", nodes="chebyshev")
    assert RunConfig(matrix="gen:identity:N=2", method="restart:7").restart_length == 7
