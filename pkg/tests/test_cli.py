"""End-to-end checks of the command line front end.

Everything runs in-process through cli.run so exit codes and stream
separation are observable without forking; one subprocess test at the end
confirms the `python -m topiary` entry point and TOPIARY_LOG wiring.
"""

import json
import os
import subprocess
import sys

import numpy as np
import pytest

from topiary import cli
from topiary import formats as fm
from topiary import kernel as krn
from topiary import portfolio as pf
from topiary import solver as slv
from topiary.measure import AtomicMeasure

from conftest import ZIGZAG_COORDS


@pytest.fixture
def problem_file(tmp_path):
    path = tmp_path / "problem.json"
    fm.write_problem(str(path), krn.euclidean(ZIGZAG_COORDS))
    return str(path)


def ring_gap_text(n=64, cell=0.05, r0=0.85, r1=1.15, gap_deg=25.0):
    """Annulus obstacle with a wedge cut out around the +x axis."""
    half = (n - 1) / 2.0
    rows = []
    for i in range(n):
        row = []
        for j in range(n):
            x = (j - half) * cell
            y = (half - i) * cell
            r = float(np.hypot(x, y))
            ang = abs(float(np.degrees(np.arctan2(y, x))))
            row.append("#" if (r0 <= r <= r1 and ang > gap_deg / 2.0) else ".")
        rows.append("".join(row))
    return "\n".join(rows) + "\n"


@pytest.fixture
def ring_mask(tmp_path):
    path = tmp_path / "ring_gap.txt"
    path.write_text(ring_gap_text())
    return str(path)


# -- solve / oracle -----------------------------------------------------------

def test_solve_second_greedy_example(problem_file, tmp_path, capsys):
    out = tmp_path / "result.json"
    rc = cli.run(["solve", "--input", problem_file, "--algorithm", "second-greedy",
                  "--tol", "1e-8", "--output", str(out)])
    assert rc == 0
    payload = json.loads(out.read_text())
    weights = {e["point"]: e["weight"] for e in payload["weights"]}
    assert set(weights) == {0, 2}
    assert abs(weights[0] - 0.4) <= 1e-9
    assert abs(weights[2] - 0.6) <= 1e-9
    assert payload["index"] == [0, 2]


def test_solve_summary_line(problem_file, capsys):
    rc = cli.run(["solve", "--input", problem_file])
    captured = capsys.readouterr()
    assert rc == 0
    lines = captured.out.splitlines()
    assert len(lines) == 1
    assert lines[0].startswith("solve: objective ")
    assert "support 2" in lines[0]
    assert captured.err == ""


def test_solve_json_flag(problem_file, capsys):
    rc = cli.run(["solve", "--input", problem_file, "--json"])
    captured = capsys.readouterr()
    assert rc == 0
    payload = json.loads(captured.out)
    assert payload["format_version"] == 1
    assert abs(payload["objective"] + 0.5) <= 1e-9
    # summary still appears, demoted to stderr
    assert captured.err.startswith("solve: objective ")


def test_oracle_matches_solve(problem_file, tmp_path):
    out = tmp_path / "oracle.json"
    rc = cli.run(["oracle", "--input", problem_file, "--output", str(out)])
    assert rc == 0
    payload = json.loads(out.read_text())
    weights = {e["point"]: e["weight"] for e in payload["weights"]}
    assert abs(weights[0] - 0.4) <= 1e-9
    assert abs(weights[2] - 0.6) <= 1e-9


def test_oracle_thirteen_points_refused(tmp_path, capsys):
    path = tmp_path / "p13.json"
    fm.write_problem(str(path), krn.explicit_gram(np.eye(13)))
    rc = cli.run(["oracle", "--input", str(path)])
    captured = capsys.readouterr()
    assert rc == 2
    assert "at most 12 points, got 13" in captured.err


def test_solve_seed_point_validated(problem_file, capsys):
    rc = cli.run(["solve", "--input", problem_file, "--algorithm", "greedy",
                  "--seed-point", "9"])
    assert rc == 2
    assert "seed point 9" in capsys.readouterr().err


# -- failure exit codes -------------------------------------------------------

def test_missing_input_is_exit_2(tmp_path, capsys):
    rc = cli.run(["solve", "--input", str(tmp_path / "nope.json")])
    assert rc == 2
    assert "does not exist" in capsys.readouterr().err


def test_missing_output_dir_is_exit_2(problem_file, tmp_path, capsys):
    rc = cli.run(["solve", "--input", problem_file,
                  "--output", str(tmp_path / "no_such_dir" / "r.json")])
    assert rc == 2
    assert "output directory" in capsys.readouterr().err


def test_bad_argv_is_exit_2(capsys):
    assert cli.run(["solve"]) == 2           # --input is required
    assert cli.run(["frobnicate"]) == 2      # unknown subcommand
    assert cli.run([]) == 2                  # subcommand is required
    capsys.readouterr()


def test_nonpsd_problem_is_exit_3(tmp_path, capsys):
    # constructor-level validation would refuse this gram, so write it raw
    path = tmp_path / "bad.json"
    path.write_text(json.dumps({
        "format_version": 1,
        "kernel": {"type": "gram", "gram": [[0.0, 1.0], [1.0, 0.0]]},
        "psi": [0.0, 0.0],
    }))
    rc = cli.run(["solve", "--input", str(path)])
    assert rc == 3
    assert "not positive semidefinite" in capsys.readouterr().err


def test_max_iter_exhaustion_is_exit_4(problem_file, capsys):
    rc = cli.run(["solve", "--input", problem_file, "--algorithm", "greedy",
                  "--seed-point", "1", "--max-iter", "1"])
    assert rc == 4
    assert "hit max_iter 1" in capsys.readouterr().err


# -- determinism and input hygiene --------------------------------------------

def test_outputs_are_byte_identical_across_runs(problem_file, tmp_path, capsys):
    paths = []
    for tag in ("a", "b"):
        out = tmp_path / ("r_%s.json" % tag)
        trace = tmp_path / ("t_%s.csv" % tag)
        rc = cli.run(["solve", "--input", problem_file,
                      "--output", str(out), "--trace", str(trace)])
        assert rc == 0
        paths.append((out, trace))
    assert paths[0][0].read_bytes() == paths[1][0].read_bytes()
    assert paths[0][1].read_bytes() == paths[1][1].read_bytes()


def test_input_file_is_not_mutated(problem_file, tmp_path, capsys):
    before = open(problem_file, "rb").read()
    cli.run(["solve", "--input", problem_file, "--output", str(tmp_path / "r.json")])
    assert open(problem_file, "rb").read() == before


def test_trace_has_fixed_header(problem_file, tmp_path, capsys):
    trace = tmp_path / "trace.csv"
    cli.run(["solve", "--input", problem_file, "--trace", str(trace)])
    lines = trace.read_text().splitlines()
    assert lines[0] == "iteration,objective,score,support_size,added_point,dropped_points"
    assert len(lines) >= 2


# -- deconstruct ---------------------------------------------------------------

def test_deconstruct_ordering_and_prefixes(problem_file, capsys):
    rc = cli.run(["deconstruct", "--input", problem_file, "--json"])
    captured = capsys.readouterr()
    assert rc == 0
    payload = json.loads(captured.out)
    assert payload["index"] == [0, 2]
    assert payload["ordering"] == [0, 2]
    assert "ordering 0,2" in captured.err
    kern = krn.euclidean(ZIGZAG_COORDS)
    order = payload["ordering"]
    for k in range(1, len(order) + 1):
        assert slv.is_topiaric_index(kern, None, order[:k])


# -- diagnose -------------------------------------------------------------------

def test_diagnose_writes_all_reports(problem_file, tmp_path, capsys):
    result = tmp_path / "result.json"
    cli.run(["solve", "--input", problem_file, "--output", str(result)])
    capm = tmp_path / "capm.csv"
    jc = tmp_path / "jc.csv"
    sml = tmp_path / "sml.csv"
    rc = cli.run(["diagnose", "--input", problem_file, "--solution", str(result),
                  "--capm", str(capm), "--jc", str(jc), "--sml", str(sml)])
    assert rc == 0
    capm_lines = capm.read_text().splitlines()
    assert capm_lines[0] == "id,label,psi,mu,beta,alpha,in_index"
    assert len(capm_lines) == 4
    assert capm_lines[2].startswith("1,") and capm_lines[2].endswith("false")
    assert jc.read_text().splitlines()[0] == "x,y,d,psi_slope,mu_slope"
    preamble = sml.read_text().splitlines()[0]
    assert preamble.startswith("# ")
    head = json.loads(preamble[2:])
    assert abs(head["rate"] + 1.0) <= 1e-9


def test_diagnose_accepts_result_or_measure(problem_file, tmp_path, capsys):
    # a solver result and a bare measure with the same atoms diagnose the
    # same way (atom order may shift the last ulp, so compare numerically)
    result = tmp_path / "result.json"
    cli.run(["solve", "--input", problem_file, "--output", str(result)])
    measure = tmp_path / "measure.json"
    fm.write_measure(str(measure), AtomicMeasure(((0, 0.4), (2, 0.6))))
    tables = []
    for solution in (result, measure):
        capm = tmp_path / ("capm_%s.csv" % solution.stem)
        rc = cli.run(["diagnose", "--input", problem_file,
                      "--solution", str(solution), "--capm", str(capm)])
        assert rc == 0
        tables.append([row.split(",") for row in capm.read_text().splitlines()[1:]])
    for left, right in zip(*tables):
        assert left[0] == right[0] and left[6] == right[6]
        for col in (2, 3, 4, 5):
            assert abs(float(left[col]) - float(right[col])) <= 1e-12


def test_diagnose_base_flag_restricts_slope_rows(problem_file, tmp_path, capsys):
    solution = tmp_path / "optimum.json"
    fm.write_measure(str(solution), AtomicMeasure(((0, 0.4), (2, 0.6))))
    jc = tmp_path / "jc.csv"
    rc = cli.run(["diagnose", "--input", problem_file, "--solution", str(solution),
                  "--jc", str(jc), "--base", "0"])
    assert rc == 0
    rows = jc.read_text().splitlines()[1:]
    assert rows
    assert all(row.startswith("0,") for row in rows)


# -- portfolio ------------------------------------------------------------------

def test_portfolio_from_returns_writes_siblings(tmp_path, capsys):
    returns = tmp_path / "returns.csv"
    returns.write_text("asset_a,asset_b\n0.3,-0.1\n0.1,0.1\n0.2,0.0\n")
    outdir = tmp_path / "out"
    outdir.mkdir()
    out = outdir / "portfolio.json"
    rc = cli.run(["portfolio", "--returns", str(returns), "--risk-free", "0.02",
                  "--output", str(out)])
    assert rc == 0
    assert sorted(p.name for p in outdir.iterdir()) == [
        "capm.csv", "portfolio.json", "sml.csv"]
    payload = json.loads(out.read_text())
    assert payload["format_version"] == 1
    assert payload["weights"][0]["label"] == "asset_a"
    assert payload["corrections"]["mean_shrink"] == 0
    assert payload["corrections"]["var_inflate"] == 0


def test_portfolio_spec_flag_overrides(tmp_path, capsys):
    spec = pf.PortfolioSpec(labels=("X",), mean=(0.10,), covariance=((0.08,),),
                            risk_free_rate=0.02)
    path = tmp_path / "spec.json"
    fm.write_json(str(path), fm.portfolio_spec_payload(spec))
    rc = cli.run(["portfolio", "--spec", str(path), "--var-inflate", "2.0", "--json"])
    captured = capsys.readouterr()
    assert rc == 0
    payload = json.loads(captured.out)
    assert payload["corrections"]["var_inflate"] == 2
    assert payload["corrections"]["flagged"] == []
    weights = {e["label"]: e["weight"] for e in payload["weights"]}
    assert abs(weights["risk-free"] - 2 / 3) <= 1e-9
    assert abs(weights["X"] - 1 / 3) <= 1e-9


def test_portfolio_reference_flag(tmp_path, capsys):
    spec = pf.PortfolioSpec(labels=("X",), mean=(0.10,), covariance=((0.08,),))
    path = tmp_path / "spec.json"
    fm.write_json(str(path), fm.portfolio_spec_payload(spec))
    ref = tmp_path / "ref.json"
    fm.write_measure(str(ref), AtomicMeasure(((0, 1.0),)))
    rc = cli.run(["portfolio", "--spec", str(path), "--reference", str(ref), "--json"])
    captured = capsys.readouterr()
    assert rc == 0
    payload = json.loads(captured.out)
    assert abs(payload["adaptive_constant"] + 0.04) <= 1e-12


# -- maze -----------------------------------------------------------------------

def test_maze_example_escapes(ring_mask, tmp_path, capsys):
    path_csv = tmp_path / "path.csv"
    field = tmp_path / "field.pgm"
    rc = cli.run(["maze", "--mask", ring_mask, "--cell-size", "0.05",
                  "--path", str(path_csv), "--field", str(field)])
    captured = capsys.readouterr()
    assert rc == 0
    lines = path_csv.read_text().splitlines()
    assert lines[0] == "x,y"
    assert lines[-1] == "# status: escaped"
    assert len(lines) >= 3
    pgm = field.read_text().splitlines()
    assert pgm[0] == "P2"
    assert pgm[1] == "256 256"
    assert "trichotomy solved" in captured.out
    assert "path escaped" in captured.out


def test_maze_bad_escape_radius(ring_mask, capsys):
    rc = cli.run(["maze", "--mask", ring_mask, "--cell-size", "0.05",
                  "--escape-radius", "banana"])
    assert rc == 2
    assert "escape radius" in capsys.readouterr().err


def test_maze_bad_target(ring_mask, capsys):
    rc = cli.run(["maze", "--mask", ring_mask, "--cell-size", "0.05",
                  "--target", "1.0"])
    assert rc == 2
    assert "target" in capsys.readouterr().err


# -- module entry point ----------------------------------------------------------

def test_python_dash_m_with_logging(problem_file):
    env = dict(os.environ, TOPIARY_LOG="info")
    proc = subprocess.run(
        [sys.executable, "-m", "topiary", "solve", "--input", problem_file],
        capture_output=True, text=True, env=env,
        cwd=os.path.dirname(os.path.dirname(os.path.abspath(__file__))),
    )
    assert proc.returncode == 0
    assert proc.stdout.startswith("solve: objective ")
    assert "INFO topiary:" in proc.stderr
    assert "3 points" in proc.stderr
