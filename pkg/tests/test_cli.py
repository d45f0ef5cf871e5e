import csv
import io
import json
import math

import pytest
from click.testing import CliRunner

from ccmeasure.cli import main, run


def invoke(*args):
    res = CliRunner().invoke(main, list(args))
    return res.exit_code, res.output


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_space_dist_euclidean():
    code, out = invoke("space", "dist", "--space", "euclidean:2", "--p", "0,0", "--q", "3,4")
    assert code == 0
    r = rows(out)
    assert r[0] == ["value", "kind", "gap"]
    assert float(r[1][0]) == pytest.approx(5.0) and r[1][1] == "exact"


def test_space_dist_heisenberg_anchor():
    code, out = invoke("space", "dist", "--p", "0,0,0", "--q", "0,0,1")
    assert code == 0
    assert float(rows(out)[1][0]) == pytest.approx(2 * math.sqrt(math.pi), rel=1e-10)


def test_seventeen_digits():
    _, out = invoke("space", "dist", "--space", "euclidean:2", "--p", "0,0", "--q", "1,1")
    assert rows(out)[1][0] == f"{math.sqrt(2):.17g}"


@pytest.mark.parametrize("args", [
    ("space", "dist", "--space", "moon", "--p", "0", "--q", "1"),
    ("space", "dist", "--p", "0,0", "--q", "0,0,1"),
    ("measure", "bogus"),
    ("measure", "length", "--k", "2", "--curve", "nope"),
    ("measure", "complexity", "--k", "2", "--eps", "0.1,0.2"),
])
def test_usage_and_input_errors_exit_2(args):
    assert run(list(args)) == 2


def test_verdict_failure_exit_1():
    # tilted-piece densities sit just below 2, outside a 1e-6 tolerance
    assert run(["--quiet", "rect", "check", "--samples", "2", "--tol", "1e-6"]) == 1


def test_length_vertical():
    code, out = invoke("measure", "length", "--k", "2", "--grid", "9")
    assert code == 0
    r = rows(out)
    assert r[0] == ["length", "error_estimate"]
    assert float(r[1][0]) == pytest.approx(4 * math.pi)


def test_complexity_segment_csv_json(tmp_path):
    c, j = tmp_path / "out.csv", tmp_path / "out.json"
    code = run(["--csv", str(c), "--json", str(j), "--quiet", "measure", "complexity",
                "--space", "euclidean:2", "--curve", "segment", "--v", "1,0", "--k", "1",
                "--eps", "0.3", "--dp-grid", "10000"])
    assert code == 0
    data = c.read_bytes()
    assert b"\r\n" not in data
    r = rows(data.decode())
    assert r[0] == ["eps", "count", "scaled", "dp_count", "gap"]
    assert r[1][1] == "5" and r[1][3] == "5"
    summary = json.loads(j.read_text())
    assert summary["schema"] == 1 and summary["command"] == "measure complexity"


def test_deterministic_csv(tmp_path):
    outs = []
    for n in range(2):
        path = tmp_path / f"r{n}.csv"
        assert run(["--seed", "4", "--csv", str(path), "--quiet", "rect", "check",
                    "--samples", "2"]) == 0
        outs.append(path.read_bytes())
    assert outs[0] == outs[1]
    assert rows(outs[0].decode())[0] == ["piece", "t", "lower", "upper", "pass"]


def test_config_defaults_and_override(tmp_path):
    cfg = tmp_path / "exp.ini"
    cfg.write_text("[space]\nspace = euclidean:2\n[curve]\ncurve = segment\nv = 3,4\n"
                   "[measure length]\nk = 1\ngrid = 9\n")
    code, out = invoke("--config", str(cfg), "measure", "length")
    assert code == 0 and float(rows(out)[1][0]) == pytest.approx(5.0)
    code, out = invoke("--config", str(cfg), "measure", "length", "--v", "1,0")
    assert code == 0 and float(rows(out)[1][0]) == pytest.approx(1.0)


def test_config_rect_pieces(tmp_path):
    cfg = tmp_path / "set.ini"
    cfg.write_text("[piece.1]\ncurve = vertical\na = 0\nb = 1\n"
                   "[piece.2]\ncurve = vertical\na = 0\nb = 1\nsubsets = 0:0.5, 0.5:1\n")
    # identical pieces collide
    assert run(["--config", str(cfg), "--quiet", "rect", "check", "--set", "config",
                "--samples", "2"]) == 2


def test_bad_config_is_usage_error(tmp_path):
    cfg = tmp_path / "bad.ini"
    cfg.write_text("[operation]\neps = 0.1,0.2\n")
    assert run(["--config", str(cfg), "measure", "length", "--k", "2"]) == 2
    assert run(["--config", str(tmp_path / "missing.ini"), "measure", "length"]) == 2
    cfg.write_text("[measure length]\ngridd = 9\n")
    assert run(["--config", str(cfg), "measure", "length", "--k", "2"]) == 2
    cfg.write_text("[measure lenght]\nk = 2\n")
    assert run(["--config", str(cfg), "measure", "length", "--k", "2"]) == 2


def test_density_command():
    code, out = invoke("measure", "density", "--k", "2", "--radii", "0.2,0.1")
    assert code == 0
    r = rows(out)
    assert r[0] == ["r", "ratio", "side", "gap"]
    assert float(r[1][1]) == pytest.approx(1.0, abs=1e-4) and r[1][2] == "interior"


def test_degree_command_engel():
    code, out = invoke("curve", "degree", "--space", "engel", "--curve", "engel_w")
    assert code == 0
    assert round(float(rows(out)[1][1])) == 3


def test_hausdorff_command():
    code, out = invoke("measure", "hausdorff", "--k", "2", "--eps", "0.2")
    assert code == 0
    r = rows(out)
    assert r[0][:2] == ["eps", "hausdorff_cost"]
    assert float(r[1][1]) == pytest.approx(4 * math.pi, rel=0.05)


def test_help_exits_zero():
    assert run(["--help"]) == 0
