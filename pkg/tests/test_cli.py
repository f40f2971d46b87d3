import json
import shutil
import subprocess
import sys

import pytest

from jetcalc.cli import main
from jetcalc.grammar import parse

D_DX = {"n": 1, "m": 1, "m'": 1, "order": 1,
        "entries": [{"row": 0, "col": 0, "exponents": [1], "coeff": "1"}]}
TIMES_X = {"n": 1, "m": 1, "m'": 1, "order": 0,
           "entries": [{"row": 0, "col": 0, "exponents": [0], "coeff": "x1"}]}
LAPLACE = {"order": 2, "components": ["u1_x1x1 + u1_x2x2"]}


@pytest.fixture
def files(tmp_path):
    def write(name, data):
        path = tmp_path / name
        path.write_text(data if isinstance(data, str) else json.dumps(data))
        return str(path)
    return write


def run(capsys, *argv):
    code = main(list(argv))
    out = capsys.readouterr().out
    return code, (json.loads(out) if out.strip().startswith("{") else out)


def test_el_example(capsys):
    code, out = run(capsys, "el", "--n", "1", "--m", "1", "--lagrangian", "0.5*u1_x1^2")
    assert code == 0
    assert out["el"] == ["-u1_x1x1"] and out["order"] == 2
    assert out["command"] == "el" and out["inputs"]["lagrangian"] == "0.5*u1_x1^2"


@pytest.mark.parametrize("density", [
    "u1*u1_x1x1 + eta*u1", "sqrt(1 + u1_x1^2)", "exp(x1)*u1_x1^2 + 1/10*sin(x1)*u1",
])
def test_el_output_reparses(capsys, density):
    _, out = run(capsys, "el", "--n", "1", "--lagrangian", density)
    for text in out["el"]:
        assert parse(text, 1) is not None


def test_el_text_format(capsys):
    code, out = run(capsys, "el", "--n", "1", "--lagrangian", "u1^4", "--format", "text")
    assert code == 0 and out.strip() == "el[1] = 4*u1^3"


def test_compose_example(capsys, files):
    a, b = files("a.json", D_DX), files("b.json", D_DX)
    code, out = run(capsys, "compose", a, b)
    assert code == 0
    op = out["operator"]
    assert op["order"] == 2
    assert op["entries"] == [{"row": 0, "col": 0, "exponents": [2], "coeff": "1"}]


def test_compose_commutator(capsys, files):
    d, x = files("d.json", D_DX), files("x.json", TIMES_X)
    _, dx = run(capsys, "compose", d, x)
    _, xd = run(capsys, "compose", x, d)
    entries = {tuple(e["exponents"]): e["coeff"] for e in dx["operator"]["entries"]}
    assert entries == {(0,): "1", (1,): "x1"}
    assert xd["operator"]["entries"] == [{"row": 0, "col": 0, "exponents": [1], "coeff": "x1"}]


def test_check_solution_example(capsys, files):
    eq = files("laplace2d.json", LAPLACE)
    code, out = run(capsys, "check-solution", "--eq", eq, "--section", "x1^2 - x2^2",
                    "--grid", "0:1:21,0:1:21")
    assert code == 0
    assert out["verdict"] is True and out["exact"] is True
    assert out["points"] == 441 and out["max_residuals"] == [0.0]


def test_check_solution_false_verdict(capsys, files):
    eq = files("laplace2d.json", LAPLACE)
    code, out = run(capsys, "check-solution", "--eq", eq, "--section", "x1^2 + x2^2")
    assert code == 1 and out["verdict"] is False
    assert out["max_residuals"] == [4.0]


def test_prolong(capsys, files):
    eq = files("laplace2d.json", LAPLACE)
    code, out = run(capsys, "prolong", "--eq", eq, "--q", "1")
    assert code == 0
    assert out["order"] == 3 and out["count"] == 3
    assert "u1_x1x1x1 + u1_x1x2x2" in out["equations"]


def test_gateaux_routes(capsys):
    code, out = run(capsys, "gateaux", "--n", "1", "--lagrangian", "u1^2",
                    "--section", "x1", "--direction", "1")
    assert code == 0 and out["verdict"]
    assert out["gateaux"] == pytest.approx(1.0, abs=1e-12)
    assert [c["route"] for c in out["cases"]] == ["finite-difference", "symbolic"]


def test_gateaux_with_bump_direction_checks_euler_lagrange(capsys):
    code, out = run(capsys, "gateaux", "--n", "1", "--lagrangian", "0.5*u1_x1^2",
                    "--section", "x1^2", "--direction",
                    "bump((x1 - 1/2)/(2/5))", "--grid", "0:1:401")
    assert code == 0 and out["euler_lagrange_checked"]
    routes = {c["route"]: c for c in out["cases"]}
    assert routes["euler-lagrange"]["discrepancy"] < 1e-4
    assert routes["symbolic"]["value"] == pytest.approx(out["gateaux"])


def test_parse_error_exit_code(capsys):
    code = main(["el", "--n", "1", "--lagrangian", "u1 +* 2"])
    captured = capsys.readouterr()
    assert code == 2
    error = json.loads(captured.out)["error"]
    assert error["type"] == "parse" and error["line"] == 1 and error["column"] >= 1


def test_usage_error_exit_code(capsys):
    assert main(["el", "--lagrangian", "u1"]) == 2
    assert main(["nonsense"]) == 2
    capsys.readouterr()


def test_missing_file_is_a_parse_error(capsys, tmp_path):
    code = main(["prolong", "--eq", str(tmp_path / "absent.json")])
    assert code == 2
    assert json.loads(capsys.readouterr().out)["error"]["type"] == "parse"


def test_numeric_instability_exit_code(capsys):
    code = main(["gateaux", "--n", "1", "--lagrangian", "sin(10000*u1)",
                 "--section", "x1", "--direction", "1"])
    out = json.loads(capsys.readouterr().out)
    assert code == 3
    assert out["error"]["type"] == "numeric-instability" and "case" in out["error"]


def test_nonlinear_equation_rejected(capsys, files):
    eq = files("bad.json", {"order": 2, "components": ["u1*u1_x1x1"]})
    assert main(["prolong", "--eq", eq]) == 2
    assert json.loads(capsys.readouterr().out)["error"]["type"] == "not-linear"


def test_laws_single_suite(capsys):
    code, out = run(capsys, "laws", "--suite", "kleisli", "--count", "4")
    assert code == 0 and out["passed"]


@pytest.mark.parametrize("argv", [
    ["el", "--n", "1", "--lagrangian", "u1*u1_x1x1 + u1^4"],
    ["laws", "--suite", "codereliction", "--count", "3"],
    ["gateaux", "--n", "1", "--lagrangian", "sqrt(1 + u1_x1^2)", "--section", "x1^2",
     "--direction", "sin(x1)"],
])
def test_two_runs_are_byte_identical(capsys, argv):
    main(argv + ["--seed", "0"])
    first = capsys.readouterr().out
    main(argv + ["--seed", "0"])
    assert capsys.readouterr().out == first


def test_console_script():
    exe = shutil.which("jetcalc")
    cmd = [exe] if exe else [sys.executable, "-m", "jetcalc.cli"]
    proc = subprocess.run(cmd + ["el", "--n", "1", "--lagrangian", "u1"],
                          capture_output=True, text=True, check=False)
    assert proc.returncode == 0 and json.loads(proc.stdout)["el"] == ["1"]
