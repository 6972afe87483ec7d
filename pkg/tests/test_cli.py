import json
import subprocess
import sys
from fractions import Fraction

import pytest

from cmlinear.cli import InputError, main, parse_job, parse_point, parse_rational

HYPERPLANE = '{"format": 1, "equations": [{"a": [1, 1], "b": -1728}]}'


@pytest.fixture
def job(tmp_path):
    def write(text, name="job.json"):
        p = tmp_path / name
        p.write_text(text)
        return str(p)
    return write


def test_parse_rational():
    assert parse_rational("3/4") == Fraction(3, 4)
    assert parse_rational("-0.25") == Fraction(-1, 4)
    assert parse_rational(7) == 7
    for bad in (0.5, True, "x/2", "1/0", None):
        with pytest.raises(ValueError):
            parse_rational(bad)


def test_parse_job_forms():
    a = parse_job(HYPERPLANE)
    b = parse_job('{"format": 1, "basis": {"directions": [["1", "-1"]], "offset": [1728, 0]}}')
    assert a.subvariety == b.subvariety and a.ambient_dim == 2 and a.cap is None
    c = parse_job('{"format": 1, "ambient_dim": 2, "equations": [{"a": ["1/2", 0], "b": 3}], "cap": 50, "threads": 2}')
    assert c.cap == 50 and c.threads == 2


@pytest.mark.parametrize("text,line", [
    ('{"format": 1,\n "equations": [{"a": [1, 1], "b": -1728}],\n "colour": 3}', 3),
    ('{"format": 2, "equations": []}', 1),
    ('{"format": 1,\n "equations": [{"a": [1.5, 1], "b": 0}]}', 2),
    ('{"format": 1, "equations": [{"a": [1, 1], "b": 0}], "basis": {}}', None),
    ('{"format": 1,\n\n "equations": [{"a": [0, 0], "b": 1}]}', 3),
    ('{"format": 1, "equations": [{"a": [1, 1], "b": 0}],\n "cap": 2}', 2),
    ('{"format": 1, "equations": [', 1),
])
def test_job_errors_carry_positions(text, line):
    with pytest.raises(InputError) as exc:
        parse_job(text)
    if line is not None:
        assert exc.value.line == line


def test_parse_point():
    pts = parse_point("-3;-23:2,1,3")
    assert [p.key for p in pts] == [(-3, 1, 1, 1), (-23, 2, 1, 3)]
    with pytest.raises(ValueError):
        parse_point("-23:1,0,6")


def test_solve_json_and_exit_codes(job, capsys):
    path = job(HYPERPLANE)
    assert main(["solve", path, "--cap", "100", "--json"]) == 0
    out = json.loads(capsys.readouterr().out)
    assert len(out["points"]) == 2 and out["complete"]
    assert main(["solve", path]) == 3
    capsys.readouterr()
    assert main(["solve", path, "--cap", "2000000"]) == 3


def test_undecided_exit_code(job, capsys):
    path = job('{"format": 1, "equations": [{"a": [1, 1], "b": 191025}], "max_precision": 64}')
    assert main(["solve", path, "--cap", "20"]) == 2


def test_input_errors_exit_1(job, capsys):
    assert main(["solve", job('{"format": 1}')]) == 1
    assert "error" in capsys.readouterr().err
    assert main(["class-number", "-5"]) == 1
    with pytest.raises(SystemExit) as exc:
        main(["no-such-command"])
    assert exc.value.code == 1


def test_number_theory_subcommands(capsys):
    assert main(["class-number", "-23"]) == 0
    assert capsys.readouterr().out.strip().endswith("3")
    assert main(["class-poly", "-23", "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["coefficients"][-2] == "3491750"
    assert main(["psi", "6", "--json"]) == 0
    assert "12" in capsys.readouterr().out
    assert main(["rcf-degree", "-4", "1", "3"]) == 0
    assert "3" in capsys.readouterr().out
    for argv in (["two-rank", "-420"], ["reduce-forms", "-20"], ["reduce-tau", "5", "1"],
                 ["j-eval", "-163", "--digits", "10"]):
        assert main(argv) == 0
    out = capsys.readouterr().out
    assert "262537412640768000" in out


def test_height_bound_check_point(job, capsys):
    path = job(HYPERPLANE)
    assert main(["height", path, "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["square"] == "2985986"
    assert main(["bound", path]) == 0
    capsys.readouterr()
    assert main(["check-point", path, "--point=-3;-4", "--json"]) == 0
    res = json.loads(capsys.readouterr().out)
    assert res["on_L"] and res["in_positive_dimensional_special"] is False
    assert main(["check-point", path, "--point=-3"]) == 1


def test_verify_lemma_command(capsys):
    assert main(["verify-lemma", "1", "1", "-1728", "--cap", "30", "--json"]) == 0
    assert json.loads(capsys.readouterr().out)["violations"] == 0


def test_module_entry_point(tmp_path):
    p = tmp_path / "job.json"
    p.write_text(HYPERPLANE)
    r = subprocess.run([sys.executable, "-m", "cmlinear", "solve", str(p), "--cap", "20", "--threads", "2"],
                       capture_output=True, text=True)
    assert r.returncode == 0, r.stderr


def test_text_and_json_carry_the_same_numbers(job, capsys):
    path = job(HYPERPLANE)
    main(["height", path])
    text = capsys.readouterr().out
    main(["height", path, "--json"])
    payload = json.loads(capsys.readouterr().out)
    for key in ("square", "height", "log_height"):
        assert payload[key] in text
    main(["j-eval", "-23", "--form", "2,1,3"])
    text = capsys.readouterr().out
    main(["j-eval", "-23", "--form", "2,1,3", "--json"])
    payload = json.loads(capsys.readouterr().out)
    assert payload["value"] in text
