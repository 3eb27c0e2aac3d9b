import csv
import io

import pytest

from smoothext.cli import (HEADER, ErrorTable, ExperimentConfig, UsageError, config_from_args,
                           main, parse_config_text)


def run(argv, capsys):
    code = main(argv)
    out = capsys.readouterr().out
    return code, out


def rows(text):
    return list(csv.reader(io.StringIO(text)))


def test_borel_default_passes(capsys):
    code, out = run(["borel"], capsys)
    assert code == 0
    table = rows(out)
    assert tuple(table[0]) == HEADER
    assert all(r[5] == "PASS" for r in table[1:])
    # N = 8: nine jet residual rows
    assert sum(r[1] == "jet_residual" for r in table[1:]) == 9


def test_rows_are_sorted(capsys):
    _, out = run(["borel", "--case", "exp@0.5", "--order", "5"], capsys)
    body = [tuple(r[:3]) for r in rows(out)[1:]]
    assert body == sorted(body)


def test_failing_rows_exit_one(capsys):
    code, out = run(["extend", "--case", "exp_xy", "--order", "3", "--tol", "1e-300"], capsys)
    assert code == 1
    assert any(r[5] == "FAIL" for r in rows(out)[1:])


@pytest.mark.parametrize("argv", [
    ["borel", "--order", "13"],
    ["borel", "--order", "0"],
    ["extend", "--case", "nope"],
    ["borel", "--case", "tan@0"],
    ["mapspace", "--case", "sp4-loop"],
    ["manifold"],
    ["manifold", "--atlas", "/nonexistent/atlas.json"],
    ["extend", "--case", "sin", "--dim", "2"],
    ["borel", "--tol", "-1"],
    ["frobnicate"],
])
def test_usage_errors_exit_two(argv, capsys):
    assert main(argv) == 2


def test_runs_are_byte_identical(tmp_path):
    a, b = tmp_path / "a.csv", tmp_path / "b.csv"
    for p in (a, b):
        assert main(["extend", "--case", "runge", "--seed", "7", "--out", str(p)]) == 0
    assert a.read_bytes() == b.read_bytes()


def test_random_case_depends_on_seed(capsys):
    _, one = run(["borel", "--case", "random", "--seed", "1", "--order", "4"], capsys)
    _, two = run(["borel", "--case", "random", "--seed", "1", "--order", "4"], capsys)
    _, other = run(["borel", "--case", "random", "--seed", "2", "--order", "4"], capsys)
    assert one == two
    assert one != other


def test_config_file(tmp_path, capsys):
    cfg = tmp_path / "run.cfg"
    cfg.write_text("# borel run\ncase = cos@0.25\norder=4  # short\nseed=3\n")
    c = config_from_args(["borel", "--config", str(cfg), "--order", "5"])
    assert c.case == "cos@0.25"
    assert c.order == 5  # flag wins
    assert c.seed == 3
    code, out = run(["borel", "--config", str(cfg)], capsys)
    assert code == 0
    assert rows(out)[1][0] == "cos@0.25"


def test_parse_config_text():
    got = parse_config_text("tol=1e-6\nfoo = bar\n\n")
    assert got == {"tol": 1e-6, "params": {"foo": "bar"}}
    with pytest.raises(UsageError):
        parse_config_text("order\n")
    with pytest.raises(UsageError):
        parse_config_text("order=four\n")


def test_default_seed():
    assert ExperimentConfig("borel").seed == 42


def test_error_table_format():
    t = ErrorTable()
    t.add("b", "x", "p", 1.0, 2.0)
    t.add("a", "y", "q", 3.0, 2.0)
    t.add("a", "x", "q", float("inf"), 2.0)
    assert not t.passed
    assert t.to_csv().splitlines() == [
        "case,check,location,value,bound,status",
        "a,x,q,inf,2.000000e+00,FAIL",
        "a,y,q,3.000000e+00,2.000000e+00,FAIL",
        "b,x,p,1.000000e+00,2.000000e+00,PASS",
    ]


def test_mapspace_holomorphy(capsys):
    code, out = run(["mapspace", "--case", "holomorphy", "--grid", "8"], capsys)
    assert code == 0
    checks = {(r[1], r[2]) for r in rows(out)[1:]}
    assert ("cr_detected", "conj(z)") in checks
    assert ("cr_residual", "z^2") in checks


def test_manifold_quarter_disc(capsys, tmp_path):
    out = tmp_path / "m.csv"
    assert main(["manifold", "--atlas", "quarter_disc", "--grid", "50", "--out", str(out)]) == 0
    assert main(["manifold", "--atlas", "quarter_disc_broken", "--grid", "50"]) == 1
