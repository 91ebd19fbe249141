from pathlib import Path

import pytest

from grigsolve.cli import main

GOLDEN = Path(__file__).parent / "golden"


def _write(tmp_path, text, name="eq.txt"):
    p = tmp_path / name
    p.write_text(text)
    return str(p)


def test_order(capsys):
    assert main(["order", "ab"]) == 0
    assert capsys.readouterr().out.strip() == "16"


def test_order_rejects_bad_word(capsys):
    assert main(["order", "abx"]) == 1
    assert "error" in capsys.readouterr().err


def test_usage_error_exits_one(capsys):
    with pytest.raises(SystemExit) as exc:
        main(["solve"])
    assert exc.value.code == 1
    with pytest.raises(SystemExit) as exc:
        main(["frobnicate"])
    assert exc.value.code == 1


def test_quotient_table_matches_golden(capsys):
    assert main(["quotient-table"]) == 0
    assert capsys.readouterr().out == (GOLDEN / "quotient_table.txt").read_text()


def test_solve_solvable(tmp_path, capsys):
    path = _write(tmp_path, "[x,y] = [a,b]\n")
    assert main(["solve", path, "--max-len", "2"]) == 0
    out = capsys.readouterr().out
    assert out.startswith("SOLVABLE")
    assert "witness:" in out


def test_solve_unsolvable(tmp_path, capsys):
    path = _write(tmp_path, "x^2 = b\n")
    assert main(["solve", path, "--max-len", "2"]) == 3
    assert capsys.readouterr().out.startswith("UNSOLVABLE")


def test_solve_with_constraint_and_trace(tmp_path, capsys):
    path = _write(tmp_path, "[x,y] = [a,b]\nx = a\ny = b\n")
    assert main(["solve", path, "--max-len", "2", "--trace"]) == 0
    out = capsys.readouterr().out
    assert "trace:" in out and "standard form" in out


def test_solve_partial_constraint_is_an_error(tmp_path, capsys):
    path = _write(tmp_path, "[x,y] = [a,b]\nx = a\n")
    assert main(["solve", path]) == 1


def test_solve_not_quadratic(tmp_path, capsys):
    path = _write(tmp_path, "x y x = a\n")
    assert main(["solve", path]) == 1


def test_solve_with_ledger_file(tmp_path, capsys):
    path = _write(tmp_path, "x^2 y^2 = abab\n")
    ledger = tmp_path / "ledger.tsv"
    assert main(["solve", path, "--max-len", "2", "--ledger", str(ledger)]) == 0
    assert ledger.exists()
    assert main(["solve", path, "--max-len", "2", "--ledger", str(ledger)]) == 0


def test_missing_file(capsys):
    assert main(["solve", "/nonexistent/eq.txt"]) == 1


def test_split(tmp_path, capsys):
    path = _write(tmp_path, "[x,y] z^-1 abab z\nx = b\ny = b\nz = 1\n")
    assert main(["split", path, "--trace-split"]) == 0
    out = capsys.readouterr().out
    assert "standard form:" in out and "case:" in out and "branches:" in out


def test_split_needs_full_constraint(tmp_path, capsys):
    path = _write(tmp_path, "[x,y]\n")
    assert main(["split", path]) == 1


def test_width(capsys):
    assert main(["width", "abab"]) == 0
    assert "width: 1" in capsys.readouterr().out
    assert main(["width", "a"]) == 1
