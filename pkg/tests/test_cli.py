import io
import json
import os
from pathlib import Path

import pytest

from trigroup.cli import COMMANDS, main
from trigroup.io import read_manifest

GOLDEN = Path(__file__).parent / "golden"


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main(list(argv), out, err)
    return code, out.getvalue(), err.getvalue()


def help_text(command, monkeypatch, capsys):
    monkeypatch.setenv("COLUMNS", "100")
    argv = [command, "--help"] if command else ["--help"]
    assert main(argv) == 0
    return capsys.readouterr().out


@pytest.mark.parametrize("command", [None, *COMMANDS])
def test_help_matches_golden(command, monkeypatch, capsys):
    text = help_text(command, monkeypatch, capsys)
    path = GOLDEN / f"help_{command or 'main'}.txt"
    if os.environ.get("TRIGROUP_REGEN_GOLDEN"):
        path.write_text(text)
    assert text == path.read_text()


def test_decide_z3_is_nontrivial(tmp_path):
    f = tmp_path / "P.txt"
    f.write_text("n=1\ng1 g1 g1\n")
    code, out, _ = run("decide", "--input", str(f), "--max-cosets", "1000")
    assert code == 0
    assert out.strip() == "Nontrivial"


def test_decide_trivial(tmp_path):
    f = tmp_path / "P.txt"
    f.write_text("n=2\ng1 g1 g1\ng1 g1 g2\ng1 g1 G2\n")
    assert run("decide", "--input", str(f))[1].strip() == "Trivial"


def test_sample_p_zero(tmp_path):
    code, out, _ = run("sample", "--n", "3", "--p", "0", "--seed", "7")
    assert code == 0
    body = [ln for ln in out.splitlines() if ln and not ln.startswith("#")]
    assert body == ["n=3"]
    assert read_manifest(out)["seed"] == 7


def test_sample_round_trips_through_decide(tmp_path):
    f = tmp_path / "P.txt"
    assert run("sample", "--n", "4", "--c", "1.0", "--seed", "3", "--output", str(f))[0] == 0
    assert (tmp_path / "P.txt.manifest.json").exists()
    code, out, _ = run("decide", "--input", str(f))
    assert code == 0 and out.strip() in {"Trivial", "Nontrivial", "Undecided"}


def test_sweep_spec_example_is_byte_identical(tmp_path):
    f = tmp_path / "s.csv"
    argv = ["sweep", "--n", "30", "--c", "0.2:3.0:0.2", "--trials", "200", "--seed", "1", "--output", str(f)]
    assert run(*argv)[0] == 0
    first = f.read_bytes()
    assert run(*argv)[0] == 0
    assert f.read_bytes() == first
    lines = first.decode().splitlines()
    assert lines[0].startswith("# manifest: ")
    assert lines[1] == "c,p,lower,upper,undecided,ci_lo,ci_hi"
    assert len(lines) == 2 + 15


@pytest.mark.parametrize(
    "argv",
    [
        ["sweep", "--n", "12", "--c", "0.02:0.2:0.03", "--trials", "20", "--seed", "4"],
        ["boost", "--n", "8", "--p", "0.03", "--trials", "16", "--seed", "4"],
        ["zgraph", "--z", "g1", "--n", "8", "--trials", "10", "--seed", "4"],
        ["paths", "--n", "5", "--pairs", "6", "--eps", "1", "--p", "0.2", "--trials", "30", "--seed", "4"],
    ],
)
def test_output_independent_of_threads(argv):
    a = run(*argv, "--threads", "1")
    b = run(*argv, "--threads", "2")
    assert a[0] == b[0] == 0
    assert a[1] == b[1]


def test_manifest_sidecar_has_volatile_fields(tmp_path):
    f = tmp_path / "a.jsonl"
    assert run("arithmetic", "--n", "1e6", "--output", str(f))[0] == 0
    side = json.loads((tmp_path / "a.jsonl.manifest.json").read_text())
    assert "timestamp" in side and side["threads"] == 1
    embedded = read_manifest(f.read_text())
    assert "timestamp" not in embedded
    assert embedded["config"]["n"] == 1e6


def test_davkd_enum_and_check(tmp_path):
    code, out, _ = run("davkd-enum", "--m", "2", "--with-diagrams")
    assert code == 0
    rows = [json.loads(ln) for ln in out.splitlines()[1:]]
    assert rows and all(r["m"] == 2 for r in rows)
    f = tmp_path / "D.json"
    f.write_text(json.dumps(rows[0]["diagram"]))
    P = tmp_path / "P.txt"
    P.write_text("n=2\n")
    code, out, _ = run("davkd-check", "--input", str(f), "--n", "2", "--p", "0.05", "--presentation", str(P))
    assert code == 0
    row = json.loads(out.splitlines()[1])
    assert row["fulfillable"] is False and 0 < row["fulfillability_bound"] <= 1


def test_usage_errors_exit_2(tmp_path):
    assert run("sample", "--n", "3")[0] == 2
    assert run("nonsense")[0] == 2
    assert run("sample", "--n", "3", "--p", "1.5")[0] == 2
    assert run("arithmetic", "--n", "3")[0] == 2
    bad = tmp_path / "bad.txt"
    bad.write_text("n=2\ng1 g9 g2\n")
    code, _, err = run("decide", "--input", str(bad))
    assert code == 2 and "error" in err


def test_missing_file_exit_1(tmp_path):
    code, _, err = run("decide", "--input", str(tmp_path / "nope.txt"))
    assert code == 1 and "nope.txt" in err


def test_no_bracket_exit_3():
    code, _, err = run("threshold", "--n", "8", "--c", "0.0001:0.0002:0.00005", "--trials", "10")
    assert code == 3 and "straddle" in err


def test_budget_exceeded_exit_3(tmp_path):
    code, out, _ = run("davkd-enum", "--m", "2", "--with-diagrams")
    f = tmp_path / "D.json"
    f.write_text(json.dumps(json.loads(out.splitlines()[1])["diagram"]))
    P = tmp_path / "P.txt"
    P.write_text("n=2\ng1 g2 g1\n")
    code, _, err = run("davkd-check", "--input", str(f), "--presentation", str(P), "--max-faces", "1")
    assert code == 3 and "cap is 1" in err
