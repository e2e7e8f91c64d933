import json
import shutil
import subprocess
from pathlib import Path

import pytest

from jetchar import cli
from jetchar.characters import InvariantViolation

SPECS = Path(__file__).resolve().parent.parent / "specs"


def run(capsys, *argv):
    code = cli.main(list(argv))
    out = capsys.readouterr()
    return code, out.out, out.err


def report(tmp_path, capsys, *argv, name="r.json"):
    path = tmp_path / name
    code, _, _ = run(capsys, "analyze", *argv, "--json", str(path))
    return code, path


class TestAnalyze:
    def test_ga(self, tmp_path, capsys):
        code, path = report(tmp_path, capsys, "ga", "--max-order", "3")
        rep = json.loads(path.read_text())
        assert code == 0
        assert [o["dimX"] for o in rep["orders"]] == [1, 2, 3, 4]
        assert rep["m_l"] == rep["m_u"] == 0
        assert rep["kernel"]["degenerate"] is True

    def test_gm(self, tmp_path, capsys):
        code, path = report(tmp_path, capsys, "gm", "--max-order", "3", "--trunc", "8")
        rep = json.loads(path.read_text())
        assert code == 0
        assert [o["dimX"] for o in rep["orders"]] == [0, 1, 2, 3]
        assert rep["kernel"]["m"] == 1 and rep["kernel"]["dimK"]["1"] == 1

    def test_legendre(self, tmp_path, capsys):
        code, path = report(tmp_path, capsys, "legendre", "--lambda", "t", "--max-order", "3", "--trunc", "6")
        rep = json.loads(path.read_text())
        assert code == 0
        assert [o["dimX"] for o in rep["orders"]] == [0, 0, 1, 2]
        k = rep["kernel"]
        assert k["m"] == 2 and k["dimK"]["2"] == 2 and k["dimL"] == 1
        assert rep["truncation"] == {"checked": True, "stable": True, "compared": [6, 8]}
        assert rep["r_bound"] == {"declared_r": 1, "m_u": 2, "holds": True}
        assert rep["schema_version"] == cli.SCHEMA_VERSION

    def test_summary_text(self, capsys):
        code, out, _ = run(capsys, "analyze", "gm", "--max-order", "2")
        assert code == 0
        assert "dimX = [0, 1, 2]" in out and "dimL = 0" in out

    def test_deterministic(self, tmp_path, capsys):
        _, a = report(tmp_path, capsys, "legendre", "--max-order", "3", "--trunc", "6", name="a.json")
        _, b = report(tmp_path, capsys, "legendre", "--max-order", "3", "--trunc", "6", name="b.json")
        assert a.read_bytes() == b.read_bytes()

    @pytest.mark.parametrize("name", ["ga", "gm"])
    def test_spec_round_trip(self, tmp_path, capsys, name):
        _, a = report(tmp_path, capsys, name, "--max-order", "3", "--trunc", "8", name="a.json")
        _, b = report(tmp_path, capsys, "--spec", str(SPECS / f"{name}.spec"), "--max-order", "3",
                      "--trunc", "8", name="b.json")
        assert a.read_bytes() == b.read_bytes()

    def test_env_default_trunc(self, tmp_path, capsys, monkeypatch):
        monkeypatch.setenv("JETCHAR_TRUNC_DEFAULT", "5")
        _, path = report(tmp_path, capsys, "gm", "--max-order", "2")
        assert json.loads(path.read_text())["group"]["trunc"] == 5


class TestExitCodes:
    def test_parse_error(self, tmp_path, capsys):
        p = tmp_path / "bad.spec"
        p.write_text((SPECS / "gm.spec").read_text().replace("x0 + y0 + x0*y0", "x0 + * y0"))
        code, _, err = run(capsys, "analyze", "--spec", str(p))
        assert code == 2 and "parse error" in err and ":6:16:" in err

    def test_axiom_error(self, tmp_path, capsys):
        p = tmp_path / "bad.spec"
        p.write_text((SPECS / "gm.spec").read_text().replace("x0 + y0 + x0*y0", "x0 + y0 + x0^2"))
        code, _, err = run(capsys, "analyze", "--spec", str(p))
        assert code == 2 and "identity" in err

    @pytest.mark.parametrize("argv", [
        ["analyze", "legendre", "--lambda", "1"],
        ["analyze", "legendre", "--lambda", "1/(t-t)"],
        ["analyze", "gm", "--lambda", "t"],
        ["analyze", "gm", "--trunc", "1"],
        ["analyze", "gm", "--max-order", "-1"],
        ["analyze", "torus"],
        ["analyze"],
        ["analyze", "--spec", "/nonexistent.spec"],
    ])
    def test_bad_input(self, capsys, argv):
        code, _, _ = run(capsys, *argv)
        assert code == 2

    def test_invariant_violation(self, capsys, monkeypatch):
        def boom(*a, **k):
            raise InvariantViolation("leading-matrix", "leading matrix A is singular")
        monkeypatch.setattr(cli, "character_space", boom)
        code, _, err = run(capsys, "analyze", "gm")
        assert code == 1 and "leading-matrix" in err

    def test_reported_violation(self, capsys, monkeypatch):
        real = cli.analyze

        def tampered(G, N):
            rep = real(G, N)
            rep["violations"].append("dimK-constant: dimK varies with n")
            return rep
        monkeypatch.setattr(cli, "analyze", tampered)
        code, out, _ = run(capsys, "analyze", "gm", "--max-order", "2")
        assert code == 1 and "VIOLATION" in out


class TestOtherCommands:
    def test_groups_list(self, capsys):
        code, out, _ = run(capsys, "groups", "list")
        assert code == 0
        assert [line.split()[0] for line in out.splitlines()] == ["ga", "gm", "ga*gm", "ga^2*gm", "legendre"]

    def test_verify_field(self, tmp_path, capsys):
        path = tmp_path / "v.json"
        code, out, _ = run(capsys, "verify", "--suite", "field", "--seed", "7", "--json", str(path))
        assert code == 0 and "0 failures" in out
        res = json.loads(path.read_text())["suites"][0]
        assert res["suite"] == "field" and res["cases"] >= 200 and res["failures"] == []

    def test_verify_reports_failures(self, capsys, monkeypatch):
        from jetchar import verify

        def broken(seed, trials=5):
            r = verify._Runner("field", seed)
            r.many("always-false", 2, lambda rng: "nope")
            return r.result
        monkeypatch.setitem(verify.SUITE_FUNCS, "field", broken)
        code, out, _ = run(capsys, "verify", "--suite", "field", "--seed", "3")
        assert code == 1 and "[always-false]" in out and "3:field:always-false:0" in out

    def test_oracle_jets(self, tmp_path, capsys):
        path = tmp_path / "o.json"
        code, out, _ = run(capsys, "oracle", "jets", "--trials", "10", "--seed", "4", "--json", str(path))
        recs = json.loads(path.read_text())["records"]
        assert code == 0 and len(recs) == 20 and all(r["pass"] for r in recs)
        assert {r["kind"] for r in recs} == {"valid", "invalid"}

    def test_oracle_jets_spec(self, capsys):
        code, out, _ = run(capsys, "oracle", "jets", "--spec", str(SPECS / "legendre_curve.spec"),
                           "--trials", "5", "--max-order", "2")
        assert code == 0 and "0 failures" in out

    def test_oracle_jets_rejects_group_spec(self, capsys):
        code, _, _ = run(capsys, "oracle", "jets", "--spec", str(SPECS / "gm.spec"))
        assert code == 2


@pytest.mark.skipif(shutil.which("jetchar") is None, reason="console script not installed")
def test_console_script():
    proc = subprocess.run(["jetchar", "analyze", "gm", "--max-order", "2"], capture_output=True, text=True)
    assert proc.returncode == 0 and "m_l = 1" in proc.stdout
