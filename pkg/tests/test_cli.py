"""Command-line interface: exit codes, artifacts, determinism."""

import json
import math

import pytest

from rieszlab.cli import main

SING = ["singular", "--n", "5", "--alpha", "2", "--p", "3", "--q", "3",
        "--grid", "1e-4:1e4:256"]


def run(capsys, argv):
    code = main(argv)
    out = capsys.readouterr()
    return code, out.out, out.err


class TestExponents:
    def test_reports_regime_json(self, capsys):
        code, out, _ = run(capsys, ["exponents", "--n", "6", "--alpha", "2",
                                    "--p", "2", "--q", "2"])
        assert code == 0
        data = json.loads(out)
        assert data["regime"] == "Critical"
        assert data["r0"] == pytest.approx(3.0)

    def test_order_flag_matches_alpha(self, capsys):
        _, out_alpha, _ = run(capsys, ["exponents", "--n", "6", "--alpha",
                                       "2", "--p", "2", "--q", "2"])
        _, out_k, _ = run(capsys, ["exponents", "--n", "6", "--k", "1",
                                   "--p", "2", "--q", "2"])
        assert out_alpha == out_k

    def test_alpha_and_k_conflict(self, capsys):
        code, _, err = run(capsys, ["exponents", "--n", "6", "--alpha", "2",
                                    "--k", "1", "--p", "2", "--q", "2"])
        assert code == 2

    def test_invalid_alpha_exits_2(self, capsys):
        code, _, err = run(capsys, ["exponents", "--n", "4", "--alpha", "5",
                                    "--p", "2", "--q", "2"])
        assert code == 2
        assert err != ""

    def test_writes_report_dir(self, tmp_path, capsys):
        out_dir = tmp_path / "exp"
        code, _, _ = run(capsys, ["exponents", "--n", "6", "--alpha", "2",
                                  "--p", "2", "--q", "2", "--out",
                                  str(out_dir)])
        assert code == 0
        report = json.loads((out_dir / "report.json").read_text())
        assert report["regime"] == "Critical"
        manifest = json.loads((out_dir / "manifest.json").read_text())
        assert manifest["command"] == "exponents"
        assert len(manifest["configHash"]) == 64


@pytest.mark.filterwarnings(
    "ignore::rieszlab.errors.TruncationWarning")
class TestSingular:
    # the closed-form profile decays slowly, so the operator's tail
    # integral legitimately hits the range cap and warns; the artifacts
    # themselves are what these tests check
    def test_run_artifacts(self, tmp_path, capsys):
        out_dir = tmp_path / "run1"
        code, _, _ = run(capsys, SING + ["--out", str(out_dir)])
        assert code == 0
        for name in ("solution.csv", "report.json", "manifest.json"):
            assert (out_dir / name).is_file()
        report = json.loads((out_dir / "report.json").read_text())
        assert report["branch"] == "SingularPowerLaw"
        assert report["amplitudeU"] == pytest.approx(math.sqrt(2.0),
                                                     rel=1e-12)
        lines = (out_dir / "solution.csv").read_text().splitlines()
        assert lines[0] == "r,u,v"
        r0, u0, _ = (float(x) for x in lines[1].split(","))
        assert u0 * r0 == pytest.approx(math.sqrt(2.0), rel=1e-12)

    def test_byte_identical_reruns(self, tmp_path, capsys):
        dir_a, dir_b = tmp_path / "a", tmp_path / "b"
        run(capsys, SING + ["--out", str(dir_a)])
        run(capsys, SING + ["--out", str(dir_b)])
        assert ((dir_a / "solution.csv").read_bytes()
                == (dir_b / "solution.csv").read_bytes())
        ha = json.loads((dir_a / "manifest.json").read_text())["configHash"]
        hb = json.loads((dir_b / "manifest.json").read_text())["configHash"]
        assert ha == hb

    def test_analyze_slow_decay_claim(self, tmp_path, capsys):
        out_dir = tmp_path / "run1"
        run(capsys, SING + ["--out", str(out_dir)])
        code, out, _ = run(capsys, ["analyze", str(out_dir), "--claim",
                                    "slow-decay"])
        assert code == 0
        data = json.loads(out)
        assert data["claim"]["confirmed"] is True
        assert data["claim"]["verdict"] == "slow rates confirmed"
        assert data["integrable"] == {"u": False, "v": False}

    def test_analyze_unknown_claim(self, tmp_path, capsys):
        out_dir = tmp_path / "run1"
        run(capsys, SING + ["--out", str(out_dir)])
        code, _, _ = run(capsys, ["analyze", str(out_dir), "--claim",
                                  "bogus"])
        assert code == 2

    def test_analyze_missing_rundir(self, tmp_path, capsys):
        code, _, _ = run(capsys, ["analyze", str(tmp_path / "nope")])
        assert code == 2


class TestSolve:
    def test_zero_budget_exits_1(self, capsys):
        code, _, err = run(capsys, ["solve", "--n", "4", "--alpha", "2",
                                    "--p", "3", "--q", "3", "--grid",
                                    "1e-4:1e4:64", "--max-iters", "0"])
        assert code == 1
        assert err != ""

    def test_bad_grid_string(self, capsys):
        code, _, _ = run(capsys, ["solve", "--n", "4", "--alpha", "2",
                                  "--p", "3", "--q", "3", "--grid", "oops"])
        assert code == 2

    def test_solve_writes_fields(self, tmp_path, capsys):
        out_dir = tmp_path / "solved"
        code, _, _ = run(capsys, ["solve", "--n", "4", "--alpha", "2",
                                  "--p", "3", "--q", "3", "--grid",
                                  "1e-4:1e4:128", "--tol", "5e-6",
                                  "--out", str(out_dir)])
        assert code == 0
        report = json.loads((out_dir / "report.json").read_text())
        assert report["branch"] == "PicardFixedPoint"
        assert report["residualU"] <= 5e-6
        assert report["regime"]["regime"] == "Critical"


class TestShoot:
    def test_crossing_reported(self, tmp_path, capsys):
        out_dir = tmp_path / "shot"
        code, _, _ = run(capsys, ["shoot", "--n", "5", "--alpha", "2",
                                  "--p", "3", "--q", "3", "--xi", "0.8",
                                  "--r-end", "1e4", "--out", str(out_dir)])
        assert code == 0
        report = json.loads((out_dir / "report.json").read_text())
        assert report["outcome"] == "VCrossedZero"
        assert report["crossingRadius"] > 1.0
        assert (out_dir / "trajectory.csv").is_file()

    def test_bisect_reports_xi(self, tmp_path, capsys):
        out_dir = tmp_path / "bisected"
        code, _, _ = run(capsys, ["bisect", "--n", "5", "--alpha", "2",
                                  "--p", "3", "--q", "3", "--lo", "0.5",
                                  "--hi", "2.0", "--iters", "20",
                                  "--r-end", "1e4", "--out", str(out_dir)])
        assert code == 0
        report = json.loads((out_dir / "report.json").read_text())
        assert report["xi"] == pytest.approx(1.0, abs=1e-4)
        assert report["bracketHi"] - report["bracketLo"] == pytest.approx(
            1.5 * 2.0 ** -20, rel=1e-12)


class TestVerifyAll:
    def test_single_criterion_passes(self, capsys):
        code, out, _ = run(capsys, ["verify-all", "--only",
                                    "exponent-algebra"])
        assert code == 0
        assert "PASS" in out
        assert "1/1 criteria passed" in out

    def test_unknown_criterion(self, capsys):
        code, _, _ = run(capsys, ["verify-all", "--only", "bogus"])
        assert code == 2

    def test_report_written(self, tmp_path, capsys):
        out_dir = tmp_path / "verify"
        code, _, _ = run(capsys, ["verify-all", "--only", "exponent-algebra",
                                  "--seed", "3", "--out", str(out_dir)])
        assert code == 0
        report = json.loads((out_dir / "report.json").read_text())
        assert report["allPassed"] is True
        assert report["seed"] == 3
        assert report["results"][0]["key"] == "exponent-algebra"
        assert report["results"][0]["passed"] is True
