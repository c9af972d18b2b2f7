"""Command-line workflows: gen, solve, bench, profile, exit codes."""

import numpy as np
import pytest

from cycip import RoadProblem, read_problem, read_witness, verify_feasible, write_problem
from cycip.cli import main


def gen(tmp_path, name="probs", n=30, count=2, seed=11, extra=()):
    out = tmp_path / name
    rc = main(["gen", "--n", str(n), "--count", str(count), "--seed", str(seed),
               "--out", str(out), *extra])
    assert rc == 0
    return out


def infeasible_file(tmp_path):
    """Anchors demand an average grade of 5 against a bound of 1."""
    problem = RoadProblem(t=[0.0, 1.0, 2.0], interp_idx=[0, 2], interp_val=[0.0, 10.0],
                          sigma=[1.0, 1.0], gamma=[10.0], delta=[-10.0])
    path = tmp_path / "infeasible.roadfp"
    write_problem(problem, path)
    return path


class TestGen:
    def test_writes_paired_files(self, tmp_path, capsys):
        out = gen(tmp_path)
        assert sorted(p.name for p in out.iterdir()) == [
            "problem_000.roadfp", "problem_000.witness",
            "problem_001.roadfp", "problem_001.witness",
        ]
        assert "wrote 2 problems (n=30, seed=11)" in capsys.readouterr().out
        problem = read_problem(out / "problem_001.roadfp")
        witness = read_witness(out / "problem_001.witness")
        assert verify_feasible(problem, witness.point, tol=0.0).ok

    def test_byte_deterministic(self, tmp_path):
        a = gen(tmp_path, "a", seed=42)
        b = gen(tmp_path, "b", seed=42)
        for name in ("problem_000.roadfp", "problem_000.witness",
                     "problem_001.roadfp", "problem_001.witness"):
            assert (a / name).read_bytes() == (b / name).read_bytes()

    def test_instances_differ_within_batch(self, tmp_path):
        out = gen(tmp_path)
        assert (out / "problem_000.roadfp").read_bytes() != \
               (out / "problem_001.roadfp").read_bytes()

    def test_nonconvex_flags(self, tmp_path):
        out = gen(tmp_path, "nc", count=1, extra=["--nonconvex", "--min-slope", "0.02"])
        problem = read_problem(out / "problem_000.roadfp")
        assert problem.sigma_min == 0.02
        out = gen(tmp_path, "nc-default", count=1, extra=["--nonconvex"])
        assert read_problem(out / "problem_000.roadfp").sigma_min == 0.01

    def test_usage_errors(self, tmp_path, capsys):
        base = ["gen", "--n", "30", "--seed", "1", "--out", str(tmp_path / "x")]
        assert main(base + ["--count", "0"]) == 2
        assert "--count" in capsys.readouterr().err
        assert main(base + ["--count", "1", "--min-slope", "0.02"]) == 2
        assert "--min-slope requires --nonconvex" in capsys.readouterr().err


class TestSolve:
    def test_solves_generated_problem(self, tmp_path, capsys):
        out = gen(tmp_path, n=120, count=1)
        rc = main(["solve", "--problem", str(out / "problem_000.roadfp"),
                   "--backend", "numpy"])
        assert rc == 0
        text = capsys.readouterr().out
        assert "status = solved" in text
        assert "n = 120" in text
        assert "iterations = 0" not in text
        assert "metric = dinf" in text
        assert "eps = 0.0005" in text
        dinf = float(text.split("dinf = ")[1].splitlines()[0])
        assert dinf < 5e-4

    def test_feasible_start_reports_zero_iterations(self, tmp_path, capsys):
        out = gen(tmp_path, n=3, count=1)
        rc = main(["solve", "--problem", str(out / "problem_000.roadfp"),
                   "--backend", "numpy"])
        assert rc == 0
        assert "iterations = 0" in capsys.readouterr().out

    def test_unsolved_exits_one(self, tmp_path, capsys):
        rc = main(["solve", "--problem", str(infeasible_file(tmp_path)),
                   "--max-iters", "600", "--backend", "numpy"])
        assert rc == 1
        assert "status = iteration-limit" in capsys.readouterr().out

    def test_trace_file(self, tmp_path):
        out = gen(tmp_path, n=120, count=1)
        trace = tmp_path / "trace.csv"
        rc = main(["solve", "--problem", str(out / "problem_000.roadfp"),
                   "--trace", str(trace), "--backend", "numpy"])
        assert rc == 0
        lines = trace.read_text().splitlines()
        assert lines[0] == "k,index,step_norm,d2,dinf"
        assert len(lines) > 1

    def test_random_control_and_policy_flags(self, tmp_path, capsys):
        out = gen(tmp_path, n=40, count=1)
        rc = main(["solve", "--problem", str(out / "problem_000.roadfp"),
                   "--control", "random", "--seed", "3", "--policy", "project",
                   "--backend", "numpy"])
        assert rc == 0
        text = capsys.readouterr().out
        assert "control = random" in text and "policy = project" in text

    def test_missing_and_malformed_files_exit_two(self, tmp_path, capsys):
        assert main(["solve", "--problem", str(tmp_path / "nope.roadfp")]) == 2
        bad = tmp_path / "bad.roadfp"
        bad.write_text("not a problem file\n")
        assert main(["solve", "--problem", str(bad)]) == 2
        assert "version tag" in capsys.readouterr().err


class TestParsing:
    def test_unknown_flag(self, capsys):
        assert main(["solve", "--problem", "x.roadfp", "--frobnicate"]) == 2
        assert "cycip: error:" in capsys.readouterr().err

    def test_missing_required(self, capsys):
        assert main(["gen", "--n", "30"]) == 2

    def test_bad_choice(self, capsys):
        assert main(["solve", "--problem", "x", "--metric", "d3"]) == 2

    def test_no_command(self, capsys):
        assert main([]) == 2

    def test_help_exits_zero(self, capsys):
        assert main(["--help"]) == 0
        assert "usage: cycip" in capsys.readouterr().out
        assert main(["gen", "--help"]) == 0


class TestBenchAndProfile:
    def test_end_to_end(self, tmp_path, capsys):
        probs = gen(tmp_path, n=30, count=2)
        out = tmp_path / "bench"
        rc = main(["bench", "--problems", str(probs), "--algs", "CycIPinf,CycP",
                   "--tau-max", "30", "--backend", "numpy", "--out", str(out)])
        assert rc == 0
        results_csv = out / "results.csv"
        assert "wrote" in capsys.readouterr().out
        text = results_csv.read_text()
        assert "# algs = CycIPinf,CycP" in text
        assert text.count("problem_000,") == 2
        assert (out / "profile.csv").exists() and (out / "profile.gp").exists()

        redo = tmp_path / "redo"
        rc = main(["profile", "--results", str(results_csv), "--out", str(redo)])
        assert rc == 0
        assert (redo / "profile.csv").exists()
        rows = [l for l in (redo / "profile.csv").read_text().splitlines()
                if l and not l.startswith("#")]
        assert rows[0] == "algorithm,kappa,rho"
        assert all(l.startswith(("CycIPinf,", "CycP,")) for l in rows[1:])

    def test_bench_usage_errors(self, tmp_path, capsys):
        empty = tmp_path / "empty"
        empty.mkdir()
        assert main(["bench", "--problems", str(empty), "--out", str(tmp_path / "o")]) == 2
        assert "no .roadfp files" in capsys.readouterr().err
        probs = gen(tmp_path, count=1)
        assert main(["bench", "--problems", str(probs), "--algs", "NoSuchAlg",
                     "--out", str(tmp_path / "o")]) == 2
        assert "unknown algorithms" in capsys.readouterr().err

    def test_profile_rejects_empty_results(self, tmp_path, capsys):
        empty = tmp_path / "results.csv"
        empty.write_text("problem_id,n,algorithm,status,iterations,time_ms,d2_final,dinf_final\n")
        assert main(["profile", "--results", str(empty), "--out", str(tmp_path / "o")]) == 2
        assert "no result rows" in capsys.readouterr().err
