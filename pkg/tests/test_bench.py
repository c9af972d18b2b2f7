"""Benchmark harness: ratios, profile curves, deterministic exports."""

import numpy as np
import pytest

from cycip import (
    AlgorithmSpec,
    FeasibilityProblem,
    GeneratorParams,
    Hyperplane,
    Hyperslab,
    IntrepidProjector,
    ProfileCurve,
    RunResult,
    builtin_algorithms,
    export_results,
    generate_problem,
    performance_ratios,
    profile_curves,
    read_results,
    run_suite,
)


def cell(pid, alg, time_ms, status="solved"):
    return RunResult(problem_id=pid, n=4, algorithm=alg, status=status,
                     iterations=10, time_ms=time_ms, d2=0.0, dinf=0.0)


def oscillating_problem():
    """Two touching enlargements around parallel cores; the sweep cycles
    between (-1, 0) and (1, 0) forever."""
    a = np.array([1.0, 0.0])
    sets = [Hyperslab(a, -2.0, 0.0), Hyperslab(a, 0.0, 2.0)]
    ops = [IntrepidProjector(Hyperplane(a, -1.0), 1.0),
           IntrepidProjector(Hyperplane(a, 1.0), 1.0)]
    problem = FeasibilityProblem(sets, ops, intrepid={0, 1}, dim=2)
    return problem, np.array([3.0, 0.0])


class TestSpecs:
    def test_builtins(self):
        algs = builtin_algorithms()
        assert [a.name for a in algs] == ["CycIP2", "CycIPinf", "rCycIP2",
                                          "rCycIPinf", "CycP"]
        assert algs[4].policy == "project" and algs[4].metric == "dinf"
        assert algs[2].control == "random"

    def test_spec_validation(self):
        with pytest.raises(ValueError, match="metric"):
            AlgorithmSpec("x", "d3", "cyclic", "intrepid")
        with pytest.raises(ValueError, match="control"):
            AlgorithmSpec("x", "d2", "sorted", "intrepid")
        with pytest.raises(ValueError, match="policy"):
            AlgorithmSpec("x", "d2", "cyclic", "reflect")

    def test_result_status_validation(self):
        with pytest.raises(ValueError, match="status"):
            cell("p0", "A", 1.0, status="crashed")


class TestRatios:
    def test_two_by_two_example(self):
        results = [cell("p0", "A", 1.0), cell("p0", "B", 2.0),
                   cell("p1", "A", 4.0), cell("p1", "B", 2.0)]
        table = performance_ratios(results)
        assert table.problem_ids == ("p0", "p1")
        assert table.algorithms == ("A", "B")
        np.testing.assert_array_equal(table.ratios, [[1.0, 2.0], [2.0, 1.0]])
        for curve in profile_curves(table, kappa_grid=[0.0, 1.0]):
            assert curve.rho[0] == 0.5
            assert curve.rho[1] == 1.0

    def test_best_cell_ratio_exactly_one(self):
        results = [cell("p0", "A", 0.1), cell("p0", "B", 0.30000000000000004)]
        table = performance_ratios(results)
        assert table.ratios[0, 0] == 1.0

    def test_timeout_is_infinite_ratio(self):
        results = [cell("p0", "A", 1.0), cell("p0", "B", 5.0, status="timeout")]
        table = performance_ratios(results)
        assert table.ratios[0, 0] == 1.0
        assert np.isinf(table.ratios[0, 1])

    def test_unsolved_problem_row_all_infinite(self):
        results = [cell("p0", "A", 1.0, status="timeout"),
                   cell("p0", "B", 1.0, status="timeout"),
                   cell("p1", "A", 2.0), cell("p1", "B", 3.0)]
        table = performance_ratios(results)
        assert np.all(np.isinf(table.ratios[0]))
        np.testing.assert_array_equal(table.ratios[1], [1.0, 1.5])

    def test_empty_results_rejected(self):
        with pytest.raises(ValueError, match="no results"):
            performance_ratios([])

    def test_log2_of_infinite_ratio(self):
        results = [cell("p0", "A", 1.0, status="timeout")]
        table = performance_ratios(results)
        assert np.isinf(table.log2[0, 0])


class TestCurves:
    def test_single_algorithm_curve_is_one(self):
        results = [cell("p0", "A", 3.0), cell("p1", "A", 9.0)]
        (curve,) = profile_curves(performance_ratios(results))
        assert np.all(curve.rho == 1.0)

    def test_all_timeouts_curve_is_zero(self):
        results = [cell("p0", "A", 1.0, status="timeout"),
                   cell("p1", "A", 1.0, status="timeout")]
        (curve,) = profile_curves(performance_ratios(results))
        assert np.all(curve.rho == 0.0)

    def test_curves_monotone_and_bounded(self):
        rng = np.random.default_rng(4)
        results = []
        for p in range(8):
            for a in "ABC":
                timeout = rng.random() < 0.25
                results.append(cell(f"p{p}", a, float(rng.uniform(1, 50)),
                                    status="timeout" if timeout else "solved"))
        for curve in profile_curves(performance_ratios(results)):
            assert np.all(np.diff(curve.rho) >= 0.0)
            assert np.all((curve.rho >= 0.0) & (curve.rho <= 1.0))
            assert np.all(np.diff(curve.kappa) >= 0.0)

    def test_default_grid_starts_at_zero_with_tail(self):
        results = [cell("p0", "A", 1.0), cell("p0", "B", 8.0)]
        curves = profile_curves(performance_ratios(results))
        grid = curves[0].kappa
        assert grid[0] == 0.0
        assert grid[-1] == grid[-2] + 1.0
        assert 3.0 in grid  # log2(8)

    def test_custom_grid_validation(self):
        table = performance_ratios([cell("p0", "A", 1.0)])
        with pytest.raises(ValueError, match="nonempty"):
            profile_curves(table, kappa_grid=[])
        with pytest.raises(ValueError, match="nondecreasing"):
            profile_curves(table, kappa_grid=[0.0, 2.0, 1.0])
        with pytest.raises(ValueError, match="start at or below 0"):
            profile_curves(table, kappa_grid=[0.5, 1.0])


class TestRunSuite:
    def small_problems(self):
        return [generate_problem(n, seed=9, params=GeneratorParams(interp_spacing=10))[0]
                for n in (30, 40)]

    def test_road_suite_end_to_end(self):
        algs = [a for a in builtin_algorithms() if a.name in ("CycIPinf", "CycP")]
        results = run_suite(self.small_problems(), algs, tau_max=30.0,
                            seed=1, backend="numpy", ids=["alpha", "beta"])
        assert len(results) == 4
        assert {r.problem_id for r in results} == {"alpha", "beta"}
        assert all(r.status == "solved" for r in results)
        assert all(r.iterations > 0 for r in results)
        assert all(0.0 <= r.time_ms <= 30_000.0 for r in results)
        assert {r.n for r in results} == {30, 40}
        for curve in profile_curves(performance_ratios(results)):
            assert curve.rho[-1] == 1.0

    def test_random_control_variant_runs(self):
        algs = [a for a in builtin_algorithms() if a.name == "rCycIPinf"]
        results = run_suite(self.small_problems()[:1], algs, tau_max=30.0,
                            seed=3, backend="numpy")
        assert results[0].status == "solved"

    def test_iterations_deterministic_across_runs(self):
        algs = [a for a in builtin_algorithms() if a.name in ("CycIPinf", "rCycIP2")]
        twice = [run_suite(self.small_problems(), algs, tau_max=30.0,
                           seed=5, backend="numpy") for _ in range(2)]
        for a, b in zip(*twice):
            assert (a.iterations, a.status, a.d2, a.dinf) == \
                   (b.iterations, b.status, b.d2, b.dinf)

    def test_tuple_items_and_timeouts(self):
        algs = [a for a in builtin_algorithms() if a.name == "CycIPinf"]
        suite = [oscillating_problem(), self.small_problems()[0]]
        results = run_suite(suite, algs, tau_max=30.0, max_iters=600,
                            seed=0, backend="numpy")
        assert results[0].status == "timeout"
        assert results[1].status == "solved"
        table = performance_ratios(results)
        assert np.isinf(table.ratios[0, 0])
        assert table.ratios[1, 0] == 1.0

    def test_bad_inputs(self):
        with pytest.raises(ValueError, match="tau_max"):
            run_suite(self.small_problems(), tau_max=0.0)
        with pytest.raises(ValueError, match="ids"):
            run_suite(self.small_problems(), ids=["only-one"])
        with pytest.raises(TypeError, match="suite items"):
            run_suite([("not a problem", np.zeros(2))], backend="numpy")


class TestExports:
    def synthetic(self):
        results = [cell("p0", "A", 1.0), cell("p0", "B", 2.0),
                   cell("p1", "A", 4.0), cell("p1", "B", 2.0, status="timeout")]
        curves = profile_curves(performance_ratios(results))
        return results, curves

    def test_files_written_with_meta(self, tmp_path):
        results, curves = self.synthetic()
        paths = export_results(results, curves, tmp_path / "out",
                               meta={"eps": 5e-4, "seed": 0})
        text = paths["results"].read_text()
        assert text.startswith("# eps = 0.0005\n# seed = 0\n")
        assert "problem_id,n,algorithm,status,iterations,time_ms,d2_final,dinf_final" in text
        assert len(text.strip().splitlines()) == 2 + 1 + 4
        prof = paths["profile"].read_text()
        assert prof.splitlines()[2] == "algorithm,kappa,rho"
        gp = paths["plot"].read_text()
        assert "set xlabel 'kappa'" in gp
        assert "with steps title 'A'" in gp

    def test_export_bytes_deterministic(self, tmp_path):
        results, curves = self.synthetic()
        pa = export_results(results, curves, tmp_path / "a", meta={"seed": 7})
        pb = export_results(results, curves, tmp_path / "b", meta={"seed": 7})
        for key in ("results", "profile", "plot"):
            assert pa[key].read_bytes() == pb[key].read_bytes()

    def test_read_results_roundtrip(self, tmp_path):
        results, curves = self.synthetic()
        paths = export_results(results, curves, tmp_path)
        assert read_results(paths["results"]) == results

    def test_roundtrip_preserves_float_bits(self, tmp_path):
        results = [cell("p0", "A", 0.1 + 0.2)]
        paths = export_results(results, profile_curves(performance_ratios(results)),
                               tmp_path)
        back = read_results(paths["results"])
        assert back[0].time_ms == 0.30000000000000004
