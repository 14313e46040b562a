"""Command-line interface: exit codes, output format, trace workflow."""

import json

from click.testing import CliRunner

from cubeq.cli import (EXIT_BAD_TRACE, EXIT_CONFIG, EXIT_UNKNOWN_PROBLEM,
                       EXIT_VIOLATIONS, main)


def _run(*args):
    return CliRunner().invoke(main, list(args))


class TestSolve:
    def test_converged_run(self):
        result = _run("solve", "--problem", "circle_quadratic")
        assert result.exit_code == 0
        assert "status=converged_sosp" in result.output
        assert "problem=circle_quadratic" in result.output

    def test_unknown_problem(self):
        result = _run("solve", "--problem", "no_such_model")
        assert result.exit_code == EXIT_UNKNOWN_PROBLEM

    def test_corrections_flag_plumbed(self):
        with_corr = _run("solve", "--problem", "maratos")
        without = _run("solve", "--problem", "maratos", "--no-corrections")
        assert "corrections=3" in with_corr.output
        assert "corrections=0" in without.output

    def test_explicit_start_point(self):
        result = _run("solve", "--problem", "circle_quadratic",
                      "--x0", "0.3,0.9")
        assert result.exit_code == 0

    def test_wrong_start_length(self):
        result = _run("solve", "--problem", "circle_quadratic",
                      "--x0", "1,2,3")
        assert result.exit_code == EXIT_CONFIG

    def test_bad_override_key(self):
        result = _run("solve", "--problem", "circle_quadratic",
                      "--set", "not_a_field=1")
        assert result.exit_code == EXIT_CONFIG

    def test_bad_override_value(self):
        result = _run("solve", "--problem", "circle_quadratic",
                      "--set", "eta1=0.0")
        assert result.exit_code == EXIT_CONFIG

    def test_budget_exhaustion_exit_code(self):
        result = _run("solve", "--problem", "rosenbrock_sphere",
                      "--max-iter", "2")
        assert result.exit_code == 11
        assert "status=max_iterations" in result.output

    def test_live_audit_clean(self):
        result = _run("solve", "--problem", "circle_quadratic", "--audit")
        assert result.exit_code == 0


class TestTraceWorkflow:
    def test_solve_then_audit(self, tmp_path):
        trace = tmp_path / "run.trace"
        solve_result = _run("solve", "--problem", "rosenbrock_sphere",
                            "--trace", str(trace))
        assert solve_result.exit_code == 0
        assert trace.exists()
        audit_result = _run("audit", str(trace))
        assert audit_result.exit_code == 0
        assert "0 violations" in audit_result.output

    def test_audit_missing_file(self, tmp_path):
        result = _run("audit", str(tmp_path / "nope.trace"))
        assert result.exit_code == EXIT_BAD_TRACE

    def test_audit_corrupt_file(self, tmp_path):
        path = tmp_path / "garbage.trace"
        path.write_text("this is not json\n")
        result = _run("audit", str(path))
        assert result.exit_code == EXIT_BAD_TRACE

    def test_audit_flags_tampered_trace(self, tmp_path):
        trace = tmp_path / "run.trace"
        _run("solve", "--problem", "linear_eq_quadratic",
             "--trace", str(trace))
        lines = trace.read_text().splitlines()
        # scale the stored tangential step on the second iteration
        rec = json.loads(lines[2])
        assert rec["kind"] == "iteration" and rec["k"] == 1
        rec["u"] = [1.1 * value for value in rec["u"]]
        rec["norm_u"] = 1.1 * rec["norm_u"]
        lines[2] = json.dumps(rec)
        trace.write_text("\n".join(lines) + "\n")
        result = _run("audit", str(trace))
        assert result.exit_code == EXIT_VIOLATIONS
        assert "or2_model_gradient" in result.output


class TestSweep:
    def test_csv_and_slope(self):
        result = _run("sweep", "--problem", "rosenbrock_sphere",
                      "--sweep", "1e-2,1e-4")
        assert result.exit_code == 0
        lines = result.output.splitlines()
        assert lines[0] == "eps,successful,total,max_sigma,final_mu,status"
        assert len([l for l in lines if l.startswith("0.01")]) == 1
        assert lines[-1].startswith("slope=")
        assert "undefined" not in lines[-1]

    def test_single_value_has_no_slope(self):
        result = _run("sweep", "--problem", "circle_quadratic",
                      "--sweep", "1e-4")
        assert result.exit_code == 0
        assert result.output.splitlines()[-1] == "slope=undefined"

    def test_unknown_problem(self):
        result = _run("sweep", "--problem", "no_such_model",
                      "--sweep", "1e-2")
        assert result.exit_code == EXIT_UNKNOWN_PROBLEM

    def test_unparsable_sweep_list(self):
        result = _run("sweep", "--problem", "circle_quadratic",
                      "--sweep", "1e-2,banana")
        assert result.exit_code == EXIT_CONFIG
