"""Command-line front end: solve, sweep, audit.

Exit codes are stable so scripts can dispatch on them:

    0   converged to a second-order point (or audit found nothing)
    10  first-order point only (budget exhausted)
    11  budget exhausted, not stationary
    12  constraint Jacobian lost rank
    13  numerical failure inside the solver
    14  unknown catalog problem
    15  bad configuration or arguments
    16  audit reported violations
    17  trace file unreadable or malformed
"""

from __future__ import annotations

import dataclasses
import sys

import click
import numpy as np

from . import diagnostics, trace_io
from .driver import (CONVERGED_FOSP, CONVERGED_SOSP, LICQ_FAILURE,
                     MAX_ITERATIONS, NUMERICAL_ERROR, SolverConfig, solve)
from .errors import ConfigError, TraceError, UnknownProblem
from .problems import builtin_problem

EXIT_BY_STATUS = {
    CONVERGED_SOSP: 0,
    CONVERGED_FOSP: 10,
    MAX_ITERATIONS: 11,
    LICQ_FAILURE: 12,
    NUMERICAL_ERROR: 13,
}
EXIT_UNKNOWN_PROBLEM = 14
EXIT_CONFIG = 15
EXIT_VIOLATIONS = 16
EXIT_BAD_TRACE = 17


def _fail(message: str, code: int):
    click.echo(f"error: {message}", err=True)
    sys.exit(code)


def _build_config(eps, eps_g, eps_c, eps_h, max_iter, no_corrections,
                  audit_flag, overrides) -> SolverConfig:
    config = SolverConfig()
    if eps is not None:
        config.eps_g = config.eps_c = config.eps_h = eps
    if eps_g is not None:
        config.eps_g = eps_g
    if eps_c is not None:
        config.eps_c = eps_c
    if eps_h is not None:
        config.eps_h = eps_h
    if max_iter is not None:
        config.max_iter = max_iter
    config.corrections_enabled = not no_corrections
    config.audit = audit_flag

    names = {f.name for f in dataclasses.fields(SolverConfig)}
    for item in overrides:
        key, sep, raw = item.partition("=")
        if not sep:
            raise ConfigError(f"--set expects KEY=VALUE, got {item!r}")
        if key not in names:
            raise ConfigError(f"unknown config key {key!r}")
        current = getattr(config, key)
        try:
            if isinstance(current, bool):
                lowered = raw.lower()
                if lowered in ("1", "true", "yes", "on"):
                    value = True
                elif lowered in ("0", "false", "no", "off"):
                    value = False
                else:
                    raise ValueError(raw)
            elif isinstance(current, int):
                value = int(raw)
            else:
                value = float(raw)
        except ValueError:
            raise ConfigError(f"cannot parse {raw!r} for config key {key!r}") from None
        setattr(config, key, value)
    return config.validate()


def _parse_x0(text, problem):
    if text is None:
        return None
    try:
        values = [float(tok) for tok in text.split(",") if tok.strip()]
    except ValueError:
        raise ConfigError(f"--x0 expects a comma-separated float list, got {text!r}") from None
    if len(values) != problem.n:
        raise ConfigError(f"--x0 has {len(values)} entries, {problem.name} needs {problem.n}")
    return np.array(values)


def _solver_options(fn):
    options = [
        click.option("--x0", default=None, metavar="V1,V2,...",
                     help="Start point (default: the problem's)."),
        click.option("--eps", type=float, default=None,
                     help="Set all three termination tolerances at once."),
        click.option("--eps-g", type=float, default=None,
                     help="Lagrangian-gradient tolerance."),
        click.option("--eps-c", type=float, default=None,
                     help="Infeasibility tolerance."),
        click.option("--eps-h", type=float, default=None,
                     help="Reduced-curvature tolerance."),
        click.option("--max-iter", type=int, default=None,
                     help="Iteration budget."),
        click.option("--no-corrections", is_flag=True,
                     help="Disable second-order correction steps."),
        click.option("--audit", "audit_flag", is_flag=True,
                     help="Check every iteration against the full invariant suite."),
        click.option("--set", "overrides", multiple=True, metavar="KEY=VALUE",
                     help="Override any config field (repeatable)."),
    ]
    for option in reversed(options):
        fn = option(fn)
    return fn


def _echo_violations(violations):
    for v in violations:
        click.echo(f"violation k={v.k} {v.code}: value={v.value:.9g} "
                   f"bound={v.bound:.9g} ({v.message})")


def _summary_line(problem_name, result):
    report = result.final_report
    grad = f"{report.grad_lagrangian_norm:.3e}" if report else "nan"
    c_l1 = f"{report.c_l1:.3e}" if report else "nan"
    lam_min = f"{report.lambda_min_red:.3e}" if report else "nan"
    return (f"problem={problem_name} status={result.status} "
            f"iterations={result.iterations} accepted={result.counts.accepted} "
            f"corrections={result.counts.corrections} "
            f"grad_lagrangian={grad} c_l1={c_l1} lambda_min={lam_min}")


@click.group()
def main():
    """Equality-constrained solver with adaptive cubic regularization."""


@main.command("solve")
@click.option("--problem", "problem_name", required=True,
              help="Catalog problem name.")
@_solver_options
@click.option("--trace", "trace_path", default=None,
              type=click.Path(dir_okay=False),
              help="Write a line-delimited JSON trace of the run.")
def cmd_solve(problem_name, x0, eps, eps_g, eps_c, eps_h, max_iter,
              no_corrections, audit_flag, overrides, trace_path):
    """Run the solver on one catalog problem."""
    try:
        problem = builtin_problem(problem_name)
        config = _build_config(eps, eps_g, eps_c, eps_h, max_iter,
                               no_corrections, audit_flag, overrides)
        start = _parse_x0(x0, problem)
    except UnknownProblem as exc:
        _fail(str(exc), EXIT_UNKNOWN_PROBLEM)
    except ConfigError as exc:
        _fail(str(exc), EXIT_CONFIG)

    result = solve(problem, start, config)
    if trace_path is not None:
        x_start = problem.default_start if start is None else start
        trace_io.write_trace(trace_path, problem.name, x_start, config, result)
    click.echo(_summary_line(problem.name, result))
    _echo_violations(result.violations)
    if result.message:
        click.echo(result.message)
    code = EXIT_BY_STATUS[result.status]
    if result.violations:
        code = EXIT_VIOLATIONS
    sys.exit(code)


@main.command("sweep")
@click.option("--problem", "problem_name", required=True,
              help="Catalog problem name.")
@click.option("--sweep", "sweep_values", required=True, metavar="V1,V2,...",
              help="Tolerance values; each run sets eps-g = eps-c = eps-h.")
@_solver_options
def cmd_sweep(problem_name, sweep_values, x0, eps, eps_g, eps_c, eps_h,
              max_iter, no_corrections, audit_flag, overrides):
    """Solve one problem at several tolerances; print a CSV table and the
    fitted log-log slope of accepted-iteration count against 1/eps."""
    try:
        problem = builtin_problem(problem_name)
        base = _build_config(eps, eps_g, eps_c, eps_h, max_iter,
                             no_corrections, audit_flag, overrides)
        start = _parse_x0(x0, problem)
        values = [float(tok) for tok in sweep_values.split(",") if tok.strip()]
        if not values:
            raise ConfigError("--sweep needs at least one tolerance value")
    except UnknownProblem as exc:
        _fail(str(exc), EXIT_UNKNOWN_PROBLEM)
    except (ConfigError, ValueError) as exc:
        _fail(str(exc), EXIT_CONFIG)

    worst = 0
    rows = []
    all_violations = []
    for eps_value in values:
        config = dataclasses.replace(base, eps_g=eps_value, eps_c=eps_value,
                                     eps_h=eps_value)
        result = solve(problem, start, config)
        max_sigma = max((r.sigma for r in result.history), default=config.sigma0)
        final_mu = result.history[-1].mu if result.history else config.mu_init
        rows.append((eps_value, result.counts.accepted, result.iterations,
                     max_sigma, final_mu, result.status))
        all_violations.extend(result.violations)
        worst = max(worst, EXIT_BY_STATUS[result.status])

    click.echo("eps,successful,total,max_sigma,final_mu,status")
    for eps_value, succ, total, max_sigma, final_mu, status in rows:
        click.echo("%.17g,%d,%d,%.17g,%.17g,%s"
                   % (eps_value, succ, total, max_sigma, final_mu, status))

    fit = [(e, k) for e, k, *_ in rows if k >= 1]
    if len({e for e, _ in fit}) >= 2:
        log_inv_eps = np.log([1.0 / e for e, _ in fit])
        log_k = np.log([float(k) for _, k in fit])
        slope = float(np.polyfit(log_inv_eps, log_k, 1)[0])
        click.echo(f"slope={slope:.6g}")
    else:
        click.echo("slope=undefined")

    _echo_violations(all_violations)
    if all_violations:
        worst = max(worst, EXIT_VIOLATIONS)
    sys.exit(worst)


@main.command("audit")
@click.argument("trace_path", type=click.Path(dir_okay=False))
def cmd_audit(trace_path):
    """Replay the invariant audit over a previously written trace file."""
    try:
        data = trace_io.read_trace(trace_path)
    except (OSError, TraceError) as exc:
        _fail(str(exc), EXIT_BAD_TRACE)
    try:
        problem = builtin_problem(data.problem_name)
        config = data.config.validate()
    except UnknownProblem as exc:
        _fail(str(exc), EXIT_UNKNOWN_PROBLEM)
    except ConfigError as exc:
        _fail(str(exc), EXIT_CONFIG)

    violations = diagnostics.audit_run(problem, data.records, config)
    _echo_violations(violations)
    click.echo(f"audited {len(data.records)} iterations: "
               f"{len(violations)} violations")
    sys.exit(0 if not violations else EXIT_VIOLATIONS)


if __name__ == "__main__":
    main()
