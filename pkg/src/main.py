"""Command-line entry point: one subcommand per simulation or analysis product."""

import functools
import logging
import sys
from typing import Dict, List, Optional, Sequence

import click
import numpy as np
from pydantic import ValidationError

from src.analysis import (
    bistability_probe,
    branch_disagreement,
    convergence_check,
    error_analysis_row,
    hysteresis_sweep,
    lyapunov_max,
    parameter_sensitivity,
    regime_onsets,
)
from src.config import RunConfig, ToolkitSettings, get_settings, load_run_config
from src.dynamics import integrate
from src.equilibria import search_fixed_points
from src.exceptions import (
    ConfigError,
    DivergenceError,
    InvalidInputError,
    NotAFixedPointError,
    OptomechError,
    OutputError,
    SingularDenominatorError,
)
from src.logger import setup_logging
from src.models import SweepDirection, SweepTask
from src.pipeline import (
    CHECKS,
    OutputManager,
    attractor_map,
    basin_map,
    run_reference_checks,
    stability_map,
    steady_state_map,
    vanishing_threshold,
)

logger = logging.getLogger(__name__)

EXIT_CODES = {
    ConfigError: 2,
    InvalidInputError: 2,
    NotAFixedPointError: 2,
    DivergenceError: 3,
    SingularDenominatorError: 3,
    OutputError: 4,
}

# (jm, delta) rows of the linear-vs-numerical comparison table
ERROR_TABLE_POINTS = ((0.02, -2.0), (0.05, -1.5), (0.07, -1.0), (0.08, 0.0), (0.10, 1.0))

OVERRIDE_SETTINGS = dict(ignore_unknown_options=True, allow_extra_args=True)


def exit_code_for(error: Exception) -> int:
    for cls in type(error).__mro__:
        if cls in EXIT_CODES:
            return EXIT_CODES[cls]
    return 1


def error_line(error: Exception) -> str:
    """Single machine-parsable diagnostic line."""
    kind = getattr(error, "kind", "internal")
    message = " ".join(str(error).split()).replace('"', '\\"')
    line = getattr(error, "line", None)
    if isinstance(error, ConfigError):
        message = " ".join(error.detail.split()).replace('"', '\\"')
    location = f" line={line}" if line is not None else ""
    return f'error kind={kind}{location} message="{message}"'


def parse_overrides(args: Sequence[str]) -> Dict[str, str]:
    """Collect ``--section.key value`` and ``--section.key=value`` pairs left over by click."""
    overrides: Dict[str, str] = {}
    args = list(args)
    while args:
        token = args.pop(0)
        if not token.startswith("--") or "." not in token:
            raise ConfigError("syntax", f"unexpected argument '{token}'; overrides look like --section.key value")
        name = token[2:]
        if "=" in name:
            name, value = name.split("=", 1)
        elif args:
            value = args.pop(0)
        else:
            raise ConfigError("syntax", f"missing value for --{name}")
        overrides[name] = value
    return overrides


def handle_errors(func):
    """Turn toolkit errors into a one-line stderr diagnostic and the matching exit code."""
    @functools.wraps(func)
    def wrapper(*args, **kwargs):
        try:
            return func(*args, **kwargs)
        except ValidationError as e:
            error = InvalidInputError(str(e.errors()[0]["msg"]))
        except OptomechError as e:
            error = e
        except Exception as e:
            logger.debug("Unexpected failure", exc_info=True)
            error = e
        logger.error(f"Command failed: {error}")
        click.echo(error_line(error), err=True)
        sys.exit(exit_code_for(error))
    return wrapper


def run_options(func):
    """Options shared by every computing subcommand."""
    func = click.option("--convention", type=click.Choice(["paper", "rederived"]), default=None,
                        help="Sign convention of the equations of motion")(func)
    func = click.option("--workers", type=int, default=None, help="Worker processes for grid sweeps")(func)
    func = click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
                        help="INI-style run configuration")(func)
    return func


class RunContext:
    """Resolved configuration, settings and output manager of one invocation."""

    def __init__(self, ctx: click.Context, config_path: Optional[str], workers: Optional[int],
                 convention: Optional[str]):
        self.settings: ToolkitSettings = ctx.obj
        overrides = parse_overrides(ctx.args)
        if convention is not None:
            overrides["system.convention"] = convention
        self.config: RunConfig = load_run_config(config_path, overrides)
        self.workers = next(w for w in (workers, self.config.sweep.workers, self.settings.workers) if w is not None)
        if self.workers < 1:
            raise InvalidInputError(f"workers must be at least 1, got {self.workers}")
        self.output = OutputManager(self.settings, plot_script=self.config.output.plot_script)

    @property
    def path(self):
        return self.config.output.path

    @property
    def ic(self) -> np.ndarray:
        return np.array(self.config.sweep.ic, dtype=np.float64)


@click.group()
@click.option("--verbose", is_flag=True, help="Log at DEBUG level")
@click.pass_context
def cli(ctx, verbose):
    """Optomechanical dynamics toolkit."""
    settings = get_settings()
    setup_logging(str(settings.logs_dir), logging.DEBUG if verbose else getattr(logging, settings.log_level))
    ctx.obj = settings


# ===== Single-Run Commands =====

@cli.command(context_settings=OVERRIDE_SETTINGS)
@run_options
@click.pass_context
@handle_errors
def simulate(ctx, config_path, workers, convention):
    """Integrate one trajectory and write it as CSV."""
    run = RunContext(ctx, config_path, workers, convention)
    traj = integrate(run.ic, run.config.system, run.config.integration)
    path = run.output.save_trajectory(traj, run.path)
    if traj.terminated_early:
        raise DivergenceError(f"trajectory diverged at t={traj.divergence_time:.6g}; partial data in {path}",
                              traj.divergence_time)
    click.echo(f"wrote {len(traj.times)} samples to {path}")


@cli.command("fixed-points", context_settings=OVERRIDE_SETTINGS)
@run_options
@click.pass_context
@handle_errors
def fixed_points(ctx, config_path, workers, convention):
    """List fixed points with their stability."""
    run = RunContext(ctx, config_path, workers, convention)
    search = search_fixed_points(run.config.system)
    if search.all_seeds_diverged:
        logger.warning("Every Newton seed diverged; the fixed-point list may be incomplete")
    path = run.output.save_fixed_points(search.points, run.path)
    stable = sum(fp.stable for fp in search.points)
    click.echo(f"{len(search.points)} fixed point(s), {stable} stable; wrote {path}")


@cli.command(context_settings=OVERRIDE_SETTINGS)
@run_options
@click.pass_context
@handle_errors
def lyapunov(ctx, config_path, workers, convention):
    """Largest Lyapunov exponent of one run."""
    run = RunContext(ctx, config_path, workers, convention)
    sweep = run.config.sweep
    result = lyapunov_max(run.ic, run.config.system, run.config.integration,
                          sweep.renorm_interval, sweep.lyapunov_method)
    if result.diverged:
        raise DivergenceError("trajectory diverged before the Lyapunov estimate completed")
    path = run.output.save_lyapunov(result, run.path)
    click.echo(f"lambda_max={result.lambda_max:.6g} +/- {result.stderr:.2g} "
               f"(converged={result.converged}); wrote {path}")


@cli.command(context_settings=OVERRIDE_SETTINGS)
@run_options
@click.pass_context
@handle_errors
def bistability(ctx, config_path, workers, convention):
    """Compare the attractors reached from sweep.ic and sweep.ic_b."""
    run = RunContext(ctx, config_path, workers, convention)
    sweep = run.config.sweep
    if sweep.ic_b is None:
        raise InvalidInputError("bistability needs a second initial condition (sweep.ic_b)")
    report = bistability_probe(run.config.system, run.ic, sweep.ic_b, run.config.integration,
                               with_lyapunov=sweep.compute_lyapunov, renorm_interval=sweep.renorm_interval)
    path = run.output.save_bistability(report, run.path)
    click.echo(f"{report.class_a.value} vs {report.class_b.value}, same_attractor={report.same_attractor}; wrote {path}")


@cli.command(context_settings=OVERRIDE_SETTINGS)
@run_options
@click.pass_context
@handle_errors
def convergence(ctx, config_path, workers, convention):
    """Step-halving check of post-transient observables."""
    run = RunContext(ctx, config_path, workers, convention)
    report = convergence_check(run.ic, run.config.system, run.config.integration)
    path = run.output.save_convergence(report, run.path)
    click.echo(f"max relative deviation {100 * report.max_deviation:.4f}% at dt={report.dt:g}; wrote {path}")


@cli.command(context_settings=OVERRIDE_SETTINGS)
@run_options
@click.option("--names", default="jm,delta,alpha_in", help="Comma-separated parameters to perturb")
@click.option("--rel-step", type=float, default=0.01, help="Relative perturbation")
@click.pass_context
@handle_errors
def sensitivity(ctx, config_path, workers, convention, names, rel_step):
    """Change of lambda_max under small parameter perturbations."""
    run = RunContext(ctx, config_path, workers, convention)
    entries = parameter_sensitivity(run.ic, run.config.system, run.config.integration,
                                    [n.strip() for n in names.split(",") if n.strip()],
                                    rel_step, run.config.sweep.renorm_interval)
    path = run.output.save_sensitivity(entries, run.path)
    click.echo(f"{len(entries)} parameter(s) perturbed; wrote {path}")


@cli.command("error-table", context_settings=OVERRIDE_SETTINGS)
@run_options
@click.option("--point", "points", multiple=True, help="jm,delta pair; repeatable")
@click.pass_context
@handle_errors
def error_table(ctx, config_path, workers, convention, points):
    """Linear stability against simulation at a list of (jm, delta) points."""
    run = RunContext(ctx, config_path, workers, convention)
    pairs = [_pair(p) for p in points] if points else list(ERROR_TABLE_POINTS)
    rows = []
    for jm, delta in pairs:
        try:
            params = run.config.system.with_updates(jm=jm, delta=delta)
            rows.append(error_analysis_row(params, run.config.integration, run.config.sweep.renorm_interval))
        except OptomechError as e:
            logger.error(f"Error-table row jm={jm}, delta={delta} failed: {e}")
            continue
    path = run.output.save_error_table(rows, run.path)
    click.echo(f"{len(rows)} of {len(pairs)} row(s) computed; wrote {path}")


def _pair(text: str):
    try:
        jm, delta = (float(part) for part in text.split(","))
    except ValueError:
        raise ConfigError("malformed_number", f"--point expects 'jm,delta', got '{text}'")
    return jm, delta


# ===== Sweep Commands =====

def _map_command(ctx, config_path, workers, convention, task: SweepTask, engine):
    run = RunContext(ctx, config_path, workers, convention)
    grid = run.config.grid(task)
    records = engine(grid, run.workers, run.settings.progress)
    path = run.output.save_map(records, task, run.path)
    failed = sum(r.error is not None for r in records)
    click.echo(f"{len(records)} grid point(s), {failed} failed; wrote {path}")


@cli.command("steady-map", context_settings=OVERRIDE_SETTINGS)
@run_options
@click.pass_context
@handle_errors
def steady_map(ctx, config_path, workers, convention):
    """Number of fixed points over a two-parameter grid."""
    _map_command(ctx, config_path, workers, convention, SweepTask.COUNT, steady_state_map)


@cli.command("stability-map", context_settings=OVERRIDE_SETTINGS)
@run_options
@click.pass_context
@handle_errors
def stability_map_cmd(ctx, config_path, workers, convention):
    """Stability of the two lowest fixed points over a two-parameter grid."""
    _map_command(ctx, config_path, workers, convention, SweepTask.STABILITY, stability_map)


@cli.command("attractor-map", context_settings=OVERRIDE_SETTINGS)
@run_options
@click.pass_context
@handle_errors
def attractor_map_cmd(ctx, config_path, workers, convention):
    """Attractor class and lambda_max over a two-parameter grid."""
    _map_command(ctx, config_path, workers, convention, SweepTask.ATTRACTOR, attractor_map)


@cli.command(context_settings=OVERRIDE_SETTINGS)
@run_options
@click.pass_context
@handle_errors
def basin(ctx, config_path, workers, convention):
    """Basins of attraction over two initial-condition components."""
    _map_command(ctx, config_path, workers, convention, SweepTask.BASIN, basin_map)


@cli.command(context_settings=OVERRIDE_SETTINGS)
@run_options
@click.pass_context
@handle_errors
def bifurcation(ctx, config_path, workers, convention):
    """Adiabatic sweep of one parameter; peaks per value and direction."""
    run = RunContext(ctx, config_path, workers, convention)
    sweep = run.config.sweep
    directions = [SweepDirection.UP, SweepDirection.DOWN] if sweep.direction == "both" else [SweepDirection(sweep.direction)]
    branches: Dict[SweepDirection, List] = {}
    for direction in directions:
        branches[direction] = hysteresis_sweep(
            run.config.system, sweep.sweep_param, (sweep.sweep_min, sweep.sweep_max), sweep.n_points,
            direction, run.config.integration, ic=run.ic, variables=sweep.variable_list,
            compute_lyapunov=sweep.compute_lyapunov, renorm_interval=sweep.renorm_interval,
        )
        onsets = regime_onsets(branches[direction])
        logger.info(f"Regime onsets ({direction.value}): " + ", ".join(f"{k.value}={v:.6g}" for k, v in onsets.items()))

    points = [p for direction in directions for p in branches[direction]]
    path = run.output.save_peaks(points, run.path)
    if len(directions) == 2:
        disagree = branch_disagreement(branches[SweepDirection.UP], branches[SweepDirection.DOWN],
                                       sweep.variable_list[0])
        click.echo(f"branches disagree at {len(disagree)} value(s)"
                   + (f" in [{min(disagree):.6g}, {max(disagree):.6g}]" if disagree else ""))
    click.echo(f"{len(points)} sweep point(s); wrote {path}")


@cli.command(context_settings=OVERRIDE_SETTINGS)
@run_options
@click.pass_context
@handle_errors
def threshold(ctx, config_path, workers, convention):
    """Drive amplitude at which the two-fixed-point region vanishes."""
    run = RunContext(ctx, config_path, workers, convention)
    sweep = run.config.sweep
    grid = run.config.grid(SweepTask.COUNT)
    value = vanishing_threshold(grid, sweep.threshold_lo, sweep.threshold_hi, sweep.threshold_tol, run.workers)
    path = run.output.save_threshold(sweep.threshold_lo, sweep.threshold_hi, sweep.threshold_tol, value, run.path)
    click.echo(f"threshold={value if value is not None else 'none'}; wrote {path}")


@cli.command(context_settings=OVERRIDE_SETTINGS)
@run_options
@click.option("--check", "checks", multiple=True, type=click.Choice(list(CHECKS)),
              help="Reference check to run; repeatable, all by default")
@click.pass_context
@handle_errors
def reference(ctx, config_path, workers, convention, checks):
    """Run the published operating points and report which behaviours reproduce."""
    run = RunContext(ctx, config_path, workers, convention)
    conventions = [run.config.system.convention] if convention else ["paper", "rederived"]
    results = run_reference_checks(checks, conventions, run.config.integration, run.workers)
    path = run.output.save_reference(results, run.path)
    reproduced = sum(c.reproduced for c in results)
    click.echo(f"{reproduced} of {len(results)} check(s) reproduced; wrote {path}")


@cli.command(context_settings=OVERRIDE_SETTINGS)
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None,
              help="INI-style run configuration")
@click.pass_context
@handle_errors
def info(ctx, config_path):
    """Print the resolved run configuration and settings as JSON."""
    config = load_run_config(config_path, parse_overrides(ctx.args))
    click.echo(config.model_dump_json(indent=2))
    click.echo(ctx.obj.model_dump_json(indent=2))


if __name__ == "__main__":
    cli()
