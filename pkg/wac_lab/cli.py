"""Command-line entry point for wac-lab experiments."""

import logging
import sys
from pathlib import Path
from typing import Any, Callable, Optional

import click

from .config import LOG_LEVELS, SUITES, ExperimentConfig, load_config
from .exceptions import ConfigurationException, ReportIOException, WacLabException
from .experiment import generate_instances, run_experiment
from .generators import REFERENCE_PAIRS
from .reports import save_matrix, summarize_report

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_CONFIG = 2
EXIT_IO = 3


def _load(
    config_path: Optional[str],
    seed: Optional[int],
    out: Optional[str],
    tol: Optional[float],
    suite: Optional[str] = None,
) -> ExperimentConfig:
    config = load_config(config_path) if config_path else ExperimentConfig()
    ctx = click.get_current_context(silent=True)
    explicit = ctx is not None and (ctx.find_object(dict) or {}).get("log_level")
    if not explicit:
        logging.getLogger().setLevel(config.run.log_level)
    return config.with_overrides(
        seed=seed, out=out, tol=tol, suite=(suite,) if suite is not None else None
    )


def _fail(error: WacLabException) -> None:
    click.echo(f"Error: {error}", err=True)
    if isinstance(error, ReportIOException):
        sys.exit(EXIT_IO)
    if isinstance(error, ConfigurationException):
        sys.exit(EXIT_CONFIG)
    sys.exit(EXIT_FAILED)


def experiment_options(command: Callable[..., Any]) -> Callable[..., Any]:
    """Options shared by every command that reads a configuration."""
    options = [
        click.option(
            "--config",
            "config_path",
            type=click.Path(dir_okay=False),
            default=None,
            help="Experiment configuration file (INI sections)",
        ),
        click.option("--seed", type=click.IntRange(0, 2**64 - 1), default=None, help="Base seed"),
        click.option("--out", type=click.Path(file_okay=False), default=None, help="Output dir"),
        click.option("--tol", type=float, default=None, help="Relative residual tolerance"),
    ]
    for option in reversed(options):
        command = option(command)
    return command


@click.group()
@click.option(
    "--log-level",
    type=click.Choice(LOG_LEVELS, case_sensitive=False),
    default=None,
    help="Logging level; overrides [run] log_level (default WARNING)",
)
@click.pass_context
def main(ctx: click.Context, log_level: Optional[str]):
    """Numerical laboratory for weakly anticommuting operator pairs."""
    ctx.obj = {"log_level": log_level}
    logging.basicConfig(
        level=(log_level or "WARNING").upper(),
        format="%(asctime)s %(levelname)s %(name)s: %(message)s",
    )


def _run_suites(
    config_path: Optional[str],
    seed: Optional[int],
    out: Optional[str],
    tol: Optional[float],
    suite: Optional[str],
) -> None:
    try:
        config = _load(config_path, seed, out, tol, suite)
        report = run_experiment(config)
    except WacLabException as e:
        _fail(e)
        return
    click.echo(str(report))
    click.echo(f"Report written to {Path(config.run.out) / 'report.json'}")
    sys.exit(EXIT_OK if report.passed else EXIT_FAILED)


@main.command()
@experiment_options
def run(config_path: Optional[str], seed: Optional[int], out: Optional[str], tol: Optional[float]):
    """Run every suite listed in the configuration."""
    _run_suites(config_path, seed, out, tol, None)


def _suite_command(name: str) -> None:
    @experiment_options
    def command(
        config_path: Optional[str], seed: Optional[int], out: Optional[str], tol: Optional[float]
    ):
        _run_suites(config_path, seed, out, tol, name)

    command.__doc__ = f"Run the {name} suite."
    main.command(name=name)(command)


for _name in SUITES:
    _suite_command(_name)


@main.command()
@experiment_options
@click.option(
    "--reference",
    type=click.Choice(sorted(REFERENCE_PAIRS)),
    default=None,
    help="Write a named reference pair instead of generated instances",
)
def generate(
    config_path: Optional[str],
    seed: Optional[int],
    out: Optional[str],
    tol: Optional[float],
    reference: Optional[str],
):
    """Write instance pairs as matrix JSON files."""
    try:
        config = _load(config_path, seed, out, tol)
        if reference is not None:
            pairs = [(config.run.seed, REFERENCE_PAIRS[reference]())]
        else:
            pairs = generate_instances(config)
        target = Path(config.run.out)
        for index, (instance_seed, (S, T)) in enumerate(pairs):
            save_matrix(target / f"instance_{index}_S.json", S)
            save_matrix(target / f"instance_{index}_T.json", T)
            click.echo(f"instance {index}: seed={instance_seed} dim={S.dim}")
    except WacLabException as e:
        _fail(e)
        return
    sys.exit(EXIT_OK)


@main.command()
@click.argument("directory", type=click.Path(file_okay=False))
def report(directory: str):
    """Summarize an existing report directory."""
    try:
        lines = summarize_report(directory)
    except WacLabException as e:
        _fail(e)
        return
    for line in lines:
        click.echo(line)


if __name__ == "__main__":
    main()
