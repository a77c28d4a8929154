"""
Copyright (c) torsionfield authors 2026. All Rights Reserved.
Project name: torsionfield
This project is licensed under the MIT License, see LICENSE

Command line interface: ``torsionfield <subcommand> --config <path> [--key value ...]``
"""
import logging
import os

import click

from ._version import __version__
from .config import ConfigError, ExperimentConfig, parse_overrides
from .harness import SUBCOMMANDS, run_experiment
from .verification import run_verify


log = logging.getLogger(__name__)

LOG_FORMAT = "%(asctime)s [%(levelname)s] [%(name)s(%(filename)s:%(lineno)d)] - %(message)s"
OVERRIDE_SETTINGS = {"ignore_unknown_options": True, "allow_extra_args": True}

def load_config(configFileName, extraArgs):
    """
    Resolve the configuration for a subcommand

    :raises click.UsageError: for configuration errors, which exit with 2
    """
    try:
        return ExperimentConfig.from_file(configFileName, parse_overrides(extraArgs))
    except ConfigError as error:
        raise click.UsageError(str(error))

def _execute(ctx, subcommand, mode, configFileName):
    config = load_config(configFileName, ctx.args)
    try:
        run = run_experiment(subcommand, config, mode)
    except ArithmeticError as error:
        log.error("%s failed: %s", subcommand, error)
        click.echo("error: {0}".format(error), err=True)
        ctx.exit(1)
    except ValueError as error:
        raise click.UsageError(str(error))
    for path in run.files:
        click.echo(path)
    if "holonomy" in run.payload:
        click.echo("holonomy angle: {0!r}".format(run.payload["holonomy"].angle))

def config_option(function):
    return click.option("--config", "configFileName", type=click.Path(dir_okay=False), default=None,
                        help="JSON configuration file")(function)

@click.group()
@click.option("--verbose", is_flag=True, default=False, help="log at debug level")
@click.version_option(__version__, prog_name="torsionfield")
def main(verbose):
    """
    Stochastic Riemannian geometry experiments and identity checks

    Configuration values can be overridden with ``--key value`` after the
    subcommand, using dotted paths (``--field_spec.c 0``) or short aliases
    (``--c 0``).
    """
    logging.basicConfig(format=LOG_FORMAT, level=logging.DEBUG if verbose else logging.INFO)

@main.command("sample-field", context_settings=OVERRIDE_SETTINGS)
@config_option
@click.pass_context
def sample_field(ctx, configFileName):
    """
    Draw a field realization and export its coefficients
    """
    _execute(ctx, "sample-field", None, configFileName)

@main.command(context_settings=OVERRIDE_SETTINGS)
@click.argument("mode", type=click.Choice(SUBCOMMANDS["geodesic"]))
@config_option
@click.pass_context
def geodesic(ctx, mode, configFileName):
    """
    Integrate a standard, expected or realized geodesic
    """
    _execute(ctx, "geodesic", mode, configFileName)

@main.command(context_settings=OVERRIDE_SETTINGS)
@click.argument("mode", type=click.Choice(SUBCOMMANDS["transport"]))
@config_option
@click.pass_context
def transport(ctx, mode, configFileName):
    """
    Parallel transport in the expected, realized or Brownian regime
    """
    _execute(ctx, "transport", mode, configFileName)

@main.command(context_settings=OVERRIDE_SETTINGS)
@config_option
@click.pass_context
def curvature(ctx, configFileName):
    """
    Stochastic curvature quantities at the probe point
    """
    _execute(ctx, "curvature", None, configFileName)

@main.command("gauss-bonnet", context_settings=OVERRIDE_SETTINGS)
@config_option
@click.pass_context
def gauss_bonnet(ctx, configFileName):
    """
    Gauss-Bonnet integral and its deviation under noise
    """
    _execute(ctx, "gauss-bonnet", None, configFileName)

@main.command(context_settings=OVERRIDE_SETTINGS)
@config_option
@click.pass_context
def laplacian(ctx, configFileName):
    """
    Stochastic Laplace-Beltrami operator at the probe points
    """
    _execute(ctx, "laplacian", None, configFileName)

@main.command("divergence-theorem", context_settings=OVERRIDE_SETTINGS)
@config_option
@click.pass_context
def divergence_theorem(ctx, configFileName):
    """
    Both sides of the stochastic divergence theorem on a band
    """
    _execute(ctx, "divergence-theorem", None, configFileName)

@main.command(context_settings=OVERRIDE_SETTINGS)
@config_option
@click.pass_context
def verify(ctx, configFileName):
    """
    Run every identity check and write verify.json and verify.txt
    """
    config = load_config(configFileName, ctx.args)
    try:
        report = run_verify(config)
    except ArithmeticError as error:
        log.error("verification failed: %s", error)
        click.echo("error: {0}".format(error), err=True)
        ctx.exit(1)
    paths = report.write(config.outputDirectory, config.hash, config.seed)
    click.echo(report.to_text(), nl=False)
    click.echo(os.linesep.join(paths))
    if not report.passed:
        ctx.exit(1)

if __name__ == "__main__":
    main()
