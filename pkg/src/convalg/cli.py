"""Command line entry point: ``convalg run <config>`` and ``convalg list``."""

from __future__ import annotations

import json
import sys

import click

from .errors import ConfigError

EXIT_PASS, EXIT_FAIL, EXIT_CONFIG = 0, 1, 2


@click.group()
def main():
    """Numerical checks for weighted convolution algebras."""


@main.command()
@click.argument("config", type=click.Path(dir_okay=False))
@click.option("--grid-h", type=float, default=None, help="Override grid step h.")
@click.option("--grid-T", "grid_T", type=float, default=None, help="Override grid horizon T.")
@click.option("--seed", type=int, default=None, help="Override the sampling seed.")
@click.option("--out", "out_dir", type=click.Path(file_okay=False), default=None,
              help="Write report.json and one CSV per suite here instead of stdout.")
def run(config, grid_h, grid_T, seed, out_dir):
    """Run every suite in CONFIG and report."""
    from .experiments import run_file

    try:
        report = run_file(config, grid_h=grid_h, grid_T=grid_T, seed=seed)
    except ConfigError as exc:
        click.echo(f"config error: {exc}", err=True)
        sys.exit(EXIT_CONFIG)
    if out_dir is None:
        click.echo(report.to_json(), nl=False)
    else:
        report.write(out_dir)
        for s in report.suites:
            click.echo(f"{s['name']}: {s['verdict']} ({'ok' if s['ok'] else 'NOT OK'})")
    sys.exit(EXIT_PASS if report.passed else EXIT_FAIL)


@main.command("list")
def list_builtins():
    """Print weight, family and function kinds and the check catalog."""
    from .experiments import catalog
    from .report import jsonable

    click.echo(json.dumps(jsonable(catalog()), sort_keys=True, indent=2))


if __name__ == "__main__":
    main()
