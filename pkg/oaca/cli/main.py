# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: 2026 OACA Toolkit Contributors
"""oaca CLI entrypoint."""

from __future__ import annotations

import sys
from typing import Sequence

import click

from oaca.cli.context import CliState
from oaca.cli.ingest import ingest_command
from oaca.cli.match import match_command
from oaca.cli.oaca import oaca_command
from oaca.cli.rake import rake_command
from oaca.cli.report import report_command
from oaca.cli.run_all import run_all_command
from oaca.cli.simulate import simulate_command
from oaca.cli.stratify import stratify_command
from oaca.core.errors import NonConvergenceError, OacaError
from oaca.logs import configure_logging

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_DATA = 2
EXIT_NONCONVERGENCE = 3


@click.group()
@click.option("--config", "config_path", type=click.Path(dir_okay=False), default=None, help="Pipeline config (YAML/JSON).")
@click.option("--seed", type=click.IntRange(min=0), default=None, help="Override the simulation seed.")
@click.option("--threads", type=click.IntRange(min=1), default=None, help="Worker threads; outputs do not depend on it.")
@click.option("--quiet", is_flag=True, help="Only log warnings and errors.")
@click.option("--log-format", type=click.Choice(["console", "json"]), default=None, help="Log renderer.")
@click.pass_context
def cli(
    ctx: click.Context,
    config_path: str | None,
    seed: int | None,
    threads: int | None,
    quiet: bool,
    log_format: str | None,
) -> None:
    """Open access citation advantage against raked non-OA control groups."""
    state = CliState(config_path=config_path, seed=seed, threads=threads, quiet=quiet)
    ctx.obj = state
    runtime = state.pipeline().settings.runtime
    configure_logging(quiet=runtime.quiet, fmt=log_format or runtime.log_format)  # type: ignore[arg-type]


cli.add_command(ingest_command)
cli.add_command(stratify_command)
cli.add_command(match_command)
cli.add_command(rake_command)
cli.add_command(oaca_command)
cli.add_command(simulate_command)
cli.add_command(report_command)
cli.add_command(run_all_command)


def main(argv: Sequence[str] | None = None) -> int:
    """Run the CLI and map failures to exit codes: 1 usage, 2 data, 3 non-convergence."""
    try:
        result = cli.main(args=list(argv) if argv is not None else None, prog_name="oaca", standalone_mode=False)
    except click.UsageError as exc:
        exc.show()
        return EXIT_USAGE
    except click.ClickException as exc:
        exc.show()
        return EXIT_USAGE
    except click.Abort:
        click.echo("Aborted!", err=True)
        return EXIT_USAGE
    except NonConvergenceError as exc:
        click.echo(f"Error: {exc}", err=True)
        return EXIT_NONCONVERGENCE
    except OacaError as exc:
        click.echo(f"Error: {exc}", err=True)
        return EXIT_DATA
    return result if isinstance(result, int) else EXIT_OK


def run() -> None:
    sys.exit(main())


if __name__ == "__main__":
    run()
