# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: 2026 OACA Toolkit Contributors
"""oaca simulate command."""

from __future__ import annotations

import click

from oaca.cli import ui
from oaca.cli.context import pass_state
from oaca.config.loader import PRESETS
from oaca.core.models import ROUTES
from oaca.core.records import write_corpus
from oaca.core.simulate import true_oaca


@click.command(name="simulate")
@click.option("--config", "sim_config", type=click.Path(dir_okay=False), default=None, help="SimConfig JSON/YAML document.")
@click.option("--preset", type=click.Choice(PRESETS), default=None, help="Shipped SimConfig preset.")
@click.option("--n-records", type=click.IntRange(min=0), default=None, help="Override the record count.")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False), help="JSON Lines corpus.")
@click.pass_context
def simulate_command(
    ctx: click.Context,
    sim_config: str | None,
    preset: str | None,
    n_records: int | None,
    out_path: str,
) -> None:
    """Generate a seeded synthetic corpus with a planted OA effect."""
    if (sim_config is None) == (preset is None):
        raise click.UsageError("Pass exactly one of --config or --preset.")
    pipeline = pass_state(ctx).pipeline()
    corpus = pipeline.simulate(sim_config or preset, n_records=n_records)  # type: ignore[arg-type]
    write_corpus(corpus, out_path)
    config = pipeline.sim_config
    if config is None:
        raise click.ClickException("simulation produced no config")

    ui.table(
        "Synthetic corpus",
        ["oa_status", "records", "true OACA %"],
        [
            (status, count, true_oaca(config, status) if status in ROUTES else None)  # type: ignore[arg-type]
            for status, count in corpus.status_counts().items()
        ],
    )
    ui.step_done("Seed", str(config.seed))
    ui.file_result(out_path)
