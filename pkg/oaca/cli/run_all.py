# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: 2026 OACA Toolkit Contributors
"""oaca run-all command."""

from __future__ import annotations

import click

from oaca.cli import ui
from oaca.cli.context import pass_state
from oaca.config.loader import PRESETS


@click.command(name="run-all")
@click.option("--in", "in_path", type=click.Path(dir_okay=False), default=None, help="JSON Lines corpus.")
@click.option("--preset", type=click.Choice(PRESETS), default=None, help="Simulate a preset corpus instead.")
@click.option("--sim-config", type=click.Path(dir_okay=False), default=None, help="Simulate from a SimConfig document.")
@click.option("--n-records", type=click.IntRange(min=0), default=None, help="Override the simulated record count.")
@click.option("--out-dir", required=True, type=click.Path(file_okay=False), help="Directory for every artifact.")
@click.pass_context
def run_all_command(
    ctx: click.Context,
    in_path: str | None,
    preset: str | None,
    sim_config: str | None,
    n_records: int | None,
    out_dir: str,
) -> None:
    """Ingest or simulate, then stratify, match, rake, estimate and report."""
    sources = [item for item in (in_path, preset, sim_config) if item is not None]
    if len(sources) != 1:
        raise click.UsageError("Pass exactly one of --in, --preset or --sim-config.")
    pipeline = pass_state(ctx).pipeline()
    if in_path is not None:
        corpus = pipeline.load_corpus(in_path)
    else:
        corpus = pipeline.simulate(sources[0], n_records=n_records)

    ui.step_active(f"Running every stage on {len(corpus)} records")
    summary = pipeline.run_all(corpus, out_dir)
    rows = []
    for route, entry in summary["routes"].items():
        rows.append((route, entry["n_oa_sample"], entry["adjusted_oaca_pct"], entry["naive_oaca_pct"], entry.get("true_oaca_pct")))
    ui.table("OACA (overall)", ["route", "OA sample", "adjusted %", "naive %", "true %"], rows)
    ui.step_end(f"Artifacts in {out_dir}")
