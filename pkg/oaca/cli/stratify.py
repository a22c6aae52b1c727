# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: 2026 OACA Toolkit Contributors
"""oaca stratify command."""

from __future__ import annotations

import click

from oaca.cli import ui
from oaca.cli.context import pass_state
from oaca.core.artifacts import atomic_write_frame
from oaca.core.stratify import stratum_counts


@click.command(name="stratify")
@click.option("--in", "in_path", required=True, type=click.Path(dir_okay=False), help="JSON Lines corpus.")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False), help="Stratum audit CSV.")
@click.pass_context
def stratify_command(ctx: click.Context, in_path: str, out_path: str) -> None:
    """Classify every record and write per-stratum counts by OA status."""
    pipeline = pass_state(ctx).pipeline()
    corpus = pipeline.load_corpus(in_path)
    counts = stratum_counts(corpus, pipeline.stratify(corpus))
    atomic_write_frame(out_path, counts)
    ui.step_done("Non-empty strata", str(len(counts)))
    ui.file_result(out_path)
