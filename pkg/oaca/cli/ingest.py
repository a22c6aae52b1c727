# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: 2026 OACA Toolkit Contributors
"""oaca ingest command."""

from __future__ import annotations

import json

import click

from oaca.cli import ui
from oaca.cli.context import pass_state
from oaca.core.artifacts import atomic_write_lines
from oaca.core.records import write_corpus


@click.command(name="ingest")
@click.option("--in", "in_path", required=True, type=click.Path(dir_okay=False), help="JSON Lines corpus.")
@click.option("--skip-bad-lines", is_flag=True, help="Skip invalid lines instead of failing.")
@click.option("--errors-out", type=click.Path(dir_okay=False), default=None, help="Write rejected lines as JSON Lines.")
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None, help="Write the canonical corpus.")
@click.pass_context
def ingest_command(
    ctx: click.Context,
    in_path: str,
    skip_bad_lines: bool,
    errors_out: str | None,
    out_path: str | None,
) -> None:
    """Validate a publication corpus and report counts per OA status."""
    pipeline = pass_state(ctx).pipeline()
    corpus = pipeline.load_corpus(in_path, skip_bad_lines=skip_bad_lines or None)

    ui.table(
        f"Corpus {in_path}",
        ["oa_status", "records"],
        [*corpus.status_counts().items(), ("total", len(corpus))],
    )
    ui.step_done("Source digest", corpus.source_digest)
    if pipeline.ingest_issues:
        ui.step_warn(f"{len(pipeline.ingest_issues)} line(s) rejected")
    if errors_out:
        atomic_write_lines(errors_out, (json.dumps(issue.as_dict(), sort_keys=True) for issue in pipeline.ingest_issues))
        ui.file_result(errors_out)
    if out_path:
        write_corpus(corpus, out_path)
        ui.file_result(out_path)
