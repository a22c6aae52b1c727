# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: 2026 OACA Toolkit Contributors
"""oaca match command."""

from __future__ import annotations

import click

from oaca.cli import ui
from oaca.cli.context import pass_state, route_option
from oaca.core.artifacts import atomic_write_json
from oaca.core.cohort import double_candidates
from oaca.core.models import ROUTES


@click.command(name="match")
@click.option("--in", "in_path", required=True, type=click.Path(dir_okay=False), help="JSON Lines corpus.")
@route_option
@click.option("--out", "out_path", type=click.Path(dir_okay=False), default=None, help="Write cohorts.json.")
@click.pass_context
def match_command(ctx: click.Context, in_path: str, routes: tuple[str, ...], out_path: str | None) -> None:
    """Build exactly matched control pools per OA route."""
    pipeline = pass_state(ctx).pipeline()
    corpus = pipeline.load_corpus(in_path)
    table = pipeline.stratify(corpus)
    cohorts = pipeline.match(corpus, table, routes or ROUTES)
    candidates = double_candidates(corpus, table)

    summaries = [cohort.summary() for cohort in cohorts.values()]
    ui.table(
        "Cohorts",
        ["route", "OA sample", "control pool", "excluded OA", "strata"],
        [
            (item["route"], item["n_oa_sample"], item["n_control_pool"], item["n_excluded_oa"], item["nonempty_strata"])
            for item in summaries
        ],
    )
    ui.step_done("Double candidates (any gold route)", str(len(candidates)))
    if out_path:
        atomic_write_json(
            out_path,
            {"double_candidates": int(len(candidates)), "routes": {item["route"]: item for item in summaries}},
        )
        ui.file_result(out_path)
