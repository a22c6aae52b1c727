# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: 2026 OACA Toolkit Contributors
"""oaca oaca command."""

from __future__ import annotations

import click

from oaca.cli import ui
from oaca.cli.context import pass_state, route_option, slice_option, split_periods
from oaca.core.metrics import SLICE_KINDS
from oaca.core.models import ROUTES
from oaca.core.report import write_results_csv, write_summary


@click.command(name="oaca")
@click.option("--in", "in_path", required=True, type=click.Path(dir_okay=False), help="JSON Lines corpus.")
@route_option
@slice_option
@click.option("--periods", default=None, help="Comma-separated periods, e.g. 2010-2012,2018-2020.")
@click.option("--baseline", type=click.Choice(["naive", "raked", "both"]), default=None, help="Comparison group(s).")
@click.option("--reference-table", type=click.Path(dir_okay=False), default=None, help="External reference values CSV.")
@click.option("--weights-dir", type=click.Path(file_okay=False), default=None, help="Reuse weights written by `oaca rake`.")
@click.option("--allow-nonconverged", is_flag=True, help="Accept non-converged raking weights.")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False), help="Results CSV.")
@click.option("--summary-out", type=click.Path(dir_okay=False), default=None, help="JSON summary of overall rows.")
@click.pass_context
def oaca_command(
    ctx: click.Context,
    in_path: str,
    routes: tuple[str, ...],
    slices: tuple[str, ...],
    periods: str | None,
    baseline: str | None,
    reference_table: str | None,
    weights_dir: str | None,
    allow_nonconverged: bool,
    out_path: str,
    summary_out: str | None,
) -> None:
    """Compute adjusted and naive OACA per route and slice."""
    pipeline = pass_state(ctx).pipeline()
    pipeline.override("metrics", periods=split_periods(periods), baseline=baseline, reference_table=reference_table)
    pipeline.override("rake", allow_nonconverged=allow_nonconverged or None)

    corpus = pipeline.load_corpus(in_path)
    cohorts = pipeline.match(corpus, routes=routes or ROUTES)
    if weights_dir:
        weights = pipeline.load_weights(corpus, weights_dir, list(cohorts))
    else:
        weights = pipeline.rake(cohorts)
    refs = pipeline.reference_table(corpus)
    results = pipeline.results(corpus, cohorts, weights, refs, slices or SLICE_KINDS)
    write_results_csv(results, out_path)

    overall = [row for row in results if row.slice == "overall"]
    ui.table(
        "OACA (overall)",
        ["route", "baseline", "MNCS OA", "MNCS control", "OACA %", "n OA", "eff. n control"],
        [
            (row.route, "raked" if row.adjusted else "naive", row.mncs_oa, row.mncs_ctrl, row.oaca_pct, row.n_oa, row.effective_n_ctrl)
            for row in overall
        ],
    )
    ui.file_result(out_path)
    if summary_out:
        write_summary({"rows": [row.as_dict() for row in overall], "source_digest": corpus.source_digest}, summary_out)
        ui.file_result(summary_out)
