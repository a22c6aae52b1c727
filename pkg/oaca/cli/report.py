# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: 2026 OACA Toolkit Contributors
"""oaca report command."""

from __future__ import annotations

import click

from oaca.cli import ui
from oaca.cli.context import pass_state, split_periods
from oaca.core.report import read_results_csv, render_discipline_table, render_trend_chart, trend_series


@click.command(name="report")
@click.option("--in", "in_path", required=True, type=click.Path(dir_okay=False), help="Results CSV from `oaca oaca`.")
@click.option("--figure", type=click.Choice(["trend", "disciplines"]), required=True, help="Artifact to render.")
@click.option("--periods", default=None, help="Comma-separated periods for the discipline table.")
@click.option("--out", "out_path", required=True, type=click.Path(dir_okay=False), help="Output SVG or CSV.")
@click.pass_context
def report_command(ctx: click.Context, in_path: str, figure: str, periods: str | None, out_path: str) -> None:
    """Render the yearly trend chart or the per-discipline table from results."""
    results = read_results_csv(in_path)
    if figure == "trend":
        series = trend_series(results)
        render_trend_chart(series, out_path)
        ui.step_done("Series", str(len(series)))
    else:
        chosen = split_periods(periods) or pass_state(ctx).pipeline().settings.metrics.periods
        _, missing = render_discipline_table(results, out_path, chosen)
        if missing:
            ui.step_warn(f"{len(missing)} discipline(s) absent: {', '.join(missing)}")
    ui.file_result(out_path)
