# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: 2026 OACA Toolkit Contributors
"""oaca rake command."""

from __future__ import annotations

from pathlib import Path

import click

from oaca.cli import ui
from oaca.cli.context import pass_state, route_option
from oaca.core.artifacts import atomic_write_frame, atomic_write_json
from oaca.core.errors import NonConvergenceError
from oaca.core.models import ROUTES


@click.command(name="rake")
@click.option("--in", "in_path", required=True, type=click.Path(dir_okay=False), help="JSON Lines corpus.")
@route_option
@click.option("--out-dir", required=True, type=click.Path(file_okay=False), help="Directory for weights and convergence.json.")
@click.option("--tolerance", type=float, default=None, help="Sup-norm margin discrepancy target.")
@click.option("--max-iterations", type=int, default=None, help="Sweep cap.")
@click.option("--max-weight-ratio", type=float, default=None, help="Trim weights above ratio x mean.")
@click.option("--per-year", is_flag=True, help="Rake each publication year separately.")
@click.option("--full-cross", is_flag=True, help="Single full stratum margin (post-stratification).")
@click.option("--allow-nonconverged", is_flag=True, help="Exit 0 even if raking did not converge.")
@click.pass_context
def rake_command(
    ctx: click.Context,
    in_path: str,
    routes: tuple[str, ...],
    out_dir: str,
    tolerance: float | None,
    max_iterations: int | None,
    max_weight_ratio: float | None,
    per_year: bool,
    full_cross: bool,
    allow_nonconverged: bool,
) -> None:
    """Rake each control pool to its OA sample's feature margins."""
    pipeline = pass_state(ctx).pipeline().override(
        "rake",
        tolerance=tolerance,
        max_iterations=max_iterations,
        max_weight_ratio=max_weight_ratio,
        per_year=per_year or None,
        full_cross=full_cross or None,
        allow_nonconverged=allow_nonconverged or None,
    )
    corpus = pipeline.load_corpus(in_path)
    cohorts = pipeline.match(corpus, routes=routes or ROUTES)
    weights = pipeline.rake(cohorts)

    out = Path(out_dir).expanduser()
    out.mkdir(parents=True, exist_ok=True)
    for route, vector in weights.items():
        atomic_write_frame(out / f"weights_{route}.csv", vector.to_frame(corpus.ids))
    atomic_write_json(out / "convergence.json", {route: vector.diagnostics() for route, vector in weights.items()})

    rows = []
    for route, vector in weights.items():
        stats = vector.diagnostics()
        rows.append(
            (route, stats["n"], stats["converged"], stats["iterations"], stats["final_discrepancy"], stats.get("kish_effective_n"))
        )
    ui.table("Raking", ["route", "pool", "converged", "sweeps", "discrepancy", "Kish n"], rows)
    ui.file_result(str(out))

    if not pipeline.settings.rake.allow_nonconverged:
        for route, vector in weights.items():
            if not vector.converged:
                raise NonConvergenceError(route, vector.iterations_used, vector.final_discrepancy)
