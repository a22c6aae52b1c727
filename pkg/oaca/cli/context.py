# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: 2026 OACA Toolkit Contributors
"""Shared state handed from the `oaca` group to its subcommands."""

from __future__ import annotations

from dataclasses import dataclass

import click

from oaca.api import OacaPipeline
from oaca.core.metrics import SLICE_KINDS
from oaca.core.models import ROUTES


@dataclass
class CliState:
    config_path: str | None = None
    seed: int | None = None
    threads: int | None = None
    quiet: bool = False

    def pipeline(self) -> OacaPipeline:
        return OacaPipeline.from_config(
            self.config_path,
            seed=self.seed,
            threads=self.threads,
            quiet=self.quiet or None,
        )


def pass_state(ctx: click.Context) -> CliState:
    state = ctx.find_object(CliState)
    return state if state is not None else CliState()


def route_option(func):  # type: ignore[no-untyped-def]
    return click.option(
        "--route",
        "routes",
        multiple=True,
        type=click.Choice(ROUTES),
        help="OA route(s) to process; repeatable. Default: both.",
    )(func)


def slice_option(func):  # type: ignore[no-untyped-def]
    return click.option(
        "--slice",
        "slices",
        multiple=True,
        type=click.Choice(SLICE_KINDS),
        help="Result slices; repeatable. Default: all.",
    )(func)


def split_periods(value: str | None) -> list[str] | None:
    if value is None:
        return None
    return [item.strip() for item in value.split(",") if item.strip()]
