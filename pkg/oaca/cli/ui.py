# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: 2026 OACA Toolkit Contributors
"""Clack-style CLI rendering helpers."""

from __future__ import annotations

from typing import Any, Iterable, Sequence

from rich.console import Console
from rich.table import Table

console = Console(highlight=False)

# ── Unicode glyphs ──────────────────────────────────────────────────
BAR = "│"
DIAMOND_OPEN = "◇"
DIAMOND_FILL = "◆"
BOT = "└"
CHECK = "✓"
WARN = "!"


def step_active(label: str) -> None:
    console.print(f"[bold cyan]{DIAMOND_FILL}[/]  [bold]{label}[/]")


def step_done(label: str, value: str = "") -> None:
    if value:
        console.print(f"[bold cyan]{DIAMOND_OPEN}[/]  {label}: [cyan]{value}[/]")
    else:
        console.print(f"[bold cyan]{DIAMOND_OPEN}[/]  {label}")


def step_warn(label: str) -> None:
    console.print(f"[bold yellow]{WARN}[/]  [yellow]{label}[/]")


def step_end(text: str) -> None:
    console.print(f"[bold cyan]{BOT}[/]  {text}")


def file_result(path: str) -> None:
    console.print(f"[bold cyan]{BAR}[/]  [green]{CHECK} wrote[/]  {path}")


def table(title: str, columns: Sequence[str], rows: Iterable[Sequence[Any]]) -> None:
    """Print a rich table; floats are shown with four decimals."""
    view = Table(title=title, show_lines=False)
    for name in columns:
        view.add_column(name, justify="left" if name in {"route", "slice", "discipline", "feature"} else "right")
    for row in rows:
        view.add_row(*(_cell(value) for value in row))
    console.print(view)


def _cell(value: Any) -> str:
    if value is None:
        return "-"
    if isinstance(value, bool):
        return "yes" if value else "no"
    if isinstance(value, float):
        return f"{value:.4f}"
    return str(value)
