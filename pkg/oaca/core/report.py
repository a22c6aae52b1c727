# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: 2026 OACA Toolkit Contributors
"""Trend chart, discipline table and result-file writers."""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Any, Iterable, Literal, Sequence
from xml.sax.saxutils import escape

import pandas as pd
import structlog

from oaca.core.artifacts import atomic_write_frame, atomic_write_json, atomic_write_text, read_frame
from oaca.core.errors import EmptySeries
from oaca.core.metrics import OacaResult, results_frame, results_from_frame
from oaca.core.models import DISCIPLINES, ROUTES, Route

logger = structlog.get_logger(__name__)

BaselineKind = Literal["naive", "raked"]

CHART_WIDTH = 720
CHART_HEIGHT = 420
_PLOT_LEFT = 70
_PLOT_RIGHT = CHART_WIDTH - 190
_PLOT_TOP = 50
_PLOT_BOTTOM = CHART_HEIGHT - 50

_ROUTE_COLORS = {"gold_full": "#1f6fb4", "gold_hybrid": "#c8372d"}
_BASELINE_DASH = {"raked": "", "naive": "6 4"}
_ROUTE_LABELS = {"gold_full": "Full OA", "gold_hybrid": "Hybrid OA"}
_BASELINE_LABELS = {"raked": "raked control", "naive": "all non-OA"}


@dataclass(frozen=True)
class TrendSeries:
    route: Route
    baseline: BaselineKind
    points: tuple[tuple[int, float], ...]

    def __post_init__(self) -> None:
        years = [year for year, _ in self.points]
        if any(later <= earlier for earlier, later in zip(years, years[1:])):
            raise EmptySeries(f"{self.route}/{self.baseline}: years must be strictly increasing")
        if any(not math.isfinite(value) for _, value in self.points):
            raise EmptySeries(f"{self.route}/{self.baseline}: non-finite OACA value")

    @property
    def years(self) -> tuple[int, ...]:
        return tuple(year for year, _ in self.points)

    @property
    def label(self) -> str:
        return f"{_ROUTE_LABELS.get(self.route, self.route)} ({_BASELINE_LABELS[self.baseline]})"


def trend_series(results: Iterable[OacaResult], *, align: bool = True) -> list[TrendSeries]:
    """Per-year rows grouped into at most four series (2 routes x 2 baselines).

    With `align`, years missing from any series are dropped from all of them.
    """
    grouped: dict[tuple[str, str], dict[int, float]] = {}
    for row in results:
        if row.slice != "per_year" or row.pub_year is None:
            continue
        baseline = "raked" if row.adjusted else "naive"
        grouped.setdefault((row.route, baseline), {})[row.pub_year] = row.oaca_pct
    if not grouped:
        return []
    shared = set.intersection(*(set(points) for points in grouped.values()))
    if align:
        dropped = sorted(set.union(*(set(points) for points in grouped.values())) - shared)
        if dropped:
            logger.warning("trend_years_dropped", years=dropped)
    series = []
    for route in ROUTES:
        for baseline in ("raked", "naive"):
            points = grouped.get((route, baseline))
            if points is None:
                continue
            years = sorted(shared if align else points)
            series.append(
                TrendSeries(route=route, baseline=baseline, points=tuple((year, points[year]) for year in years))  # type: ignore[arg-type]
            )
    return series


def trend_chart_svg(series: Sequence[TrendSeries], *, title: str = "OACA by publication year") -> str:
    if not series or any(not item.points for item in series):
        raise EmptySeries("trend chart needs at least one non-empty series")
    years = series[0].years
    for item in series[1:]:
        if item.years != years:
            raise EmptySeries(
                f"series {item.route}/{item.baseline} covers {item.years[0]}-{item.years[-1]}, "
                f"expected {years[0]}-{years[-1]}"
            )
    if len(series) > 4:
        raise EmptySeries(f"at most 4 series per chart, got {len(series)}")

    values = [value for item in series for _, value in item.points]
    ticks = _nice_ticks(min(0.0, *values), max(0.0, *values))
    low, high = ticks[0], ticks[-1]

    def x_of(index: int) -> float:
        if len(years) == 1:
            return (_PLOT_LEFT + _PLOT_RIGHT) / 2
        return _PLOT_LEFT + index * (_PLOT_RIGHT - _PLOT_LEFT) / (len(years) - 1)

    def y_of(value: float) -> float:
        return _PLOT_BOTTOM - (value - low) * (_PLOT_BOTTOM - _PLOT_TOP) / (high - low)

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{CHART_WIDTH}" height="{CHART_HEIGHT}" '
        f'viewBox="0 0 {CHART_WIDTH} {CHART_HEIGHT}" font-family="sans-serif" font-size="12">',
        f'<rect x="0" y="0" width="{CHART_WIDTH}" height="{CHART_HEIGHT}" fill="#ffffff"/>',
        f'<text x="{CHART_WIDTH / 2:.2f}" y="24" text-anchor="middle" font-size="15">{escape(title)}</text>',
        '<g class="grid" stroke="#e3e3e3" stroke-width="1">',
    ]
    for tick in ticks:
        parts.append(f'<line x1="{_PLOT_LEFT}" y1="{y_of(tick):.2f}" x2="{_PLOT_RIGHT}" y2="{y_of(tick):.2f}"/>')
    parts.append("</g>")

    parts.append('<g class="axes" stroke="#333333" stroke-width="1">')
    parts.append(f'<line x1="{_PLOT_LEFT}" y1="{_PLOT_TOP}" x2="{_PLOT_LEFT}" y2="{_PLOT_BOTTOM}"/>')
    parts.append(f'<line x1="{_PLOT_LEFT}" y1="{_PLOT_BOTTOM}" x2="{_PLOT_RIGHT}" y2="{_PLOT_BOTTOM}"/>')
    parts.append("</g>")
    parts.append(
        f'<line class="zero" x1="{_PLOT_LEFT}" y1="{y_of(0.0):.2f}" x2="{_PLOT_RIGHT}" y2="{y_of(0.0):.2f}" '
        'stroke="#000000" stroke-width="1.2" stroke-dasharray="2 2"/>'
    )

    parts.append('<g class="y-ticks" text-anchor="end">')
    for tick in ticks:
        parts.append(f'<text x="{_PLOT_LEFT - 8}" y="{y_of(tick) + 4:.2f}">{_format_tick(tick)}</text>')
    parts.append("</g>")
    parts.append('<g class="x-ticks" text-anchor="middle">')
    for index, year in enumerate(years):
        parts.append(f'<text x="{x_of(index):.2f}" y="{_PLOT_BOTTOM + 18}">{year}</text>')
    parts.append("</g>")
    parts.append(
        f'<text x="18" y="{(_PLOT_TOP + _PLOT_BOTTOM) / 2:.2f}" text-anchor="middle" '
        f'transform="rotate(-90 18 {(_PLOT_TOP + _PLOT_BOTTOM) / 2:.2f})">OACA (%)</text>'
    )

    for item in series:
        color = _ROUTE_COLORS.get(item.route, "#555555")
        dash = _BASELINE_DASH[item.baseline]
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        coords = " ".join(f"{x_of(index):.2f},{y_of(value):.2f}" for index, (_, value) in enumerate(item.points))
        parts.append(f'<g class="series" data-route="{item.route}" data-baseline="{item.baseline}">')
        parts.append(f'<polyline points="{coords}" fill="none" stroke="{color}" stroke-width="2"{dash_attr}/>')
        for index, (_, value) in enumerate(item.points):
            parts.append(f'<circle cx="{x_of(index):.2f}" cy="{y_of(value):.2f}" r="3" fill="{color}"/>')
        parts.append("</g>")

    parts.append('<g class="legend">')
    for index, item in enumerate(series):
        y = _PLOT_TOP + 10 + index * 22
        color = _ROUTE_COLORS.get(item.route, "#555555")
        dash = _BASELINE_DASH[item.baseline]
        dash_attr = f' stroke-dasharray="{dash}"' if dash else ""
        parts.append(
            f'<line x1="{_PLOT_RIGHT + 16}" y1="{y}" x2="{_PLOT_RIGHT + 44}" y2="{y}" '
            f'stroke="{color}" stroke-width="2"{dash_attr}/>'
        )
        parts.append(f'<text x="{_PLOT_RIGHT + 50}" y="{y + 4}">{escape(item.label)}</text>')
    parts.append("</g>")
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


def render_trend_chart(series: Sequence[TrendSeries], out: str | Path, **options: Any) -> Path:
    """Write the trend chart as a standalone SVG; nothing is written on error."""
    document = trend_chart_svg(series, **options)
    path = atomic_write_text(out, document)
    logger.info("trend_chart_written", path=str(path), series=len(series))
    return path


def discipline_table(
    results: Iterable[OacaResult], periods: Sequence[str] | None = None
) -> tuple[pd.DataFrame, list[str]]:
    """Adjusted OACA per discipline, one column per (route, period)."""
    rows = [item for item in results if item.slice == "per_discipline_period" and item.adjusted]
    if periods is None:
        periods = list(dict.fromkeys(item.period for item in rows if item.period))
    values: dict[tuple[str, str, str], float] = {
        (item.discipline, item.route, item.period): item.oaca_pct for item in rows  # type: ignore[misc]
    }
    present = {item.discipline for item in rows}
    columns = [f"{route}_{period}" for route in ROUTES for period in periods]
    records = []
    missing = []
    for discipline in DISCIPLINES:
        if discipline not in present:
            missing.append(discipline)
            logger.warning("missing_discipline", discipline=discipline)
            continue
        record: dict[str, Any] = {"discipline": discipline}
        for route in ROUTES:
            for period in periods:
                record[f"{route}_{period}"] = values.get((discipline, route, period))
        records.append(record)
    return pd.DataFrame(records, columns=["discipline", *columns]), missing


def render_discipline_table(
    results: Iterable[OacaResult], out: str | Path, periods: Sequence[str] | None = None
) -> tuple[Path, list[str]]:
    frame, missing = discipline_table(results, periods)
    path = atomic_write_frame(out, frame)
    logger.info("discipline_table_written", path=str(path), rows=len(frame), missing=len(missing))
    return path, missing


def write_results_csv(results: Iterable[OacaResult], out: str | Path) -> Path:
    return atomic_write_frame(out, results_frame(results))


def read_results_csv(path: str | Path) -> list[OacaResult]:
    return results_from_frame(read_frame(path))


def write_summary(payload: dict[str, Any], out: str | Path) -> Path:
    return atomic_write_json(out, payload)


def _nice_ticks(low: float, high: float, target: int = 5) -> list[float]:
    if high - low <= 0:
        low, high = low - 1.0, high + 1.0
    raw = (high - low) / target
    magnitude = 10 ** math.floor(math.log10(raw))
    step = next(factor * magnitude for factor in (1, 2, 2.5, 5, 10) if factor * magnitude >= raw)
    first = math.floor(low / step)
    last = math.ceil(high / step)
    return [round(index * step, 10) for index in range(first, last + 1)]


def _format_tick(value: float) -> str:
    text = f"{value:g}"
    return "0" if text == "-0" else text
