# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: 2026 OACA Toolkit Contributors
"""Field-normalized citation scores, (weighted) MNCS and the OA citation advantage."""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Any, Iterable, Iterator, Literal, Mapping, NamedTuple, Sequence

import numpy as np
import pandas as pd
import structlog

from oaca.core.artifacts import atomic_write_frame, read_frame
from oaca.core.cohort import CohortPair, naive_baseline
from oaca.core.errors import (
    EmptySample,
    MissingCell,
    NonConvergenceError,
    OacaDataError,
    WeightSampleMismatch,
    ZeroDenominator,
    ZeroExpectedCitations,
)
from oaca.core.models import DISCIPLINES, DOC_TYPES, ROUTES, Route
from oaca.core.rake import WeightVector
from oaca.core.records import Corpus, PublicationRecord

logger = structlog.get_logger(__name__)

Cell = tuple[str, int, str]
SliceKind = Literal["overall", "per_year", "per_discipline", "per_discipline_period"]
BaselineChoice = Literal["naive", "raked", "both"]

SLICE_KINDS: tuple[str, ...] = ("overall", "per_year", "per_discipline", "per_discipline_period")
RESULT_COLUMNS: tuple[str, ...] = (
    "route",
    "slice",
    "pub_year",
    "discipline",
    "period",
    "adjusted",
    "mncs_oa",
    "mncs_ctrl",
    "oaca_pct",
    "n_oa",
    "effective_n_ctrl",
    "n_zero_cell_oa",
    "n_zero_cell_ctrl",
)


class Period(NamedTuple):
    start: int
    end: int

    def label(self) -> str:
        return f"{self.start}-{self.end}"

    @classmethod
    def parse(cls, text: str) -> "Period":
        try:
            start_text, end_text = str(text).strip().split("-")
            period = cls(int(start_text), int(end_text))
        except ValueError as exc:
            raise OacaDataError(f"Invalid period {text!r}. Fix: use YYYY-YYYY, e.g. 2010-2012.") from exc
        if period.end < period.start:
            raise OacaDataError(f"Invalid period {text!r}: end precedes start")
        return period


DEFAULT_PERIODS: tuple[Period, ...] = (Period(2010, 2012), Period(2018, 2020))


# -- reference values -------------------------------------------------------------


@dataclass(frozen=True, eq=False)
class ReferenceTable:
    """Expected citations per (discipline, pub_year, doc_type) cell."""

    cells: Mapping[Cell, float]
    counts: Mapping[Cell, int] = field(default_factory=dict)
    source: str = "corpus"

    @property
    def zero_cells(self) -> tuple[Cell, ...]:
        return tuple(sorted(cell for cell, value in self.cells.items() if value <= 0))

    def expected(self, cell: Cell) -> float:
        if cell not in self.cells:
            raise MissingCell(cell)
        value = self.cells[cell]
        if value <= 0:
            raise ZeroExpectedCitations(cell)
        return float(value)

    @cached_property
    def _lookup(self) -> tuple[int, np.ndarray]:
        # NaN marks a cell absent from the table.
        if not self.cells:
            return 0, np.full((len(DISCIPLINES), 0, len(DOC_TYPES)), np.nan)
        years = [year for _, year, _ in self.cells]
        first = min(years)
        grid = np.full((len(DISCIPLINES), max(years) - first + 1, len(DOC_TYPES)), np.nan)
        for (discipline, year, doc_type), value in self.cells.items():
            grid[DISCIPLINES.index(discipline), year - first, DOC_TYPES.index(doc_type)] = value
        return first, grid

    def expected_for_rows(self, corpus: Corpus, rows: np.ndarray, *, allow_zero: bool = False) -> np.ndarray:
        """Vectorized `expected`; raises for the first missing cell among `rows`.

        Zero-mean cells raise too unless `allow_zero`, in which case their 0.0 is returned.
        """
        first, grid = self._lookup
        year_offset = corpus.pub_year[rows].astype(np.int64) - first
        inside = (year_offset >= 0) & (year_offset < grid.shape[1])
        expected = np.full(len(rows), np.nan)
        expected[inside] = grid[
            corpus.discipline[rows][inside], year_offset[inside], corpus.doc_type[rows][inside]
        ]
        missing = np.isnan(expected)
        if missing.any():
            raise MissingCell(_cell_of(corpus, int(rows[np.argmax(missing)])))
        zero = expected <= 0
        if zero.any() and not allow_zero:
            raise ZeroExpectedCitations(_cell_of(corpus, int(rows[np.argmax(zero)])))
        return expected

    def zero_cell_rows(self, corpus: Corpus, rows: np.ndarray) -> int:
        """How many of `rows` fall in zero-mean cells; missing cells raise."""
        if not self.zero_cells:
            return 0
        return int(np.count_nonzero(self.expected_for_rows(corpus, rows, allow_zero=True) <= 0))

    def to_frame(self) -> pd.DataFrame:
        ordered = sorted(self.cells)
        return pd.DataFrame(
            {
                "discipline": [cell[0] for cell in ordered],
                "pub_year": [cell[1] for cell in ordered],
                "doc_type": [cell[2] for cell in ordered],
                "expected_citations": [float(self.cells[cell]) for cell in ordered],
                "n_publications": [int(self.counts.get(cell, 0)) for cell in ordered],
            }
        )

    def write(self, path: str | Path) -> Path:
        return atomic_write_frame(path, self.to_frame())

    @classmethod
    def load(cls, path: str | Path) -> "ReferenceTable":
        """Read an external table with columns discipline, pub_year, doc_type, expected_citations."""
        frame = read_frame(path)
        required = {"discipline", "pub_year", "doc_type", "expected_citations"}
        missing = required - set(frame.columns)
        if missing:
            raise OacaDataError(f"Reference table {path} lacks columns: {sorted(missing)}")
        cells: dict[Cell, float] = {}
        for item in frame.itertuples(index=False):
            if item.discipline not in DISCIPLINES or item.doc_type not in DOC_TYPES:
                raise OacaDataError(f"Reference table {path}: unknown cell ({item.discipline}, {item.doc_type})")
            cells[(str(item.discipline), int(item.pub_year), str(item.doc_type))] = float(item.expected_citations)
        table = cls(cells=cells, source=str(path))
        _warn_zero_cells(table)
        return table


def build_reference_table(corpus: Corpus) -> ReferenceTable:
    """Mean citations of all publications (OA and non-OA) per cell."""
    if len(corpus) == 0:
        raise EmptySample("corpus")
    frame = pd.DataFrame(
        {
            "discipline": corpus.discipline,
            "pub_year": corpus.pub_year,
            "doc_type": corpus.doc_type,
            "citations": corpus.citations.astype(np.float64),
        }
    )
    grouped = frame.groupby(["discipline", "pub_year", "doc_type"], sort=True)["citations"].agg(["sum", "count"])
    cells: dict[Cell, float] = {}
    counts: dict[Cell, int] = {}
    for (discipline, year, doc_type), row in grouped.iterrows():
        cell = (DISCIPLINES[int(discipline)], int(year), DOC_TYPES[int(doc_type)])
        cells[cell] = float(row["sum"]) / float(row["count"])
        counts[cell] = int(row["count"])
    table = ReferenceTable(cells=cells, counts=counts)
    _warn_zero_cells(table)
    logger.info("reference_table_built", cells=len(cells), zero_cells=len(table.zero_cells))
    return table


def ncs(record: PublicationRecord, refs: ReferenceTable) -> float:
    return record.citations / refs.expected((record.discipline, record.pub_year, record.doc_type))


def mncs(
    corpus: Corpus,
    sample: np.ndarray,
    refs: ReferenceTable,
    weights: WeightVector | None = None,
    *,
    skip_zero_cells: bool = False,
) -> float:
    """Mean of per-publication normalized scores; weighted when `weights` is given.

    With `skip_zero_cells`, records of zero-mean reference cells (all uncited, so
    their score is undefined) are left out instead of raising.
    """
    sample = np.asarray(sample, dtype=np.int64)
    if len(sample) == 0:
        raise EmptySample()
    expected = refs.expected_for_rows(corpus, sample, allow_zero=skip_zero_cells)
    usable = expected > 0
    if not usable.any():
        raise EmptySample("sample without zero-mean cells")
    scores = corpus.citations[sample][usable] / expected[usable]
    if weights is None:
        return math.fsum(scores) / len(scores)
    aligned = align_weights(weights, sample)[usable]
    weight_sum = math.fsum(aligned)
    if weight_sum <= 0:
        if not usable.all():
            raise EmptySample("weighted sample without zero-mean cells")
        raise WeightSampleMismatch("weights sum to zero")
    return math.fsum(aligned * scores) / weight_sum


def align_weights(weights: WeightVector, sample: np.ndarray) -> np.ndarray:
    """Weights reordered to follow `sample`; the two must cover the same rows."""
    if len(weights.rows) != len(sample):
        raise WeightSampleMismatch(f"{len(weights.rows)} weights for {len(sample)} sample records")
    weight_order = np.argsort(weights.rows, kind="stable")
    sample_order = np.argsort(sample, kind="stable")
    if not np.array_equal(weights.rows[weight_order], sample[sample_order]):
        raise WeightSampleMismatch("weight rows and sample rows differ")
    aligned = np.empty(len(sample), dtype=np.float64)
    aligned[sample_order] = weights.weights[weight_order]
    return aligned


def oaca(mncs_oa: float, mncs_ctrl: float) -> float:
    if mncs_ctrl <= 0:
        raise ZeroDenominator()
    return 100.0 * (mncs_oa - mncs_ctrl) / mncs_ctrl


# -- report rows --------------------------------------------------------------------


@dataclass(frozen=True)
class OacaResult:
    route: Route
    slice: str
    adjusted: bool
    mncs_oa: float
    mncs_ctrl: float
    oaca_pct: float
    n_oa: float
    effective_n_ctrl: float
    pub_year: int | None = None
    discipline: str | None = None
    period: str | None = None
    n_zero_cell_oa: int = 0
    n_zero_cell_ctrl: int = 0

    def as_dict(self) -> dict[str, Any]:
        values = asdict(self)
        return {name: values[name] for name in RESULT_COLUMNS}


@dataclass(frozen=True)
class _Slice:
    kind: str
    mask: np.ndarray
    pub_year: int | None = None
    discipline: str | None = None
    period: str | None = None


def oaca_report(
    corpus: Corpus,
    cohorts: Mapping[str, CohortPair],
    weights: Mapping[str, WeightVector],
    refs: ReferenceTable,
    slicing: Sequence[str] = ("overall",),
    *,
    periods: Sequence[Period] = DEFAULT_PERIODS,
    baseline: BaselineChoice = "both",
    allow_nonconverged: bool = False,
) -> list[OacaResult]:
    """Adjusted (raked control) and naive (all non-OA) OACA per route and slice."""
    unknown = [kind for kind in slicing if kind not in SLICE_KINDS]
    if unknown:
        raise OacaDataError(f"Unknown slice kinds {unknown}. Fix: choose from {list(SLICE_KINDS)}.")
    kinds = [kind for kind in SLICE_KINDS if kind in slicing]
    want_raked = baseline in {"raked", "both"}
    want_naive = baseline in {"naive", "both"}
    naive_rows = naive_baseline(corpus)

    results: list[OacaResult] = []
    for route in (item for item in ROUTES if item in cohorts):
        cohort = cohorts[route]
        vector = weights.get(route)
        if want_raked:
            if vector is None:
                raise OacaDataError(f"No raking weights for route '{route}'")
            if not vector.converged and not allow_nonconverged:
                raise NonConvergenceError(route, vector.iterations_used, vector.final_discrepancy)
        route_rows = corpus.status_rows(route)  # type: ignore[arg-type]
        for slice_ in _slices(corpus, kinds, periods):
            if want_raked and vector is not None:
                row = _adjusted_row(corpus, cohort, vector, refs, slice_)
                if row is not None:
                    results.append(row)
            if want_naive:
                row = _naive_row(corpus, route, route_rows, naive_rows, refs, slice_)
                if row is not None:
                    results.append(row)
    logger.info("oaca_report_built", rows=len(results), slices=kinds, baseline=baseline)
    return results


def results_frame(results: Iterable[OacaResult]) -> pd.DataFrame:
    frame = pd.DataFrame([item.as_dict() for item in results], columns=list(RESULT_COLUMNS))
    frame["pub_year"] = frame["pub_year"].astype("Int64")
    return frame


def results_from_frame(frame: pd.DataFrame) -> list[OacaResult]:
    missing = set(RESULT_COLUMNS) - set(frame.columns)
    if missing:
        raise OacaDataError(f"Results table lacks columns: {sorted(missing)}")
    rows = []
    for item in frame.to_dict(orient="records"):
        rows.append(
            OacaResult(
                route=str(item["route"]),  # type: ignore[arg-type]
                slice=str(item["slice"]),
                adjusted=_as_bool(item["adjusted"]),
                mncs_oa=float(item["mncs_oa"]),
                mncs_ctrl=float(item["mncs_ctrl"]),
                oaca_pct=float(item["oaca_pct"]),
                n_oa=float(item["n_oa"]),
                effective_n_ctrl=float(item["effective_n_ctrl"]),
                pub_year=None if _is_blank(item["pub_year"]) else int(item["pub_year"]),
                discipline=None if _is_blank(item["discipline"]) else str(item["discipline"]),
                period=None if _is_blank(item["period"]) else str(item["period"]),
                n_zero_cell_oa=int(item["n_zero_cell_oa"]),
                n_zero_cell_ctrl=int(item["n_zero_cell_ctrl"]),
            )
        )
    return rows


def _slices(corpus: Corpus, kinds: Sequence[str], periods: Sequence[Period]) -> Iterator[_Slice]:
    years = corpus.pub_year
    disciplines = corpus.discipline
    for kind in kinds:
        if kind == "overall":
            yield _Slice(kind, np.ones(len(corpus), dtype=bool))
        elif kind == "per_year":
            for year in range(corpus.window[0], corpus.window[1] + 1):
                yield _Slice(kind, years == year, pub_year=year)
        elif kind == "per_discipline":
            for code, name in enumerate(DISCIPLINES):
                yield _Slice(kind, disciplines == code, discipline=name)
        elif kind == "per_discipline_period":
            for period in periods:
                in_period = (years >= period.start) & (years <= period.end)
                for code, name in enumerate(DISCIPLINES):
                    yield _Slice(kind, in_period & (disciplines == code), discipline=name, period=period.label())


def _adjusted_row(
    corpus: Corpus,
    cohort: CohortPair,
    vector: WeightVector,
    refs: ReferenceTable,
    slice_: _Slice,
) -> OacaResult | None:
    oa_rows = cohort.oa_rows[slice_.mask[cohort.oa_rows]]
    keep = slice_.mask[vector.rows]
    control = WeightVector(
        rows=vector.rows[keep],
        weights=vector.weights[keep],
        iterations_used=vector.iterations_used,
        final_discrepancy=vector.final_discrepancy,
        converged=vector.converged,
        total_weight=float(vector.weights[keep].sum()),
    )
    if len(oa_rows) == 0 or len(control) == 0 or control.total_weight <= 0:
        return None
    return _result(
        corpus, cohort.route, refs, slice_, oa_rows, control.rows, control, adjusted=True
    )


def _naive_row(
    corpus: Corpus,
    route: Route,
    route_rows: np.ndarray,
    naive_rows: np.ndarray,
    refs: ReferenceTable,
    slice_: _Slice,
) -> OacaResult | None:
    oa_rows = route_rows[slice_.mask[route_rows]]
    control_rows = naive_rows[slice_.mask[naive_rows]]
    if len(oa_rows) == 0 or len(control_rows) == 0:
        return None
    return _result(corpus, route, refs, slice_, oa_rows, control_rows, None, adjusted=False)


def _result(
    corpus: Corpus,
    route: Route,
    refs: ReferenceTable,
    slice_: _Slice,
    oa_rows: np.ndarray,
    control_rows: np.ndarray,
    control_weights: WeightVector | None,
    *,
    adjusted: bool,
) -> OacaResult | None:
    zero_oa = refs.zero_cell_rows(corpus, oa_rows)
    zero_ctrl = refs.zero_cell_rows(corpus, control_rows)
    context = {
        "route": route,
        "slice": slice_.kind,
        "pub_year": slice_.pub_year,
        "discipline": slice_.discipline,
        "period": slice_.period,
    }
    if zero_oa or zero_ctrl:
        log = logger.warning if slice_.kind == "overall" else logger.info
        log("zero_cell_records_skipped", n_oa=zero_oa, n_ctrl=zero_ctrl, **context)
    try:
        mncs_oa = mncs(corpus, oa_rows, refs, skip_zero_cells=True)
        mncs_ctrl = mncs(corpus, control_rows, refs, control_weights, skip_zero_cells=True)
    except EmptySample:
        logger.warning("slice_skipped_only_zero_cells", **context)
        return None
    if mncs_ctrl <= 0:
        logger.warning("slice_skipped_zero_control_mncs", **context)
        return None
    effective = float(control_weights.total_weight) if control_weights is not None else float(len(control_rows))
    return OacaResult(
        route=route,
        slice=slice_.kind,
        adjusted=adjusted,
        mncs_oa=mncs_oa,
        mncs_ctrl=mncs_ctrl,
        oaca_pct=oaca(mncs_oa, mncs_ctrl),
        n_oa=float(len(oa_rows)),
        effective_n_ctrl=effective,
        pub_year=slice_.pub_year,
        discipline=slice_.discipline,
        period=slice_.period,
        n_zero_cell_oa=zero_oa,
        n_zero_cell_ctrl=zero_ctrl,
    )


def _cell_of(corpus: Corpus, row: int) -> Cell:
    return (DISCIPLINES[int(corpus.discipline[row])], int(corpus.pub_year[row]), DOC_TYPES[int(corpus.doc_type[row])])


def _warn_zero_cells(table: ReferenceTable) -> None:
    zero = table.zero_cells
    if zero:
        logger.warning("reference_cells_with_zero_mean", count=len(zero), first=list(zero[0]))


def _is_blank(value: Any) -> bool:
    if value is None:
        return True
    if isinstance(value, float) and math.isnan(value):
        return True
    return bool(value is pd.NA or (isinstance(value, str) and not value))


def _as_bool(value: Any) -> bool:
    if isinstance(value, str):
        return value.strip().lower() in {"true", "1", "yes"}
    return bool(value)
