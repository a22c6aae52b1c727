# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: 2026 OACA Toolkit Contributors
"""OA samples and their exactly matched non-OA control pools."""

from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Any

import numpy as np
import structlog

from oaca.core.errors import EmptyOaSample
from oaca.core.models import ROUTES, Route
from oaca.core.records import Corpus
from oaca.core.stratify import StratumKey, StratumTable, classify_corpus

logger = structlog.get_logger(__name__)


@dataclass(frozen=True, eq=False)
class CohortPair:
    """OA sample, eligible control pool and excluded OA records for one route.

    Members are stored as sorted corpus row positions; the id-set views are
    derived on demand.
    """

    route: Route
    corpus: Corpus
    table: StratumTable
    oa_rows: np.ndarray
    control_rows: np.ndarray
    excluded_rows: np.ndarray

    @property
    def oa_sample(self) -> frozenset[str]:
        return frozenset(str(item) for item in self.corpus.ids[self.oa_rows])

    @property
    def control_pool(self) -> frozenset[str]:
        return frozenset(str(item) for item in self.corpus.ids[self.control_rows])

    @property
    def excluded_oa(self) -> frozenset[str]:
        return frozenset(str(item) for item in self.corpus.ids[self.excluded_rows])

    @cached_property
    def strata_codes(self) -> np.ndarray:
        return np.unique(self.table.codes[self.oa_rows])

    @property
    def nonempty_strata(self) -> int:
        return len(self.strata_codes)

    def strata_index(self) -> dict[StratumKey, tuple[tuple[str, ...], tuple[str, ...]]]:
        """Map each matched stratum to its (OA ids, control ids)."""
        ids = self.corpus.ids
        codes = self.table.codes
        oa_by_code = _group_rows(codes[self.oa_rows], self.oa_rows)
        ctrl_by_code = _group_rows(codes[self.control_rows], self.control_rows)
        index: dict[StratumKey, tuple[tuple[str, ...], tuple[str, ...]]] = {}
        for code, oa_rows in oa_by_code.items():
            ctrl_rows = ctrl_by_code.get(code, np.empty(0, dtype=np.int64))
            index[self.table.scheme.decode(code)] = (
                tuple(str(item) for item in ids[oa_rows]),
                tuple(str(item) for item in ids[ctrl_rows]),
            )
        return index

    def summary(self) -> dict[str, Any]:
        return {
            "route": self.route,
            "n_oa_sample": int(len(self.oa_rows)),
            "n_control_pool": int(len(self.control_rows)),
            "n_excluded_oa": int(len(self.excluded_rows)),
            "nonempty_strata": int(self.nonempty_strata),
        }


def build_cohort(corpus: Corpus, route: Route, table: StratumTable | None = None) -> CohortPair:
    if route not in ROUTES:
        raise ValueError(f"route must be one of {ROUTES}, got {route!r}")
    table = table or classify_corpus(corpus)
    oa_all = corpus.status_rows(route)
    if len(oa_all) == 0:
        raise EmptyOaSample(route)
    non_oa = naive_baseline(corpus)
    oa_codes = table.codes[oa_all]
    non_oa_codes = table.codes[non_oa]

    has_double = np.isin(oa_codes, non_oa_codes)
    cohort = CohortPair(
        route=route,
        corpus=corpus,
        table=table,
        oa_rows=oa_all[has_double],
        control_rows=non_oa[np.isin(non_oa_codes, oa_codes[has_double])],
        excluded_rows=oa_all[~has_double],
    )
    for array in (cohort.oa_rows, cohort.control_rows, cohort.excluded_rows):
        array.flags.writeable = False
    summary = cohort.summary()
    logger.info("cohort_built", **summary)
    if len(cohort.excluded_rows):
        logger.warning(
            "oa_records_without_double",
            route=route,
            excluded=summary["n_excluded_oa"],
            share=round(summary["n_excluded_oa"] / len(oa_all), 6),
        )
    return cohort


def naive_baseline(corpus: Corpus) -> np.ndarray:
    """All non-OA rows: the uncontrolled comparison group."""
    return corpus.status_rows("non_oa")


def double_candidates(corpus: Corpus, table: StratumTable | None = None) -> np.ndarray:
    """Non-OA rows sharing a stratum with any gold OA record (either route)."""
    table = table or classify_corpus(corpus)
    oa_rows = np.concatenate([corpus.status_rows(route) for route in ROUTES])
    non_oa = naive_baseline(corpus)
    return non_oa[np.isin(table.codes[non_oa], table.codes[oa_rows])]


def _group_rows(codes: np.ndarray, rows: np.ndarray) -> dict[int, np.ndarray]:
    if len(rows) == 0:
        return {}
    order = np.argsort(codes, kind="stable")
    sorted_codes = codes[order]
    boundaries = np.flatnonzero(np.diff(sorted_codes)) + 1
    groups = np.split(rows[order], boundaries)
    starts = np.concatenate(([0], boundaries))
    return {int(sorted_codes[start]): group for start, group in zip(starts, groups)}
