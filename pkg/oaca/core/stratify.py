# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: 2026 OACA Toolkit Contributors
"""Class systems for the eight matching features and the composite stratum key."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Literal, NamedTuple

import numpy as np
import pandas as pd

from oaca.core.errors import DomainViolation, NonFiniteInput
from oaca.core.models import DISCIPLINES, OA_STATUSES
from oaca.core.records import DEFAULT_WINDOW, Corpus, PublicationRecord

CountKind = Literal["countries", "fundings"]

# Upper intervals are left-closed: [0.8, 1.2[ etc.
IMPACT_BOUNDARIES: tuple[float, ...] = (0.8, 1.2, 1.8, 2.2)
COUNT_CAP = 5

FEATURES: tuple[str, ...] = (
    "year",
    "discipline",
    "impact",
    "countries",
    "fundings",
    "erc",
    "eu27",
    "patent",
)


class StratumKey(NamedTuple):
    year: int
    discipline: str
    impact_class: int
    countries_class: int
    fundings_class: int
    erc_flag: bool
    eu27_flag: bool
    patent_flag: bool

    def label(self) -> str:
        flags = ["Y" if flag else "N" for flag in (self.erc_flag, self.eu27_flag, self.patent_flag)]
        return "|".join(
            [
                str(self.year),
                self.discipline,
                str(self.impact_class),
                str(self.countries_class),
                str(self.fundings_class),
                *flags,
            ]
        )


def classify_impact(journal_impact: float) -> int:
    value = float(journal_impact)
    if not math.isfinite(value) or value < 0:
        raise NonFiniteInput(value)
    return int(np.searchsorted(IMPACT_BOUNDARIES, value, side="right")) + 1


def classify_count(n: int, kind: CountKind, *, zero_class: bool = True) -> int:
    """Cap counts at "5 or more"; fundings may keep a separate class 0."""
    value = int(n)
    if kind == "countries":
        if value < 1:
            raise DomainViolation(kind, value)
        return min(value, COUNT_CAP)
    if kind == "fundings":
        if value < 0:
            raise DomainViolation(kind, value)
        if value == 0 and not zero_class:
            return 1
        return min(value, COUNT_CAP)
    raise ValueError(f"unknown count kind: {kind}")


@dataclass(frozen=True)
class ClassScheme:
    """Category lists for every feature; also fixes the mixed-radix key encoding."""

    window: tuple[int, int] = DEFAULT_WINDOW
    fundings_zero_class: bool = True
    categories: dict[str, tuple[object, ...]] = field(init=False, repr=False, compare=False)

    def __post_init__(self) -> None:
        fundings_low = 0 if self.fundings_zero_class else 1
        categories: dict[str, tuple[object, ...]] = {
            "year": tuple(range(self.window[0], self.window[1] + 1)),
            "discipline": DISCIPLINES,
            "impact": tuple(range(1, len(IMPACT_BOUNDARIES) + 2)),
            "countries": tuple(range(1, COUNT_CAP + 1)),
            "fundings": tuple(range(fundings_low, COUNT_CAP + 1)),
            "erc": (False, True),
            "eu27": (False, True),
            "patent": (False, True),
        }
        object.__setattr__(self, "categories", categories)

    @property
    def radices(self) -> tuple[int, ...]:
        return tuple(len(self.categories[name]) for name in FEATURES)

    @property
    def key_space(self) -> int:
        return math.prod(self.radices)

    def key(self, record: PublicationRecord) -> StratumKey:
        return StratumKey(
            year=record.pub_year,
            discipline=record.discipline,
            impact_class=classify_impact(record.journal_impact),
            countries_class=classify_count(record.n_countries, "countries"),
            fundings_class=classify_count(record.n_fundings, "fundings", zero_class=self.fundings_zero_class),
            erc_flag=bool(record.has_erc_funding),
            eu27_flag=bool(record.has_eu27_address),
            patent_flag=bool(record.cited_by_patent),
        )

    def decode(self, code: int) -> StratumKey:
        digits: list[int] = []
        remainder = int(code)
        for radix in reversed(self.radices):
            remainder, digit = divmod(remainder, radix)
            digits.append(digit)
        digits.reverse()
        values = [self.categories[name][digit] for name, digit in zip(FEATURES, digits)]
        return StratumKey(*values)  # type: ignore[arg-type]


def stratum_key(record: PublicationRecord, *, fundings_zero_class: bool = True) -> StratumKey:
    return ClassScheme(fundings_zero_class=fundings_zero_class).key(record)


@dataclass(frozen=True, eq=False)
class StratumTable:
    """Per-record category indices (0-based, into `scheme.categories`) and stratum codes."""

    scheme: ClassScheme
    indices: dict[str, np.ndarray]
    codes: np.ndarray

    def __len__(self) -> int:
        return len(self.codes)

    def key(self, row: int) -> StratumKey:
        return self.scheme.decode(int(self.codes[row]))


def classify_corpus(corpus: Corpus, scheme: ClassScheme | None = None) -> StratumTable:
    """Vectorized `stratum_key` over every record of the corpus."""
    scheme = scheme or ClassScheme(window=corpus.window)
    impact = corpus.journal_impact
    if len(impact) and (not np.all(np.isfinite(impact)) or np.any(impact < 0)):
        bad = impact[~np.isfinite(impact) | (impact < 0)][0]
        raise NonFiniteInput(float(bad))
    if np.any(corpus.n_countries < 1):
        raise DomainViolation("countries", int(corpus.n_countries.min()))
    if np.any(corpus.n_fundings < 0):
        raise DomainViolation("fundings", int(corpus.n_fundings.min()))
    years = corpus.pub_year.astype(np.int64)
    if len(years) and (years.min() < scheme.window[0] or years.max() > scheme.window[1]):
        raise DomainViolation("year", int(years.min() if years.min() < scheme.window[0] else years.max()))

    fundings_low = 0 if scheme.fundings_zero_class else 1
    indices = {
        "year": years - scheme.window[0],
        "discipline": corpus.discipline.astype(np.int64),
        "impact": np.searchsorted(IMPACT_BOUNDARIES, impact, side="right").astype(np.int64),
        "countries": np.minimum(corpus.n_countries, COUNT_CAP).astype(np.int64) - 1,
        "fundings": np.clip(corpus.n_fundings, fundings_low, COUNT_CAP).astype(np.int64) - fundings_low,
        "erc": corpus.has_erc_funding.astype(np.int64),
        "eu27": corpus.has_eu27_address.astype(np.int64),
        "patent": corpus.cited_by_patent.astype(np.int64),
    }
    codes = np.zeros(len(corpus), dtype=np.int64)
    for name, radix in zip(FEATURES, scheme.radices):
        codes = codes * radix + indices[name]
    for array in (*indices.values(), codes):
        array.flags.writeable = False
    return StratumTable(scheme=scheme, indices=indices, codes=codes)


def stratum_counts(corpus: Corpus, table: StratumTable) -> pd.DataFrame:
    """Audit table: one row per non-empty stratum with counts per OA status."""
    columns = ["stratum_key", "n_gold_full", "n_gold_hybrid", "n_non_oa"]
    if len(table) == 0:
        return pd.DataFrame({name: pd.Series(dtype=object if name == "stratum_key" else np.int64) for name in columns})
    frame = pd.DataFrame({"code": table.codes, "status": corpus.oa_status})
    counts = (
        frame.groupby(["code", "status"], sort=True).size().unstack(fill_value=0)
        .reindex(columns=range(len(OA_STATUSES)), fill_value=0)
    )
    counts.columns = [f"n_{status}" for status in OA_STATUSES]
    counts = counts.reset_index()
    counts.insert(0, "stratum_key", [table.scheme.decode(code).label() for code in counts.pop("code")])
    return counts[columns]
