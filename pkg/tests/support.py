# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: 2026 OACA Toolkit Contributors
"""Record factories and small synthetic configs shared by the test suites."""

from __future__ import annotations

import json
from typing import Any, Iterable

from oaca.core.models import SimConfigModel
from oaca.core.records import Corpus, PublicationRecord
from oaca.core.simulate import generate

BASE_RECORD: dict[str, Any] = {
    "id": "W0",
    "pub_year": 2015,
    "doc_type": "article",
    "discipline": "LS6",
    "journal_impact": 1.0,
    "n_countries": 1,
    "n_fundings": 0,
    "has_erc_funding": False,
    "has_eu27_address": True,
    "cited_by_patent": False,
    "oa_status": "non_oa",
    "citations": 3,
}


def record_dict(**overrides: Any) -> dict[str, Any]:
    return {**BASE_RECORD, **overrides}


def record_line(**overrides: Any) -> str:
    return json.dumps(record_dict(**overrides))


def make_record(**overrides: Any) -> PublicationRecord:
    return PublicationRecord(**record_dict(**overrides))


def make_corpus(rows: Iterable[dict[str, Any]], window: tuple[int, int] = (2010, 2020)) -> Corpus:
    records = [make_record(id=f"W{index}", **row) for index, row in enumerate(rows)]
    return Corpus.from_records(records, window=window)


def small_sim_config(**overrides: Any) -> SimConfigModel:
    """Confounded config over few cells so strata hold many records each."""
    document: dict[str, Any] = {
        "seed": 42,
        "n_records": 30_000,
        "year_start": 2019,
        "year_end": 2020,
        "discipline_weights": {"LS1": 1.0, "PE2": 1.0, "SH3": 1.0},
        "features": {
            "countries_extra_mean": 0.4,
            "fundings_mean": 0.5,
            "erc_probability": 0.0,
            "patent_probability": 0.0,
            "eu27_probability": 0.4,
        },
        "oa_assignment": {
            "gold_full": {"base_probability": 0.15, "impact_coef": 0.5},
            "gold_hybrid": {"base_probability": 0.10, "impact_coef": 0.5},
        },
        "citations": {"impact_effects": [0.5, 0.8, 1.0, 1.4, 2.0]},
    }
    for key, value in overrides.items():
        if isinstance(value, dict) and isinstance(document.get(key), dict):
            document[key] = {**document[key], **value}
        else:
            document[key] = value
    return SimConfigModel.model_validate(document)


def small_corpus(**overrides: Any) -> Corpus:
    return generate(small_sim_config(**overrides))
