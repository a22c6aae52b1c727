# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: 2026 OACA Toolkit Contributors
"""Seeded synthetic corpora with known OA citation effects.

Citation means are multiplicative in the record's cell and features:

    mean = base_mean * discipline * doc_type * age(year) * impact_effect[class]
           * countries_effect ** (countries_class - 1) * fundings_effect ** fundings
           * erc_effect ** erc * eu27_effect ** eu27 * patent_effect ** patent
           * (1 + delta_route)

For an OA record and a non-OA record with the same features the expected
citation ratio is exactly 1 + delta_route. Normalizing both by the same
(discipline, year, doc_type) reference value keeps that ratio, so a control
group weighted to the OA feature distribution has MNCS_OA / MNCS_ctrl equal to
1 + delta_route in expectation and the population OACA is 100 * delta_route.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from typing import Any, Mapping

import numpy as np
import structlog
from pydantic import ValidationError

from oaca.core.errors import InvalidConfig
from oaca.core.models import DISCIPLINES, DOC_TYPES, OA_STATUSES, ROUTES, Route, SimConfigModel
from oaca.core.records import Corpus, digest_lines, serialize_publications
from oaca.core.stratify import COUNT_CAP, IMPACT_BOUNDARIES

logger = structlog.get_logger(__name__)

# Fixed record block per RNG stream; output never depends on the thread count.
SIM_BLOCK_SIZE = 1 << 14
MIDDLE_IMPACT_CLASS = 3

_FULL, _HYBRID, _NON_OA = (OA_STATUSES.index(name) for name in ("gold_full", "gold_hybrid", "non_oa"))


def parse_sim_config(data: Mapping[str, Any] | SimConfigModel) -> SimConfigModel:
    """Validate a SimConfig document, mapping pydantic errors to `InvalidConfig`."""
    if isinstance(data, SimConfigModel):
        return data
    try:
        return SimConfigModel.model_validate(dict(data))
    except ValidationError as exc:
        messages = []
        for item in exc.errors(include_url=False):
            location = ".".join(str(part) for part in item["loc"]) or "$"
            messages.append(f"{location}: {item['msg']}")
        raise InvalidConfig(messages) from exc


def generate(config: SimConfigModel | Mapping[str, Any], *, threads: int = 1) -> Corpus:
    """Draw `n_records` publications; identical configs give identical corpora."""
    config = parse_sim_config(config)
    window = (config.year_start, config.year_end)
    starts = list(range(0, config.n_records, SIM_BLOCK_SIZE))
    tables = _ParameterTables.from_config(config)

    def draw(index_start: tuple[int, int]) -> dict[str, np.ndarray]:
        block, start = index_start
        size = min(SIM_BLOCK_SIZE, config.n_records - start)
        return _draw_block(config, tables, block, size)

    jobs = list(enumerate(starts))
    if threads > 1 and len(jobs) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            blocks = list(pool.map(draw, jobs))
    else:
        blocks = [draw(job) for job in jobs]

    columns = _concatenate_blocks(blocks)
    ids = np.array([f"sim{row:09d}" for row in range(config.n_records)], dtype=object)
    corpus = Corpus(ids=ids, **columns, window=window)
    corpus = corpus.with_digest(digest_lines(serialize_publications(corpus)))
    logger.info(
        "corpus_simulated",
        seed=config.seed,
        records=len(corpus),
        blocks=len(jobs),
        **corpus.status_counts(),
    )
    return corpus


def true_oaca(config: SimConfigModel | Mapping[str, Any], route: Route) -> float:
    """Population OACA planted for `route`: 100 * delta_route."""
    config = parse_sim_config(config)
    if route not in ROUTES:
        raise ValueError(f"route must be one of {ROUTES}, got {route!r}")
    delta = config.citations.delta_full if route == "gold_full" else config.citations.delta_hybrid
    return 100.0 * delta


def route_probabilities(
    config: SimConfigModel, impact_class: np.ndarray, discipline: np.ndarray
) -> tuple[np.ndarray, np.ndarray]:
    """Multinomial-logit OA probabilities (full, hybrid) against the non-OA reference."""
    assignment = config.oa_assignment
    base_full = assignment.gold_full.base_probability
    base_hybrid = assignment.gold_hybrid.base_probability
    reference = 1.0 - base_full - base_hybrid
    odds = []
    for route_model, base in ((assignment.gold_full, base_full), (assignment.gold_hybrid, base_hybrid)):
        if base == 0:
            odds.append(np.zeros(len(impact_class)))
            continue
        coefs = np.array([route_model.discipline_coefs.get(name, 0.0) for name in DISCIPLINES])
        logit = (
            np.log(base / reference)
            + route_model.impact_coef * (impact_class - MIDDLE_IMPACT_CLASS)
            + coefs[discipline]
        )
        odds.append(np.exp(logit))
    denominator = 1.0 + odds[0] + odds[1]
    return odds[0] / denominator, odds[1] / denominator


# -- internals ------------------------------------------------------------------


class _ParameterTables:
    """Per-category lookup arrays resolved once from the config."""

    def __init__(
        self,
        discipline_p: np.ndarray,
        doc_type_p: np.ndarray,
        impact_mu: np.ndarray,
        discipline_mult: np.ndarray,
        doc_type_mult: np.ndarray,
        impact_effects: np.ndarray,
    ) -> None:
        self.discipline_p = discipline_p
        self.doc_type_p = doc_type_p
        self.impact_mu = impact_mu
        self.discipline_mult = discipline_mult
        self.doc_type_mult = doc_type_mult
        self.impact_effects = impact_effects

    @classmethod
    def from_config(cls, config: SimConfigModel) -> "_ParameterTables":
        if config.discipline_weights:
            discipline_w = np.array([config.discipline_weights.get(name, 0.0) for name in DISCIPLINES])
        else:
            discipline_w = np.ones(len(DISCIPLINES))
        doc_type_w = np.array([config.doc_type_weights.get(name, 0.0) for name in DOC_TYPES])
        citations = config.citations
        return cls(
            discipline_p=discipline_w / discipline_w.sum(),
            doc_type_p=doc_type_w / doc_type_w.sum(),
            impact_mu=np.array([config.impact.discipline_mu.get(name, config.impact.mu) for name in DISCIPLINES]),
            discipline_mult=np.array([citations.discipline_multipliers.get(name, 1.0) for name in DISCIPLINES]),
            doc_type_mult=np.array([citations.doc_type_multipliers.get(name, 1.0) for name in DOC_TYPES]),
            impact_effects=np.array(citations.impact_effects, dtype=np.float64),
        )


def _block_rng(seed: int, block: int) -> np.random.Generator:
    return np.random.Generator(np.random.Philox(np.random.SeedSequence([seed, block])))


def _flag(rng: np.random.Generator, probability: float, coef: float, steps: np.ndarray) -> np.ndarray:
    draws = rng.random(len(steps))
    if probability <= 0.0:
        return np.zeros(len(steps), dtype=bool)
    if probability >= 1.0:
        return np.ones(len(steps), dtype=bool)
    logit = np.log(probability / (1.0 - probability)) + coef * steps
    return draws < 1.0 / (1.0 + np.exp(-logit))


def _draw_block(config: SimConfigModel, tables: _ParameterTables, block: int, size: int) -> dict[str, np.ndarray]:
    rng = _block_rng(config.seed, block)
    features = config.features
    citations = config.citations

    pub_year = rng.integers(config.year_start, config.year_end + 1, size=size)
    discipline = rng.choice(len(DISCIPLINES), size=size, p=tables.discipline_p)
    doc_type = rng.choice(len(DOC_TYPES), size=size, p=tables.doc_type_p)
    journal_impact = rng.lognormal(tables.impact_mu[discipline], config.impact.sigma)
    impact_class = np.searchsorted(IMPACT_BOUNDARIES, journal_impact, side="right") + 1
    steps = (impact_class - MIDDLE_IMPACT_CLASS).astype(np.float64)

    n_countries = 1 + rng.poisson(features.countries_extra_mean * np.exp(features.countries_impact_slope * steps))
    n_fundings = rng.poisson(features.fundings_mean * np.exp(features.fundings_impact_slope * steps))
    has_erc = _flag(rng, features.erc_probability, features.erc_impact_coef, steps)
    has_eu27 = _flag(rng, features.eu27_probability, features.eu27_impact_coef, steps)
    cited_by_patent = _flag(rng, features.patent_probability, features.patent_impact_coef, steps)

    p_full, p_hybrid = route_probabilities(config, impact_class, discipline)
    u = rng.random(size)
    oa_status = np.full(size, _NON_OA, dtype=np.int8)
    oa_status[u < p_full + p_hybrid] = _HYBRID
    oa_status[u < p_full] = _FULL

    delta = np.zeros(size)
    delta[oa_status == _FULL] = citations.delta_full
    delta[oa_status == _HYBRID] = citations.delta_hybrid
    mean = (
        citations.base_mean
        * tables.discipline_mult[discipline]
        * tables.doc_type_mult[doc_type]
        * (1.0 + citations.age_slope * (config.year_end - pub_year))
        * tables.impact_effects[impact_class - 1]
        * citations.countries_effect ** (np.minimum(n_countries, COUNT_CAP) - 1)
        * citations.fundings_effect ** np.minimum(n_fundings, COUNT_CAP)
        * np.where(has_erc, citations.erc_effect, 1.0)
        * np.where(has_eu27, citations.eu27_effect, 1.0)
        * np.where(cited_by_patent, citations.patent_effect, 1.0)
        * (1.0 + delta)
    )
    r = citations.dispersion
    counts = rng.negative_binomial(r, r / (r + mean))

    return {
        "pub_year": pub_year.astype(np.int32),
        "doc_type": doc_type.astype(np.int8),
        "discipline": discipline.astype(np.int8),
        "journal_impact": journal_impact.astype(np.float64),
        "n_countries": n_countries.astype(np.int32),
        "n_fundings": n_fundings.astype(np.int32),
        "has_erc_funding": has_erc,
        "has_eu27_address": has_eu27,
        "cited_by_patent": cited_by_patent,
        "oa_status": oa_status,
        "citations": counts.astype(np.int64),
    }


def _concatenate_blocks(blocks: list[dict[str, np.ndarray]]) -> dict[str, np.ndarray]:
    dtypes = {
        "pub_year": np.int32,
        "doc_type": np.int8,
        "discipline": np.int8,
        "journal_impact": np.float64,
        "n_countries": np.int32,
        "n_fundings": np.int32,
        "has_erc_funding": bool,
        "has_eu27_address": bool,
        "cited_by_patent": bool,
        "oa_status": np.int8,
        "citations": np.int64,
    }
    if not blocks:
        return {name: np.empty(0, dtype=dtype) for name, dtype in dtypes.items()}
    return {name: np.concatenate([block[name] for block in blocks]).astype(dtype) for name, dtype in dtypes.items()}
