# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: 2026 OACA Toolkit Contributors
"""Validated data models for records read from disk and simulator configs."""

from __future__ import annotations

from typing import Literal, get_args

from pydantic import BaseModel, ConfigDict, Field, model_validator

DocType = Literal["article", "review", "proceedings"]
OaStatus = Literal["gold_full", "gold_hybrid", "non_oa"]
Route = Literal["gold_full", "gold_hybrid"]
Discipline = Literal[
    "LS1", "LS2", "LS3", "LS4", "LS5", "LS6", "LS7", "LS8", "LS9",
    "PE1", "PE2", "PE3", "PE4", "PE5", "PE6", "PE7", "PE8", "PE9", "PE10", "PE11",
    "SH1", "SH2", "SH3", "SH4", "SH5", "SH6", "SH7",
]

DOC_TYPES: tuple[str, ...] = get_args(DocType)
OA_STATUSES: tuple[str, ...] = get_args(OaStatus)
ROUTES: tuple[str, ...] = get_args(Route)
DISCIPLINES: tuple[str, ...] = get_args(Discipline)

RECORD_FIELDS: tuple[str, ...] = (
    "id",
    "pub_year",
    "doc_type",
    "discipline",
    "journal_impact",
    "n_countries",
    "n_fundings",
    "has_erc_funding",
    "has_eu27_address",
    "cited_by_patent",
    "oa_status",
    "citations",
)


class PublicationRecordModel(BaseModel):
    """One JSON Lines record, validated strictly (no coercion of strings to numbers)."""

    model_config = ConfigDict(extra="forbid", strict=True, frozen=True)

    id: str = Field(min_length=1)
    pub_year: int
    doc_type: DocType
    discipline: Discipline
    journal_impact: float = Field(ge=0, allow_inf_nan=False)
    n_countries: int = Field(ge=1)
    n_fundings: int = Field(ge=0)
    has_erc_funding: bool
    has_eu27_address: bool
    cited_by_patent: bool
    oa_status: OaStatus
    citations: int = Field(ge=0)


# -- simulator configuration ---------------------------------------------------


class RouteAssignmentModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    base_probability: float = Field(ge=0.0, le=1.0)
    # Logit shift per impact-class step away from the middle class (3).
    impact_coef: float = 0.0
    discipline_coefs: dict[Discipline, float] = Field(default_factory=dict)


class OaAssignmentModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    gold_full: RouteAssignmentModel = Field(
        default_factory=lambda: RouteAssignmentModel(base_probability=0.15)
    )
    gold_hybrid: RouteAssignmentModel = Field(
        default_factory=lambda: RouteAssignmentModel(base_probability=0.08)
    )

    @model_validator(mode="after")
    def validate_total_probability(self) -> "OaAssignmentModel":
        total = self.gold_full.base_probability + self.gold_hybrid.base_probability
        if total >= 1.0:
            raise ValueError("gold_full + gold_hybrid base_probability must be < 1")
        return self


class ImpactModel(BaseModel):
    """Log-normal journal impact; `discipline_mu` overrides `mu` per panel."""

    model_config = ConfigDict(extra="forbid")

    mu: float = 0.2
    sigma: float = Field(default=0.6, gt=0.0)
    discipline_mu: dict[Discipline, float] = Field(default_factory=dict)


class FeatureModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    # countries = 1 + Poisson(countries_extra_mean * exp(slope * (impact_class - 3)))
    countries_extra_mean: float = Field(default=0.6, ge=0.0)
    countries_impact_slope: float = 0.0
    fundings_mean: float = Field(default=0.8, ge=0.0)
    fundings_impact_slope: float = 0.0
    erc_probability: float = Field(default=0.03, ge=0.0, le=1.0)
    erc_impact_coef: float = 0.0
    eu27_probability: float = Field(default=0.35, ge=0.0, le=1.0)
    eu27_impact_coef: float = 0.0
    patent_probability: float = Field(default=0.05, ge=0.0, le=1.0)
    patent_impact_coef: float = 0.0


class CitationModel(BaseModel):
    """Negative-binomial citation counts with a multiplicative mean."""

    model_config = ConfigDict(extra="forbid")

    base_mean: float = Field(default=8.0, gt=0.0)
    discipline_multipliers: dict[Discipline, float] = Field(default_factory=dict)
    doc_type_multipliers: dict[DocType, float] = Field(
        default_factory=lambda: {"article": 1.0, "review": 2.0, "proceedings": 0.4}
    )
    # Older publications accumulate more: mean x (1 + age_slope * (year_end - pub_year)).
    age_slope: float = Field(default=0.15, ge=0.0)
    impact_effects: list[float] = Field(default_factory=lambda: [0.5, 0.8, 1.0, 1.4, 2.0])
    countries_effect: float = Field(default=1.0, gt=0.0)
    fundings_effect: float = Field(default=1.0, gt=0.0)
    erc_effect: float = Field(default=1.0, gt=0.0)
    eu27_effect: float = Field(default=1.0, gt=0.0)
    patent_effect: float = Field(default=1.0, gt=0.0)
    delta_full: float = Field(default=0.0, gt=-1.0)
    delta_hybrid: float = Field(default=0.0, gt=-1.0)
    dispersion: float = Field(default=2.0, gt=0.0)

    @model_validator(mode="after")
    def validate_multipliers(self) -> "CitationModel":
        if len(self.impact_effects) != 5:
            raise ValueError("impact_effects needs exactly 5 values, one per impact class")
        if any(value <= 0 for value in self.impact_effects):
            raise ValueError("impact_effects must be > 0")
        for name, mapping in (
            ("discipline_multipliers", self.discipline_multipliers),
            ("doc_type_multipliers", self.doc_type_multipliers),
        ):
            if any(value <= 0 for value in mapping.values()):
                raise ValueError(f"{name} must be > 0")
        return self


class SimConfigModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    version: Literal["v1alpha1"] = "v1alpha1"
    seed: int = Field(default=42, ge=0, lt=2**64)
    n_records: int = Field(default=10_000, ge=0)
    year_start: int = 2010
    year_end: int = 2020
    discipline_weights: dict[Discipline, float] = Field(default_factory=dict)
    doc_type_weights: dict[DocType, float] = Field(
        default_factory=lambda: {"article": 0.8, "review": 0.08, "proceedings": 0.12}
    )
    impact: ImpactModel = Field(default_factory=ImpactModel)
    features: FeatureModel = Field(default_factory=FeatureModel)
    oa_assignment: OaAssignmentModel = Field(default_factory=OaAssignmentModel)
    citations: CitationModel = Field(default_factory=CitationModel)

    @model_validator(mode="after")
    def validate_shape(self) -> "SimConfigModel":
        if self.year_end < self.year_start:
            raise ValueError("year_end must be >= year_start")
        for name, weights in (
            ("discipline_weights", self.discipline_weights),
            ("doc_type_weights", self.doc_type_weights),
        ):
            if any(value < 0 for value in weights.values()):
                raise ValueError(f"{name} must be >= 0")
            if weights and sum(weights.values()) <= 0:
                raise ValueError(f"{name} must have a positive total")
        if not self.doc_type_weights:
            raise ValueError("doc_type_weights must name at least one document type")
        return self
