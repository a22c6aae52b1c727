# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: 2026 OACA Toolkit Contributors
"""Pydantic config models."""

from __future__ import annotations

from typing import Any, Literal

from pydantic import BaseModel, ConfigDict, Field, field_validator, model_validator
from pydantic_settings import BaseSettings, PydanticBaseSettingsSource, SettingsConfigDict


class IngestConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    window_start: int = 2010
    window_end: int = 2020
    skip_bad_lines: bool = False
    chunk_size: int = Field(default=50_000, ge=1)

    @model_validator(mode="after")
    def validate_window(self) -> "IngestConfig":
        if self.window_end < self.window_start:
            raise ValueError("ingest.window_end must be >= ingest.window_start")
        return self

    @property
    def window(self) -> tuple[int, int]:
        return (self.window_start, self.window_end)


class StratifyConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    fundings_zero_class: bool = True


class RakeConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    tolerance: float = Field(default=1e-8, gt=0.0)
    max_iterations: int = Field(default=1000, ge=1)
    max_weight_ratio: float | None = Field(default=None, gt=1.0)
    per_year: bool = False
    full_cross: bool = False
    allow_nonconverged: bool = False


class MetricsConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    reference_table: str | None = None
    periods: list[str] = Field(default_factory=lambda: ["2010-2012", "2018-2020"])
    baseline: Literal["naive", "raked", "both"] = "both"

    @field_validator("periods", mode="before")
    @classmethod
    def split_periods(cls, value: Any) -> Any:
        if isinstance(value, str):
            return [item.strip() for item in value.split(",") if item.strip()]
        return value


class RuntimeConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    # Replaces the SimConfig seed when set.
    seed: int | None = Field(default=None, ge=0)
    threads: int = Field(default=1, ge=1)
    quiet: bool = False
    log_format: Literal["console", "json"] = "console"


class OacaSettings(BaseSettings):
    """Pipeline settings: file values, overridden by OACA_* environment variables."""

    model_config = SettingsConfigDict(
        env_prefix="OACA_",
        env_nested_delimiter="__",
        extra="forbid",
    )

    version: str = "v1alpha1"
    ingest: IngestConfig = Field(default_factory=IngestConfig)
    stratify: StratifyConfig = Field(default_factory=StratifyConfig)
    rake: RakeConfig = Field(default_factory=RakeConfig)
    metrics: MetricsConfig = Field(default_factory=MetricsConfig)
    runtime: RuntimeConfig = Field(default_factory=RuntimeConfig)

    @classmethod
    def settings_customise_sources(
        cls,
        settings_cls: type[BaseSettings],
        init_settings: PydanticBaseSettingsSource,
        env_settings: PydanticBaseSettingsSource,
        dotenv_settings: PydanticBaseSettingsSource,
        file_secret_settings: PydanticBaseSettingsSource,
    ) -> tuple[PydanticBaseSettingsSource, ...]:
        # Environment beats file values passed as init kwargs.
        return (env_settings, init_settings)
