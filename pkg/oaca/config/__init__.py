# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: 2026 OACA Toolkit Contributors
"""Configuration loading and models."""

from oaca.config.loader import (
    PRESETS,
    SimConfigSchemaError,
    load_config,
    load_preset,
    load_sim_config,
)
from oaca.config.models import OacaSettings

__all__ = [
    "PRESETS",
    "OacaSettings",
    "SimConfigSchemaError",
    "load_config",
    "load_preset",
    "load_sim_config",
]
