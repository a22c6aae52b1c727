# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: 2026 OACA Toolkit Contributors
"""OACA toolkit public package interface."""

from oaca.api import OacaPipeline

__all__ = ["OacaPipeline"]
