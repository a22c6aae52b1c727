# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: 2026 OACA Toolkit Contributors
"""Estimator stages: ingest, stratify, cohort, rake, metrics, simulate, report."""
