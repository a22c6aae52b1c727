# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: 2026 OACA Toolkit Contributors
"""Command line interface."""
