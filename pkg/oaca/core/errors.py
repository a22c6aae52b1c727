# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: 2026 OACA Toolkit Contributors
"""Error hierarchy shared by the pipeline stages."""

from __future__ import annotations

from typing import Any


class OacaError(Exception):
    """Base class for every error raised by the toolkit."""


class OacaDataError(OacaError, ValueError):
    """Input data or derived data cannot support the requested computation."""


# -- ingest ---------------------------------------------------------------


class MalformedLine(OacaDataError):
    def __init__(self, line_no: int, reason: str) -> None:
        self.line_no = line_no
        self.reason = reason
        super().__init__(f"Line {line_no}: malformed record: {reason}")


class DuplicateId(OacaDataError):
    def __init__(self, record_id: str, line_no: int | None = None) -> None:
        self.record_id = record_id
        self.line_no = line_no
        where = f"Line {line_no}: " if line_no is not None else ""
        super().__init__(
            f"{where}duplicate record id '{record_id}'.\n"
            "Fix: ids must be unique within a corpus file."
        )


class OutOfWindowYear(OacaDataError):
    def __init__(self, record_id: str, year: int, window: tuple[int, int], line_no: int | None = None) -> None:
        self.record_id = record_id
        self.year = year
        self.window = window
        self.line_no = line_no
        where = f"Line {line_no}: " if line_no is not None else ""
        super().__init__(
            f"{where}record '{record_id}' has pub_year {year} outside the study window "
            f"{window[0]}-{window[1]}.\n"
            "Fix: widen ingest.window_start/window_end or filter the input."
        )


class UnknownEnumValue(OacaDataError):
    def __init__(self, field: str, value: Any, line_no: int | None = None) -> None:
        self.field = field
        self.value = value
        self.line_no = line_no
        where = f"Line {line_no}: " if line_no is not None else ""
        super().__init__(f"{where}unknown value {value!r} for field '{field}'")


# -- stratify -------------------------------------------------------------


class NonFiniteInput(OacaDataError):
    def __init__(self, value: float) -> None:
        self.value = value
        super().__init__(f"journal_impact must be finite and >= 0, got {value!r}")


class DomainViolation(OacaDataError):
    def __init__(self, kind: str, value: int) -> None:
        self.kind = kind
        self.value = value
        super().__init__(f"{kind} count {value} is outside the class domain")


# -- cohort / rake ----------------------------------------------------------


class EmptyOaSample(OacaDataError):
    def __init__(self, route: str) -> None:
        self.route = route
        super().__init__(f"No publications with oa_status '{route}' in corpus")


class EmptySample(OacaDataError):
    def __init__(self, what: str = "sample") -> None:
        super().__init__(f"{what} is empty")


class StructuralZero(OacaDataError):
    def __init__(self, margin: str, category: Any) -> None:
        self.margin = margin
        self.category = category
        super().__init__(
            f"Margin '{margin}' category {category!r} has a positive target but no control mass.\n"
            "Fix: drop the margin, coarsen its classes, or check cohort construction."
        )


class InfeasibleTargets(OacaDataError):
    def __init__(self, margin: str, reason: str) -> None:
        self.margin = margin
        super().__init__(f"Margin '{margin}': infeasible targets: {reason}")


class NonConvergenceError(OacaError):
    """Raised when non-converged raking weights reach an estimator that refuses them."""

    def __init__(self, route: str, iterations: int, discrepancy: float) -> None:
        self.route = route
        self.iterations = iterations
        self.discrepancy = discrepancy
        super().__init__(
            f"Raking for route '{route}' did not converge after {iterations} sweeps "
            f"(discrepancy {discrepancy:.3e}).\n"
            "Fix: raise rake.max_iterations, loosen rake.tolerance, or pass --allow-nonconverged."
        )


# -- metrics ----------------------------------------------------------------


class ZeroExpectedCitations(OacaDataError):
    def __init__(self, cell: tuple[str, int, str]) -> None:
        self.cell = cell
        super().__init__(f"Reference cell {cell} has zero expected citations")


class MissingCell(OacaDataError):
    def __init__(self, cell: tuple[str, int, str]) -> None:
        self.cell = cell
        super().__init__(
            f"Reference cell {cell} is absent from the reference table.\n"
            "Fix: supply a reference table covering every (discipline, pub_year, doc_type) in the sample."
        )


class WeightSampleMismatch(OacaDataError):
    def __init__(self, reason: str) -> None:
        super().__init__(f"Weights do not match sample: {reason}")


class ZeroDenominator(OacaDataError):
    def __init__(self) -> None:
        super().__init__("Control MNCS is zero; OACA is undefined")


# -- simulate / report --------------------------------------------------------


class InvalidConfig(OacaDataError):
    def __init__(self, messages: list[str], what: str = "simulation config") -> None:
        self.messages = messages
        joined = "\n".join(f"  - {item}" for item in messages)
        super().__init__(f"Invalid {what}:\n{joined}")


class EmptySeries(OacaDataError):
    """Chart input is empty or its series do not share one year range."""


class ReportIoError(OacaError, OSError):
    """An output artifact could not be written."""
