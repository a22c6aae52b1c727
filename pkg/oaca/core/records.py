# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: 2026 OACA Toolkit Contributors
"""Publication records, the columnar corpus, and JSON Lines ingestion."""

from __future__ import annotations

import hashlib
import json
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from functools import cached_property
from pathlib import Path
from typing import Any, Iterable, Iterator, Sequence

import numpy as np
import pandas as pd
import structlog
from pydantic import ValidationError

from oaca.core.artifacts import atomic_write_lines
from oaca.core.errors import (
    DuplicateId,
    MalformedLine,
    OacaDataError,
    OutOfWindowYear,
    UnknownEnumValue,
)
from oaca.core.models import (
    DISCIPLINES,
    DOC_TYPES,
    OA_STATUSES,
    RECORD_FIELDS,
    Discipline,
    DocType,
    OaStatus,
    PublicationRecordModel,
)

logger = structlog.get_logger(__name__)

DEFAULT_WINDOW: tuple[int, int] = (2010, 2020)
DEFAULT_CHUNK_SIZE = 50_000

_DOC_TYPE_CODE = {name: idx for idx, name in enumerate(DOC_TYPES)}
_DISCIPLINE_CODE = {name: idx for idx, name in enumerate(DISCIPLINES)}
_OA_STATUS_CODE = {name: idx for idx, name in enumerate(OA_STATUSES)}


@dataclass(frozen=True)
class PublicationRecord:
    id: str
    pub_year: int
    doc_type: DocType
    discipline: Discipline
    journal_impact: float
    n_countries: int
    n_fundings: int
    has_erc_funding: bool
    has_eu27_address: bool
    cited_by_patent: bool
    oa_status: OaStatus
    citations: int

    def to_json(self) -> str:
        payload = {name: getattr(self, name) for name in RECORD_FIELDS}
        return json.dumps(payload, separators=(",", ":"), ensure_ascii=False)


@dataclass(frozen=True)
class LineIssue:
    """A rejected line collected in `--skip-bad-lines` mode."""

    line_no: int
    error: str
    message: str

    def as_dict(self) -> dict[str, Any]:
        return {"line_no": self.line_no, "error": self.error, "message": self.message}


@dataclass(frozen=True, eq=False)
class Corpus:
    """Immutable column store; row order is input order."""

    ids: np.ndarray
    pub_year: np.ndarray
    doc_type: np.ndarray
    discipline: np.ndarray
    journal_impact: np.ndarray
    n_countries: np.ndarray
    n_fundings: np.ndarray
    has_erc_funding: np.ndarray
    has_eu27_address: np.ndarray
    cited_by_patent: np.ndarray
    oa_status: np.ndarray
    citations: np.ndarray
    window: tuple[int, int] = DEFAULT_WINDOW
    source_digest: str = ""

    def __post_init__(self) -> None:
        size = len(self.ids)
        for column in self._columns():
            array = getattr(self, column)
            if len(array) != size:
                raise ValueError(f"column '{column}' has {len(array)} rows, expected {size}")
            array.flags.writeable = False

    @staticmethod
    def _columns() -> tuple[str, ...]:
        return tuple(item.name for item in fields(Corpus) if item.name not in {"window", "source_digest"})

    def __len__(self) -> int:
        return len(self.ids)

    def __iter__(self) -> Iterator[PublicationRecord]:
        for row in range(len(self)):
            yield self.record(row)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Corpus):
            return NotImplemented
        if len(self) != len(other) or self.window != other.window:
            return False
        return all(np.array_equal(getattr(self, name), getattr(other, name)) for name in self._columns())

    __hash__ = None  # type: ignore[assignment]

    def record(self, row: int) -> PublicationRecord:
        return PublicationRecord(
            id=str(self.ids[row]),
            pub_year=int(self.pub_year[row]),
            doc_type=DOC_TYPES[int(self.doc_type[row])],  # type: ignore[arg-type]
            discipline=DISCIPLINES[int(self.discipline[row])],  # type: ignore[arg-type]
            journal_impact=float(self.journal_impact[row]),
            n_countries=int(self.n_countries[row]),
            n_fundings=int(self.n_fundings[row]),
            has_erc_funding=bool(self.has_erc_funding[row]),
            has_eu27_address=bool(self.has_eu27_address[row]),
            cited_by_patent=bool(self.cited_by_patent[row]),
            oa_status=OA_STATUSES[int(self.oa_status[row])],  # type: ignore[arg-type]
            citations=int(self.citations[row]),
        )

    @cached_property
    def _row_by_id(self) -> dict[str, int]:
        return {str(record_id): row for row, record_id in enumerate(self.ids)}

    def rows_for(self, ids: Iterable[str]) -> np.ndarray:
        index = self._row_by_id
        try:
            return np.fromiter((index[str(item)] for item in ids), dtype=np.int64)
        except KeyError as exc:
            raise OacaDataError(f"record id {exc.args[0]!r} is not in the corpus") from exc

    def status_rows(self, status: OaStatus) -> np.ndarray:
        return np.flatnonzero(self.oa_status == _OA_STATUS_CODE[status])

    def status_counts(self) -> dict[str, int]:
        counts = np.bincount(self.oa_status, minlength=len(OA_STATUSES))
        return {status: int(counts[idx]) for idx, status in enumerate(OA_STATUSES)}

    def to_frame(self) -> pd.DataFrame:
        """Decoded copy of the corpus as a pandas DataFrame, one row per record."""
        return pd.DataFrame(
            {
                "id": self.ids.astype(str),
                "pub_year": self.pub_year,
                "doc_type": np.asarray(DOC_TYPES, dtype=object)[self.doc_type],
                "discipline": np.asarray(DISCIPLINES, dtype=object)[self.discipline],
                "journal_impact": self.journal_impact,
                "n_countries": self.n_countries,
                "n_fundings": self.n_fundings,
                "has_erc_funding": self.has_erc_funding,
                "has_eu27_address": self.has_eu27_address,
                "cited_by_patent": self.cited_by_patent,
                "oa_status": np.asarray(OA_STATUSES, dtype=object)[self.oa_status],
                "citations": self.citations,
            }
        )

    @classmethod
    def from_records(
        cls,
        records: Sequence[PublicationRecord | PublicationRecordModel],
        *,
        window: tuple[int, int] = DEFAULT_WINDOW,
        source_digest: str | None = None,
    ) -> "Corpus":
        corpus = cls(
            ids=np.array([item.id for item in records], dtype=object),
            pub_year=np.array([item.pub_year for item in records], dtype=np.int32),
            doc_type=np.array([_DOC_TYPE_CODE[item.doc_type] for item in records], dtype=np.int8),
            discipline=np.array([_DISCIPLINE_CODE[item.discipline] for item in records], dtype=np.int8),
            journal_impact=np.array([item.journal_impact for item in records], dtype=np.float64),
            n_countries=np.array([item.n_countries for item in records], dtype=np.int32),
            n_fundings=np.array([item.n_fundings for item in records], dtype=np.int32),
            has_erc_funding=np.array([item.has_erc_funding for item in records], dtype=bool),
            has_eu27_address=np.array([item.has_eu27_address for item in records], dtype=bool),
            cited_by_patent=np.array([item.cited_by_patent for item in records], dtype=bool),
            oa_status=np.array([_OA_STATUS_CODE[item.oa_status] for item in records], dtype=np.int8),
            citations=np.array([item.citations for item in records], dtype=np.int64),
            window=window,
            source_digest=source_digest or "",
        )
        if source_digest is None:
            corpus = corpus.with_digest(digest_lines(serialize_publications(corpus)))
        return corpus

    def with_digest(self, digest: str) -> "Corpus":
        values = {name: getattr(self, name) for name in self._columns()}
        return Corpus(**values, window=self.window, source_digest=digest)


def digest_lines(lines: Iterable[str]) -> str:
    hasher = hashlib.sha256()
    for line in lines:
        hasher.update(line.encode("utf-8"))
        hasher.update(b"\n")
    return f"sha256:{hasher.hexdigest()}"


def serialize_publications(corpus: Corpus) -> Iterator[str]:
    """Canonical JSON Lines text (without trailing newlines) for every record."""
    for record in corpus:
        yield record.to_json()


def write_corpus(corpus: Corpus, path: str | Path) -> Path:
    return atomic_write_lines(path, serialize_publications(corpus))


# -- parsing --------------------------------------------------------------------

_NumberedLine = tuple[int, str]
_ChunkResult = tuple[list[tuple[int, PublicationRecordModel]], list[tuple[int, OacaDataError]]]


def parse_publications(
    stream: Iterable[str | bytes],
    window: tuple[int, int] = DEFAULT_WINDOW,
    *,
    threads: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> Corpus:
    """Parse JSON Lines publication records; any bad line rejects the whole load."""
    # Strict parsing raises on the first bad line, so no issues come back.
    corpus, _ = _parse(stream, window, threads=threads, chunk_size=chunk_size, strict=True)
    return corpus


def parse_publications_lenient(
    stream: Iterable[str | bytes],
    window: tuple[int, int] = DEFAULT_WINDOW,
    *,
    threads: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> tuple[Corpus, list[LineIssue]]:
    """Parse, skipping bad lines; rejected lines are returned for a sidecar report."""
    return _parse(stream, window, threads=threads, chunk_size=chunk_size, strict=False)


def load_corpus(
    path: str | Path,
    window: tuple[int, int] = DEFAULT_WINDOW,
    *,
    skip_bad_lines: bool = False,
    threads: int = 1,
    chunk_size: int = DEFAULT_CHUNK_SIZE,
) -> tuple[Corpus, list[LineIssue]]:
    file_path = Path(path).expanduser()
    if not file_path.is_file():
        raise OacaDataError(f"Corpus file not found: {file_path}")
    with file_path.open("rb") as fh:
        return _parse(fh, window, threads=threads, chunk_size=chunk_size, strict=not skip_bad_lines)


def _parse(
    stream: Iterable[str | bytes],
    window: tuple[int, int],
    *,
    threads: int,
    chunk_size: int,
    strict: bool,
) -> tuple[Corpus, list[LineIssue]]:
    hasher = hashlib.sha256()
    chunks: list[list[_NumberedLine]] = []
    current: list[_NumberedLine] = []
    issues: list[tuple[int, OacaDataError]] = []

    for line_no, raw in enumerate(stream, start=1):
        data = raw if isinstance(raw, bytes) else raw.encode("utf-8")
        hasher.update(data if data.endswith(b"\n") else data + b"\n")
        if isinstance(raw, bytes):
            try:
                text = raw.decode("utf-8")
            except UnicodeDecodeError:
                issues.append((line_no, MalformedLine(line_no, "not valid UTF-8")))
                continue
        else:
            text = raw
        if not text.strip():
            continue
        current.append((line_no, text))
        if len(current) >= chunk_size:
            chunks.append(current)
            current = []
    if current:
        chunks.append(current)

    if threads > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            results = list(pool.map(lambda chunk: _parse_chunk(chunk, window), chunks))
    else:
        results = [_parse_chunk(chunk, window) for chunk in chunks]

    accepted: list[PublicationRecordModel] = []
    seen: dict[str, int] = {}
    for parsed, errors in results:
        issues.extend(errors)
        for line_no, model in parsed:
            if model.id in seen:
                issues.append((line_no, DuplicateId(model.id, line_no)))
                continue
            seen[model.id] = line_no
            accepted.append(model)

    issues.sort(key=lambda item: item[0])
    if strict and issues:
        raise issues[0][1]

    digest = f"sha256:{hasher.hexdigest()}"
    corpus = Corpus.from_records(accepted, window=window, source_digest=digest)
    rejected = [LineIssue(line_no, type(error).__name__, str(error)) for line_no, error in issues]
    if rejected:
        logger.warning("ingest_lines_rejected", rejected=len(rejected), accepted=len(corpus))
    logger.info("ingest_complete", records=len(corpus), digest=digest, **corpus.status_counts())
    return corpus, rejected


def _parse_chunk(chunk: list[_NumberedLine], window: tuple[int, int]) -> _ChunkResult:
    parsed: list[tuple[int, PublicationRecordModel]] = []
    errors: list[tuple[int, OacaDataError]] = []
    for line_no, text in chunk:
        try:
            model = PublicationRecordModel.model_validate_json(text)
        except ValidationError as exc:
            errors.append((line_no, _translate_validation_error(exc, line_no)))
            continue
        if not window[0] <= model.pub_year <= window[1]:
            errors.append((line_no, OutOfWindowYear(model.id, model.pub_year, window, line_no)))
            continue
        parsed.append((line_no, model))
    return parsed, errors


def _translate_validation_error(exc: ValidationError, line_no: int) -> OacaDataError:
    details = exc.errors(include_url=False)
    for item in details:
        if item["type"] in {"literal_error", "enum"} and item["loc"]:
            return UnknownEnumValue(str(item["loc"][0]), item.get("input"), line_no)
    first = details[0]
    kind = first["type"]
    field = ".".join(str(part) for part in first["loc"]) or "$"
    if kind == "json_invalid":
        return MalformedLine(line_no, f"invalid JSON: {first['msg']}")
    if kind == "missing":
        return MalformedLine(line_no, f"missing field '{field}'")
    if kind == "extra_forbidden":
        return MalformedLine(line_no, f"unexpected field '{field}'")
    if kind in {"model_type", "model_attributes_type"}:
        return MalformedLine(line_no, "record must be a JSON object")
    return MalformedLine(line_no, f"{field}: {first['msg']}")
