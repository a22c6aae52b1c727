# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: 2026 OACA Toolkit Contributors
"""Atomic writers for pipeline artifacts."""

from __future__ import annotations

import json
import os
import tempfile
from pathlib import Path
from typing import Any, Iterable

import pandas as pd

from oaca.core.errors import ReportIoError


def atomic_write_bytes(path: str | Path, payload: bytes) -> Path:
    """Write `payload` next to `path` and rename it into place."""
    target = Path(path).expanduser()
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp_name = tempfile.mkstemp(prefix=f".{target.name}.", suffix=".tmp", dir=target.parent)
    except OSError as exc:
        raise ReportIoError(f"Cannot write {target}: {exc}") from exc
    try:
        with os.fdopen(fd, "wb") as fh:
            fh.write(payload)
        os.replace(tmp_name, target)
    except OSError as exc:
        Path(tmp_name).unlink(missing_ok=True)
        raise ReportIoError(f"Cannot write {target}: {exc}") from exc
    return target


def atomic_write_text(path: str | Path, text: str) -> Path:
    return atomic_write_bytes(path, text.encode("utf-8"))


def atomic_write_lines(path: str | Path, lines: Iterable[str]) -> Path:
    return atomic_write_text(path, "".join(f"{line}\n" for line in lines))


def canonical_json(payload: Any) -> str:
    return json.dumps(payload, sort_keys=True, indent=2, ensure_ascii=True) + "\n"


def atomic_write_json(path: str | Path, payload: Any) -> Path:
    return atomic_write_text(path, canonical_json(payload))


def frame_to_csv(frame: pd.DataFrame) -> str:
    # Floats keep their shortest round-trip repr so re-reading the CSV is lossless.
    return frame.to_csv(index=False, lineterminator="\n")


def atomic_write_frame(path: str | Path, frame: pd.DataFrame) -> Path:
    return atomic_write_text(path, frame_to_csv(frame))


def read_frame(path: str | Path, **options: Any) -> pd.DataFrame:
    try:
        return pd.read_csv(
            Path(path).expanduser(), float_precision="round_trip", keep_default_na=False, na_values=[""], **options
        )
    except OSError as exc:
        raise ReportIoError(f"Cannot read {path}: {exc}") from exc
