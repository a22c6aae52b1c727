# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: 2026 OACA Toolkit Contributors
"""Public OACA pipeline facade."""

from __future__ import annotations

import json
from pathlib import Path
from typing import Any, Mapping, Sequence

import numpy as np
import structlog
from pydantic import ValidationError

from oaca.config.loader import load_config, load_sim_config, validation_messages
from oaca.config.models import OacaSettings
from oaca.core.artifacts import atomic_write_frame, atomic_write_json, read_frame
from oaca.core.cohort import CohortPair, build_cohort, double_candidates
from oaca.core.errors import EmptyOaSample, InvalidConfig
from oaca.core.metrics import (
    SLICE_KINDS,
    OacaResult,
    Period,
    ReferenceTable,
    build_reference_table,
    oaca_report,
)
from oaca.core.models import ROUTES, SimConfigModel
from oaca.core.rake import WeightVector, rake_cohort
from oaca.core.records import Corpus, LineIssue, load_corpus, write_corpus
from oaca.core.report import (
    render_discipline_table,
    render_trend_chart,
    trend_series,
    write_results_csv,
    write_summary,
)
from oaca.core.simulate import generate, parse_sim_config, true_oaca
from oaca.core.stratify import ClassScheme, StratumTable, classify_corpus, stratum_counts

logger = structlog.get_logger(__name__)

RUN_ALL_FILES: tuple[str, ...] = (
    "corpus.jsonl",
    "strata.csv",
    "cohorts.json",
    "weights_gold_full.csv",
    "weights_gold_hybrid.csv",
    "convergence.json",
    "reference_table.csv",
    "results.csv",
    "summary.json",
    "trend.svg",
    "disciplines.csv",
)


class OacaPipeline:
    """Stage-by-stage access to the estimator, plus a one-shot `run_all`."""

    def __init__(self, settings: OacaSettings | None = None) -> None:
        self.settings = settings or OacaSettings()
        self.ingest_issues: list[LineIssue] = []
        self.sim_config: SimConfigModel | None = None

    @classmethod
    def from_config(
        cls,
        path: str | Path | None = None,
        *,
        seed: int | None = None,
        threads: int | None = None,
        quiet: bool | None = None,
    ) -> "OacaPipeline":
        """Load settings from `path` (defaults when None) and apply runtime overrides."""
        settings = load_config(path)
        overrides = {
            key: value
            for key, value in (("seed", seed), ("threads", threads), ("quiet", quiet))
            if value is not None
        }
        if overrides:
            runtime = settings.runtime.model_copy(update=overrides)
            settings = settings.model_copy(update={"runtime": runtime})
        return cls(settings)

    def override(self, section: str, **values: Any) -> "OacaPipeline":
        """Replace keys of one settings section in place; `None` values are ignored."""
        updates = {key: value for key, value in values.items() if value is not None}
        if updates:
            current = getattr(self.settings, section)
            try:
                merged = type(current).model_validate({**current.model_dump(), **updates})
            except ValidationError as exc:
                raise InvalidConfig(validation_messages(exc), what=f"{section} settings") from exc
            self.settings = self.settings.model_copy(update={section: merged})
        return self

    @property
    def threads(self) -> int:
        return self.settings.runtime.threads

    @property
    def periods(self) -> list[Period]:
        return [Period.parse(item) for item in self.settings.metrics.periods]

    # -- stages ---------------------------------------------------------------

    def load_corpus(self, path: str | Path, *, skip_bad_lines: bool | None = None) -> Corpus:
        ingest = self.settings.ingest
        corpus, issues = load_corpus(
            path,
            ingest.window,
            skip_bad_lines=ingest.skip_bad_lines if skip_bad_lines is None else skip_bad_lines,
            threads=self.threads,
            chunk_size=ingest.chunk_size,
        )
        self.ingest_issues = issues
        self.sim_config = None
        return corpus

    def simulate(
        self,
        config: SimConfigModel | Mapping[str, Any] | str | Path,
        *,
        seed: int | None = None,
        n_records: int | None = None,
    ) -> Corpus:
        """Generate a synthetic corpus from a config object, file path or preset name."""
        if isinstance(config, (str, Path)):
            sim_config = load_sim_config(config)
        else:
            sim_config = parse_sim_config(config)
        if seed is None:
            seed = self.settings.runtime.seed
        updates = {key: value for key, value in (("seed", seed), ("n_records", n_records)) if value is not None}
        if updates:
            sim_config = parse_sim_config({**sim_config.model_dump(), **updates})
        self.sim_config = sim_config
        return generate(sim_config, threads=self.threads)

    def stratify(self, corpus: Corpus) -> StratumTable:
        scheme = ClassScheme(window=corpus.window, fundings_zero_class=self.settings.stratify.fundings_zero_class)
        return classify_corpus(corpus, scheme)

    def match(
        self,
        corpus: Corpus,
        table: StratumTable | None = None,
        routes: Sequence[str] = ROUTES,
    ) -> dict[str, CohortPair]:
        """Cohorts for every requested route that has OA records; empty routes are skipped."""
        table = table or self.stratify(corpus)
        cohorts: dict[str, CohortPair] = {}
        skipped: list[EmptyOaSample] = []
        for route in routes:
            try:
                cohorts[route] = build_cohort(corpus, route, table)  # type: ignore[arg-type]
            except EmptyOaSample as exc:
                logger.warning("route_skipped_no_oa_records", route=route)
                skipped.append(exc)
        if not cohorts and skipped:
            raise skipped[0]
        return cohorts

    def rake(self, cohorts: Mapping[str, CohortPair]) -> dict[str, WeightVector]:
        options = self.settings.rake
        return {
            route: rake_cohort(
                cohort,
                tolerance=options.tolerance,
                max_iterations=options.max_iterations,
                max_weight_ratio=options.max_weight_ratio,
                full_cross=options.full_cross,
                per_year=options.per_year,
                threads=self.threads,
            )
            for route, cohort in cohorts.items()
        }

    def load_weights(self, corpus: Corpus, directory: str | Path, routes: Sequence[str]) -> dict[str, WeightVector]:
        """Weights written by a previous `rake` run (`weights_<route>.csv` + `convergence.json`)."""
        base = Path(directory).expanduser()
        convergence_path = base / "convergence.json"
        convergence = json.loads(convergence_path.read_text(encoding="utf-8")) if convergence_path.is_file() else {}
        loaded: dict[str, WeightVector] = {}
        for route in routes:
            frame = read_frame(base / f"weights_{route}.csv", dtype={"id": str})
            weights = frame["weight"].to_numpy(dtype=np.float64)
            info = convergence.get(route)
            if info is None:
                logger.warning("convergence_record_missing", route=route, path=str(convergence_path))
                info = {}
            loaded[route] = WeightVector(
                rows=corpus.rows_for(frame["id"]),
                weights=weights,
                iterations_used=int(info.get("iterations", 0)),
                final_discrepancy=float(info.get("final_discrepancy", float("inf"))),
                converged=bool(info.get("converged", False)),
                total_weight=float(weights.sum()),
            )
        return loaded

    def reference_table(self, corpus: Corpus) -> ReferenceTable:
        external = self.settings.metrics.reference_table
        if external:
            return ReferenceTable.load(external)
        return build_reference_table(corpus)

    def results(
        self,
        corpus: Corpus,
        cohorts: Mapping[str, CohortPair],
        weights: Mapping[str, WeightVector],
        refs: ReferenceTable,
        slicing: Sequence[str] = SLICE_KINDS,
        *,
        baseline: str | None = None,
    ) -> list[OacaResult]:
        return oaca_report(
            corpus,
            cohorts,
            weights,
            refs,
            slicing,
            periods=self.periods,
            baseline=baseline or self.settings.metrics.baseline,  # type: ignore[arg-type]
            allow_nonconverged=self.settings.rake.allow_nonconverged,
        )

    # -- one shot -------------------------------------------------------------

    def run_all(self, corpus: Corpus, out_dir: str | Path) -> dict[str, Any]:
        """Every stage in order; artifacts land in `out_dir`, the summary is returned."""
        out = Path(out_dir).expanduser()
        out.mkdir(parents=True, exist_ok=True)
        if self.sim_config is not None:
            write_corpus(corpus, out / "corpus.jsonl")

        table = self.stratify(corpus)
        atomic_write_frame(out / "strata.csv", stratum_counts(corpus, table))

        cohorts = self.match(corpus, table)
        candidates = double_candidates(corpus, table)
        atomic_write_json(
            out / "cohorts.json",
            {
                "double_candidates": int(len(candidates)),
                "routes": {route: cohort.summary() for route, cohort in cohorts.items()},
            },
        )

        weights = self.rake(cohorts)
        for route, vector in weights.items():
            atomic_write_frame(out / f"weights_{route}.csv", vector.to_frame(corpus.ids))
        atomic_write_json(out / "convergence.json", {route: vector.diagnostics() for route, vector in weights.items()})

        refs = self.reference_table(corpus)
        refs.write(out / "reference_table.csv")
        results = self.results(corpus, cohorts, weights, refs)
        write_results_csv(results, out / "results.csv")

        series = trend_series(results)
        if series:
            render_trend_chart(series, out / "trend.svg")
        else:
            logger.warning("trend_chart_skipped", reason="no per-year rows")
        _, missing = render_discipline_table(
            results, out / "disciplines.csv", [period.label() for period in self.periods]
        )

        summary = self._summary(corpus, cohorts, weights, results, refs, len(candidates), missing)
        write_summary(summary, out / "summary.json")
        logger.info("run_all_complete", out_dir=str(out), routes=list(cohorts))
        return summary

    def _summary(
        self,
        corpus: Corpus,
        cohorts: Mapping[str, CohortPair],
        weights: Mapping[str, WeightVector],
        results: Sequence[OacaResult],
        refs: ReferenceTable,
        n_candidates: int,
        missing: Sequence[str],
    ) -> dict[str, Any]:
        routes: dict[str, Any] = {}
        for route, cohort in cohorts.items():
            overall = {row.adjusted: row for row in results if row.route == route and row.slice == "overall"}
            vector = weights[route]
            entry: dict[str, Any] = {
                **cohort.summary(),
                "converged": vector.converged,
                "iterations": vector.iterations_used,
                "final_discrepancy": vector.final_discrepancy,
                "adjusted_oaca_pct": overall[True].oaca_pct if True in overall else None,
                "naive_oaca_pct": overall[False].oaca_pct if False in overall else None,
                "zero_cell_records": {
                    "oa": overall[True].n_zero_cell_oa if True in overall else None,
                    "control": overall[True].n_zero_cell_ctrl if True in overall else None,
                },
            }
            if self.sim_config is not None:
                entry["true_oaca_pct"] = true_oaca(self.sim_config, route)  # type: ignore[arg-type]
            routes[route] = entry
        return {
            "corpus": {
                "records": len(corpus),
                "source_digest": corpus.source_digest,
                "window": list(corpus.window),
                "status_counts": corpus.status_counts(),
            },
            "simulated": self.sim_config is not None,
            "seed": self.sim_config.seed if self.sim_config is not None else None,
            "double_candidates": n_candidates,
            "zero_reference_cells": len(refs.zero_cells),
            "routes": routes,
            "missing_disciplines": list(missing),
        }
