# SPDX-License-Identifier: Apache-2.0
# SPDX-FileCopyrightText: 2026 OACA Toolkit Contributors
"""Raking-ratio calibration (iterative proportional fitting) of control-pool weights."""

from __future__ import annotations

from concurrent.futures import Executor, ThreadPoolExecutor
from contextlib import nullcontext
from dataclasses import dataclass, replace
from typing import Any, Iterable, Mapping, Sequence

import numpy as np
import pandas as pd
import structlog

from oaca.core.cohort import CohortPair
from oaca.core.errors import EmptySample, InfeasibleTargets, OacaDataError, StructuralZero
from oaca.core.stratify import FEATURES, StratumTable

logger = structlog.get_logger(__name__)

DEFAULT_TOLERANCE = 1e-8
DEFAULT_MAX_ITERATIONS = 1000
TARGET_SUM_TOLERANCE = 1e-12
WEIGHT_QUANTILES: tuple[float, ...] = (0.01, 0.25, 0.5, 0.75, 0.99)
FULL_CROSS = "stratum"

# Fixed partial-sum block: the reduction tree depends on this, never on thread count.
_REDUCTION_BLOCK = 1 << 16
_MAX_TRIM_PASSES = 100


@dataclass(frozen=True, eq=False)
class MarginSpec:
    feature: str
    categories: tuple[Any, ...]
    targets: np.ndarray
    sample_size: int = 0

    def __post_init__(self) -> None:
        targets = np.asarray(self.targets, dtype=np.float64)
        if targets.shape != (len(self.categories),):
            raise InfeasibleTargets(
                self.feature, f"{targets.size} targets for {len(self.categories)} categories"
            )
        targets.flags.writeable = False
        object.__setattr__(self, "targets", targets)

    def validate(self) -> None:
        if np.any(self.targets < 0):
            raise InfeasibleTargets(self.feature, "targets must be nonnegative")
        if not np.all(np.isfinite(self.targets)):
            raise InfeasibleTargets(self.feature, "targets must be finite")
        if abs(float(np.sum(self.targets)) - 1.0) > TARGET_SUM_TOLERANCE:
            raise InfeasibleTargets(self.feature, f"targets sum to {float(np.sum(self.targets))!r}, not 1")

    def as_dict(self) -> dict[str, Any]:
        return {
            "feature": self.feature,
            "categories": [_jsonable(item) for item in self.categories],
            "targets": [float(item) for item in self.targets],
        }


@dataclass(frozen=True, eq=False)
class RakingProblem:
    """Control pool with one category index per record for every margin."""

    rows: np.ndarray
    margins: tuple[MarginSpec, ...]
    pool_indices: tuple[np.ndarray, ...]
    tolerance: float = DEFAULT_TOLERANCE
    max_iterations: int = DEFAULT_MAX_ITERATIONS
    total_weight: float | None = None

    def __post_init__(self) -> None:
        if len(self.margins) != len(self.pool_indices):
            raise OacaDataError("every margin needs a pool index array")
        for margin, indices in zip(self.margins, self.pool_indices):
            if len(indices) != len(self.rows):
                raise OacaDataError(f"margin '{margin.feature}': index array does not cover the pool")
            if len(indices) and (indices.min() < 0 or indices.max() >= len(margin.categories)):
                raise OacaDataError(
                    f"margin '{margin.feature}': pool record outside the category list"
                )

    @classmethod
    def from_labels(
        cls,
        rows: np.ndarray,
        labels: Mapping[str, Sequence[Any]],
        margins: Sequence[MarginSpec],
        **options: Any,
    ) -> "RakingProblem":
        """Build a problem from per-record category labels instead of indices."""
        pool_indices = []
        for margin in margins:
            lookup = {category: idx for idx, category in enumerate(margin.categories)}
            try:
                pool_indices.append(
                    np.fromiter((lookup[item] for item in labels[margin.feature]), dtype=np.int64)
                )
            except KeyError as exc:
                raise OacaDataError(
                    f"margin '{margin.feature}': pool record label {exc.args[0]!r} outside the category list"
                ) from exc
        return cls(
            rows=np.asarray(rows, dtype=np.int64),
            margins=tuple(margins),
            pool_indices=tuple(pool_indices),
            **options,
        )

    @property
    def resolved_total(self) -> float:
        if self.total_weight is not None:
            return float(self.total_weight)
        sample_size = self.margins[0].sample_size if self.margins else 0
        return float(sample_size or len(self.rows))


@dataclass(frozen=True, eq=False)
class WeightVector:
    rows: np.ndarray
    weights: np.ndarray
    iterations_used: int
    final_discrepancy: float
    converged: bool
    total_weight: float
    zero_target_categories: tuple[tuple[str, Any], ...] = ()
    trimmed: bool = False

    def __post_init__(self) -> None:
        self.rows.flags.writeable = False
        self.weights.flags.writeable = False

    def __len__(self) -> int:
        return len(self.weights)

    def scaled(self, factor: float) -> "WeightVector":
        return replace(self, weights=self.weights * factor, total_weight=self.total_weight * factor)

    def diagnostics(self) -> dict[str, Any]:
        w = self.weights
        stats: dict[str, Any] = {
            "n": int(len(w)),
            "iterations": int(self.iterations_used),
            "final_discrepancy": float(self.final_discrepancy),
            "converged": bool(self.converged),
            "total_weight": float(self.total_weight),
            "trimmed": bool(self.trimmed),
            "zero_weight_records": int(np.count_nonzero(w == 0)),
            "zero_target_categories": [
                {"margin": margin, "category": _jsonable(category)}
                for margin, category in self.zero_target_categories
            ],
        }
        if len(w):
            square_sum = float(np.dot(w, w))
            stats.update(
                {
                    "min": float(w.min()),
                    "max": float(w.max()),
                    "mean": float(w.mean()),
                    "quantiles": {
                        f"{q:g}": float(value) for q, value in zip(WEIGHT_QUANTILES, np.quantile(w, WEIGHT_QUANTILES))
                    },
                    "kish_effective_n": float(w.sum() ** 2 / square_sum) if square_sum > 0 else 0.0,
                }
            )
        return stats

    def to_frame(self, ids: np.ndarray) -> pd.DataFrame:
        return pd.DataFrame({"id": ids[self.rows].astype(str), "weight": self.weights})


# -- margins --------------------------------------------------------------------


def compute_margins(
    sample: np.ndarray,
    table: StratumTable,
    features: Iterable[str] = FEATURES,
) -> list[MarginSpec]:
    """Empirical category proportions of `sample` for each feature."""
    sample = np.asarray(sample, dtype=np.int64)
    if len(sample) == 0:
        raise EmptySample("OA sample")
    margins = []
    for feature in features:
        categories = table.scheme.categories[feature]
        counts = np.bincount(table.indices[feature][sample], minlength=len(categories))
        margins.append(
            MarginSpec(
                feature=feature,
                categories=tuple(categories),
                targets=counts / len(sample),
                sample_size=len(sample),
            )
        )
    return margins


def full_cross_margin(
    oa_rows: np.ndarray, control_rows: np.ndarray, table: StratumTable
) -> tuple[MarginSpec, np.ndarray]:
    """Single margin over the full stratum cross-classification of the OA sample."""
    if len(oa_rows) == 0:
        raise EmptySample("OA sample")
    strata, counts = np.unique(table.codes[oa_rows], return_counts=True)
    control_codes = table.codes[control_rows]
    positions = np.searchsorted(strata, control_codes)
    clipped = np.minimum(positions, len(strata) - 1)
    if len(control_codes) and not np.array_equal(strata[clipped], control_codes):
        raise OacaDataError("control pool contains records outside the OA strata")
    margin = MarginSpec(
        feature=FULL_CROSS,
        categories=tuple(table.scheme.decode(code) for code in strata),
        targets=counts / len(oa_rows),
        sample_size=len(oa_rows),
    )
    return margin, positions.astype(np.int64)


def build_raking_problem(
    cohort: CohortPair,
    *,
    oa_rows: np.ndarray | None = None,
    control_rows: np.ndarray | None = None,
    full_cross: bool = False,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    total_weight: float | None = None,
) -> RakingProblem:
    oa = cohort.oa_rows if oa_rows is None else oa_rows
    pool = cohort.control_rows if control_rows is None else control_rows
    if full_cross:
        margin, positions = full_cross_margin(oa, pool, cohort.table)
        margins: tuple[MarginSpec, ...] = (margin,)
        pool_indices: tuple[np.ndarray, ...] = (positions,)
    else:
        margins = tuple(compute_margins(oa, cohort.table))
        pool_indices = tuple(cohort.table.indices[m.feature][pool] for m in margins)
    return RakingProblem(
        rows=pool,
        margins=margins,
        pool_indices=pool_indices,
        tolerance=tolerance,
        max_iterations=max_iterations,
        total_weight=float(len(oa)) if total_weight is None else total_weight,
    )


# -- raking ---------------------------------------------------------------------


def rake_weights(
    problem: RakingProblem,
    *,
    threads: int = 1,
    sweep_order: Sequence[int] | None = None,
) -> WeightVector:
    """Cyclic multiplicative margin updates until the sup-norm discrepancy is within tolerance."""
    n = len(problem.rows)
    if n == 0:
        raise EmptySample("control pool")
    if not problem.margins:
        raise OacaDataError("raking needs at least one margin")
    order = list(range(len(problem.margins))) if sweep_order is None else list(sweep_order)
    if sorted(order) != list(range(len(problem.margins))):
        raise OacaDataError(f"sweep_order {order} is not a permutation of the margins")

    zero_targets = _check_feasibility(problem)
    total = problem.resolved_total
    weights = np.full(n, total / n, dtype=np.float64)
    targets = [margin.targets for margin in problem.margins]
    sizes = [len(margin.categories) for margin in problem.margins]

    pool: Any = ThreadPoolExecutor(max_workers=threads) if threads > 1 else nullcontext()
    with pool as executor:
        iterations = 0
        discrepancy = float("inf")
        while iterations < problem.max_iterations and weights.any():
            for position in order:
                indices = problem.pool_indices[position]
                mass = _weighted_bincount(indices, weights, sizes[position], executor)
                if mass.sum() <= 0:
                    break
                proportions = mass / mass.sum()
                factors = np.divide(
                    targets[position],
                    proportions,
                    out=np.zeros_like(proportions),
                    where=proportions > 0,
                )
                weights = weights * factors[indices]
            iterations += 1
            discrepancy = _discrepancy(problem, weights, executor)
            if discrepancy <= problem.tolerance:
                break

    weight_sum = weights.sum()
    if weight_sum > 0:
        weights = weights * (total / weight_sum)
        discrepancy = _discrepancy(problem, weights, None)
    converged = discrepancy <= problem.tolerance
    vector = WeightVector(
        rows=np.asarray(problem.rows, dtype=np.int64).copy(),
        weights=weights,
        iterations_used=iterations,
        final_discrepancy=float(discrepancy),
        converged=bool(converged),
        total_weight=total,
        zero_target_categories=zero_targets,
    )
    log = logger.info if converged else logger.warning
    log(
        "raking_finished",
        converged=converged,
        iterations=iterations,
        discrepancy=float(discrepancy),
        pool=n,
        margins=len(problem.margins),
    )
    return vector


def margin_discrepancy(problem: RakingProblem, weights: np.ndarray) -> float:
    """Sup-norm over all margins and categories of |weighted proportion - target|."""
    return _discrepancy(problem, weights, None)


def post_stratification_weights(cohort: CohortPair, total_weight: float | None = None) -> WeightVector:
    """Closed-form cell-ratio weights on the full stratum cross-classification."""
    oa_rows = cohort.oa_rows
    if len(oa_rows) == 0:
        raise EmptySample("OA sample")
    strata, n_oa = np.unique(cohort.table.codes[oa_rows], return_counts=True)
    positions = np.searchsorted(strata, cohort.table.codes[cohort.control_rows])
    n_ctrl = np.bincount(positions, minlength=len(strata))
    if np.any(n_ctrl == 0):
        raise StructuralZero(FULL_CROSS, cohort.table.scheme.decode(int(strata[np.argmax(n_ctrl == 0)])))
    total = float(len(oa_rows)) if total_weight is None else float(total_weight)
    weights = (n_oa[positions] / n_ctrl[positions]) * (total / len(oa_rows))
    return WeightVector(
        rows=np.asarray(cohort.control_rows, dtype=np.int64).copy(),
        weights=weights.astype(np.float64),
        iterations_used=0,
        final_discrepancy=0.0,
        converged=True,
        total_weight=total,
    )


def trim_weights(
    vector: WeightVector,
    max_weight_ratio: float,
    problem: RakingProblem | None = None,
) -> WeightVector:
    """Cap weight/mean-weight at `max_weight_ratio`, renormalizing after each pass."""
    if max_weight_ratio <= 1.0:
        raise OacaDataError("max_weight_ratio must be > 1")
    weights = vector.weights.copy()
    total = weights.sum()
    trimmed = False
    for _ in range(_MAX_TRIM_PASSES):
        cap = max_weight_ratio * weights.mean()
        if not np.any(weights > cap * (1 + 1e-12)):
            break
        trimmed = True
        weights = np.minimum(weights, cap)
        weights *= total / weights.sum()
    discrepancy = vector.final_discrepancy
    converged = vector.converged
    if problem is not None:
        discrepancy = margin_discrepancy(problem, weights)
        converged = converged and discrepancy <= problem.tolerance
    if trimmed:
        log = logger.info if converged else logger.warning
        log("weights_trimmed", max_weight_ratio=max_weight_ratio, discrepancy=discrepancy, converged=converged)
    return replace(
        vector, weights=weights, final_discrepancy=float(discrepancy), converged=bool(converged), trimmed=trimmed
    )


def rake_cohort(
    cohort: CohortPair,
    *,
    tolerance: float = DEFAULT_TOLERANCE,
    max_iterations: int = DEFAULT_MAX_ITERATIONS,
    max_weight_ratio: float | None = None,
    full_cross: bool = False,
    per_year: bool = False,
    threads: int = 1,
) -> WeightVector:
    """Rake a cohort's control pool globally or within publication-year slices."""
    options = {"full_cross": full_cross, "tolerance": tolerance, "max_iterations": max_iterations}
    if not per_year:
        problem = build_raking_problem(cohort, **options)
        vector = rake_weights(problem, threads=threads)
        if max_weight_ratio is not None:
            vector = trim_weights(vector, max_weight_ratio, problem)
        return vector

    years = cohort.corpus.pub_year
    parts: list[WeightVector] = []
    for year in np.unique(years[cohort.oa_rows]):
        oa_rows = cohort.oa_rows[years[cohort.oa_rows] == year]
        control_rows = cohort.control_rows[years[cohort.control_rows] == year]
        problem = build_raking_problem(cohort, oa_rows=oa_rows, control_rows=control_rows, **options)
        part = rake_weights(problem, threads=threads)
        if max_weight_ratio is not None:
            part = trim_weights(part, max_weight_ratio, problem)
        parts.append(part)
    return _concatenate(parts)


# -- internals ------------------------------------------------------------------


def _check_feasibility(problem: RakingProblem) -> tuple[tuple[str, Any], ...]:
    zero_targets: list[tuple[str, Any]] = []
    for margin, indices in zip(problem.margins, problem.pool_indices):
        margin.validate()
        counts = np.bincount(indices, minlength=len(margin.categories))
        for position in np.flatnonzero((margin.targets > 0) & (counts == 0)):
            raise StructuralZero(margin.feature, margin.categories[position])
        for position in np.flatnonzero((margin.targets == 0) & (counts > 0)):
            zero_targets.append((margin.feature, margin.categories[position]))
    if zero_targets:
        logger.warning(
            "zero_target_categories",
            count=len(zero_targets),
            categories=[f"{name}={_jsonable(category)}" for name, category in zero_targets[:10]],
        )
    return tuple(zero_targets)


def _weighted_bincount(
    indices: np.ndarray, weights: np.ndarray, size: int, executor: Executor | None
) -> np.ndarray:
    starts = range(0, len(indices), _REDUCTION_BLOCK)

    def block(start: int) -> np.ndarray:
        stop = start + _REDUCTION_BLOCK
        return np.bincount(indices[start:stop], weights=weights[start:stop], minlength=size)

    partials = executor.map(block, starts) if executor is not None else map(block, starts)
    total = np.zeros(size, dtype=np.float64)
    for partial in partials:
        total += partial
    return total


def _discrepancy(problem: RakingProblem, weights: np.ndarray, executor: Executor | None) -> float:
    worst = 0.0
    for margin, indices in zip(problem.margins, problem.pool_indices):
        mass = _weighted_bincount(indices, weights, len(margin.categories), executor)
        weight_sum = mass.sum()
        if weight_sum <= 0:
            return float("inf")
        worst = max(worst, float(np.max(np.abs(mass / weight_sum - margin.targets))))
    return worst


def _concatenate(parts: list[WeightVector]) -> WeightVector:
    rows = np.concatenate([part.rows for part in parts])
    weights = np.concatenate([part.weights for part in parts])
    order = np.argsort(rows, kind="stable")
    return WeightVector(
        rows=rows[order],
        weights=weights[order],
        iterations_used=max(part.iterations_used for part in parts),
        final_discrepancy=max(part.final_discrepancy for part in parts),
        converged=all(part.converged for part in parts),
        total_weight=float(sum(part.total_weight for part in parts)),
        zero_target_categories=tuple(item for part in parts for item in part.zero_target_categories),
        trimmed=any(part.trimmed for part in parts),
    )


def _jsonable(value: Any) -> Any:
    if hasattr(value, "label"):
        return value.label()
    if isinstance(value, (np.integer,)):
        return int(value)
    if isinstance(value, (np.bool_,)):
        return bool(value)
    return value
