"""Evaluation statistics over per-problem records.

Covers per-split accuracy, dataset-size-weighted aggregates, distractor
error rates, distractor-count distributions, and the output-tokens vs
graph-complexity regression. Percentages are carried at full precision;
rounding to 0.1 happens only at presentation.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from .graph import GraphSpec

SPLITS = ("MG", "MS", "MG+D", "MS+D")
AUGMENTED_SPLITS = ("MG+D", "MS+D")
DISTRACTOR_TYPES = ("RED", "OAD", "NEED")


class EmptySplit(ValueError):
    pass


class MissingSplit(ValueError):
    pass


class EmptyType(ValueError):
    pass


class EmptyInput(ValueError):
    pass


class DegenerateX(ValueError):
    """Regression input has fewer than two distinct x values."""


@dataclass(frozen=True)
class EvalRecord:
    problem_id: str
    split: str
    correct: bool
    output_tokens: int
    distractor_type: str | None = None
    executed: bool | None = None
    op_count: int | None = None

    def __post_init__(self) -> None:
        if self.split not in SPLITS:
            raise ValueError(f"unknown split {self.split!r}")
        augmented = self.split in AUGMENTED_SPLITS
        if augmented and self.distractor_type is None:
            raise ValueError(f"augmented record {self.problem_id!r} needs a distractor_type")
        if not augmented and self.distractor_type is not None:
            raise ValueError(f"original-split record {self.problem_id!r} carries a distractor_type")
        if self.distractor_type is not None and self.distractor_type not in DISTRACTOR_TYPES:
            raise ValueError(f"unknown distractor_type {self.distractor_type!r}")
        if self.output_tokens < 0:
            raise ValueError("output_tokens must be non-negative")
        if self.op_count is not None and self.op_count < 0:
            raise ValueError("op_count must be non-negative")

    @classmethod
    def from_dict(cls, d: Mapping[str, object]) -> "EvalRecord":
        try:
            return cls(
                problem_id=str(d["problem_id"]),
                split=str(d["split"]),
                correct=bool(d["correct"]),
                output_tokens=int(d["output_tokens"]),
                distractor_type=(None if d.get("distractor_type") is None else str(d["distractor_type"])),
                executed=(None if d.get("executed") is None else bool(d["executed"])),
                op_count=(None if d.get("op_count") is None else int(d["op_count"])),
            )
        except KeyError as e:
            raise ValueError(f"record is missing field {e.args[0]!r}") from None


@dataclass(frozen=True)
class SplitWeights:
    """Problem counts per split, used as weighting for the aggregates."""

    mg: float = 250
    ms: float = 1000
    mg_d: float = 738
    ms_d: float = 2947

    def __post_init__(self) -> None:
        if any(w <= 0 for w in self.as_map().values()):
            raise ValueError("split weights must be positive")

    def as_map(self) -> dict[str, float]:
        return {"MG": self.mg, "MS": self.ms, "MG+D": self.mg_d, "MS+D": self.ms_d}

    @classmethod
    def from_csv(cls, text: str) -> "SplitWeights":
        parts = [p.strip() for p in text.split(",")]
        if len(parts) != 4:
            raise ValueError("expected four comma-separated weights: MG,MS,MG+D,MS+D")
        mg, ms, mg_d, ms_d = (float(p) for p in parts)
        return cls(mg=mg, ms=ms, mg_d=mg_d, ms_d=ms_d)


@dataclass(frozen=True)
class RegressionFit:
    slope: float
    intercept: float
    r_squared: float
    n: int


@dataclass(frozen=True)
class DistractorStats:
    avg: float
    min: int
    max: int


def accuracy(records: Iterable[EvalRecord], split: str) -> float:
    """Percentage of correct records in one split (full precision)."""
    in_split = [r for r in records if r.split == split]
    if not in_split:
        raise EmptySplit(f"no records for split {split!r}")
    return 100.0 * sum(r.correct for r in in_split) / len(in_split)


def _weighted(per_split: Mapping[str, float], weights: SplitWeights, what: str) -> float:
    w = weights.as_map()
    missing = [s for s in SPLITS if s not in per_split]
    if missing:
        raise MissingSplit(f"{what} needs all four splits; missing {missing}")
    total = sum(w[s] for s in SPLITS)
    return sum(w[s] * per_split[s] for s in SPLITS) / total


def weighted_accuracy(per_split_acc: Mapping[str, float], weights: SplitWeights) -> float:
    """Dataset-size-weighted mean accuracy over the four splits."""
    return _weighted(per_split_acc, weights, "weighted accuracy")


def weighted_tokens(per_split_mean_tokens: Mapping[str, float], weights: SplitWeights) -> float:
    """Same weighting applied to per-split mean output-token counts."""
    return _weighted(per_split_mean_tokens, weights, "weighted tokens")


def delta_accuracy(original_acc: float, augmented_acc: float) -> float:
    """Accuracy drop under distractors, in percentage points."""
    return original_acc - augmented_acc


def error_rate_by_type(records: Iterable[EvalRecord]) -> dict[str, float]:
    """Per-distractor-type error percentage; types without records are omitted."""
    counts: dict[str, list[int]] = {}
    for r in records:
        if r.distractor_type is None:
            raise EmptyType(f"record {r.problem_id!r} has no distractor_type")
        entry = counts.setdefault(r.distractor_type, [0, 0])
        entry[0] += not r.correct
        entry[1] += 1
    return {t: 100.0 * wrong / total for t, (wrong, total) in counts.items()}


def distractor_stats(graphs: Sequence[GraphSpec]) -> DistractorStats:
    """Average (to 0.01), min, and max distractor-node count per graph."""
    if not graphs:
        raise EmptyInput("no graphs given")
    counts = [sum(n.distractor for n in g.nodes) for g in graphs]
    return DistractorStats(
        avg=round(math.fsum(counts) / len(counts), 2), min=min(counts), max=max(counts)
    )


def fit_tokens_vs_complexity(records: Iterable[EvalRecord]) -> RegressionFit:
    """OLS of output tokens on graph op-node count.

    Restricted to correct records that executed successfully and carry an
    op_count. Requires at least two distinct op_count values; a constant
    y yields r_squared=0 with a warning.
    """
    points = [
        (r.op_count, r.output_tokens)
        for r in records
        if r.correct and r.executed and r.op_count is not None
    ]
    xs = np.array([p[0] for p in points], dtype=float)
    ys = np.array([p[1] for p in points], dtype=float)
    if len(points) < 2 or len(set(xs.tolist())) < 2:
        raise DegenerateX("need at least two distinct op_count values")

    design = np.column_stack([xs, np.ones_like(xs)])
    (slope, intercept), *_ = np.linalg.lstsq(design, ys, rcond=None)
    predicted = slope * xs + intercept
    ss_res = float(np.sum((ys - predicted) ** 2))
    ss_tot = float(np.sum((ys - ys.mean()) ** 2))
    if ss_tot == 0.0:
        warnings.warn("constant y: r_squared defined as 0", stacklevel=2)
        r_squared = 0.0
    else:
        r_squared = 1.0 - ss_res / ss_tot
    return RegressionFit(slope=float(slope), intercept=float(intercept), r_squared=r_squared, n=len(points))


def round_pct(x: float) -> float:
    """Presentation rounding for percentages (one decimal place)."""
    return round(x, 1)


def _mean_tokens(records: list[EvalRecord], correct_only: bool) -> float:
    pool = [r for r in records if r.correct] if correct_only else records
    if not pool:
        raise EmptySplit("no records to average tokens over")
    return math.fsum(r.output_tokens for r in pool) / len(pool)


def build_report(
    records: Sequence[EvalRecord],
    weights: SplitWeights | None = None,
    *,
    partial: bool = False,
    tokens_correct_only: bool = False,
) -> dict:
    """Aggregate records into the harness report.

    With partial=True, missing splits are tolerated and the weighted
    aggregates renormalize over the splits present; otherwise all four
    splits are required.
    """
    weights = weights or SplitWeights()
    by_split: dict[str, list[EvalRecord]] = {s: [] for s in SPLITS}
    for r in records:
        by_split[r.split].append(r)

    present = [s for s in SPLITS if by_split[s]]
    missing = [s for s in SPLITS if not by_split[s]]
    if missing and not partial:
        raise MissingSplit(f"missing splits {missing}; rerun with partial=True to allow")

    acc = {s: accuracy(by_split[s], s) for s in present}
    toks = {s: _mean_tokens(by_split[s], tokens_correct_only) for s in present}

    if missing:
        w = weights.as_map()
        total_w = sum(w[s] for s in present)
        w_acc = sum(w[s] * acc[s] for s in present) / total_w
        w_tok = sum(w[s] * toks[s] for s in present) / total_w
    else:
        w_acc = weighted_accuracy(acc, weights)
        w_tok = weighted_tokens(toks, weights)

    delta = {
        base: delta_accuracy(acc[base], acc[base + "+D"])
        for base in ("MG", "MS")
        if base in acc and base + "+D" in acc
    }

    augmented = [r for s in AUGMENTED_SPLITS for r in by_split[s]]
    error_rates = error_rate_by_type(augmented) if augmented else {}

    try:
        fit = fit_tokens_vs_complexity(records)
        regression = {
            "slope": fit.slope,
            "intercept": fit.intercept,
            "r_squared": fit.r_squared,
            "n": fit.n,
        }
    except DegenerateX:
        regression = None

    return {
        "accuracy_original": {s: acc[s] for s in ("MG", "MS") if s in acc},
        "accuracy_distractor": {s: acc[s] for s in AUGMENTED_SPLITS if s in acc},
        "delta": delta,
        "weighted_accuracy": w_acc,
        "tokens_original": {s: toks[s] for s in ("MG", "MS") if s in toks},
        "tokens_distractor": {s: toks[s] for s in AUGMENTED_SPLITS if s in toks},
        "weighted_tokens": w_tok,
        "error_rates": error_rates,
        "regression": regression,
        "counts": {s: len(by_split[s]) for s in present},
        "weights": weights.as_map(),
        "partial": bool(missing),
    }
