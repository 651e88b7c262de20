"""Three-tier verifiable reward for generated computational graphs.

A generation earns 0.5 for a schema-valid graph, another 0.5 when the
graph executes, and 1.0 on top when the executed value matches the
ground truth -- a monotone ladder with totals in {0.0, 0.5, 1.0, 2.0}.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from . import jsonscan
from .answers import numeric_match
from .executor import execute
from .graph import GraphParseError, parse_graph, validate

FMT_WEIGHT = 0.5
EXEC_WEIGHT = 0.5
ACC_WEIGHT = 1.0

# Group std is floored so zero-variance groups get zero advantages
# instead of dividing by zero.
STD_FLOOR = 1e-8


class EmptyGroup(ValueError):
    """score_group needs at least one generation."""


@dataclass(frozen=True)
class RewardBreakdown:
    fmt: int
    exec: int
    acc: int

    @property
    def total(self) -> float:
        return FMT_WEIGHT * self.fmt + EXEC_WEIGHT * self.exec + ACC_WEIGHT * self.acc

    def to_dict(self) -> dict[str, float]:
        return {"fmt": self.fmt, "exec": self.exec, "acc": self.acc, "total": self.total}


@dataclass(frozen=True)
class GroupScore:
    breakdowns: tuple[RewardBreakdown, ...]
    mean: float
    std: float
    advantages: tuple[float, ...]


def extract_graph_candidate(text: str) -> str | None:
    """First outermost balanced JSON object that mentions a "nodes" key."""
    return jsonscan.extract_object(text, required_keys=("nodes",))


def score(generation: str, ground_truth: float) -> RewardBreakdown:
    """Score one raw generation against the ground-truth answer.

    All failure modes map to indicator zeros; this never raises. The
    format indicator requires full structural validation, not merely
    well-formed JSON.
    """
    candidate = extract_graph_candidate(generation)
    if candidate is None:
        return RewardBreakdown(0, 0, 0)
    try:
        graph = parse_graph(candidate)
    except GraphParseError:
        return RewardBreakdown(0, 0, 0)
    if not validate(graph).ok:
        return RewardBreakdown(0, 0, 0)

    outcome = execute(graph)
    if not outcome.ok:
        return RewardBreakdown(1, 0, 0)

    matched = numeric_match(outcome.value, ground_truth)
    return RewardBreakdown(1, 1, int(matched))


def score_group(generations: list[str], ground_truth: float) -> GroupScore:
    """Score a sampled group and compute per-item normalized advantages.

    Advantage = (total - mean) / max(population std, STD_FLOOR); they sum
    to ~0 whenever the group has real variance.
    """
    if not generations:
        raise EmptyGroup("cannot score an empty group")
    breakdowns = tuple(score(g, ground_truth) for g in generations)
    totals = [b.total for b in breakdowns]
    mean = math.fsum(totals) / len(totals)
    variance = math.fsum((t - mean) ** 2 for t in totals) / len(totals)
    std = math.sqrt(variance)
    denom = max(std, STD_FLOOR)
    advantages = tuple((t - mean) / denom for t in totals)
    return GroupScore(breakdowns=breakdowns, mean=mean, std=std, advantages=advantages)
