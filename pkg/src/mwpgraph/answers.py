"""Final-answer normalization and comparison across output styles.

Handles Bengali digits, \\boxed{} answers from reasoning traces, the
Bangla answer phrase used by step-by-step solutions, and a tolerant
numeric equality suited to double arithmetic.
"""

from __future__ import annotations

import math
import re
from dataclasses import dataclass

BENGALI_DIGITS = str.maketrans("০১২৩৪৫৬৭৮৯", "0123456789")

# Commas directly between digits are grouping separators ("১,২২,১৯৫" is
# 122195); commas elsewhere are punctuation and survive.
_GROUPING_RE = re.compile(r"(?<=\d),(?=\d)")

_NUMBER_RE = re.compile(r"-?\d+(?:\.\d+)?")
_BOXED_RE = re.compile(r"\\boxed\{([^{}]*)\}")

# Phrases that introduce the final answer in step-by-step Bangla output.
ANSWER_PHRASES = ("উত্তর হল", "উত্তর:")

MATCH_TOLERANCE = 1e-6


class NoAnswerFound(ValueError):
    """No parseable numeric answer under the chosen extraction mode."""


@dataclass(frozen=True)
class ExtractedAnswer:
    value: float
    source_kind: str  # boxed | answer_phrase | last_number | graph_exec
    raw_span: str


def normalize_numerals(text: str) -> str:
    """Map Bengali digits to ASCII and strip grouping commas from digit runs."""
    return _GROUPING_RE.sub("", text.translate(BENGALI_DIGITS))


def _parse_number(span: str) -> float | None:
    m = _NUMBER_RE.search(span)
    if m is None:
        return None
    return float(m.group(0))


def _try_boxed(text: str) -> ExtractedAnswer | None:
    boxes = _BOXED_RE.findall(text)
    if not boxes:
        return None
    # Reasoning traces may contain intermediate boxes; only the last counts.
    content = boxes[-1]
    value = _parse_number(content)
    if value is None:
        return None
    return ExtractedAnswer(value=value, source_kind="boxed", raw_span=content)


def _try_phrase(text: str) -> ExtractedAnswer | None:
    pos = max(text.rfind(p) + len(p) if p in text else -1 for p in ANSWER_PHRASES)
    if pos < 0:
        return None
    m = _NUMBER_RE.search(text, pos)
    if m is None:
        return None
    return ExtractedAnswer(value=float(m.group(0)), source_kind="answer_phrase", raw_span=m.group(0))


def _try_last_number(text: str) -> ExtractedAnswer | None:
    matches = _NUMBER_RE.findall(text)
    if not matches:
        return None
    return ExtractedAnswer(value=float(matches[-1]), source_kind="last_number", raw_span=matches[-1])


def extract_answer(text: str, mode: str = "auto") -> ExtractedAnswer:
    """Pull the final numeric answer out of a model response.

    mode="boxed" reads the last \\boxed{...}; mode="cot" takes the number
    after the final answer phrase, falling back to the last number in the
    text; mode="auto" tries boxed, then phrase, then last number.
    Numerals are normalized before extraction.

    Raises NoAnswerFound when the chosen mode yields nothing.
    """
    normalized = normalize_numerals(text)
    if mode == "boxed":
        attempts = (_try_boxed,)
    elif mode == "cot":
        attempts = (_try_phrase, _try_last_number)
    elif mode == "auto":
        attempts = (_try_boxed, _try_phrase, _try_last_number)
    else:
        raise ValueError(f"unknown extraction mode {mode!r}")

    for attempt in attempts:
        found = attempt(normalized)
        if found is not None:
            return found
    raise NoAnswerFound(f"no numeric answer found in mode {mode!r}")


def numeric_match(predicted: float, truth: float, *, strict: bool = False) -> bool:
    """Answer equality: exact match made robust over double arithmetic.

    Relative tolerance of 1e-6 (floored at absolute 1e-6 around zero);
    strict=True demands bit equality for audit runs.
    """
    if not (math.isfinite(predicted) and math.isfinite(truth)):
        return False
    if strict:
        return predicted == truth
    return abs(predicted - truth) <= MATCH_TOLERANCE * max(1.0, abs(truth))


def format_number(x: float) -> str:
    """Render integral floats without the trailing .0 (14.0 -> "14")."""
    f = float(x)
    if f.is_integer() and abs(f) < 1e15:
        return str(int(f))
    return repr(f)
