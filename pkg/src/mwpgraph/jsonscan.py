"""Extraction of JSON objects embedded in free-form model output.

Model generations routinely wrap their JSON in prose or code fences, so
callers scan for outermost balanced brace spans instead of parsing the
whole string.
"""

from __future__ import annotations

from typing import Iterator


def iter_balanced_objects(text: str) -> Iterator[str]:
    """Yield every outermost balanced {...} span, left to right.

    Brace counting is string-aware: braces inside JSON string literals
    (including escaped quotes) do not affect nesting. Unterminated spans
    are dropped.
    """
    depth = 0
    start = -1
    in_string = False
    escaped = False
    for i, ch in enumerate(text):
        if in_string:
            if escaped:
                escaped = False
            elif ch == "\\":
                escaped = True
            elif ch == '"':
                in_string = False
            continue
        if ch == '"':
            if depth > 0:
                in_string = True
            continue
        if ch == "{":
            if depth == 0:
                start = i
            depth += 1
        elif ch == "}":
            if depth > 0:
                depth -= 1
                if depth == 0:
                    yield text[start : i + 1]
        # A stray '}' at depth 0 is prose; ignore it.


def extract_object(text: str, required_keys: tuple[str, ...] = ()) -> str | None:
    """First outermost balanced object whose text mentions every required key."""
    for span in iter_balanced_objects(text):
        if all(f'"{key}"' in span for key in required_keys):
            return span
    return None
