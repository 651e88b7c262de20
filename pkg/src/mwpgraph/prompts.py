"""Prompt templates for distractor generation, verification, and solving.

Templates live as versioned text resources under templates/ and are
instantiated by literal {slot} replacement, so the JSON braces they
contain never need escaping.
"""

from __future__ import annotations

from importlib import resources
from typing import Mapping

from .answers import format_number

PROMPT_KINDS = ("RED", "OAD", "NEED", "VERIFY", "GRAPH", "COT", "REASONING")

_TEMPLATE_FILES = {
    "RED": "red.txt",
    "OAD": "oad.txt",
    "NEED": "need.txt",
    "VERIFY": "verify.txt",
    "GRAPH": "graph.txt",
    "COT": "cot.txt",
    "REASONING": "reasoning.txt",
}

REQUIRED_SLOTS = {
    "RED": ("question", "answer"),
    "OAD": ("question", "answer"),
    "NEED": ("question", "answer"),
    "VERIFY": ("original", "modified", "ground_truth"),
    "GRAPH": ("question",),
    "COT": ("question",),
    "REASONING": ("question",),
}


class MissingSlot(KeyError):
    """A slot required by the template was not supplied."""


def template_text(kind: str) -> str:
    """Raw template body for one prompt kind."""
    if kind not in _TEMPLATE_FILES:
        raise ValueError(f"unknown prompt kind {kind!r}; expected one of {PROMPT_KINDS}")
    ref = resources.files(__package__).joinpath("templates", _TEMPLATE_FILES[kind])
    return ref.read_text(encoding="utf-8")


def _render_slot(value: object) -> str:
    if isinstance(value, bool):
        return str(value)
    if isinstance(value, (int, float)):
        return format_number(float(value))
    return str(value)


def build_prompt(kind: str, slots: Mapping[str, object]) -> str:
    """Instantiate a template with slot values.

    Numeric slot values are rendered without a trailing .0 so answers
    appear the way the exemplars print them. Raises MissingSlot when a
    required slot is absent.
    """
    text = template_text(kind)
    for name in REQUIRED_SLOTS[kind]:
        if name not in slots or slots[name] is None:
            raise MissingSlot(f"prompt kind {kind} needs slot {name!r}")
        text = text.replace("{" + name + "}", _render_slot(slots[name]))
    return text
