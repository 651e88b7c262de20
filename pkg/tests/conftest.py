from __future__ import annotations

import json
import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # make `helpers` importable

from mwpgraph import GraphSpec, parse_graph

DATA_DIR = Path(__file__).parent / "data"

GOLDEN_ANSWERS = {"example1": 14.0, "example2": 120.0, "example3": 294.0}


def golden_text(name: str) -> str:
    return (DATA_DIR / f"{name}.json").read_text(encoding="utf-8")


def golden_graph(name: str) -> GraphSpec:
    return parse_graph(golden_text(name))


def golden_nodes(name: str) -> list[dict]:
    return json.loads(golden_text(name))["nodes"]


@pytest.fixture(scope="session")
def example1() -> GraphSpec:
    return golden_graph("example1")


@pytest.fixture(scope="session")
def example2() -> GraphSpec:
    return golden_graph("example2")


@pytest.fixture(scope="session")
def example3() -> GraphSpec:
    return golden_graph("example3")


@pytest.fixture(scope="session")
def golden_graphs(example1, example2, example3) -> dict[str, GraphSpec]:
    return {"example1": example1, "example2": example2, "example3": example3}
