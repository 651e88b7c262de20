"""Computational-graph data model: parsing, validation, serialization.

The wire format is a JSON object with a single "nodes" key holding an
ordered array. Every node carries "id", "op" and "distractor"; "val" is
the payload of const nodes, "args" the inputs of everything else, and
"label" is optional free text in any script.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from enum import Enum
from functools import cached_property
from typing import Union

ArgRef = Union[str, float]

FINAL_NODE_ID = "final_result"


class OpKind(str, Enum):
    """Closed set of node operations."""

    CONST = "const"
    IDENTITY = "identity"
    ADD = "add"
    SUB = "sub"
    MUL = "mul"
    DIV = "div"
    ABS = "abs"
    SUM = "sum"
    MEAN = "mean"
    MIN = "min"
    MAX = "max"
    ROUND = "round"
    FLOOR = "floor"
    CEIL = "ceil"
    SQRT = "sqrt"
    POW = "pow"
    MOD = "mod"
    GCD = "gcd"
    LCM = "lcm"


# Ops that do not count toward problem complexity.
NON_OP_KINDS = frozenset({OpKind.CONST, OpKind.IDENTITY})


class GraphParseError(ValueError):
    """Base class for graph parse failures."""


class MalformedJson(GraphParseError):
    """Input is not parseable as JSON at all."""


class SchemaViolation(GraphParseError):
    """JSON parsed but does not fit the node schema (missing/ill-typed fields)."""


class UnknownOp(GraphParseError):
    """Node op string is outside the closed operation set."""


@dataclass(frozen=True)
class NodeSpec:
    id: str
    op: OpKind
    distractor: bool
    val: float | None = None
    args: tuple[ArgRef, ...] | None = None
    label: str | None = None


@dataclass(frozen=True)
class GraphSpec:
    """Parsed graph; node order is preserved from the input array."""

    nodes: tuple[NodeSpec, ...]

    @cached_property
    def node_map(self) -> dict[str, NodeSpec]:
        return {n.id: n for n in self.nodes}

    def __len__(self) -> int:
        return len(self.nodes)


@dataclass(frozen=True)
class Violation:
    code: str
    node_id: str
    message: str


@dataclass(frozen=True)
class ValidationReport:
    ok: bool
    violations: tuple[Violation, ...]
    # Node ids whose distractor flag disagrees with backward reachability
    # from final_result. Warnings only, never hard failures.
    distractor_inconsistencies: tuple[str, ...]
    notes: tuple[str, ...] = field(default=())


def _is_number(x: object) -> bool:
    # bool is an int subclass; json also lets Infinity/NaN through.
    return isinstance(x, (int, float)) and not isinstance(x, bool) and math.isfinite(x)


def _parse_node(raw: object, index: int) -> NodeSpec:
    where = f"nodes[{index}]"
    if not isinstance(raw, dict):
        raise SchemaViolation(f"{where}: node must be a JSON object")

    node_id = raw.get("id")
    if not isinstance(node_id, str) or not node_id:
        raise SchemaViolation(f"{where}: 'id' must be a non-empty string")

    op_raw = raw.get("op")
    if not isinstance(op_raw, str):
        raise SchemaViolation(f"{where} (id={node_id!r}): 'op' must be a string")
    try:
        op = OpKind(op_raw)
    except ValueError:
        raise UnknownOp(f"{where} (id={node_id!r}): unknown op {op_raw!r}") from None

    distractor = raw.get("distractor")
    if not isinstance(distractor, bool):
        raise SchemaViolation(f"{where} (id={node_id!r}): 'distractor' must be a boolean")

    val: float | None = None
    if "val" in raw:
        if not _is_number(raw["val"]):
            raise SchemaViolation(f"{where} (id={node_id!r}): 'val' must be a number")
        val = float(raw["val"])

    args: tuple[ArgRef, ...] | None = None
    if "args" in raw:
        raw_args = raw["args"]
        if not isinstance(raw_args, list):
            raise SchemaViolation(f"{where} (id={node_id!r}): 'args' must be an array")
        parsed: list[ArgRef] = []
        for a in raw_args:
            if isinstance(a, str):
                parsed.append(a)
            elif _is_number(a):
                parsed.append(float(a))
            else:
                raise SchemaViolation(
                    f"{where} (id={node_id!r}): args must be node-id strings or numbers"
                )
        args = tuple(parsed)

    label: str | None = None
    if "label" in raw and raw["label"] is not None:
        if not isinstance(raw["label"], str):
            raise SchemaViolation(f"{where} (id={node_id!r}): 'label' must be a string")
        label = raw["label"]

    # Unknown extra fields are ignored on purpose: teacher outputs vary.
    return NodeSpec(id=node_id, op=op, distractor=distractor, val=val, args=args, label=label)


def parse_graph(text: str) -> GraphSpec:
    """Parse graph JSON into a GraphSpec.

    Raises MalformedJson for non-JSON input, SchemaViolation for
    missing/ill-typed fields, UnknownOp for ops outside the closed set.
    Structural consistency (final node, acyclicity, const/args pairing)
    is checked separately by validate().
    """
    try:
        data = json.loads(text)
    except json.JSONDecodeError as e:
        raise MalformedJson(f"not valid JSON: {e}") from None

    if not isinstance(data, dict):
        raise SchemaViolation("top level must be a JSON object")
    if "nodes" not in data:
        raise SchemaViolation("top-level object is missing the 'nodes' key")
    if not isinstance(data["nodes"], list):
        raise SchemaViolation("'nodes' must be an array")

    nodes = tuple(_parse_node(raw, i) for i, raw in enumerate(data["nodes"]))
    return GraphSpec(nodes=nodes)


def _json_number(x: float) -> float | int:
    # Emit integral values as JSON integers; equal as floats after re-parse.
    if float(x).is_integer() and abs(x) < 1e15:
        return int(x)
    return x


def serialize(g: GraphSpec) -> str:
    """Serialize a GraphSpec back to its wire format.

    parse_graph(serialize(g)) == g, field for field.
    """
    out = []
    for n in g.nodes:
        d: dict[str, object] = {"id": n.id, "op": n.op.value}
        if n.val is not None:
            d["val"] = _json_number(n.val)
        if n.args is not None:
            d["args"] = [a if isinstance(a, str) else _json_number(a) for a in n.args]
        d["distractor"] = n.distractor
        if n.label is not None:
            d["label"] = n.label
        out.append(d)
    return json.dumps({"nodes": out}, ensure_ascii=False)


def ancestors_of_final(g: GraphSpec) -> set[str]:
    """Backward-reachable node ids from final_result, including itself.

    Dangling references are skipped; presence of cycles does not affect
    termination. Returns an empty set when final_result is absent.
    """
    if FINAL_NODE_ID not in g.node_map:
        return set()
    seen: set[str] = set()
    stack = [FINAL_NODE_ID]
    while stack:
        nid = stack.pop()
        if nid in seen:
            continue
        seen.add(nid)
        node = g.node_map.get(nid)
        if node is None or node.args is None:
            continue
        for a in node.args:
            if isinstance(a, str) and a in g.node_map and a not in seen:
                stack.append(a)
    return seen


def _find_cyclic_nodes(g: GraphSpec) -> list[str]:
    """Kahn-style peel over the full graph; returns nodes left on cycles."""
    ids = [n.id for n in g.nodes]
    id_set = set(ids)
    # Edge u -> v iff v's args reference u.
    dependents: dict[str, list[str]] = {i: [] for i in ids}
    indegree: dict[str, int] = {i: 0 for i in ids}
    for n in g.nodes:
        if n.args is None:
            continue
        for a in n.args:
            if isinstance(a, str) and a in id_set:
                dependents[a].append(n.id)
                indegree[n.id] += 1
    queue = [i for i in ids if indegree[i] == 0]
    removed = 0
    while queue:
        nid = queue.pop()
        removed += 1
        for dep in dependents[nid]:
            indegree[dep] -= 1
            if indegree[dep] == 0:
                queue.append(dep)
    if removed == len(ids):
        return []
    return [i for i in ids if indegree[i] > 0]


def validate(g: GraphSpec) -> ValidationReport:
    """Check structural invariants; all findings are report entries.

    Hard violations (duplicate ids, missing final node, dangling
    references, cycles, const/args mismatches) set ok=False. Distractor
    flags that disagree with backward reachability from the final node
    are reported as warnings only.
    """
    violations: list[Violation] = []
    notes: list[str] = []

    seen_ids: set[str] = set()
    for n in g.nodes:
        if n.id in seen_ids:
            violations.append(Violation("duplicate_id", n.id, f"duplicate node id {n.id!r}"))
        seen_ids.add(n.id)

    if FINAL_NODE_ID not in seen_ids:
        violations.append(
            Violation("missing_final", FINAL_NODE_ID, f"no node with id {FINAL_NODE_ID!r}")
        )

    defined_so_far: set[str] = set()
    sorted_topologically = True
    for n in g.nodes:
        if n.op is OpKind.CONST:
            if n.val is None:
                violations.append(
                    Violation("const_mismatch", n.id, "const node is missing 'val'")
                )
            if n.args is not None:
                violations.append(
                    Violation("const_mismatch", n.id, "const node must not carry 'args'")
                )
        else:
            if n.args is None or len(n.args) == 0:
                violations.append(
                    Violation("const_mismatch", n.id, f"{n.op.value} node needs non-empty 'args'")
                )
        if n.args is not None:
            for a in n.args:
                if isinstance(a, str):
                    if a not in g.node_map:
                        violations.append(
                            Violation("unknown_ref", n.id, f"arg references unknown node {a!r}")
                        )
                    elif a not in defined_so_far:
                        sorted_topologically = False
        defined_so_far.add(n.id)

    cyclic = _find_cyclic_nodes(g)
    if cyclic:
        violations.append(
            Violation("cycle", cyclic[0], "dependency cycle through: " + ", ".join(cyclic))
        )
        sorted_topologically = False

    if not sorted_topologically and not cyclic:
        notes.append("nodes are not listed in topological order")

    inconsistencies: list[str] = []
    if FINAL_NODE_ID in seen_ids:
        reachable = ancestors_of_final(g)
        for n in g.nodes:
            on_path = n.id in reachable
            if on_path and n.distractor:
                inconsistencies.append(n.id)
            elif not on_path and not n.distractor:
                inconsistencies.append(n.id)

    return ValidationReport(
        ok=not violations,
        violations=tuple(violations),
        distractor_inconsistencies=tuple(inconsistencies),
        notes=tuple(notes),
    )


def op_node_count(g: GraphSpec) -> int:
    """Complexity proxy: number of nodes whose op is neither const nor identity."""
    return sum(1 for n in g.nodes if n.op not in NON_OP_KINDS)
