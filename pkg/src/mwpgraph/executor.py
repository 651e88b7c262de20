"""Graph execution: lazy recursive evaluation from the final node.

Only the ancestry of final_result is computed, each node at most once
(memo cache), with cycle detection on the active path. The recursion is
run on an explicit work stack so deep chain graphs cannot exhaust the
interpreter call stack; the active path is still capped at
MAX_ACTIVE_PATH as a hard bound.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from enum import Enum

from .graph import FINAL_NODE_ID, GraphSpec, NodeSpec, OpKind

MAX_ACTIVE_PATH = 10_000

# Tolerance for treating an operand as integer-valued (gcd/lcm).
INTEGER_TOLERANCE = 1e-9


class ExecErrorKind(str, Enum):
    CIRCULAR_DEPENDENCY = "CircularDependency"
    INVALID_ARGUMENT = "InvalidArgument"
    DIVISION_BY_ZERO = "DivisionByZero"
    DOMAIN_ERROR = "DomainError"
    ARITY_ERROR = "ArityError"


@dataclass(frozen=True)
class ExecError:
    kind: ExecErrorKind
    node_id: str
    detail: str


@dataclass(frozen=True)
class ExecOutcome:
    value: float | None
    error: ExecError | None
    trace: dict[str, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if (self.value is None) == (self.error is None):
            raise ValueError("exactly one of value/error must be set")

    @property
    def ok(self) -> bool:
        return self.error is None


class OpFailure(Exception):
    """Internal: raised by apply_op, wrapped with a node id by execute."""

    def __init__(self, kind: ExecErrorKind, detail: str):
        super().__init__(detail)
        self.kind = kind
        self.detail = detail


def _arity(kind: ExecErrorKind, op: OpKind, n: int, expected: str) -> OpFailure:
    return OpFailure(kind, f"{op.value} takes {expected} operand(s), got {n}")


def _check_arity(op: OpKind, n: int, lo: int, hi: int | None) -> None:
    if n < lo or (hi is not None and n > hi):
        if hi is None:
            expected = f">= {lo}"
        elif lo == hi:
            expected = str(lo)
        else:
            expected = f"{lo} or {hi}"
        raise _arity(ExecErrorKind.ARITY_ERROR, op, n, expected)


def _as_int(op: OpKind, x: float) -> int:
    r = round(x)
    if abs(x - r) > INTEGER_TOLERANCE:
        raise OpFailure(
            ExecErrorKind.DOMAIN_ERROR, f"{op.value} needs integer-valued operands, got {x!r}"
        )
    return int(r)


def _round_half_away(x: float) -> float:
    if x >= 0:
        return float(math.floor(x + 0.5))
    return float(math.ceil(x - 0.5))


def apply_op(op: OpKind, operands: list[float]) -> float:
    """Apply one operation to already-resolved numeric operands.

    Raises OpFailure (arity/domain/zero-division) on bad input; a
    non-finite result is a DomainError so downstream comparisons stay
    well defined.
    """
    n = len(operands)

    if op is OpKind.CONST:
        raise OpFailure(ExecErrorKind.INVALID_ARGUMENT, "const is not an applicable operation")
    if op is OpKind.IDENTITY:
        _check_arity(op, n, 1, 1)
        result = operands[0]
    elif op in (OpKind.ADD, OpKind.SUM):
        _check_arity(op, n, 1, None)
        result = math.fsum(operands)
    elif op is OpKind.MUL:
        _check_arity(op, n, 1, None)
        result = 1.0
        for x in operands:
            result *= x
    elif op is OpKind.SUB:
        _check_arity(op, n, 2, 2)
        result = operands[0] - operands[1]
    elif op is OpKind.DIV:
        _check_arity(op, n, 2, 2)
        if operands[1] == 0:
            raise OpFailure(ExecErrorKind.DIVISION_BY_ZERO, "division by zero")
        result = operands[0] / operands[1]
    elif op is OpKind.ABS:
        _check_arity(op, n, 1, 2)
        result = abs(operands[0]) if n == 1 else abs(operands[0] - operands[1])
    elif op is OpKind.MEAN:
        _check_arity(op, n, 1, None)
        result = math.fsum(operands) / n
    elif op is OpKind.MIN:
        _check_arity(op, n, 1, None)
        result = min(operands)
    elif op is OpKind.MAX:
        _check_arity(op, n, 1, None)
        result = max(operands)
    elif op is OpKind.ROUND:
        _check_arity(op, n, 1, 1)
        result = _round_half_away(operands[0])
    elif op is OpKind.FLOOR:
        _check_arity(op, n, 1, 1)
        result = float(math.floor(operands[0]))
    elif op is OpKind.CEIL:
        _check_arity(op, n, 1, 1)
        result = float(math.ceil(operands[0]))
    elif op is OpKind.SQRT:
        _check_arity(op, n, 1, 1)
        if operands[0] < 0:
            raise OpFailure(ExecErrorKind.DOMAIN_ERROR, "sqrt of negative number")
        result = math.sqrt(operands[0])
    elif op is OpKind.POW:
        _check_arity(op, n, 2, 2)
        try:
            result = math.pow(operands[0], operands[1])
        except (ValueError, OverflowError) as e:
            raise OpFailure(ExecErrorKind.DOMAIN_ERROR, f"pow: {e}") from None
    elif op is OpKind.MOD:
        _check_arity(op, n, 2, 2)
        if operands[1] == 0:
            raise OpFailure(ExecErrorKind.DIVISION_BY_ZERO, "modulo by zero")
        # Floored modulo: result sign follows the divisor.
        result = operands[0] % operands[1]
    elif op is OpKind.GCD:
        _check_arity(op, n, 2, None)
        ints = [_as_int(op, x) for x in operands]
        acc = abs(ints[0])
        for x in ints[1:]:
            acc = math.gcd(acc, x)
        result = float(acc)
    elif op is OpKind.LCM:
        _check_arity(op, n, 2, None)
        ints = [_as_int(op, x) for x in operands]
        acc = abs(ints[0])
        for x in ints[1:]:
            acc = math.lcm(acc, x)
        result = float(acc)
    else:  # pragma: no cover - OpKind is closed
        raise OpFailure(ExecErrorKind.INVALID_ARGUMENT, f"unhandled op {op!r}")

    if not math.isfinite(result):
        raise OpFailure(ExecErrorKind.DOMAIN_ERROR, f"{op.value} produced a non-finite value")
    return float(result)


def execute(g: GraphSpec) -> ExecOutcome:
    """Evaluate the graph to the value of its final_result node.

    Prior validation is not required: dangling references and cycles on
    the solution path are re-detected here. Nodes outside the ancestry
    of final_result are never touched, so distractor subgraphs cost
    nothing. The trace maps every completed node to its value.
    """
    cache: dict[str, float] = {}

    def fail(kind: ExecErrorKind, node_id: str, detail: str) -> ExecOutcome:
        return ExecOutcome(value=None, error=ExecError(kind, node_id, detail), trace=dict(cache))

    nodes = g.node_map
    if FINAL_NODE_ID not in nodes:
        return fail(
            ExecErrorKind.INVALID_ARGUMENT, FINAL_NODE_ID, f"no node with id {FINAL_NODE_ID!r}"
        )

    on_path: set[str] = set()
    # Two-phase stack: "visit" expands a node's dependencies, "emit"
    # applies its op once every dependency is cached.
    stack: list[tuple[str, str]] = [("visit", FINAL_NODE_ID)]

    while stack:
        phase, nid = stack.pop()
        node: NodeSpec = nodes[nid]

        if phase == "visit":
            if nid in cache:
                continue
            if nid in on_path:
                return fail(
                    ExecErrorKind.CIRCULAR_DEPENDENCY, nid, f"node {nid!r} depends on itself"
                )
            if len(on_path) >= MAX_ACTIVE_PATH:
                return fail(ExecErrorKind.INVALID_ARGUMENT, nid, "depth")
            on_path.add(nid)
            stack.append(("emit", nid))
            if node.args is not None:
                for a in reversed(node.args):
                    if isinstance(a, str):
                        if a not in nodes:
                            return fail(
                                ExecErrorKind.INVALID_ARGUMENT,
                                nid,
                                f"unknown arg reference {a!r}",
                            )
                        if a not in cache:
                            stack.append(("visit", a))
        else:
            if node.op is OpKind.CONST:
                if node.val is None:
                    return fail(ExecErrorKind.INVALID_ARGUMENT, nid, "const node has no 'val'")
                value = float(node.val)
            else:
                if node.args is None:
                    return fail(
                        ExecErrorKind.ARITY_ERROR, nid, f"{node.op.value} node has no 'args'"
                    )
                operands = [a if not isinstance(a, str) else cache[a] for a in node.args]
                try:
                    value = apply_op(node.op, operands)
                except OpFailure as e:
                    return fail(e.kind, nid, e.detail)
            cache[nid] = value
            on_path.discard(nid)

    return ExecOutcome(value=cache[FINAL_NODE_ID], error=None, trace=dict(cache))
