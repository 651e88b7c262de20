"""Independent oracles and random-graph generation for the test suite.

Everything here deliberately avoids the library's own execution and
reachability code paths: the evaluator is an iterative Kahn pass with
its own operator semantics, reachability is a fixed-point closure, and
the regression oracle is the closed-form normal equations.
"""

from __future__ import annotations

import math
import random


# ---------------------------------------------------------------------------
# Independent operator semantics (formulated differently from the library).


def _euclid_gcd(a: int, b: int) -> int:
    a, b = abs(a), abs(b)
    while b:
        a, b = b, a % b
    return a


def _oracle_apply(op: str, vals: list[float]) -> float:
    if op in ("add", "sum"):
        return sum(vals)
    if op == "mul":
        out = 1.0
        for v in vals:
            out = out * v
        return out
    if op == "sub":
        return vals[0] - vals[1]
    if op == "div":
        if vals[1] == 0:
            raise ZeroDivisionError
        return vals[0] / vals[1]
    if op == "abs":
        return abs(vals[0]) if len(vals) == 1 else abs(vals[0] - vals[1])
    if op == "mean":
        return sum(vals) / len(vals)
    if op == "min":
        return min(vals)
    if op == "max":
        return max(vals)
    if op == "round":
        return math.copysign(math.floor(abs(vals[0]) + 0.5), vals[0])
    if op == "floor":
        return float(math.floor(vals[0]))
    if op == "ceil":
        return float(math.ceil(vals[0]))
    if op == "sqrt":
        if vals[0] < 0:
            raise ValueError("sqrt domain")
        return vals[0] ** 0.5
    if op == "pow":
        return float(vals[0] ** vals[1])
    if op == "mod":
        if vals[1] == 0:
            raise ZeroDivisionError
        return vals[0] - vals[1] * math.floor(vals[0] / vals[1])
    if op == "gcd":
        ints = [int(round(v)) for v in vals]
        acc = ints[0]
        for x in ints[1:]:
            acc = _euclid_gcd(acc, x)
        return float(abs(acc))
    if op == "lcm":
        ints = [int(round(v)) for v in vals]
        acc = abs(ints[0])
        for x in ints[1:]:
            acc = 0 if (acc == 0 or x == 0) else abs(acc * x) // _euclid_gcd(acc, x)
        return float(acc)
    if op == "identity":
        return vals[0]
    raise AssertionError(f"oracle has no semantics for {op!r}")


def kahn_value(nodes: list[dict], target: str = "final_result") -> float:
    """Iterative topological-order evaluation of raw node dicts."""
    by_id = {n["id"]: n for n in nodes}
    pending: dict[str, set[str]] = {}
    dependents: dict[str, list[str]] = {n["id"]: [] for n in nodes}
    for n in nodes:
        deps = {a for a in n.get("args", []) if isinstance(a, str)}
        unknown = deps - by_id.keys()
        if unknown:
            raise KeyError(f"dangling refs {unknown}")
        pending[n["id"]] = set(deps)
        for d in deps:
            dependents[d].append(n["id"])

    values: dict[str, float] = {}
    ready = [nid for nid, deps in pending.items() if not deps]
    while ready:
        nid = ready.pop()
        node = by_id[nid]
        if node["op"] == "const":
            values[nid] = float(node["val"])
        else:
            vals = [values[a] if isinstance(a, str) else float(a) for a in node["args"]]
            values[nid] = _oracle_apply(node["op"], vals)
        for dep in dependents[nid]:
            pending[dep].discard(nid)
            if not pending[dep]:
                ready.append(dep)

    if len(values) != len(nodes):
        raise RuntimeError("cycle: not all nodes evaluated")
    return values[target]


# ---------------------------------------------------------------------------
# Brute-force reachability and cycle detection.


def brute_ancestors(nodes: list[dict], target: str = "final_result") -> set[str]:
    """Fixed-point transitive closure of the arg relation from the target."""
    by_id = {n["id"]: n for n in nodes}
    if target not in by_id:
        return set()
    closure = {target}
    changed = True
    while changed:
        changed = False
        for nid in list(closure):
            for a in by_id[nid].get("args") or []:
                if isinstance(a, str) and a in by_id and a not in closure:
                    closure.add(a)
                    changed = True
    return closure


def brute_has_cycle(nodes: list[dict]) -> bool:
    """DFS from every node, looking for a back edge."""
    by_id = {n["id"]: n for n in nodes}

    def deps(nid: str) -> list[str]:
        return [a for a in by_id[nid].get("args") or [] if isinstance(a, str) and a in by_id]

    for start in by_id:
        stack = [(start, iter(deps(start)))]
        path = {start}
        while stack:
            nid, it = stack[-1]
            advanced = False
            for nxt in it:
                if nxt in path:
                    return True
                path.add(nxt)
                stack.append((nxt, iter(deps(nxt))))
                advanced = True
                break
            if not advanced:
                stack.pop()
                path.discard(nid)
    return False


# ---------------------------------------------------------------------------
# Closed-form OLS oracle.


def normal_equation_fit(xs: list[float], ys: list[float]) -> tuple[float, float, float]:
    """(slope, intercept, r_squared) straight from the normal equations."""
    n = len(xs)
    sx = sum(xs)
    sy = sum(ys)
    sxx = sum(x * x for x in xs)
    sxy = sum(x * y for x, y in zip(xs, ys))
    slope = (n * sxy - sx * sy) / (n * sxx - sx * sx)
    intercept = (sy - slope * sx) / n
    ss_res = sum((y - (slope * x + intercept)) ** 2 for x, y in zip(xs, ys))
    ss_tot = sum((y - sy / n) ** 2 for y in ys)
    r2 = 0.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return slope, intercept, r2


# ---------------------------------------------------------------------------
# Random executable graph generation.

_GEN_OPS = [
    "add", "sub", "mul", "div", "abs", "sum", "mean", "min", "max",
    "round", "floor", "ceil", "sqrt", "pow", "mod", "gcd", "lcm", "identity",
]

_ARITY = {
    "add": (1, 4), "sum": (1, 4), "mul": (1, 3), "mean": (1, 4),
    "min": (1, 4), "max": (1, 4), "sub": (2, 2), "div": (2, 2),
    "abs": (1, 2), "round": (1, 1), "floor": (1, 1), "ceil": (1, 1),
    "sqrt": (1, 1), "pow": (2, 2), "mod": (2, 2), "gcd": (2, 3),
    "lcm": (2, 3), "identity": (1, 1),
}


def _construction_value(op: str, vals: list[float]) -> float | None:
    """Inline feasibility arithmetic for the generator; None = pick again."""
    try:
        if op == "div" and (vals[1] == 0):
            return None
        if op == "mod" and (vals[1] == 0):
            return None
        if op == "sqrt" and vals[0] < 0:
            return None
        if op == "pow":
            base, exp = vals
            if not float(exp).is_integer() or abs(exp) > 3 or abs(base) > 12:
                return None
            if base == 0 and exp < 0:
                return None
        if op in ("gcd", "lcm") and any(abs(v - round(v)) > 1e-9 for v in vals):
            return None
        v = _oracle_apply(op, vals)
    except (ZeroDivisionError, ValueError, OverflowError):
        return None
    if not math.isfinite(v) or abs(v) > 1e9:
        return None
    return v


def random_valid_graph(
    rng: random.Random,
    max_nodes: int = 12,
    with_disconnected: bool = False,
) -> list[dict]:
    """Executable random DAG ending in a final_result identity node.

    Constants are integers in [-20, 20]; ops are drawn from the full
    closed set, re-rolled until the combination is division-safe and
    in-domain. Distractor flags are set from true reachability, so the
    graphs also validate cleanly. with_disconnected adds nodes that the
    final node never reaches.
    """
    nodes: list[dict] = []
    values: dict[str, float] = {}

    n_budget = max_nodes - 1  # final_result takes one slot
    if with_disconnected:
        n_budget -= 2
    n_const = rng.randint(2, min(4, n_budget - 1))
    for i in range(n_const):
        v = float(rng.randint(-20, 20))
        nid = f"c{i}"
        nodes.append({"id": nid, "op": "const", "val": v})
        values[nid] = v

    n_ops = rng.randint(1, n_budget - n_const)
    for j in range(n_ops):
        nid = f"op{j}"
        choice = None
        for _ in range(40):
            op = rng.choice(_GEN_OPS)
            lo, hi = _ARITY[op]
            k = rng.randint(lo, min(hi, len(values) + 1))
            args: list = []
            vals: list[float] = []
            for _ in range(k):
                if rng.random() < 0.15:
                    lit = float(rng.randint(-20, 20))
                    args.append(lit)
                    vals.append(lit)
                else:
                    ref = rng.choice(list(values))
                    args.append(ref)
                    vals.append(values[ref])
            v = _construction_value(op, vals)
            if v is not None:
                choice = (op, args, v)
                break
        if choice is None:
            ref = rng.choice(list(values))
            choice = ("identity", [ref], values[ref])
        op, args, v = choice
        nodes.append({"id": nid, "op": op, "args": args})
        values[nid] = v

    tail = nodes[-1]["id"]
    nodes.append({"id": "final_result", "op": "identity", "args": [tail]})

    if with_disconnected:
        nodes.append({"id": "d0", "op": "const", "val": float(rng.randint(-20, 20))})
        nodes.append({"id": "d1", "op": "abs", "args": ["d0"]})

    reachable = brute_ancestors(nodes)
    for n in nodes:
        n["distractor"] = n["id"] not in reachable
    return nodes


def inject_cycle(nodes: list[dict], rng: random.Random) -> list[dict] | None:
    """Rewire one arg of an ancestry op node back onto itself or a descendant.

    Returns a mutated copy, or None when the graph has no op node on the
    solution path to corrupt.
    """
    mutated = [dict(n, args=list(n["args"])) if "args" in n else dict(n) for n in nodes]
    ancestry = brute_ancestors(mutated)
    candidates = [
        n for n in mutated if n["id"] in ancestry and n.get("args") and n["op"] != "const"
    ]
    if not candidates:
        return None
    victim = rng.choice(candidates)

    # Descendants of the victim: nodes that can reach it through args.
    descendants = {
        n["id"] for n in mutated if victim["id"] in brute_ancestors(mutated, target=n["id"])
    }
    target = rng.choice(sorted(descendants & ancestry))
    slot = rng.randrange(len(victim["args"]))
    victim["args"][slot] = target
    return mutated
