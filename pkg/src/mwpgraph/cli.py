"""Command-line entry point: execute graphs, score generations, run
dataset evaluations, and drive the augmentation pipeline.

Exit codes are a stable contract: 0 success, 1 input/validation,
2 graph execution, 3 configuration/transport.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .answers import format_number
from .augment import (
    BudgetExceeded,
    HttpTeacherClient,
    TransportError,
    augment_dataset,
    dry_run_teacher,
)
from .executor import execute
from .graph import GraphParseError, GraphSpec, parse_graph
from .metrics import EvalRecord, MissingSplit, SplitWeights, build_report, round_pct
from .reward import score

EXIT_OK = 0
EXIT_INPUT = 1
EXIT_EXECUTION = 2
EXIT_CONFIG = 3


def _err(message: str) -> None:
    print(f"error: {message}", file=sys.stderr)


def _read_jsonl(path: Path) -> list[dict]:
    rows = []
    with path.open("r", encoding="utf-8") as f:
        for lineno, line in enumerate(f, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                row = json.loads(line)
            except json.JSONDecodeError as e:
                raise ValueError(f"{path}:{lineno}: bad JSON: {e}") from None
            if not isinstance(row, dict):
                raise ValueError(f"{path}:{lineno}: each line must be a JSON object")
            rows.append(row)
    return rows


def _write_jsonl(path: Path, rows: list[dict]) -> None:
    with path.open("w", encoding="utf-8") as f:
        for row in rows:
            f.write(json.dumps(row, ensure_ascii=False) + "\n")


def _trace_in_topo_order(g: GraphSpec, trace: dict[str, float]) -> list[tuple[str, float]]:
    """Order the visited nodes topologically, input order as tiebreak."""
    keys = set(trace)
    emitted: set[str] = set()
    ordered: list[tuple[str, float]] = []
    pending = [n for n in g.nodes if n.id in keys]
    while pending:
        progressed = False
        remaining = []
        for node in pending:
            deps = [a for a in (node.args or ()) if isinstance(a, str) and a in keys]
            if all(d in emitted for d in deps):
                emitted.add(node.id)
                ordered.append((node.id, trace[node.id]))
                progressed = True
            else:
                remaining.append(node)
        if not progressed:  # cycle remnants; dump rest in input order
            ordered.extend((n.id, trace[n.id]) for n in remaining)
            break
        pending = remaining
    return ordered


def cmd_exec(args: argparse.Namespace) -> int:
    try:
        text = Path(args.graph_file).read_text(encoding="utf-8")
    except OSError as e:
        _err(str(e))
        return EXIT_INPUT
    try:
        graph = parse_graph(text)
    except GraphParseError as e:
        _err(f"[{type(e).__name__}] {e}")
        return EXIT_INPUT

    outcome = execute(graph)
    if not outcome.ok:
        e = outcome.error
        _err(f"[{e.kind.value}] at node {e.node_id!r}: {e.detail}")
        return EXIT_EXECUTION
    if args.trace:
        for nid, value in _trace_in_topo_order(graph, outcome.trace):
            print(f"{nid} = {format_number(value)}")
    print(format_number(outcome.value))
    return EXIT_OK


def cmd_score(args: argparse.Namespace) -> int:
    try:
        generations = _read_jsonl(Path(args.generations))
        truths = _read_jsonl(Path(args.truths))
    except (OSError, ValueError) as e:
        _err(str(e))
        return EXIT_INPUT
    if not generations:
        _err("EmptyInput: no generations to score")
        return EXIT_INPUT
    if len(generations) != len(truths):
        _err(f"join mismatch: {len(generations)} generations vs {len(truths)} truths")
        return EXIT_INPUT

    rows = []
    for i, (gen, truth) in enumerate(zip(generations, truths)):
        gid, tid = gen.get("id"), truth.get("id")
        if gid != tid:
            _err(f"join mismatch at line {i + 1}: generation id {gid!r} vs truth id {tid!r}")
            return EXIT_INPUT
        try:
            answer = float(truth["answer"])
        except (KeyError, TypeError, ValueError):
            _err(f"truth row {tid!r} has no numeric 'answer'")
            return EXIT_INPUT
        breakdown = score(str(gen.get("generation", "")), answer)
        rows.append({"id": gid, **breakdown.to_dict()})

    _write_jsonl(Path(args.out), rows)
    mean_total = sum(r["total"] for r in rows) / len(rows)
    print(f"scored {len(rows)} generations, mean total {mean_total:.4f}")
    return EXIT_OK


def cmd_eval(args: argparse.Namespace) -> int:
    try:
        raw_rows = _read_jsonl(Path(args.records))
        records = [EvalRecord.from_dict(r) for r in raw_rows]
    except (OSError, ValueError) as e:
        _err(str(e))
        return EXIT_INPUT
    if not records:
        _err("EmptyInput: no records")
        return EXIT_INPUT
    try:
        weights = SplitWeights.from_csv(args.weights) if args.weights else SplitWeights()
    except ValueError as e:
        _err(str(e))
        return EXIT_INPUT

    try:
        report = build_report(
            records,
            weights,
            partial=args.partial,
            tokens_correct_only=args.tokens_correct_only,
        )
    except MissingSplit as e:
        _err(f"{e} (use --partial to evaluate over present splits)")
        return EXIT_INPUT

    if report["partial"]:
        print("warning: some splits are missing; aggregates cover present splits only", file=sys.stderr)

    out = json.dumps(report, ensure_ascii=False, indent=2)
    if args.out:
        Path(args.out).write_text(out + "\n", encoding="utf-8")
    else:
        print(out)

    for split, acc in {**report["accuracy_original"], **report["accuracy_distractor"]}.items():
        print(f"accuracy[{split}] = {round_pct(acc)}", file=sys.stderr)
    print(f"weighted accuracy = {round_pct(report['weighted_accuracy'])}", file=sys.stderr)
    print(f"weighted tokens = {report['weighted_tokens']:.1f}", file=sys.stderr)
    return EXIT_OK


def _load_teacher_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as f:
        cfg = json.load(f)
    if not isinstance(cfg, dict):
        raise ValueError("config file must hold a JSON object")
    return cfg


def cmd_augment(args: argparse.Namespace) -> int:
    try:
        problems = _read_jsonl(Path(args.problems))
    except (OSError, ValueError) as e:
        _err(str(e))
        return EXIT_INPUT
    if not problems:
        _err("EmptyInput: no problems")
        return EXIT_INPUT

    try:
        cfg = _load_teacher_config(args.config)
    except (OSError, ValueError) as e:
        _err(str(e))
        return EXIT_CONFIG

    decoding = cfg.get("decoding", {})
    if args.dry_run:
        client = dry_run_teacher()
    else:
        endpoint = args.endpoint or cfg.get("endpoint")
        model = args.model or cfg.get("model", "gpt-4.1")
        if not endpoint:
            _err("live mode needs a teacher endpoint (--endpoint or config file)")
            return EXIT_CONFIG
        api_key = os.environ.get(args.api_key_env) if args.api_key_env else None
        client = HttpTeacherClient(
            endpoint,
            model,
            api_key,
            timeout=args.timeout,
            max_requests=args.max_requests,
        )

    out_path = Path(args.out)
    part_path = out_path.with_suffix(out_path.suffix + ".part")
    done_rows: list[dict] = []
    if part_path.exists():
        done_rows = _read_jsonl(part_path)
        print(f"resuming: {len(done_rows)} row(s) already in {part_path}", file=sys.stderr)
    done_ids = {r["id"] for r in done_rows}
    todo = [p for p in problems if str(p.get("id", "")) not in done_ids]

    chunk_size = max(args.concurrency, 1)
    with part_path.open("a", encoding="utf-8") as part:
        for start in range(0, len(todo), chunk_size):
            chunk = todo[start : start + chunk_size]
            try:
                results = augment_dataset(
                    chunk, args.type, client, concurrency=args.concurrency, decoding=decoding
                )
            except (TransportError, BudgetExceeded) as e:
                part.flush()
                _err(f"{type(e).__name__}: {e}; progress checkpointed in {part_path}")
                return EXIT_CONFIG
            except (KeyError, TypeError, ValueError) as e:
                _err(f"bad problem row: {e}")
                return EXIT_INPUT
            for res in results:
                part.write(json.dumps(res.to_dict(), ensure_ascii=False) + "\n")
            part.flush()

    part_path.replace(out_path)
    print(f"augmented {len(problems)} problem(s) -> {out_path}")
    return EXIT_OK


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="mwpgraph",
        description="Computational-graph engine and evaluation harness for math word problems.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_exec = sub.add_parser("exec", help="Execute a graph JSON file and print its value.")
    p_exec.add_argument("graph_file")
    p_exec.add_argument("--trace", action="store_true", help="print id = value per visited node")
    p_exec.set_defaults(func=cmd_exec)

    p_score = sub.add_parser("score", help="Score generations against ground-truth answers.")
    p_score.add_argument("generations", help="JSONL of {id, generation}")
    p_score.add_argument("--truths", required=True, help="JSONL of {id, answer}")
    p_score.add_argument("--out", "-o", required=True, help="output rewards JSONL")
    p_score.set_defaults(func=cmd_score)

    p_eval = sub.add_parser("eval", help="Aggregate evaluation records into a metric report.")
    p_eval.add_argument("records", help="JSONL of evaluation records")
    p_eval.add_argument("--weights", help="split weights as MG,MS,MG+D,MS+D")
    p_eval.add_argument("--partial", action="store_true", help="tolerate missing splits")
    p_eval.add_argument(
        "--tokens-correct-only",
        action="store_true",
        help="average output tokens over correct records only",
    )
    p_eval.add_argument("--out", "-o", help="write report JSON here instead of stdout")
    p_eval.set_defaults(func=cmd_eval)

    p_aug = sub.add_parser("augment", help="Generate and verify distractor-augmented problems.")
    p_aug.add_argument("problems", help="JSONL of {id, question, answer}")
    p_aug.add_argument("--type", required=True, choices=["RED", "OAD", "NEED"])
    p_aug.add_argument("--out", "-o", required=True, help="output augmented JSONL")
    p_aug.add_argument("--dry-run", action="store_true", help="use the offline mock teacher")
    p_aug.add_argument("--endpoint", help="teacher chat-completions base URL")
    p_aug.add_argument("--model", help="teacher model name")
    p_aug.add_argument("--config", help="JSON config file with endpoint/model/decoding")
    p_aug.add_argument("--api-key-env", default="TEACHER_API_KEY", help="env var holding the API key")
    p_aug.add_argument("--concurrency", type=int, default=1)
    p_aug.add_argument("--timeout", type=float, default=30.0)
    p_aug.add_argument("--max-requests", type=int, default=None, help="teacher request budget")
    p_aug.set_defaults(func=cmd_augment)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    raise SystemExit(main())
