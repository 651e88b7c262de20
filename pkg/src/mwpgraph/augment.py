"""Deterministic side of the benchmark augmentation pipeline.

Sentence segmentation, distractor insertion against original sentence
numbering, teacher-output parsing, and the teacher client abstraction
(HTTP with retries, plus deterministic mocks for tests and dry runs).
"""

from __future__ import annotations

import hashlib
import json
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Mapping, Protocol, Sequence

import httpx

from . import jsonscan
from .prompts import build_prompt

SENTENCE_DELIMITERS = "।?!"

# A segment is everything up to and including a delimiter, or a trailing
# delimiter-less remainder.
_SENTENCE_RE = re.compile(r"[^।?!]*[।?!]|[^।?!]+$")

VARIANT_KINDS = ("RED", "OAD", "NEED")


class IndexOutOfRange(ValueError):
    """insert_after points past the original problem's sentence count."""


class TeacherOutputError(ValueError):
    """Teacher response does not fit the requested JSON schema."""


class TransportError(RuntimeError):
    """Teacher endpoint unreachable after retries."""


class BudgetExceeded(RuntimeError):
    """Configured request budget used up."""


@dataclass(frozen=True)
class DistractorSentence:
    sentence: str
    insert_after: int  # 1-based index into the ORIGINAL problem's sentences

    def __post_init__(self) -> None:
        if not self.sentence:
            raise ValueError("distractor sentence must be non-empty")
        if self.insert_after < 1:
            raise ValueError("insert_after is 1-based and must be positive")


@dataclass(frozen=True)
class VerificationVerdict:
    justification: str
    answers_match: bool


@dataclass(frozen=True)
class ReviewRecord:
    """Human expert review outcome; the review itself happens elsewhere."""

    reviewer_id: str
    approved: bool
    note: str = ""


@dataclass(frozen=True)
class AugmentedProblem:
    original: str
    variant_type: str
    insertions: tuple[DistractorSentence, ...]
    text: str
    answer: float  # augmentation is answer-preserving by construction


@dataclass(frozen=True)
class AugmentationResult:
    problem_id: str
    variant_type: str
    insertions: tuple[DistractorSentence, ...]
    text: str
    answer: float
    verdict: VerificationVerdict | None
    error: str | None = None

    def to_dict(self) -> dict:
        verdict = None
        if self.verdict is not None:
            verdict = {
                "justification": self.verdict.justification,
                "answers_match": self.verdict.answers_match,
            }
        row = {
            "id": self.problem_id,
            "variant_type": self.variant_type,
            "insertions": [
                {"sentence": s.sentence, "insert_after": s.insert_after} for s in self.insertions
            ],
            "text": self.text,
            "answer": self.answer,
            "verdict": verdict,
        }
        if self.error is not None:
            row["error"] = self.error
        return row


def split_sentences(text: str) -> list[str]:
    """Split on the Bengali danda, '?' and '!', keeping each delimiter.

    Segments are whitespace-trimmed; empties are dropped.
    """
    return [seg.strip() for seg in _SENTENCE_RE.findall(text) if seg.strip()]


def apply_insertions(original: str, insertions: Sequence[DistractorSentence]) -> str:
    """Interleave distractor sentences into the original problem.

    Indices always refer to the ORIGINAL sentence numbering; several
    insertions at the same index keep their list order. The result is
    re-joined with single spaces.
    """
    sentences = split_sentences(original)
    n = len(sentences)
    for ins in insertions:
        if ins.insert_after > n:
            raise IndexOutOfRange(
                f"insert_after={ins.insert_after} but the problem has {n} sentence(s)"
            )
    ordered = sorted(insertions, key=lambda s: s.insert_after)  # stable
    out: list[str] = []
    for i, sentence in enumerate(sentences, start=1):
        out.append(sentence)
        out.extend(ins.sentence for ins in ordered if ins.insert_after == i)
    return " ".join(out)


def parse_sentence_insertions(text: str) -> list[DistractorSentence]:
    """Parse a generation-stage teacher response into insertion records."""
    span = jsonscan.extract_object(text, required_keys=("sentences",))
    if span is None:
        raise TeacherOutputError("no JSON object with a 'sentences' key found")
    try:
        data = json.loads(span)
    except json.JSONDecodeError as e:
        raise TeacherOutputError(f"sentences JSON does not parse: {e}") from None
    items = data.get("sentences")
    if not isinstance(items, list) or not items:
        raise TeacherOutputError("'sentences' must be a non-empty array")
    parsed: list[DistractorSentence] = []
    for item in items:
        if not isinstance(item, dict):
            raise TeacherOutputError("each sentence entry must be an object")
        sentence = item.get("sentence")
        idx = item.get("insert_after")
        if not isinstance(sentence, str) or not sentence:
            raise TeacherOutputError("'sentence' must be a non-empty string")
        if not isinstance(idx, int) or isinstance(idx, bool) or idx < 1:
            raise TeacherOutputError("'insert_after' must be a positive integer")
        parsed.append(DistractorSentence(sentence=sentence, insert_after=idx))
    return parsed


def parse_verdict(text: str) -> VerificationVerdict:
    """Parse the verification-stage JSON verdict out of a teacher response."""
    span = jsonscan.extract_object(text, required_keys=("justification", "answers_match"))
    if span is None:
        raise TeacherOutputError("no JSON object with justification/answers_match found")
    try:
        data = json.loads(span)
    except json.JSONDecodeError as e:
        raise TeacherOutputError(f"verdict JSON does not parse: {e}") from None
    if "answers_match" not in data or not isinstance(data["answers_match"], bool):
        raise TeacherOutputError("'answers_match' must be a boolean")
    return VerificationVerdict(
        justification=str(data.get("justification", "")),
        answers_match=data["answers_match"],
    )


class TeacherClient(Protocol):
    def generate(self, prompt: str, **decoding: object) -> str: ...


def prompt_key(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


class MockTeacherClient:
    """Fixture-keyed teacher for tests: responses looked up by prompt hash
    (or literal prompt), with an optional fallback function."""

    def __init__(
        self,
        fixtures: Mapping[str, str] | None = None,
        default: Callable[[str], str] | None = None,
    ):
        self.fixtures = dict(fixtures or {})
        self.default = default
        self.calls: list[str] = []

    def generate(self, prompt: str, **decoding: object) -> str:
        self.calls.append(prompt)
        key = prompt_key(prompt)
        if key in self.fixtures:
            return self.fixtures[key]
        if prompt in self.fixtures:
            return self.fixtures[prompt]
        if self.default is not None:
            return self.default(prompt)
        raise TransportError(f"no fixture for prompt hash {key[:12]}...")


_DRY_RUN_SENTENCE = "সে আরও কিছু কেনার কথা ভেবেছিল, কিন্তু পরে আর কিনল না।"


def dry_run_teacher() -> MockTeacherClient:
    """Deterministic offline teacher: one fixed insertion, always-true verdict."""

    def respond(prompt: str) -> str:
        if prompt.startswith("You are a math problem verifier"):
            return json.dumps(
                {"justification": "dry-run fixture", "answers_match": True}, ensure_ascii=False
            )
        return json.dumps(
            {"sentences": [{"sentence": _DRY_RUN_SENTENCE, "insert_after": 1}]},
            ensure_ascii=False,
        )

    return MockTeacherClient(default=respond)


class HttpTeacherClient:
    """Chat-completion-style HTTP teacher with retries and a request budget."""

    def __init__(
        self,
        endpoint: str,
        model: str,
        api_key: str | None = None,
        *,
        timeout: float = 30.0,
        max_attempts: int = 3,
        backoff: float = 0.5,
        max_requests: int | None = None,
        transport: httpx.BaseTransport | None = None,
    ):
        self.endpoint = endpoint.rstrip("/")
        self.model = model
        self.api_key = api_key
        self.timeout = timeout
        self.max_attempts = max_attempts
        self.backoff = backoff
        self.max_requests = max_requests
        self.requests_made = 0
        self._client = httpx.Client(timeout=timeout, transport=transport)

    def close(self) -> None:
        self._client.close()

    def generate(self, prompt: str, **decoding: object) -> str:
        if self.max_requests is not None and self.requests_made >= self.max_requests:
            raise BudgetExceeded(f"request budget of {self.max_requests} exhausted")
        self.requests_made += 1

        headers = {"Content-Type": "application/json"}
        if self.api_key:
            headers["Authorization"] = f"Bearer {self.api_key}"
        body = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            **decoding,
        }
        url = f"{self.endpoint}/chat/completions"

        last_error: Exception | None = None
        for attempt in range(self.max_attempts):
            if attempt:
                time.sleep(self.backoff * 2 ** (attempt - 1))
            try:
                response = self._client.post(url, json=body, headers=headers)
            except httpx.HTTPError as e:
                last_error = e
                continue
            if response.status_code >= 500:
                last_error = RuntimeError(f"server error {response.status_code}")
                continue
            if response.status_code != 200:
                raise TransportError(f"teacher endpoint returned {response.status_code}")
            try:
                return response.json()["choices"][0]["message"]["content"]
            except (KeyError, IndexError, TypeError, json.JSONDecodeError) as e:
                raise TransportError(f"unexpected response shape: {e}") from None
        raise TransportError(f"teacher endpoint unreachable after {self.max_attempts} attempts: {last_error}")


def augment_problem(
    problem: Mapping[str, object],
    kind: str,
    client: TeacherClient,
    *,
    decoding: Mapping[str, object] | None = None,
) -> AugmentationResult:
    """Run one problem through generation and verification.

    Per-row schema problems (bad teacher JSON, out-of-range indices) are
    contained in the result's error field; transport and budget failures
    propagate so the caller can checkpoint.
    """
    if kind not in VARIANT_KINDS:
        raise ValueError(f"variant kind must be one of {VARIANT_KINDS}, got {kind!r}")
    question = str(problem["question"])
    answer = float(problem["answer"])  # type: ignore[arg-type]
    pid = str(problem.get("id", ""))
    decoding = dict(decoding or {})

    def failed(message: str) -> AugmentationResult:
        return AugmentationResult(
            problem_id=pid,
            variant_type=kind,
            insertions=(),
            text=question,
            answer=answer,
            verdict=None,
            error=message,
        )

    prompt = build_prompt(kind, {"question": question, "answer": answer})
    raw = client.generate(prompt, **decoding)
    try:
        insertions = tuple(parse_sentence_insertions(raw))
        text = apply_insertions(question, insertions)
    except (TeacherOutputError, IndexOutOfRange) as e:
        return failed(str(e))

    verify_prompt = build_prompt(
        "VERIFY", {"original": question, "modified": text, "ground_truth": answer}
    )
    verify_raw = client.generate(verify_prompt, **decoding)
    try:
        verdict = parse_verdict(verify_raw)
    except TeacherOutputError as e:
        return failed(str(e))

    return AugmentationResult(
        problem_id=pid,
        variant_type=kind,
        insertions=insertions,
        text=text,
        answer=answer,
        verdict=verdict,
    )


def augment_dataset(
    problems: Iterable[Mapping[str, object]],
    kind: str,
    client: TeacherClient,
    *,
    concurrency: int = 1,
    decoding: Mapping[str, object] | None = None,
) -> list[AugmentationResult]:
    """Augment a batch with bounded parallelism, preserving input order."""
    items = list(problems)
    if concurrency <= 1:
        return [augment_problem(p, kind, client, decoding=decoding) for p in items]
    with ThreadPoolExecutor(max_workers=concurrency) as pool:
        return list(pool.map(lambda p: augment_problem(p, kind, client, decoding=decoding), items))
