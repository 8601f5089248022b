"""Answer-quality metrics and the repeated-run benchmark protocol.

Two metrics: greedy token-matching similarity against a reference answer
(BERTScore-style precision/recall/F1 over token embeddings, no IDF
weighting), and an LLM-as-judge correctness verdict parsed from a pinned
grading prompt. The benchmark repeats the whole dataset (default 24 runs)
and reports per-run scores with dispersion statistics, so endpoint
consistency is measurable.
"""

from __future__ import annotations

import json
import logging
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .errors import DatasetError, JudgeProtocolError, UndefinedScoreError

logger = logging.getLogger(__name__)

DEFAULT_REPETITIONS = 24
DEFAULT_PARALLELISM = 4

JUDGE_PROMPT = (
    "You are grading an answer against a reference. Question: {q}\n"
    "Reference answer: {ref}\n"
    "Student answer: {cand}\n"
    "Respond with exactly one line: GRADE: CORRECT or GRADE: INCORRECT."
)
JUDGE_REMINDER = (
    "\nReminder: respond with exactly one line: GRADE: CORRECT or GRADE: INCORRECT."
)


@dataclass(frozen=True)
class QAPair:
    id: str
    question: str
    reference_answer: str
    source_doc: str | None = None
    category: str | None = None

    def __post_init__(self) -> None:
        if not self.question or not self.reference_answer:
            raise ValueError(f"QAPair {self.id!r}: question and reference_answer must be non-empty")


@dataclass(frozen=True)
class ScoreTriple:
    precision: float
    recall: float
    f1: float


@dataclass(frozen=True)
class JudgeVerdict:
    verdict: str  # "correct" or "incorrect"
    raw_response: str


@dataclass(frozen=True)
class ItemResult:
    item_id: str
    bertscore: ScoreTriple | None = None
    verdict: str | None = None
    error: str | None = None


@dataclass(frozen=True)
class RunResult:
    run_index: int
    judge_correct_rate: float | None  # percent over scored items; None if run failed
    mean_bertscore_f1: float | None
    scored: int
    errored: int
    failed: bool
    item_errors: list[dict] = field(default_factory=list)


@dataclass(frozen=True)
class EvalReport:
    run_count: int
    per_run: list[RunResult]
    aggregate: dict
    config: dict

    def to_dict(self) -> dict:
        return {
            "run_count": self.run_count,
            "per_run": [
                {
                    "run_index": r.run_index,
                    "judge_correct_rate": r.judge_correct_rate,
                    "mean_bertscore_f1": r.mean_bertscore_f1,
                    "scored": r.scored,
                    "errored": r.errored,
                    "failed": r.failed,
                    "item_errors": r.item_errors,
                }
                for r in self.per_run
            ],
            "aggregate": self.aggregate,
            "config": self.config,
        }

    def to_json(self, indent: int = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, ensure_ascii=False)


# Schema for the serialized report (jsonschema-compatible).
REPORT_SCHEMA = {
    "type": "object",
    "required": ["run_count", "per_run", "aggregate", "config"],
    "properties": {
        "run_count": {"type": "integer", "minimum": 1},
        "per_run": {
            "type": "array",
            "items": {
                "type": "object",
                "required": [
                    "run_index",
                    "judge_correct_rate",
                    "mean_bertscore_f1",
                    "scored",
                    "errored",
                    "failed",
                ],
                "properties": {
                    "run_index": {"type": "integer", "minimum": 0},
                    "judge_correct_rate": {"type": ["number", "null"], "minimum": 0, "maximum": 100},
                    "mean_bertscore_f1": {"type": ["number", "null"], "minimum": 0, "maximum": 1},
                    "scored": {"type": "integer", "minimum": 0},
                    "errored": {"type": "integer", "minimum": 0},
                    "failed": {"type": "boolean"},
                    "item_errors": {"type": "array"},
                },
            },
        },
        "aggregate": {
            "type": "object",
            "required": ["judge_correct_rate", "mean_bertscore_f1"],
            "properties": {
                "judge_correct_rate": {"$ref": "#/$defs/stats"},
                "mean_bertscore_f1": {"$ref": "#/$defs/stats"},
            },
        },
        "config": {"type": "object"},
    },
    "$defs": {
        "stats": {
            "type": "object",
            "required": ["mean", "min", "max", "stddev"],
            "properties": {
                "mean": {"type": ["number", "null"]},
                "min": {"type": ["number", "null"]},
                "max": {"type": ["number", "null"]},
                "stddev": {"type": ["number", "null"]},
            },
        }
    },
}


def bertscore(candidate: str, reference: str, embedder) -> ScoreTriple:
    """Greedy token-matching P/R/F1 over token embeddings.

    Precision averages, over candidate tokens, the best cosine against any
    reference token; recall swaps the roles; cosines are clamped to [0, 1]
    before averaging so hash-noise negatives cannot push scores below zero.
    """
    cand_tokens = embedder.embed_tokens(candidate) if candidate else []
    ref_tokens = embedder.embed_tokens(reference) if reference else []
    if not cand_tokens or not ref_tokens:
        raise UndefinedScoreError(
            "similarity is undefined: an input has no tokens after tokenization"
        )
    cand_matrix = np.stack([v for _, v in cand_tokens])
    ref_matrix = np.stack([v for _, v in ref_tokens])
    sims = np.clip(cand_matrix @ ref_matrix.T, 0.0, 1.0)
    precision = float(sims.max(axis=1).mean())
    recall = float(sims.max(axis=0).mean())
    denominator = precision + recall
    f1 = 2 * precision * recall / denominator if denominator > 0 else 0.0
    return ScoreTriple(precision=precision, recall=recall, f1=f1)


def _parse_grade(raw: str) -> str | None:
    for line in reversed(raw.splitlines()):
        stripped = line.strip()
        if stripped == "GRADE: CORRECT":
            return "correct"
        if stripped == "GRADE: INCORRECT":
            return "incorrect"
    return None


def judge(question: str, reference: str, candidate: str, judge_client) -> JudgeVerdict:
    """Grade a candidate answer against the reference with a judge model.

    Sends the pinned grading prompt at temperature 0 and parses the GRADE
    line; one retry with a reminder suffix on parse failure.
    """
    prompt = JUDGE_PROMPT.format(q=question, ref=reference, cand=candidate)
    raw = judge_client.complete(None, prompt, temperature=0.0)
    verdict = _parse_grade(raw)
    if verdict is None:
        raw = judge_client.complete(None, prompt + JUDGE_REMINDER, temperature=0.0)
        verdict = _parse_grade(raw)
        if verdict is None:
            raise JudgeProtocolError(
                "judge response has no GRADE line after retry", raw_response=raw
            )
    return JudgeVerdict(verdict=verdict, raw_response=raw)


def _score_item(pair: QAPair, engine, judge_client, embedder) -> ItemResult:
    try:
        answer = engine.answer(pair.question)
        triple = bertscore(answer.text, pair.reference_answer, embedder)
        verdict = judge(pair.question, pair.reference_answer, answer.text, judge_client)
        return ItemResult(item_id=pair.id, bertscore=triple, verdict=verdict.verdict)
    except Exception as exc:  # per-item isolation: one bad item never aborts a run
        logger.warning("item %s failed: %s", pair.id, exc)
        return ItemResult(item_id=pair.id, error=f"{type(exc).__name__}: {exc}")


def _stats(values: list[float]) -> dict:
    if not values:
        return {"mean": None, "min": None, "max": None, "stddev": None}
    lo, hi = min(values), max(values)
    mean = float(np.mean(values))
    # Identical values are zero dispersion by definition; avoid fp residue.
    stddev = 0.0 if lo == hi else float(np.std(values))
    return {"mean": mean, "min": lo, "max": hi, "stddev": stddev}


def run_benchmark(
    dataset: list[QAPair],
    engine,
    judge_client,
    embedder,
    repetitions: int = DEFAULT_REPETITIONS,
    parallelism: int = DEFAULT_PARALLELISM,
    config_snapshot: dict | None = None,
) -> EvalReport:
    """Score the whole dataset ``repetitions`` times and aggregate.

    Items are scored independently with a bounded worker pool; per-item
    failures are recorded without aborting the run, and a run where every
    item failed is marked failed and excluded from the aggregates.
    """
    if not dataset:
        raise ValueError("dataset must be non-empty")
    if repetitions < 1:
        raise ValueError(f"repetitions must be >= 1, got {repetitions}")

    per_run: list[RunResult] = []
    for run_index in range(repetitions):
        with ThreadPoolExecutor(max_workers=max(1, parallelism)) as pool:
            results = list(
                pool.map(lambda p: _score_item(p, engine, judge_client, embedder), dataset)
            )
        scored = [r for r in results if r.error is None]
        errored = [r for r in results if r.error is not None]
        if scored:
            rate = 100.0 * sum(1 for r in scored if r.verdict == "correct") / len(scored)
            mean_f1 = float(np.mean([r.bertscore.f1 for r in scored]))
        else:
            rate = None
            mean_f1 = None
        per_run.append(
            RunResult(
                run_index=run_index,
                judge_correct_rate=rate,
                mean_bertscore_f1=mean_f1,
                scored=len(scored),
                errored=len(errored),
                failed=not scored,
                item_errors=[{"id": r.item_id, "error": r.error} for r in errored],
            )
        )

    ok_runs = [r for r in per_run if not r.failed]
    aggregate = {
        "judge_correct_rate": _stats([r.judge_correct_rate for r in ok_runs]),
        "mean_bertscore_f1": _stats([r.mean_bertscore_f1 for r in ok_runs]),
    }
    return EvalReport(
        run_count=repetitions,
        per_run=per_run,
        aggregate=aggregate,
        config=dict(config_snapshot or {}),
    )


def improvement(baseline_score: float, new_score: float) -> float:
    """Relative change in percent: 100 * (new - baseline) / baseline."""
    if not math.isfinite(baseline_score) or baseline_score <= 0:
        raise ValueError(f"baseline score must be positive, got {baseline_score}")
    return 100.0 * (new_score - baseline_score) / baseline_score


def load_qa_dataset(path: str | Path) -> list[QAPair]:
    """Load QA pairs from JSONL; errors name the offending line number."""
    pairs = []
    with open(path, encoding="utf-8") as f:
        for line_no, line in enumerate(f, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                pairs.append(
                    QAPair(
                        id=str(obj["id"]),
                        question=obj["question"],
                        reference_answer=obj["reference_answer"],
                        source_doc=obj.get("source_doc"),
                        category=obj.get("category"),
                    )
                )
            except (ValueError, KeyError, TypeError) as exc:
                raise DatasetError(f"{path}: line {line_no}: {exc}") from exc
    return pairs
