"""Deterministic generator/judge backends for tests, demos, and dry runs.

These speak the same ``complete(system, user, temperature)`` interface as the
remote clients, so config can swap them in (kinds "echo", "first_chunk",
"exact", "contains", "always_correct") for hermetic end-to-end runs.
"""

from __future__ import annotations

import re

from .engine import NO_CONTEXT_MARKER

_CONTEXT_BLOCK_RE = re.compile(r"^\[1\] \(chunk .*?, score [-0-9.]+\)\n", re.MULTILINE)


class EchoGenerator:
    """Returns the rendered user prompt verbatim."""

    model = "mock-echo"

    def complete(self, system, user, temperature=None) -> str:
        return user


class FirstChunkGenerator:
    """Answers with the text of the top-ranked context block.

    Parses the zero-shot prompt layout; answers with the no-context marker
    when retrieval came back empty.
    """

    model = "mock-first-chunk"

    def complete(self, system, user, temperature=None) -> str:
        m = _CONTEXT_BLOCK_RE.search(user)
        if not m:
            return NO_CONTEXT_MARKER
        rest = user[m.end() :]
        # The block ends at the next blank line separating prompt parts.
        end = rest.find("\n\n")
        return rest if end == -1 else rest[:end]


class StaticGenerator:
    """Always returns the same canned text."""

    def __init__(self, text: str, model: str = "mock-static"):
        self.text = text
        self.model = model

    def complete(self, system, user, temperature=None) -> str:
        return self.text


class ScriptedClient:
    """Replays a fixed sequence of responses; repeats the last one."""

    model = "mock-scripted"

    def __init__(self, responses: list[str]):
        if not responses:
            raise ValueError("responses must be non-empty")
        self.responses = list(responses)
        self.calls: list[tuple[str | None, str]] = []

    def complete(self, system, user, temperature=None) -> str:
        self.calls.append((system, user))
        index = min(len(self.calls) - 1, len(self.responses) - 1)
        return self.responses[index]


def _grading_fields(user: str) -> tuple[str, str]:
    """Pull the reference and candidate out of the fixed grading prompt."""
    ref_start = user.find("\nReference answer: ")
    cand_start = user.rfind("\nStudent answer: ")
    tail = user.rfind("\nRespond with exactly one line:")
    if ref_start == -1 or cand_start == -1 or tail == -1:
        return "", ""
    reference = user[ref_start + len("\nReference answer: ") : cand_start]
    candidate = user[cand_start + len("\nStudent answer: ") : tail]
    return reference, candidate


class ExactMatchJudge:
    """Grades CORRECT iff the candidate equals the reference (whitespace-trimmed)."""

    model = "mock-judge-exact"

    def complete(self, system, user, temperature=None) -> str:
        reference, candidate = _grading_fields(user)
        verdict = "CORRECT" if candidate.strip() == reference.strip() else "INCORRECT"
        return f"GRADE: {verdict}"


class ContainsJudge:
    """Grades CORRECT iff the reference appears inside the candidate."""

    model = "mock-judge-contains"

    def complete(self, system, user, temperature=None) -> str:
        reference, candidate = _grading_fields(user)
        ok = bool(reference.strip()) and reference.strip().lower() in candidate.lower()
        return f"GRADE: {'CORRECT' if ok else 'INCORRECT'}"


class AlwaysCorrectJudge:
    model = "mock-judge-always-correct"

    def complete(self, system, user, temperature=None) -> str:
        return "GRADE: CORRECT"
