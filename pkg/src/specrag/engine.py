"""Retrieval, prompt assembly, and answer generation.

The default prompt is zero-shot: a strict grounding instruction, numbered
context blocks with chunk provenance, then the question, with no worked
examples. Few-shot and step-by-step variants exist behind the same template
contract but are not the default.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

from .errors import TransportError
from .vectorstore import RetrievalHit, VectorStore

DEFAULT_RETRIEVAL_K = 4
DEFAULT_MAX_PROMPT_CHARS = 12000
NO_CONTEXT_MARKER = "No context retrieved."

ZERO_SHOT_INSTRUCTION = (
    "Answer strictly from the provided context; if the context does not "
    "contain the answer, say so."
)

_FEW_SHOT_EXAMPLES = (
    "Example:\n"
    "Context: The Access and Mobility Management Function (AMF) terminates "
    "NAS signalling.\n"
    "Question: Which function terminates NAS signalling?\n"
    "Answer: The Access and Mobility Management Function (AMF).",
    "Example:\n"
    "Context: The N6 interface sits between the UPF and the data network.\n"
    "Question: Where is the N6 interface?\n"
    "Answer: Between the UPF and the data network.",
)


@dataclass(frozen=True)
class PromptTemplate:
    template_id: str
    system_instruction: str
    example_blocks: tuple[str, ...] = ()  # worked examples, rendered before the context
    reasoning_directive: str = ""  # extra directive appended to the instruction


ZERO_SHOT = PromptTemplate("zero_shot", ZERO_SHOT_INSTRUCTION)
FEW_SHOT = PromptTemplate("few_shot", ZERO_SHOT_INSTRUCTION, example_blocks=_FEW_SHOT_EXAMPLES)
CHAIN_OF_THOUGHT = PromptTemplate(
    "chain_of_thought",
    ZERO_SHOT_INSTRUCTION,
    reasoning_directive=(
        "Work through the relevant context step by step before stating the final answer."
    ),
)

TEMPLATES = {t.template_id: t for t in (ZERO_SHOT, FEW_SHOT, CHAIN_OF_THOUGHT)}


@dataclass(frozen=True)
class PromptBundle:
    system_instruction: str
    context_chunks: list[tuple[str, str, float]]  # (chunk_id, text, score), score desc
    question: str
    rendered: str  # instruction + user message, the full prompt text
    user_message: str
    truncated_chunks: int = 0


@dataclass(frozen=True)
class Answer:
    text: str
    hits: list[RetrievalHit]
    model: str
    latency_ms: int
    prompt_chars: int

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "model": self.model,
            "latency_ms": self.latency_ms,
            "prompt_chars": self.prompt_chars,
            "hits": [
                {
                    "chunk_id": h.chunk_id,
                    "score": h.score,
                    "doc_id": h.metadata.get("doc_id", ""),
                    "char_span": h.metadata.get("char_span"),
                    "text": h.metadata.get("text", ""),
                }
                for h in self.hits
            ],
        }


def _render_user_message(
    question: str, chunks: list[tuple[str, str, float]], template: PromptTemplate
) -> str:
    parts = list(template.example_blocks)
    if chunks:
        blocks = [
            f'[{i + 1}] (chunk {chunk_id}, score {score:.4f})\n{text}'
            for i, (chunk_id, text, score) in enumerate(chunks)
        ]
        parts.append("Context:\n" + "\n\n".join(blocks))
    else:
        parts.append(NO_CONTEXT_MARKER)
    parts.append(f"Question: {question}")
    if template.reasoning_directive:
        parts.append(template.reasoning_directive)
    return "\n\n".join(parts)


def build_prompt(
    question: str,
    hits: list[RetrievalHit],
    template: PromptTemplate = ZERO_SHOT,
    max_chars: int = DEFAULT_MAX_PROMPT_CHARS,
) -> PromptBundle:
    """Assemble the prompt; drops lowest-score chunks if over the budget.

    The highest-scoring chunk and the question itself are never dropped;
    the number of dropped chunks is recorded in the bundle.
    """
    if not question or not question.strip():
        raise ValueError("question must be non-empty")

    chunks = [
        (h.chunk_id, h.metadata.get("text", ""), h.score)
        for h in sorted(hits, key=lambda h: (-h.score, h.chunk_id))
    ]
    truncated = 0
    while True:
        user_message = _render_user_message(question, chunks, template)
        rendered = template.system_instruction + "\n\n" + user_message
        if len(rendered) <= max_chars or len(chunks) <= 1:
            break
        chunks.pop()  # lowest score is last
        truncated += 1
    return PromptBundle(
        system_instruction=template.system_instruction,
        context_chunks=chunks,
        question=question,
        rendered=rendered,
        user_message=user_message,
        truncated_chunks=truncated,
    )


class RagEngine:
    """Embeds the question, retrieves top-k chunks, prompts the generator.

    Safe to share across threads: the store handles reader concurrency and
    the generation client bounds its own in-flight requests. Deterministic
    end-to-end when wired to the hash embedder and a deterministic generator.
    """

    def __init__(
        self,
        embedder,
        store: VectorStore,
        generator,
        *,
        k: int = DEFAULT_RETRIEVAL_K,
        template: PromptTemplate = ZERO_SHOT,
        max_prompt_chars: int = DEFAULT_MAX_PROMPT_CHARS,
        temperature: float = 0.0,
    ):
        if k < 1:
            raise ValueError(f"k must be >= 1, got {k}")
        self.embedder = embedder
        self.store = store
        self.generator = generator
        self.k = k
        self.template = template
        self.max_prompt_chars = max_prompt_chars
        self.temperature = temperature

    def answer(self, question: str) -> Answer:
        if not question or not question.strip():
            raise ValueError("question must be non-empty")
        start = time.perf_counter()
        query_vec = self.embedder.embed_texts([question])[0]
        hits = self.store.search(query_vec, self.k)
        bundle = build_prompt(question, hits, self.template, self.max_prompt_chars)
        try:
            text = self.generator.complete(
                bundle.system_instruction, bundle.user_message, temperature=self.temperature
            )
        except TransportError as exc:
            exc.hits = hits  # keep the retrieval evidence with the failure
            raise
        latency_ms = int((time.perf_counter() - start) * 1000)
        return Answer(
            text=text,
            hits=hits,
            model=getattr(self.generator, "model", "unknown"),
            latency_ms=latency_ms,
            prompt_chars=len(bundle.rendered),
        )
