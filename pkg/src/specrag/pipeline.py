"""Corpus ingestion: parse, preprocess, chunk, embed, store.

Per document: parse -> extract its abbreviation glossary -> linearize tables
-> expand abbreviations -> resolve references. Documents referenced by an
ingested document are ingested too, transitively and cycle-safe. A parse or
glossary failure aborts that document only; the summary records it.
"""

from __future__ import annotations

import logging
from collections import deque
from dataclasses import dataclass, field
from pathlib import Path

from .chunker import chunk_document
from .config import PipelineConfig
from .docmodel import AbbreviationGlossary, Document, extract_abbreviations, parse_document
from .embeddings import Embedder
from .errors import SpecragError
from .factories import build_embedder
from .preprocess import (
    expand_abbreviations,
    linearize_tables,
    load_glossary_file,
    resolve_references,
)
from .vectorstore import StoreRecord, VectorStore

logger = logging.getLogger(__name__)


@dataclass
class IngestSummary:
    docs: int = 0
    chunks: int = 0
    unresolved_refs: list[str] = field(default_factory=list)
    failures: list[dict] = field(default_factory=list)
    ingested_doc_ids: list[str] = field(default_factory=list)

    def to_dict(self) -> dict:
        return {
            "docs": self.docs,
            "chunks": self.chunks,
            "unresolved_refs": self.unresolved_refs,
            "failures": self.failures,
            "ingested_doc_ids": self.ingested_doc_ids,
        }


def load_corpus(corpus_dir: str | Path) -> tuple[dict[str, Document], list[dict]]:
    """Parse every *.txt file in the directory; doc_id is the file stem."""
    registry: dict[str, Document] = {}
    failures: list[dict] = []
    for path in sorted(Path(corpus_dir).glob("*.txt")):
        doc_id = path.stem
        try:
            registry[doc_id] = parse_document(path.read_text(encoding="utf-8"), doc_id)
        except SpecragError as exc:
            logger.warning("skipping %s: %s", path, exc)
            failures.append({"doc_id": doc_id, "error": str(exc)})
    return registry, failures


def preprocess_document(
    doc: Document, global_glossaries: list[AbbreviationGlossary]
) -> Document:
    """The full context-engineering pass for one document."""
    doc_glossary = extract_abbreviations(doc)
    glossaries = [doc_glossary] + list(global_glossaries)
    return expand_abbreviations(linearize_tables(doc), glossaries)


def ingest_corpus(
    config: PipelineConfig, embedder: Embedder | None = None
) -> tuple[VectorStore, IngestSummary]:
    """Run the ingest pipeline and persist the resulting store."""
    embedder = embedder or build_embedder(config.embedder)
    store = VectorStore(dim=embedder.dim)
    summary = IngestSummary()

    corpus_dir = Path(config.corpus_dir)
    if not corpus_dir.is_dir():
        raise SpecragError(f"corpus directory not found: {corpus_dir}")
    registry, failures = load_corpus(corpus_dir)
    summary.failures.extend(failures)

    global_glossaries = [load_glossary_file(p) for p in config.glossary_files]

    seeds = config.seed_docs if config.seed_docs else sorted(registry)
    queue = deque(seeds)
    visited: set[str] = set()
    depth: dict[str, int] = {doc_id: 0 for doc_id in seeds}

    while queue:
        doc_id = queue.popleft()
        if doc_id in visited:
            continue
        visited.add(doc_id)
        doc = registry.get(doc_id)
        if doc is None:
            summary.failures.append({"doc_id": doc_id, "error": "not found in corpus"})
            continue

        resolution = resolve_references(doc, registry)
        for ref in resolution.references:
            if ref.resolved and ref.target_doc_id not in visited:
                depth.setdefault(ref.target_doc_id, depth.get(doc_id, 0) + 1)
                queue.append(ref.target_doc_id)
            elif not ref.resolved:
                summary.unresolved_refs.append(
                    f"{doc_id} {ref.ref_label} -> {ref.identifier or 'no 3GPP identifier'}"
                )

        try:
            prepared = preprocess_document(doc, global_glossaries)
            chunks = chunk_document(prepared, config.chunk_size, config.chunk_overlap)
        except SpecragError as exc:
            summary.failures.append({"doc_id": doc_id, "error": str(exc)})
            continue
        if chunks:
            vectors = embedder.embed_texts([c.text for c in chunks])
            store.insert(
                [
                    StoreRecord(
                        chunk_id=c.chunk_id,
                        vector=v,
                        metadata={
                            "doc_id": c.doc_id,
                            "char_span": list(c.char_span),
                            "text": c.text,
                        },
                    )
                    for c, v in zip(chunks, vectors)
                ]
            )
        summary.docs += 1
        summary.chunks += len(chunks)
        summary.ingested_doc_ids.append(doc_id)
        logger.info("ingested %s: %d chunks (depth %d)", doc_id, len(chunks), depth.get(doc_id, 0))

    store.save(config.store_path)
    return store, summary
