"""Sliding-window chunking of flattened document text.

Windows are ``size`` characters with ``overlap`` characters shared between
consecutive windows (defaults 1000/100). Window arithmetic is character
based; `chunk_document` additionally snaps window edges outward to
whitespace so no word is split, at the cost of exact overlap width.
"""

from __future__ import annotations

from dataclasses import dataclass

from .docmodel import Document
from .errors import ConfigError

DEFAULT_CHUNK_SIZE = 1000
DEFAULT_CHUNK_OVERLAP = 100


@dataclass(frozen=True)
class Chunk:
    chunk_id: str  # "<doc_id>#<ordinal>"
    doc_id: str
    char_span: tuple[int, int]  # [start, end) in the flattened text
    text: str
    block_range: tuple[int, int]  # [first_block_id, last_block_id]


def flatten(doc: Document) -> str:
    """Concatenate block texts in order, one newline between blocks."""
    return "\n".join(b.text for b in doc.blocks)


def flatten_with_offsets(doc: Document) -> tuple[str, list[tuple[int, int, int]]]:
    """Flattened text plus each block's (block_id, start, end) char range."""
    offsets = []
    pos = 0
    parts = []
    for i, b in enumerate(doc.blocks):
        if i > 0:
            pos += 1  # the joining newline
        offsets.append((b.block_id, pos, pos + len(b.text)))
        parts.append(b.text)
        pos += len(b.text)
    return "\n".join(parts), offsets


def chunk_spans(length: int, size: int, overlap: int) -> list[tuple[int, int]]:
    """Window spans [i*stride, i*stride+size) with stride = size - overlap.

    Generation stops at the first window whose end reaches ``length``, which
    covers every character; a trailing window can therefore never be shorter
    than the overlap, but such a window would be merged backward anyway.
    """
    if size <= 0:
        raise ConfigError(f"chunk size must be positive, got {size}")
    if overlap < 0 or overlap >= size:
        raise ConfigError(f"overlap must satisfy 0 <= overlap < size, got {overlap}")
    if length <= 0:
        return []

    stride = size - overlap
    spans: list[tuple[int, int]] = []
    start = 0
    while True:
        end = min(start + size, length)
        spans.append((start, end))
        if end >= length:
            break
        start += stride

    if len(spans) >= 2 and spans[-1][1] - spans[-1][0] < overlap:
        spans[-2] = (spans[-2][0], spans[-1][1])
        spans.pop()
    return spans


def snap_span(text: str, start: int, end: int) -> tuple[int, int]:
    """Move span edges outward to whitespace when they would split a word."""
    n = len(text)
    while 0 < start < n and not text[start - 1].isspace() and not text[start].isspace():
        start -= 1
    while 0 < end < n and not text[end - 1].isspace() and not text[end].isspace():
        end += 1
    return start, end


def chunk_document(
    doc: Document,
    size: int = DEFAULT_CHUNK_SIZE,
    overlap: int = DEFAULT_CHUNK_OVERLAP,
    snap_to_words: bool = True,
) -> list[Chunk]:
    """Chunk a document's flattened text, keeping block-level provenance."""
    text, offsets = flatten_with_offsets(doc)
    spans = chunk_spans(len(text), size, overlap)
    if snap_to_words:
        snapped = [snap_span(text, s, e) for s, e in spans]
        spans = [sp for i, sp in enumerate(snapped) if i == 0 or sp != snapped[i - 1]]

    chunks = []
    for ordinal, (start, end) in enumerate(spans):
        touching = [bid for bid, bs, be in offsets if bs < end and be > start]
        if not touching:
            touching = [offsets[0][0]] if offsets else [0]
        chunks.append(
            Chunk(
                chunk_id=f"{doc.doc_id}#{ordinal}",
                doc_id=doc.doc_id,
                char_span=(start, end),
                text=text[start:end],
                block_range=(touching[0], touching[-1]),
            )
        )
    return chunks
