"""Context-engineering passes applied to documents before chunking.

Three transforms targeting the classic retrieval failure modes on standards
text: tables are rewritten as one sentence per row, acronyms are spelled out
in place, and citations of other standards are resolved against the corpus so
they can be ingested too. A fourth operation exports a labeled
question/answer dataset suitable for supervised fine-tuning.

All transforms are pure: inputs are never mutated, each pass returns a new
Document.
"""

from __future__ import annotations

import json
import re
from dataclasses import dataclass, field
from pathlib import Path

from .docmodel import (
    GLOBAL_SCOPE,
    AbbreviationGlossary,
    Block,
    BlockKind,
    Document,
    Table,
)

_STANDARD_ID_RE = re.compile(r"3GPP\s+(TS|TR)\s+(\d+\.\d+)")
_REF_LABEL_RE = re.compile(r"^\[(\d+)\]")
# Word boundary that keeps hyphenated compounds whole, so e.g. a key "UTRAN"
# does not match inside "e-UTRAN".
_BOUNDARY_L = r"(?<![0-9A-Za-z_-])"
_BOUNDARY_R = r"(?![0-9A-Za-z_-])"


@dataclass(frozen=True)
class ReferenceEntry:
    ref_label: str
    identifier: str | None  # normalized "TSnn.nnn"/"TRnn.nnn" when one was found
    target_doc_id: str | None  # set only when resolved against the registry
    resolved: bool


@dataclass(frozen=True)
class ReferenceResolution:
    source_doc: str
    references: list[ReferenceEntry] = field(default_factory=list)


@dataclass(frozen=True)
class SftRecord:
    question: str
    answer: str
    origin: str  # "abbreviation" or "manual"

    def __post_init__(self) -> None:
        if not self.question or not self.answer:
            raise ValueError("SftRecord question and answer must be non-empty")


def _row_sentence(table: Table, row: list[str]) -> str:
    head = f'In table "{table.caption}", {table.header[0]} "{row[0]}"'
    if len(table.header) == 1:
        return head + "."
    parts = [f'{table.header[j]} "{row[j]}"' for j in range(1, len(table.header))]
    return head + " has " + "; ".join(parts) + "."


def table_to_text(table: Table) -> str:
    """One sentence per row; empty tables become a single notice sentence."""
    if not table.rows:
        return f'Table "{table.caption}" is empty.'
    return " ".join(_row_sentence(table, row) for row in table.rows)


def linearize_tables(doc: Document) -> Document:
    """Replace every table block with a paragraph block of row sentences.

    Block ids are preserved, so downstream provenance and the glossary
    section range stay valid. Idempotent: the output has no table blocks.
    """
    blocks = []
    for b in doc.blocks:
        if b.kind is BlockKind.TABLE and b.table is not None:
            blocks.append(
                Block(block_id=b.block_id, kind=BlockKind.PARAGRAPH, text=table_to_text(b.table))
            )
        else:
            blocks.append(b)
    return Document(
        doc_id=doc.doc_id,
        title=doc.title,
        blocks=tuple(blocks),
        glossary_section_range=doc.glossary_section_range,
    )


def _merge_glossaries(glossaries: list[AbbreviationGlossary]) -> dict[str, str]:
    # Earlier glossaries win (document-scoped before global, per call order).
    merged: dict[str, str] = {}
    for g in glossaries:
        for abbr, expansion in g.entries.items():
            merged.setdefault(abbr, expansion)
    return merged


def _protected_spans(text: str, entries: dict[str, str]) -> list[tuple[int, int]]:
    # Spans already of form "<expansion> (<ABBR>)" must not be re-expanded;
    # this also protects acronyms occurring inside another entry's expansion.
    spans = []
    for abbr, expansion in entries.items():
        needle = f"{expansion} ({abbr})"
        start = text.find(needle)
        while start != -1:
            spans.append((start, start + len(needle)))
            start = text.find(needle, start + 1)
    return spans


def _expand_text(text: str, entries: dict[str, str], pattern: re.Pattern) -> str:
    protected = _protected_spans(text, entries)

    def replace(m: re.Match) -> str:
        for s, e in protected:
            if s <= m.start() and m.end() <= e:
                return m.group(0)
        return f"{entries[m.group(0)]} ({m.group(0)})"

    return pattern.sub(replace, text)


def expand_abbreviations(
    doc: Document, glossaries: list[AbbreviationGlossary]
) -> Document:
    """Spell out every whole-word acronym occurrence as ``Expansion (ABBR)``.

    Applies to paragraph blocks and table cells, never to headings, reference
    entries, or any block inside the abbreviations section itself. All
    occurrences are expanded (chunks must be self-explanatory), already
    expanded ones are left alone, so the pass is idempotent. Glossaries are
    consulted in the given order; the first one defining a key wins.
    """
    entries = _merge_glossaries(glossaries)
    if not entries:
        return doc

    # Longest key first so overlapping keys resolve to the longest match.
    alternation = "|".join(re.escape(k) for k in sorted(entries, key=len, reverse=True))
    pattern = re.compile(_BOUNDARY_L + "(?:" + alternation + ")" + _BOUNDARY_R)

    skip = range(0)
    if doc.glossary_section_range is not None:
        first, last = doc.glossary_section_range
        skip = range(first, last + 1)

    blocks = []
    for b in doc.blocks:
        if b.block_id in skip:
            blocks.append(b)
        elif b.kind is BlockKind.PARAGRAPH:
            blocks.append(
                Block(
                    block_id=b.block_id,
                    kind=b.kind,
                    text=_expand_text(b.text, entries, pattern),
                )
            )
        elif b.kind is BlockKind.TABLE and b.table is not None:
            table = Table(
                caption=b.table.caption,
                header=list(b.table.header),
                rows=[
                    [_expand_text(c, entries, pattern) for c in row]
                    for row in b.table.rows
                ],
            )
            blocks.append(Block(block_id=b.block_id, kind=b.kind, text="", table=table))
        else:
            blocks.append(b)
    return Document(
        doc_id=doc.doc_id,
        title=doc.title,
        blocks=tuple(blocks),
        glossary_section_range=doc.glossary_section_range,
    )


def resolve_references(doc: Document, registry: dict[str, Document]) -> ReferenceResolution:
    """Extract 3GPP TS/TR identifiers from reference entries and resolve them.

    An entry resolves when its normalized identifier ("TS23.002") names a
    document present in the registry; unresolved entries keep target_doc_id
    unset. Ingest follows resolved targets transitively (cycle-safe).
    """
    refs = []
    for b in doc.blocks:
        if b.kind is not BlockKind.REFERENCE_ENTRY:
            continue
        label_m = _REF_LABEL_RE.match(b.text)
        label = label_m.group(0) if label_m else b.text[:10]
        id_m = _STANDARD_ID_RE.search(b.text)
        identifier = f"{id_m.group(1)}{id_m.group(2)}" if id_m else None
        resolved = identifier is not None and identifier in registry
        refs.append(
            ReferenceEntry(
                ref_label=label,
                identifier=identifier,
                target_doc_id=identifier if resolved else None,
                resolved=resolved,
            )
        )
    return ReferenceResolution(source_doc=doc.doc_id, references=refs)


def build_sft_dataset(
    glossaries: list[AbbreviationGlossary], manual: list[SftRecord]
) -> list[SftRecord]:
    """Emit "What is <ABBR>?" records from glossaries, then manual records.

    Deduplicated on (question, answer); abbreviation records come first in
    ascending key order, manual records keep their given order.
    """
    records: list[SftRecord] = []
    seen: set[tuple[str, str]] = set()

    derived = sorted(
        {
            (f"What is {abbr}?", expansion)
            for g in glossaries
            for abbr, expansion in g.entries.items()
        }
    )
    for question, answer in derived:
        if (question, answer) not in seen:
            seen.add((question, answer))
            records.append(SftRecord(question=question, answer=answer, origin="abbreviation"))
    for rec in manual:
        if (rec.question, rec.answer) not in seen:
            seen.add((rec.question, rec.answer))
            records.append(SftRecord(question=rec.question, answer=rec.answer, origin="manual"))
    return records


def write_sft_jsonl(records: list[SftRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as f:
        for rec in records:
            f.write(
                json.dumps(
                    {"question": rec.question, "answer": rec.answer, "origin": rec.origin},
                    ensure_ascii=False,
                )
                + "\n"
            )


def load_sft_jsonl(path: str | Path) -> list[SftRecord]:
    records = []
    with open(path, encoding="utf-8") as f:
        for line in f:
            if line.strip():
                obj = json.loads(line)
                records.append(
                    SftRecord(
                        question=obj["question"],
                        answer=obj["answer"],
                        origin=obj.get("origin", "manual"),
                    )
                )
    return records


def load_glossary_file(path: str | Path) -> AbbreviationGlossary:
    """Load a global glossary override file: a JSON map ABBR -> expansion."""
    with open(path, encoding="utf-8") as f:
        data = json.load(f)
    entries = {}
    for abbr, expansion in data.items():
        if not abbr or any(ch.isspace() for ch in abbr):
            raise ValueError(f"glossary key {abbr!r} must be non-empty without whitespace")
        if not expansion:
            raise ValueError(f"glossary key {abbr!r} has an empty expansion")
        entries[abbr] = expansion
    return AbbreviationGlossary(entries=entries, scope=GLOBAL_SCOPE)
