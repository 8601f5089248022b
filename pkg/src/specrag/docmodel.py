"""Normalized standards-document representation and its plain-text parser.

Input format, one UTF-8 file per document:

* headings: a line of ``#`` repeated 1-6 times, one space, then the title;
* paragraphs: runs of non-blank lines, separated by blank lines;
* tables: a fenced block opening with ``@table <caption>``, then one header
  line and N row lines with cells separated by `` | ``, closed by ``@end``;
* reference entries: lines starting ``[n] `` inside a section whose heading
  is "References".

Documents are immutable after construction and safe to share across threads.
"""

from __future__ import annotations

import re
from dataclasses import dataclass, field
from enum import Enum

from .errors import DocumentParseError, GlossaryConflictError

GLOBAL_SCOPE = "global"

_HEADING_RE = re.compile(r"^(#{1,6}) (.*)$")
_TABLE_OPEN_RE = re.compile(r"^@table (.*)$")
_REFERENCE_LINE_RE = re.compile(r"^\[(\d+)\] ")
_ABBREV_LINE_RE = re.compile(r"^(\S+)(?:\t+| {2,})(\S.*?)\s*$")


class BlockKind(str, Enum):
    HEADING = "heading"
    PARAGRAPH = "paragraph"
    TABLE = "table"
    REFERENCE_ENTRY = "reference_entry"


@dataclass(frozen=True)
class Table:
    caption: str
    header: list[str]
    rows: list[list[str]]


@dataclass(frozen=True)
class Block:
    """One document block. ``text`` is empty iff the block is a table."""

    block_id: int
    kind: BlockKind
    text: str = ""
    level: int = 0  # heading level 1-6; 0 for non-headings
    table: Table | None = None


@dataclass(frozen=True)
class Document:
    doc_id: str
    title: str
    blocks: tuple[Block, ...]
    # Inclusive block-id range of the abbreviations section (heading included),
    # when the document has one.
    glossary_section_range: tuple[int, int] | None = None


@dataclass(frozen=True)
class AbbreviationGlossary:
    """Acronym -> expansion map, scoped to one document or global.

    Keys contain no whitespace; expansions are never empty.
    """

    entries: dict[str, str] = field(default_factory=dict)
    scope: str = GLOBAL_SCOPE  # a doc_id, or GLOBAL_SCOPE

    def __len__(self) -> int:
        return len(self.entries)


@dataclass(frozen=True)
class CorpusTokenStats:
    per_doc: dict[str, int]
    total: int


def parse_document(raw: str, doc_id: str) -> Document:
    """Parse normalized plain text into a Document.

    Deterministic: identical input bytes yield identical Documents. Raises
    DocumentParseError on empty input, unterminated table fences, malformed
    table headers, and header/row arity mismatches (naming the block ordinal).
    """
    if not raw or not raw.strip():
        raise DocumentParseError(f"{doc_id}: empty document")

    lines = raw.split("\n")
    blocks: list[Block] = []
    paragraph_lines: list[str] = []
    section_heading = ""  # text of the innermost current heading, casefolded
    i = 0

    def flush_paragraph() -> None:
        if paragraph_lines:
            blocks.append(
                Block(
                    block_id=len(blocks),
                    kind=BlockKind.PARAGRAPH,
                    text="\n".join(paragraph_lines),
                )
            )
            paragraph_lines.clear()

    while i < len(lines):
        line = lines[i]

        if not line.strip():
            flush_paragraph()
            i += 1
            continue

        m = _HEADING_RE.match(line)
        if m:
            flush_paragraph()
            level = len(m.group(1))
            text = m.group(2).strip()
            blocks.append(
                Block(block_id=len(blocks), kind=BlockKind.HEADING, text=text, level=level)
            )
            section_heading = text.casefold()
            i += 1
            continue

        m = _TABLE_OPEN_RE.match(line)
        if m:
            flush_paragraph()
            caption = m.group(1).strip()
            ordinal = len(blocks)
            i += 1
            fence: list[str] = []
            while i < len(lines) and lines[i].strip() != "@end":
                fence.append(lines[i])
                i += 1
            if i >= len(lines):
                raise DocumentParseError(
                    f"{doc_id}: table at block {ordinal} is missing its @end fence"
                )
            i += 1  # consume @end
            fence = [ln for ln in fence if ln.strip()]
            if not fence:
                raise DocumentParseError(
                    f"{doc_id}: table at block {ordinal} has no header line"
                )
            header = [c.strip() for c in fence[0].split(" | ")]
            if not header or any(not h for h in header):
                raise DocumentParseError(
                    f"{doc_id}: table at block {ordinal} has an empty header cell"
                )
            rows: list[list[str]] = []
            for row_line in fence[1:]:
                cells = [c.strip() for c in row_line.split(" | ")]
                if len(cells) != len(header):
                    raise DocumentParseError(
                        f"{doc_id}: table at block {ordinal}: row has {len(cells)} "
                        f"cells, header has {len(header)}"
                    )
                rows.append(cells)
            blocks.append(
                Block(
                    block_id=ordinal,
                    kind=BlockKind.TABLE,
                    text="",
                    table=Table(caption=caption, header=header, rows=rows),
                )
            )
            continue

        if section_heading == "references" and _REFERENCE_LINE_RE.match(line):
            flush_paragraph()
            blocks.append(
                Block(block_id=len(blocks), kind=BlockKind.REFERENCE_ENTRY, text=line)
            )
            i += 1
            continue

        paragraph_lines.append(line)
        i += 1

    flush_paragraph()

    title = next(
        (b.text for b in blocks if b.kind is BlockKind.HEADING and b.level == 1),
        doc_id,
    )
    return Document(
        doc_id=doc_id,
        title=title,
        blocks=tuple(blocks),
        glossary_section_range=_find_glossary_section(blocks),
    )


def _find_glossary_section(blocks: list[Block]) -> tuple[int, int] | None:
    """Inclusive block-id range of the first abbreviations section.

    Heuristic: a heading whose text contains "abbreviation" (case-insensitive);
    the section runs until the next heading of the same or shallower level.
    """
    for b in blocks:
        if b.kind is BlockKind.HEADING and "abbreviation" in b.text.casefold():
            last = b.block_id
            for nb in blocks[b.block_id + 1 :]:
                if nb.kind is BlockKind.HEADING and nb.level <= b.level:
                    break
                last = nb.block_id
            return (b.block_id, last)
    return None


def extract_abbreviations(doc: Document) -> AbbreviationGlossary:
    """Build the document-scoped glossary from its abbreviations section.

    Each paragraph line of form ``ABBR<tab or 2+ spaces>Expansion`` and each
    table row (first two cells) inside the section yields one entry. Returns
    an empty glossary when the document has no abbreviations section. Raises
    GlossaryConflictError when one abbreviation maps to two expansions.
    """
    entries: dict[str, str] = {}
    if doc.glossary_section_range is None:
        return AbbreviationGlossary(entries={}, scope=doc.doc_id)

    first, last = doc.glossary_section_range

    def add(abbr: str, expansion: str) -> None:
        if not abbr or not expansion or any(ch.isspace() for ch in abbr):
            return
        if abbr in entries and entries[abbr] != expansion:
            raise GlossaryConflictError(
                f"{doc.doc_id}: abbreviation {abbr!r} maps to both "
                f"{entries[abbr]!r} and {expansion!r}"
            )
        entries[abbr] = expansion

    for b in doc.blocks[first : last + 1]:
        if b.kind is BlockKind.PARAGRAPH:
            for line in b.text.split("\n"):
                m = _ABBREV_LINE_RE.match(line)
                if m:
                    add(m.group(1), m.group(2))
        elif b.kind is BlockKind.TABLE and b.table is not None:
            for row in b.table.rows:
                if len(row) >= 2:
                    add(row[0], row[1])

    return AbbreviationGlossary(entries=entries, scope=doc.doc_id)


def _block_token_count(block: Block) -> int:
    # Tokens are maximal whitespace-delimited runs; tables count their header
    # names and row cells, not the caption.
    n = len(block.text.split())
    if block.table is not None:
        n += sum(len(h.split()) for h in block.table.header)
        n += sum(len(c.split()) for row in block.table.rows for c in row)
    return n


def corpus_token_stats(corpus: list[Document]) -> CorpusTokenStats:
    """Whitespace-token counts per document, plus the corpus total."""
    per_doc = {
        doc.doc_id: sum(_block_token_count(b) for b in doc.blocks) for doc in corpus
    }
    return CorpusTokenStats(per_doc=per_doc, total=sum(per_doc.values()))
