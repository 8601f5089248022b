# coding: utf-8
"""
==============================
Parsing and preprocessing
==============================

Walk through the document model: parse a normalized standards document,
pull its acronym glossary, rewrite tables as sentences, and spell out the
acronyms in the body text.
"""

# %%
# Parse the sample document
# -------------------------

from pathlib import Path

from specrag import corpus_token_stats, extract_abbreviations, parse_document

HERE = Path(__file__).parent

raw = (HERE / "corpus" / "TS23.002.txt").read_text(encoding="utf-8")
doc = parse_document(raw, "TS23.002")

print(f"{doc.doc_id}: {len(doc.blocks)} blocks")
for block in doc.blocks:
    preview = block.text[:60] if block.text else f"<table: {block.table.caption}>"
    print(f"  [{block.block_id:2d}] {block.kind.value:16s} {preview}")

# %%
# The glossary lives in the abbreviations section
# -----------------------------------------------

glossary = extract_abbreviations(doc)
print(f"\nglossary ({glossary.scope}):")
for abbr, expansion in sorted(glossary.entries.items()):
    print(f"  {abbr:5s} -> {expansion}")

# %%
# Tables become one sentence per row
# ----------------------------------
#
# Retrieval over raw table markup is brittle; a per-row sentence keeps every
# cell findable by plain text search and embedding similarity.

from specrag import linearize_tables

linearized = linearize_tables(doc)
table_block = next(b for b in doc.blocks if b.table is not None)
print("\nbefore:", table_block.table.header, table_block.table.rows[0])
print("after: ", linearized.blocks[table_block.block_id].text[:120], "...")

# %%
# Acronyms get spelled out in place
# ---------------------------------
#
# Every occurrence becomes "Expansion (ABBR)", so each chunk stays
# self-explanatory after splitting. The pass is idempotent.

from specrag import expand_abbreviations

expanded = expand_abbreviations(linearized, [glossary])
scope_text = next(b.text for b in expanded.blocks if "Home Subscriber Server" in b.text)
print("\n" + scope_text)
assert expand_abbreviations(expanded, [glossary]) == expanded

# %%
# Corpus size in whitespace tokens
# --------------------------------

docs = [
    parse_document((HERE / "corpus" / name).read_text(encoding="utf-8"), name[:-4])
    for name in ("TS23.002.txt", "TS23.003.txt")
]
stats = corpus_token_stats(docs)
for doc_id, count in sorted(stats.per_doc.items()):
    print(f"{doc_id}: {count} tokens")
print(f"total: {stats.total}")
