# coding: utf-8
"""
===================================
Chunking, embedding, vector search
===================================

Split a preprocessed document into overlapping windows, embed the windows,
and run exact top-k cosine retrieval over them.
"""

# %%
# Sliding windows with overlap
# ----------------------------
#
# Defaults are 1000-character windows overlapping by 100; here smaller
# values keep the printout readable.

from pathlib import Path

from specrag import chunk_document, chunk_spans, parse_document
from specrag.pipeline import preprocess_document

HERE = Path(__file__).parent

print("window arithmetic over 2500 chars:", chunk_spans(2500, 1000, 100))

raw = (HERE / "corpus" / "TS23.002.txt").read_text(encoding="utf-8")
doc = preprocess_document(parse_document(raw, "TS23.002"), [])
chunks = chunk_document(doc, size=200, overlap=20)
for c in chunks:
    print(f"{c.chunk_id:12s} span={c.char_span} blocks={c.block_range} {c.text[:48]!r}...")

# %%
# Deterministic embeddings
# ------------------------
#
# The hash embedder maps equal tokens to identical unit vectors and distinct
# tokens to near-orthogonal ones; no model download, fully reproducible.

from specrag import HashEmbedder, cosine

embedder = HashEmbedder(dim=1024, seed=7)
v_hss, v_nef, v_hss2 = embedder.embed_texts(["HSS", "NEF", "hss"])
print(f"\ncos(HSS, NEF) = {cosine(v_hss, v_nef):+.4f}   (near zero)")
print(f"cos(HSS, hss) = {cosine(v_hss, v_hss2):+.4f}   (case-folded, identical)")

# %%
# Store and search
# ----------------

from specrag import StoreRecord, VectorStore

store = VectorStore(dim=1024)
vectors = embedder.embed_texts([c.text for c in chunks])
store.insert(
    [
        StoreRecord(c.chunk_id, v, {"doc_id": c.doc_id, "char_span": list(c.char_span), "text": c.text})
        for c, v in zip(chunks, vectors)
    ]
)
print(f"\nstore holds {len(store)} chunks")

query = embedder.embed_texts(["Which parameters are mandatory?"])[0]
for hit in store.search(query, 3):
    print(f"  {hit.score:.4f} {hit.chunk_id:12s} {hit.text[:60]!r}")

# %%
# Persistence round-trip
# ----------------------

out = HERE / "store_demo.vstr"
store.save(out)
loaded = VectorStore.load(out)
assert loaded.search(query, 3) == store.search(query, 3)
print(f"\nsaved and reloaded {out.name}: searches identical")
out.unlink()
