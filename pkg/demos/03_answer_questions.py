# coding: utf-8
"""
==============================
End-to-end question answering
==============================

Ingest the sample corpus (including documents pulled in through their
references), then answer questions with retrieval-grounded prompts.
"""

# %%
# Ingest: parse -> preprocess -> chunk -> embed -> store
# ------------------------------------------------------

from pathlib import Path

from specrag import PipelineConfig, RagEngine, TEMPLATES, build_embedder, ingest_corpus
from specrag.testing import FirstChunkGenerator

HERE = Path(__file__).parent

config = PipelineConfig(
    corpus_dir=str(HERE / "corpus"),
    store_path=str(HERE / "store_demo.vstr"),
    chunk_size=200,
    chunk_overlap=20,
    embedder={"kind": "deterministic", "dim": 1024, "seed": 7},
)
store, summary = ingest_corpus(config)
print(f"ingested {summary.docs} documents into {summary.chunks} chunks")
for ref in summary.unresolved_refs:
    print(f"  unresolved: {ref}")

# %%
# Ask questions
# -------------
#
# The mock generator answers with the top retrieved chunk, which makes the
# retrieval quality directly visible. Swap in a `{"kind": "remote", ...}`
# generator spec to talk to a real chat endpoint.

engine = RagEngine(
    build_embedder(config.embedder),
    store,
    FirstChunkGenerator(),
    k=3,
    template=TEMPLATES["zero_shot"],
)

for question in (
    "What does HSS stand for?",
    "Is supportedFeatures mandatory?",
    "How long is a SUPI?",
):
    answer = engine.answer(question)
    print(f"\nQ: {question}")
    print(f"A: {answer.text[:100]}")
    for hit in answer.hits:
        print(f"   {hit.score:.4f} {hit.chunk_id}")

# %%
# Zero-shot prompt anatomy
# ------------------------

from specrag import build_prompt

hits = store.search(build_embedder(config.embedder).embed_texts(["What does HSS stand for?"])[0], 2)
bundle = build_prompt("What does HSS stand for?", hits)
print("\n--- rendered prompt ---")
print(bundle.rendered[:600])

Path(config.store_path).unlink()
