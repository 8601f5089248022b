# coding: utf-8
"""
====================================
Benchmarking answers, 24 runs deep
====================================

Score generated answers two ways (greedy token-matching similarity and an
LLM-as-judge verdict), repeat the whole dataset to measure consistency, and
inspect the dispersion statistics.
"""

# %%
# The two metrics on a single pair
# --------------------------------

from specrag import HashEmbedder, bertscore, improvement, judge
from specrag.testing import ContainsJudge

embedder = HashEmbedder(dim=1024, seed=7)

triple = bertscore(
    "the home subscriber server stores profiles",
    "home subscriber server",
    embedder,
)
print(f"P={triple.precision:.3f} R={triple.recall:.3f} F1={triple.f1:.3f}")

verdict = judge(
    "What does HSS stand for?",
    "Home Subscriber Server",
    "It stands for Home Subscriber Server.",
    ContainsJudge(),
)
print(f"judge verdict: {verdict.verdict}")

# %%
# Repeated-run benchmark over the sample corpus
# ---------------------------------------------
#
# Everything here is deterministic (hash embedder, mock generator and judge),
# so all 24 runs agree and the dispersion is exactly zero. Against live
# endpoints the same protocol measures real run-to-run variation.

from pathlib import Path

from specrag import (
    PipelineConfig,
    RagEngine,
    TEMPLATES,
    build_embedder,
    ingest_corpus,
    load_qa_dataset,
    run_benchmark,
)
from specrag.testing import FirstChunkGenerator

HERE = Path(__file__).parent

config = PipelineConfig(
    corpus_dir=str(HERE / "corpus"),
    store_path=str(HERE / "store_demo.vstr"),
    chunk_size=200,
    chunk_overlap=20,
    embedder={"kind": "deterministic", "dim": 1024, "seed": 7},
)
store, _ = ingest_corpus(config)
engine = RagEngine(
    build_embedder(config.embedder), store, FirstChunkGenerator(), k=4,
    template=TEMPLATES["zero_shot"],
)

dataset = load_qa_dataset(HERE / "qa.jsonl")
report = run_benchmark(
    dataset, engine, ContainsJudge(), engine.embedder,
    repetitions=24, config_snapshot=config.snapshot(),
)

agg = report.aggregate
print(f"runs: {report.run_count}, items per run: {len(dataset)}")
print(
    "judge_correct_rate: mean={mean:.1f}% stddev={stddev}".format(**agg["judge_correct_rate"])
)
print(
    "mean_bertscore_f1:  mean={mean:.3f} stddev={stddev}".format(**agg["mean_bertscore_f1"])
)

# %%
# Relative-change accounting between two benchmark scores
# -------------------------------------------------------

before, after = 0.674382848, 0.783238483
print(f"\nsimilarity {before:.3f} -> {after:.3f}: {improvement(before, after):+.2f}%")
print(f"judge rate 56% -> 64%: {improvement(56, 64):+.2f}%")

Path(config.store_path).unlink()
