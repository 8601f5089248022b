import json
from pathlib import Path

import pytest

from specrag.config import PipelineConfig

# A normalized document exercising every block kind.
SAMPLE_DOC = """\
# TS23.002 Network architecture

## Scope
This document describes the network architecture.
The HSS stores subscriptions.

## Request handling

@table Request parameters
Parameter | Presence
supportedFeatures | Mandatory
notificationUri | Optional
@end

## Abbreviations
HSS  Home Subscriber Server
NEF  Network Exposure Function

## References
[1] 3GPP TS 23.003, Numbering, addressing and identification
[2] 3GPP TS 99.999, Not in this corpus
"""

REFERENCED_DOC = """\
# TS23.003 Numbering

## Scope
Numbering plans are defined here.

## References
[1] 3GPP TS 23.002, Network architecture
"""


@pytest.fixture
def sample_doc_text():
    return SAMPLE_DOC


def write_corpus(corpus_dir: Path, docs: dict[str, str]) -> Path:
    corpus_dir.mkdir(parents=True, exist_ok=True)
    for doc_id, text in docs.items():
        (corpus_dir / f"{doc_id}.txt").write_text(text, encoding="utf-8")
    return corpus_dir


@pytest.fixture
def corpus_dir(tmp_path):
    return write_corpus(tmp_path / "corpus", {"TS23.002": SAMPLE_DOC, "TS23.003": REFERENCED_DOC})


@pytest.fixture
def pipeline_config(tmp_path, corpus_dir):
    return PipelineConfig(
        corpus_dir=str(corpus_dir),
        store_path=str(tmp_path / "store.vstr"),
        embedder={"kind": "deterministic", "dim": 64, "seed": 7},
        generator={"kind": "echo"},
        judge={"kind": "contains"},
    )


def write_config(tmp_path: Path, config: PipelineConfig) -> Path:
    path = tmp_path / "config.json"
    snap = config.snapshot()
    path.write_text(json.dumps(snap), encoding="utf-8")
    return path
