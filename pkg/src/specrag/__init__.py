"""Retrieval-augmented QA engine and evaluation harness for standards documents."""

from .chunker import Chunk, chunk_document, chunk_spans, flatten, flatten_with_offsets
from .config import PipelineConfig, load_config
from .docmodel import (
    AbbreviationGlossary,
    Block,
    BlockKind,
    CorpusTokenStats,
    Document,
    Table,
    corpus_token_stats,
    extract_abbreviations,
    parse_document,
)
from .embeddings import HashEmbedder, RemoteEmbedder, build_embedder, cosine, tokenize
from .engine import (
    Answer,
    PromptBundle,
    PromptTemplate,
    RagEngine,
    TEMPLATES,
    build_prompt,
)
from .errors import (
    ConfigError,
    CorruptStoreError,
    DatasetError,
    DocumentParseError,
    GlossaryConflictError,
    IntegrityError,
    JudgeProtocolError,
    SpecragError,
    TransportError,
    UndefinedScoreError,
)
from .evalsuite import (
    EvalReport,
    JudgeVerdict,
    QAPair,
    ScoreTriple,
    bertscore,
    improvement,
    judge,
    load_qa_dataset,
    run_benchmark,
)
from .llmclient import ChatCompletionClient
from .pipeline import IngestSummary, ingest_corpus, load_corpus, preprocess_document
from .preprocess import (
    ReferenceEntry,
    ReferenceResolution,
    SftRecord,
    build_sft_dataset,
    expand_abbreviations,
    linearize_tables,
    load_glossary_file,
    load_sft_jsonl,
    resolve_references,
    write_sft_jsonl,
)
from .vectorstore import RetrievalHit, StoreRecord, VectorStore

__version__ = "0.1.0"
