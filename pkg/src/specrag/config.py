"""Pipeline configuration: one JSON document plus SPECRAG_* env overrides."""

from __future__ import annotations

import json
import os
from dataclasses import asdict, dataclass, field
from pathlib import Path

from .chunker import DEFAULT_CHUNK_OVERLAP, DEFAULT_CHUNK_SIZE
from .engine import DEFAULT_MAX_PROMPT_CHARS, DEFAULT_RETRIEVAL_K, TEMPLATES
from .errors import ConfigError
from .evalsuite import DEFAULT_PARALLELISM, DEFAULT_REPETITIONS


@dataclass
class PipelineConfig:
    corpus_dir: str = "corpus"
    store_path: str = "store.vstr"
    chunk_size: int = DEFAULT_CHUNK_SIZE
    chunk_overlap: int = DEFAULT_CHUNK_OVERLAP
    retrieval_k: int = DEFAULT_RETRIEVAL_K
    max_prompt_chars: int = DEFAULT_MAX_PROMPT_CHARS
    template: str = "zero_shot"
    embedder: dict = field(default_factory=lambda: {"kind": "deterministic", "dim": 256, "seed": 0})
    generator: dict = field(default_factory=lambda: {"kind": "echo"})
    judge: dict = field(default_factory=lambda: {"kind": "exact"})
    eval_repetitions: int = DEFAULT_REPETITIONS
    eval_parallelism: int = DEFAULT_PARALLELISM
    glossary_files: list[str] = field(default_factory=list)
    seed_docs: list[str] | None = None  # default: every document in corpus_dir
    reload_secret: str = ""
    host: str = "127.0.0.1"
    port: int = 8080
    ui_dir: str = ""  # static assets to serve at /, when present

    def validate(self) -> None:
        if self.chunk_size <= 0:
            raise ConfigError(f"chunk.size must be positive, got {self.chunk_size}")
        if not (0 <= self.chunk_overlap < self.chunk_size):
            raise ConfigError(
                f"chunk.overlap must satisfy 0 <= overlap < size, got {self.chunk_overlap}"
            )
        if self.retrieval_k < 1:
            raise ConfigError(f"retrieval_k must be >= 1, got {self.retrieval_k}")
        if self.eval_repetitions < 1:
            raise ConfigError(f"eval.repetitions must be >= 1, got {self.eval_repetitions}")
        if self.eval_parallelism < 1:
            raise ConfigError(f"eval.parallelism must be >= 1, got {self.eval_parallelism}")
        if self.template not in TEMPLATES:
            raise ConfigError(
                f"unknown template {self.template!r}; known: {sorted(TEMPLATES)}"
            )

    def snapshot(self) -> dict:
        """Full config as a JSON-safe dict, for report reproducibility."""
        snap = asdict(self)
        snap["chunk"] = {"size": snap.pop("chunk_size"), "overlap": snap.pop("chunk_overlap")}
        snap["eval"] = {
            "repetitions": snap.pop("eval_repetitions"),
            "parallelism": snap.pop("eval_parallelism"),
        }
        return snap


_ENV_OVERRIDES = {
    "SPECRAG_CORPUS_DIR": ("corpus_dir", str),
    "SPECRAG_STORE_PATH": ("store_path", str),
    "SPECRAG_CHUNK_SIZE": ("chunk_size", int),
    "SPECRAG_CHUNK_OVERLAP": ("chunk_overlap", int),
    "SPECRAG_RETRIEVAL_K": ("retrieval_k", int),
    "SPECRAG_MAX_PROMPT_CHARS": ("max_prompt_chars", int),
    "SPECRAG_TEMPLATE": ("template", str),
    "SPECRAG_EVAL_REPETITIONS": ("eval_repetitions", int),
    "SPECRAG_EVAL_PARALLELISM": ("eval_parallelism", int),
    "SPECRAG_RELOAD_SECRET": ("reload_secret", str),
    "SPECRAG_HOST": ("host", str),
    "SPECRAG_PORT": ("port", int),
    "SPECRAG_UI_DIR": ("ui_dir", str),
}

_ENV_NESTED = {
    "SPECRAG_EMBED_ENDPOINT": ("embedder", "endpoint"),
    "SPECRAG_EMBED_MODEL": ("embedder", "model"),
    "SPECRAG_EMBED_DIM": ("embedder", "dim"),
    "SPECRAG_LLM_ENDPOINT": ("generator", "endpoint"),
    "SPECRAG_LLM_MODEL": ("generator", "model"),
    "SPECRAG_JUDGE_ENDPOINT": ("judge", "endpoint"),
    "SPECRAG_JUDGE_MODEL": ("judge", "model"),
}


def load_config(path: str | Path | None = None, env: dict | None = None) -> PipelineConfig:
    """Build a config from an optional JSON file, then apply env overrides."""
    env = os.environ if env is None else env
    config = PipelineConfig()

    if path is not None:
        try:
            with open(path, encoding="utf-8") as f:
                data = json.load(f)
        except FileNotFoundError:
            raise ConfigError(f"config file not found: {path}")
        except ValueError as exc:
            raise ConfigError(f"config file {path} is not valid JSON: {exc}")
        chunk = data.pop("chunk", {})
        if "size" in chunk:
            config.chunk_size = int(chunk["size"])
        if "overlap" in chunk:
            config.chunk_overlap = int(chunk["overlap"])
        eval_cfg = data.pop("eval", {})
        if "repetitions" in eval_cfg:
            config.eval_repetitions = int(eval_cfg["repetitions"])
        if "parallelism" in eval_cfg:
            config.eval_parallelism = int(eval_cfg["parallelism"])
        for key, value in data.items():
            if not hasattr(config, key):
                raise ConfigError(f"unknown config key {key!r} in {path}")
            setattr(config, key, value)

    for var, (attr, cast) in _ENV_OVERRIDES.items():
        if var in env and env[var] != "":
            try:
                setattr(config, attr, cast(env[var]))
            except ValueError:
                raise ConfigError(f"{var}={env[var]!r} is not a valid {cast.__name__}")
    for var, (attr, key) in _ENV_NESTED.items():
        if var in env and env[var] != "":
            section = dict(getattr(config, attr))
            section[key] = int(env[var]) if key == "dim" else env[var]
            section.setdefault("kind", "remote")
            setattr(config, attr, section)

    config.validate()
    return config
