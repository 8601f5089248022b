"""Construct embedder/generator/judge backends from config mappings."""

from __future__ import annotations

from .embeddings import Embedder, build_embedder
from .llmclient import ChatCompletionClient
from .testing import (
    AlwaysCorrectJudge,
    ContainsJudge,
    EchoGenerator,
    ExactMatchJudge,
    FirstChunkGenerator,
    StaticGenerator,
)

__all__ = ["build_embedder", "build_generator", "build_judge", "Embedder"]


def build_generator(spec: dict):
    kind = spec.get("kind", "echo")
    if kind == "remote":
        return ChatCompletionClient(
            endpoint=spec["endpoint"],
            model=spec.get("model", ""),
            temperature=float(spec.get("temperature", 0.0)),
            timeout=float(spec.get("timeout", 120.0)),
        )
    if kind == "echo":
        return EchoGenerator()
    if kind == "first_chunk":
        return FirstChunkGenerator()
    if kind == "static":
        return StaticGenerator(spec.get("text", ""))
    raise ValueError(f"unknown generator kind {kind!r}")


def build_judge(spec: dict):
    kind = spec.get("kind", "exact")
    if kind == "remote":
        return ChatCompletionClient(
            endpoint=spec["endpoint"],
            model=spec.get("model", ""),
            temperature=float(spec.get("temperature", 0.0)),
            timeout=float(spec.get("timeout", 120.0)),
        )
    if kind == "exact":
        return ExactMatchJudge()
    if kind == "contains":
        return ContainsJudge()
    if kind == "always_correct":
        return AlwaysCorrectJudge()
    raise ValueError(f"unknown judge kind {kind!r}")
