"""Command-line interface: ingest, query, eval, serve, stats.

Exit codes: 0 success, 1 partial (some documents failed), 2 fatal.
"""

from __future__ import annotations

import argparse
import json
import logging
import socket
import sys
from pathlib import Path

from . import evalsuite
from .config import load_config
from .docmodel import corpus_token_stats
from .engine import TEMPLATES, RagEngine
from .errors import ConfigError, DatasetError, SpecragError, TransportError
from .factories import build_embedder, build_generator, build_judge
from .pipeline import ingest_corpus, load_corpus
from .vectorstore import VectorStore

logger = logging.getLogger(__name__)


def _build_engine(config, store):
    embedder = build_embedder(config.embedder)
    if embedder.dim != store.dim:
        raise ConfigError(
            f"embedder dim {embedder.dim} does not match store dim {store.dim}"
        )
    return RagEngine(
        embedder,
        store,
        build_generator(config.generator),
        k=config.retrieval_k,
        template=TEMPLATES[config.template],
        max_prompt_chars=config.max_prompt_chars,
    )


def _load_store(config) -> VectorStore:
    path = Path(config.store_path)
    if not path.is_file():
        raise FileNotFoundError(f"store not found: {path}")
    return VectorStore.load(path)


def cmd_ingest(config, args) -> int:
    store, summary = ingest_corpus(config)
    if args.json:
        print(json.dumps(summary.to_dict(), indent=2))
    else:
        print(f"ingested {summary.docs} documents, {summary.chunks} chunks -> {config.store_path}")
        for ref in summary.unresolved_refs:
            print(f"  unresolved reference: {ref}")
        for failure in summary.failures:
            print(f"  failed: {failure['doc_id']}: {failure['error']}")
    return 1 if summary.failures else 0


def cmd_query(config, args) -> int:
    store = _load_store(config)
    engine = _build_engine(config, store)
    if args.k is not None:
        engine.k = args.k
    answer = engine.answer(args.question)
    if args.json:
        print(json.dumps(answer.to_dict(), indent=2, ensure_ascii=False))
        return 0
    print(answer.text)
    print()
    print(f"model={answer.model} latency={answer.latency_ms}ms prompt_chars={answer.prompt_chars}")
    if answer.hits:
        print(f"{'chunk_id':<24} {'doc_id':<12} {'score':>10}  span")
        for hit in answer.hits:
            span = hit.metadata.get("char_span")
            print(f"{hit.chunk_id:<24} {hit.doc_id:<12} {hit.score:>10.4f}  {span}")
    else:
        print("(no hits)")
    return 0


def cmd_eval(config, args) -> int:
    dataset = evalsuite.load_qa_dataset(args.dataset)
    if args.repetitions is not None:
        config.eval_repetitions = args.repetitions
    store = _load_store(config)
    engine = _build_engine(config, store)
    report = evalsuite.run_benchmark(
        dataset,
        engine,
        build_judge(config.judge),
        engine.embedder,
        repetitions=config.eval_repetitions,
        parallelism=config.eval_parallelism,
        config_snapshot=config.snapshot(),
    )
    out_path = Path(args.out)
    out_path.write_text(report.to_json(), encoding="utf-8")
    agg = report.aggregate
    print(f"report written to {out_path}")
    print(f"runs: {report.run_count} over {len(dataset)} items")
    print(
        "judge_correct_rate: mean={mean} min={min} max={max} stddev={stddev}".format(
            **agg["judge_correct_rate"]
        )
    )
    print(
        "mean_bertscore_f1: mean={mean} min={min} max={max} stddev={stddev}".format(
            **agg["mean_bertscore_f1"]
        )
    )
    failed_runs = sum(1 for r in report.per_run if r.failed)
    if failed_runs:
        print(f"failed runs: {failed_runs}")
        return 1
    return 0


def cmd_stats(config, args) -> int:
    registry, failures = load_corpus(config.corpus_dir)
    stats = corpus_token_stats(list(registry.values()))
    if args.json:
        print(json.dumps({"per_doc": stats.per_doc, "total": stats.total}, indent=2))
    else:
        print(f"{'doc_id':<20} {'tokens':>12}")
        for doc_id in sorted(stats.per_doc):
            print(f"{doc_id:<20} {stats.per_doc[doc_id]:>12}")
        print(f"{'total':<20} {stats.total:>12}")
    if failures:
        for failure in failures:
            print(f"  failed: {failure['doc_id']}: {failure['error']}", file=sys.stderr)
        return 1
    return 0


def cmd_serve(config, args) -> int:
    import uvicorn

    from .service import create_app

    if args.port is not None:
        config.port = args.port
    with socket.socket(socket.AF_INET, socket.SOCK_STREAM) as probe:
        try:
            probe.bind((config.host, config.port))
        except OSError:
            print(f"port in use: {config.host}:{config.port}", file=sys.stderr)
            return 2
    app = create_app(config)
    uvicorn.run(app, host=config.host, port=config.port, log_level="info")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="specrag",
        description="Retrieval-augmented QA over telecom standards documents.",
    )
    parser.add_argument("--config", help="path to the JSON config file")
    parser.add_argument("--json", action="store_true", help="machine-readable output")
    sub = parser.add_subparsers(dest="command", required=True)

    sub.add_parser("ingest", help="parse, preprocess, chunk, embed, and store the corpus")

    p_query = sub.add_parser("query", help="answer one question against the stored corpus")
    p_query.add_argument("--question", required=True)
    p_query.add_argument("--k", type=int, help="retrieval depth override")

    p_eval = sub.add_parser("eval", help="run the benchmark protocol over a QA dataset")
    p_eval.add_argument("--dataset", required=True, help="JSONL file of QA pairs")
    p_eval.add_argument("--repetitions", type=int, help="override configured repetitions")
    p_eval.add_argument("--out", default="eval_report.json", help="report output path")

    p_serve = sub.add_parser("serve", help="run the HTTP service")
    p_serve.add_argument("--port", type=int, help="listen port (default 8080)")

    sub.add_parser("stats", help="print corpus token counts")
    return parser


_COMMANDS = {
    "ingest": cmd_ingest,
    "query": cmd_query,
    "eval": cmd_eval,
    "serve": cmd_serve,
    "stats": cmd_stats,
}


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(name)s: %(message)s")
    args = build_parser().parse_args(argv)
    try:
        config = load_config(args.config)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    try:
        return _COMMANDS[args.command](config, args)
    except FileNotFoundError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except DatasetError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except TransportError as exc:
        print(f"transport error: {exc} (endpoint={exc.endpoint}, attempts={exc.attempts})", file=sys.stderr)
        if exc.hits:
            for hit in exc.hits:
                print(f"  retrieved: {hit.chunk_id} score={hit.score:.4f}", file=sys.stderr)
        return 2
    except (SpecragError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
