"""HTTP service exposing the query engine and the evaluation runner.

Stateless per request over an immutable loaded store; POST /v1/reload swaps
the store under a writer lock and is gated by a shared-secret header.
"""

from __future__ import annotations

import logging
import threading
import time
import uuid
from pathlib import Path

from fastapi import Body, FastAPI, Request
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles

from . import evalsuite
from .config import PipelineConfig
from .engine import TEMPLATES, RagEngine
from .errors import SpecragError, TransportError
from .factories import build_embedder, build_generator, build_judge
from .vectorstore import VectorStore

logger = logging.getLogger(__name__)

RELOAD_SECRET_HEADER = "x-reload-secret"
MAX_TOP_K = 100


def _error(status: int, message: str) -> JSONResponse:
    return JSONResponse(status_code=status, content={"error": message})


def create_app(config: PipelineConfig, store: VectorStore | None = None) -> FastAPI:
    app = FastAPI(title="specrag", version="0.1.0")

    state = {
        "store": store if store is not None else VectorStore.load(config.store_path),
        "reports": {},  # report_id -> {"status", "report", "error"}
    }
    swap_lock = threading.RLock()

    def engine_for(top_k: int | None = None) -> RagEngine:
        with swap_lock:
            current = state["store"]
        return RagEngine(
            build_embedder(config.embedder),
            current,
            build_generator(config.generator),
            k=top_k or config.retrieval_k,
            template=TEMPLATES[config.template],
            max_prompt_chars=config.max_prompt_chars,
        )

    @app.middleware("http")
    async def log_requests(request: Request, call_next):
        start = time.perf_counter()
        response = await call_next(request)
        elapsed_ms = (time.perf_counter() - start) * 1000
        logger.info("%s %s -> %d (%.1f ms)", request.method, request.url.path, response.status_code, elapsed_ms)
        return response

    @app.get("/v1/health")
    def health():
        with swap_lock:
            chunks = len(state["store"])
        return {
            "status": "ok",
            "store_chunks": chunks,
            "retrieval_k": config.retrieval_k,
            "template": config.template,
        }

    @app.post("/v1/query")
    def query(payload: dict = Body(...)):
        question = payload.get("question")
        if not isinstance(question, str) or not question.strip():
            return _error(400, "question must be a non-empty string")
        top_k = payload.get("top_k")
        if top_k is not None:
            if not isinstance(top_k, int) or not (1 <= top_k <= MAX_TOP_K):
                return _error(400, f"top_k must be an integer in [1, {MAX_TOP_K}]")
        try:
            answer = engine_for(top_k).answer(question)
        except TransportError as exc:
            return _error(502, f"generation failed: {exc}")
        return answer.to_dict()

    def _run_eval(report_id: str, dataset_path: str, repetitions: int):
        try:
            dataset = evalsuite.load_qa_dataset(dataset_path)
            report = evalsuite.run_benchmark(
                dataset,
                engine_for(),
                build_judge(config.judge),
                build_embedder(config.embedder),
                repetitions=repetitions,
                parallelism=config.eval_parallelism,
                config_snapshot=config.snapshot(),
            )
            state["reports"][report_id] = {"status": "done", "report": report.to_dict(), "error": None}
        except Exception as exc:  # background job: failure must land in the report slot
            logger.exception("eval %s failed", report_id)
            state["reports"][report_id] = {"status": "failed", "report": None, "error": str(exc)}

    @app.post("/v1/eval")
    def start_eval(payload: dict = Body(...)):
        dataset_path = payload.get("dataset_path")
        if not isinstance(dataset_path, str) or not dataset_path:
            return _error(400, "dataset_path must be a non-empty string")
        if not Path(dataset_path).is_file():
            return _error(400, f"dataset not found: {dataset_path}")
        repetitions = payload.get("repetitions", config.eval_repetitions)
        if not isinstance(repetitions, int) or repetitions < 1:
            return _error(400, "repetitions must be a positive integer")
        report_id = uuid.uuid4().hex[:12]
        state["reports"][report_id] = {"status": "running", "report": None, "error": None}
        thread = threading.Thread(
            target=_run_eval, args=(report_id, dataset_path, repetitions), daemon=True
        )
        thread.start()
        return {"report_id": report_id, "status": "running"}

    @app.get("/v1/eval/{report_id}")
    def get_eval(report_id: str):
        entry = state["reports"].get(report_id)
        if entry is None:
            return _error(404, f"unknown report id: {report_id}")
        return {"report_id": report_id, **entry}

    @app.post("/v1/reload")
    def reload(request: Request):
        if not config.reload_secret:
            return _error(403, "reload is not configured")
        if request.headers.get(RELOAD_SECRET_HEADER) != config.reload_secret:
            return _error(403, "bad reload secret")
        try:
            fresh = VectorStore.load(config.store_path)
        except (OSError, SpecragError) as exc:
            return _error(500, f"reload failed: {exc}")
        with swap_lock:
            state["store"] = fresh
        return {"status": "reloaded", "store_chunks": len(fresh)}

    ui_dir = config.ui_dir
    if ui_dir and Path(ui_dir).is_dir():
        app.mount("/", StaticFiles(directory=ui_dir, html=True), name="ui")

    return app
