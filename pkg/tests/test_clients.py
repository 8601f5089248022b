import json
import threading

import httpx
import numpy as np
import pytest

from specrag.embeddings import RemoteEmbedder
from specrag.errors import IntegrityError, TransportError
from specrag.llmclient import ChatCompletionClient
from specrag.transport import RetryPolicy, post_json

FAST = RetryPolicy(max_attempts=3, base_delay=0.001, max_delay=0.002)


def make_client(handler):
    return httpx.Client(transport=httpx.MockTransport(handler))


class TestPostJsonRetry:
    def test_succeeds_after_transient_failures(self):
        calls = []

        def handler(request):
            calls.append(request)
            if len(calls) < 3:
                return httpx.Response(503)
            return httpx.Response(200, json={"ok": True})

        data = post_json("http://svc/x", {}, policy=FAST, client=make_client(handler))
        assert data == {"ok": True}
        assert len(calls) == 3

    def test_gives_up_with_endpoint_and_attempts(self):
        def handler(request):
            return httpx.Response(503)

        with pytest.raises(TransportError) as err:
            post_json("http://svc/x", {}, policy=FAST, client=make_client(handler))
        assert err.value.endpoint == "http://svc/x"
        assert err.value.attempts == 3

    def test_non_transient_status_fails_fast(self):
        calls = []

        def handler(request):
            calls.append(request)
            return httpx.Response(401, text="no key")

        with pytest.raises(TransportError, match="401"):
            post_json("http://svc/x", {}, policy=FAST, client=make_client(handler))
        assert len(calls) == 1

    def test_connection_errors_retry(self):
        calls = []

        def handler(request):
            calls.append(request)
            if len(calls) == 1:
                raise httpx.ConnectError("refused")
            return httpx.Response(200, json={"ok": 1})

        assert post_json("http://svc/x", {}, policy=FAST, client=make_client(handler)) == {"ok": 1}

    def test_semaphore_bounds_in_flight(self):
        sem = threading.BoundedSemaphore(2)
        active = []
        peak = []
        lock = threading.Lock()

        def handler(request):
            with lock:
                active.append(1)
                peak.append(len(active))
            with lock:
                active.pop()
            return httpx.Response(200, json={})

        client = make_client(handler)
        threads = [
            threading.Thread(
                target=post_json,
                args=("http://svc/x", {}),
                kwargs={"policy": FAST, "semaphore": sem, "client": client},
            )
            for _ in range(8)
        ]
        for t in threads:
            t.start()
        for t in threads:
            t.join()
        assert max(peak) <= 2


class TestRemoteEmbedder:
    def test_wire_shape_and_order(self):
        seen = {}

        def handler(request):
            body = json.loads(request.content)
            seen.update(body)
            data = [
                {"index": i, "embedding": [float(i + 1), 0.0]}
                for i in range(len(body["input"]))
            ]
            # shuffled response order must be resorted by index
            return httpx.Response(200, json={"data": list(reversed(data))})

        embedder = RemoteEmbedder(
            "http://svc/v1/embeddings", "m1", dim=2, policy=FAST, client=make_client(handler)
        )
        vectors = embedder.embed_texts(["a", "b"])
        assert seen == {"model": "m1", "input": ["a", "b"]}
        # normalized rows, order preserved
        assert np.allclose(vectors[0], [1.0, 0.0])
        assert np.allclose(vectors[1], [1.0, 0.0])

    def test_api_key_header_from_env(self, monkeypatch):
        monkeypatch.setenv("SPECRAG_EMBED_API_KEY", "sekrit")
        captured = {}

        def handler(request):
            captured["auth"] = request.headers.get("authorization")
            return httpx.Response(200, json={"data": [{"index": 0, "embedding": [1.0, 0.0]}]})

        embedder = RemoteEmbedder(
            "http://svc/e", "m", dim=2, policy=FAST, client=make_client(handler)
        )
        embedder.embed_texts(["x"])
        assert captured["auth"] == "Bearer sekrit"

    def test_dimension_mismatch_is_integrity_error(self):
        def handler(request):
            return httpx.Response(200, json={"data": [{"index": 0, "embedding": [1.0, 0.0, 0.0]}]})

        embedder = RemoteEmbedder("http://svc/e", "m", dim=2, policy=FAST, client=make_client(handler))
        with pytest.raises(IntegrityError):
            embedder.embed_texts(["x"])

    def test_transport_error_carries_endpoint(self):
        def handler(request):
            return httpx.Response(500)

        embedder = RemoteEmbedder("http://svc/e", "m", dim=2, policy=FAST, client=make_client(handler))
        with pytest.raises(TransportError) as err:
            embedder.embed_texts(["x"])
        assert err.value.endpoint == "http://svc/e"
        assert err.value.attempts == 3

    def test_batching_splits_large_inputs(self):
        batches = []

        def handler(request):
            body = json.loads(request.content)
            batches.append(len(body["input"]))
            data = [{"index": i, "embedding": [1.0, 1.0]} for i in range(len(body["input"]))]
            return httpx.Response(200, json={"data": data})

        embedder = RemoteEmbedder(
            "http://svc/e", "m", dim=2, max_batch=3, policy=FAST, client=make_client(handler)
        )
        embedder.embed_texts([f"t{i}" for i in range(7)])
        assert batches == [3, 3, 1]


class TestChatCompletionClient:
    def test_wire_shape(self):
        captured = {}

        def handler(request):
            captured.update(json.loads(request.content))
            return httpx.Response(
                200, json={"choices": [{"message": {"role": "assistant", "content": "hi"}}]}
            )

        client = ChatCompletionClient(
            "http://svc/v1/chat/completions", "m2", policy=FAST, client=make_client(handler)
        )
        text = client.complete("be brief", "what is x?")
        assert text == "hi"
        assert captured["model"] == "m2"
        assert captured["temperature"] == 0.0
        assert captured["messages"] == [
            {"role": "system", "content": "be brief"},
            {"role": "user", "content": "what is x?"},
        ]

    def test_malformed_response_is_transport_error(self):
        def handler(request):
            return httpx.Response(200, json={"nope": []})

        client = ChatCompletionClient("http://svc/c", "m", policy=FAST, client=make_client(handler))
        with pytest.raises(TransportError, match="malformed"):
            client.complete(None, "q")

    def test_api_key_header(self, monkeypatch):
        monkeypatch.setenv("SPECRAG_LLM_API_KEY", "k123")
        captured = {}

        def handler(request):
            captured["auth"] = request.headers.get("authorization")
            return httpx.Response(200, json={"choices": [{"message": {"content": "ok"}}]})

        client = ChatCompletionClient("http://svc/c", "m", policy=FAST, client=make_client(handler))
        client.complete(None, "q")
        assert captured["auth"] == "Bearer k123"
