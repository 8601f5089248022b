"""Chat-completion client for any endpoint speaking the common wire shape.

Request ``{"model", "temperature", "messages": [{"role", "content"}]}``;
response text is read from ``choices[0].message.content``. The API key is
taken from the SPECRAG_LLM_API_KEY environment variable at call time.
"""

from __future__ import annotations

import os
import threading

from .errors import TransportError
from .transport import DEFAULT_IN_FLIGHT, RetryPolicy, post_json

LLM_API_KEY_ENV = "SPECRAG_LLM_API_KEY"


class ChatCompletionClient:
    def __init__(
        self,
        endpoint: str,
        model: str,
        *,
        temperature: float = 0.0,
        timeout: float = 120.0,
        max_in_flight: int = DEFAULT_IN_FLIGHT,
        policy: RetryPolicy | None = None,
        api_key_env: str = LLM_API_KEY_ENV,
        client=None,
    ):
        self.endpoint = endpoint
        self.model = model
        self.temperature = temperature
        self.timeout = timeout
        self.policy = policy or RetryPolicy(max_attempts=3)
        self.api_key_env = api_key_env
        self._semaphore = threading.BoundedSemaphore(max_in_flight)
        self._client = client  # injectable for tests

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        api_key = os.environ.get(self.api_key_env, "")
        if api_key:
            headers["Authorization"] = f"Bearer {api_key}"
        return headers

    def complete(self, system: str | None, user: str, temperature: float | None = None) -> str:
        messages = []
        if system:
            messages.append({"role": "system", "content": system})
        messages.append({"role": "user", "content": user})
        body = {
            "model": self.model,
            "temperature": self.temperature if temperature is None else temperature,
            "messages": messages,
        }
        data = post_json(
            self.endpoint,
            body,
            headers=self._headers(),
            timeout=self.timeout,
            policy=self.policy,
            semaphore=self._semaphore,
            client=self._client,
        )
        try:
            return data["choices"][0]["message"]["content"]
        except (KeyError, IndexError, TypeError) as exc:
            raise TransportError(
                f"{self.endpoint} returned a malformed chat response: {exc}",
                endpoint=self.endpoint,
            ) from exc
