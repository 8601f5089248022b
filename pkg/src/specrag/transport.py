"""HTTP plumbing shared by the remote embedding and chat clients.

Retries transient failures (connect errors, timeouts, 408/429/5xx) with
exponential backoff plus jitter; non-transient HTTP errors fail fast. Each
client bounds its in-flight requests with a semaphore.
"""

from __future__ import annotations

import logging
import random
import threading
import time
from dataclasses import dataclass

import httpx

from .errors import TransportError

logger = logging.getLogger(__name__)

TRANSIENT_STATUS = {408, 429, 500, 502, 503, 504}
DEFAULT_IN_FLIGHT = 4


@dataclass(frozen=True)
class RetryPolicy:
    max_attempts: int = 4  # 1 initial request + 3 retries
    base_delay: float = 0.25
    max_delay: float = 4.0
    jitter: float = 0.25  # fraction of the delay added/subtracted at random


def _backoff_delay(policy: RetryPolicy, attempt: int) -> float:
    delay = min(policy.max_delay, policy.base_delay * (2**attempt))
    return delay * (1.0 + random.uniform(-policy.jitter, policy.jitter))


def post_json(
    url: str,
    payload: dict,
    *,
    headers: dict | None = None,
    timeout: float = 60.0,
    policy: RetryPolicy | None = None,
    semaphore: threading.Semaphore | None = None,
    client: httpx.Client | None = None,
) -> dict:
    """POST JSON and return the decoded JSON response body.

    ``client`` can be injected for tests (e.g. with httpx.MockTransport).
    Raises TransportError carrying the endpoint and attempt count.
    """
    policy = policy or RetryPolicy()
    own_client = client is None
    if own_client:
        client = httpx.Client(timeout=timeout)
    last_error: Exception | None = None
    try:
        for attempt in range(policy.max_attempts):
            if attempt > 0:
                time.sleep(_backoff_delay(policy, attempt - 1))
            try:
                if semaphore is not None:
                    with semaphore:
                        response = client.post(url, json=payload, headers=headers)
                else:
                    response = client.post(url, json=payload, headers=headers)
            except httpx.HTTPError as exc:
                last_error = exc
                logger.warning("POST %s attempt %d/%d failed: %s", url, attempt + 1, policy.max_attempts, exc)
                continue
            if response.status_code in TRANSIENT_STATUS:
                last_error = TransportError(
                    f"{url} returned {response.status_code}", endpoint=url, attempts=attempt + 1
                )
                logger.warning(
                    "POST %s attempt %d/%d got status %d",
                    url,
                    attempt + 1,
                    policy.max_attempts,
                    response.status_code,
                )
                continue
            if response.status_code >= 400:
                raise TransportError(
                    f"{url} returned {response.status_code}: {response.text[:200]}",
                    endpoint=url,
                    attempts=attempt + 1,
                )
            try:
                return response.json()
            except ValueError as exc:
                raise TransportError(
                    f"{url} returned a non-JSON body", endpoint=url, attempts=attempt + 1
                ) from exc
        raise TransportError(
            f"{url} failed after {policy.max_attempts} attempts: {last_error}",
            endpoint=url,
            attempts=policy.max_attempts,
        )
    finally:
        if own_client:
            client.close()
