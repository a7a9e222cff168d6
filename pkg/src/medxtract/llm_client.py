"""Provider-agnostic completion client.

The wire contract is a completions-style JSON POST
``{model, prompt, temperature, max_tokens}`` returning ``{text}``.
Transient failures (timeouts, 429, 5xx) are retried with exponential
backoff; an internal semaphore bounds in-flight requests so callers can
dispatch one request per chunk concurrently.

``MockProvider`` implements the same ``complete`` surface offline and
deterministically, either echoing gold records ("perfect extractor") or
a configured corruption of them.
"""
from __future__ import annotations

import json
import os
import threading
import time
from dataclasses import dataclass, field

import requests

from . import prompting
from .errors import AuthError, CompletionTimeout, NoMatch, ProviderError, RateLimited
from .schema import ExtractionSchema, serialize_values
from .scoring import tokenize

RETRYABLE_STATUSES = frozenset({429, 500, 502, 503, 504})


@dataclass(frozen=True)
class CompletionRequest:
    prompt: str
    model_id: str
    temperature: float = 0.1
    max_tokens: int = 1000
    seed: int | None = None

    def __post_init__(self):
        if not self.prompt:
            raise ValueError("prompt must be non-empty")
        if not 0.0 <= self.temperature <= 1.0:
            raise ValueError("temperature must be in [0, 1]")


@dataclass
class CompletionResponse:
    text: str
    provider_metadata: dict = field(default_factory=dict)
    attempt_count: int = 1


@dataclass(frozen=True)
class ProviderConfig:
    endpoint: str = ""
    auth_env: str = ""  # env var *name* holding the credential, never the secret
    max_concurrent_requests: int = 4
    max_attempts: int = 3
    backoff_seconds: tuple = (1.0, 2.0, 4.0)
    timeout_seconds: float = 60.0

    def __post_init__(self):
        if self.max_concurrent_requests < 1:
            raise ValueError("max_concurrent_requests must be >= 1")


def _http_transport(req: CompletionRequest, cfg: ProviderConfig, credential: str | None):
    headers = {"Content-Type": "application/json"}
    if credential:
        headers["Authorization"] = f"Bearer {credential}"
    payload = {
        "model": req.model_id,
        "prompt": req.prompt,
        "temperature": req.temperature,
        "max_tokens": req.max_tokens,
    }
    if req.seed is not None:
        payload["seed"] = req.seed
    try:
        resp = requests.post(
            cfg.endpoint, json=payload, headers=headers, timeout=cfg.timeout_seconds
        )
    except requests.Timeout as exc:
        raise TimeoutError(str(exc)) from exc
    return resp.status_code, resp.text


class CompletionClient:
    """Thread-safe completion client with retries and an in-flight bound."""

    def __init__(self, cfg: ProviderConfig, transport=None, sleep=time.sleep):
        self.cfg = cfg
        self._transport = transport or _http_transport
        self._sleep = sleep
        self._semaphore = threading.Semaphore(cfg.max_concurrent_requests)

    def _credential(self) -> str | None:
        if not self.cfg.auth_env:
            return None
        credential = os.environ.get(self.cfg.auth_env)
        if credential is None:
            raise AuthError(f"environment variable {self.cfg.auth_env!r} is not set")
        return credential

    def complete(self, req: CompletionRequest) -> CompletionResponse:
        credential = self._credential()  # resolve before any network call
        last_status, last_body = None, ""
        start = time.monotonic()
        for attempt in range(1, self.cfg.max_attempts + 1):
            timed_out = False
            with self._semaphore:
                try:
                    status, body = self._transport(req, self.cfg, credential)
                except TimeoutError as exc:
                    timed_out = True
                    last_status, last_body = None, str(exc)
            if timed_out:
                status = None
            elif status == 200:
                try:
                    text = json.loads(body)["text"]
                except (json.JSONDecodeError, KeyError, TypeError):
                    raise ProviderError(200, f"malformed response body: {body[:200]}")
                return CompletionResponse(
                    text=text,
                    provider_metadata={
                        "latency_seconds": time.monotonic() - start,
                        "prompt_chars": len(req.prompt),
                    },
                    attempt_count=attempt,
                )
            elif status in (401, 403):
                raise AuthError(f"provider rejected credentials (HTTP {status})")
            elif status not in RETRYABLE_STATUSES:
                raise ProviderError(status, body)
            else:
                last_status, last_body = status, body
            if attempt < self.cfg.max_attempts:
                backoff = self.cfg.backoff_seconds[
                    min(attempt - 1, len(self.cfg.backoff_seconds) - 1)
                ]
                self._sleep(backoff)
        if last_status == 429:
            raise RateLimited(f"still rate limited after {self.cfg.max_attempts} attempts")
        if last_status is None:
            raise CompletionTimeout(
                f"timed out after {self.cfg.max_attempts} attempts: {last_body}"
            )
        raise ProviderError(last_status, last_body)


def _corrupt_values(values: dict, mode: str, schema: ExtractionSchema) -> dict:
    if mode.startswith("drop_field:"):
        victim = mode.split(":", 1)[1]
        return {k: v for k, v in values.items() if k != victim}
    if mode == "drop_last_token":
        out = {}
        for k, v in values.items():
            if isinstance(v, list):
                out[k] = v[:-1] if v else v
            else:
                tokens = tokenize(str(v)).tokens
                out[k] = " ".join(tokens[:-1]) if tokens else v
        return out
    raise ValueError(f"unknown corruption mode {mode!r}")


class MockProvider:
    """Deterministic offline stand-in for a completion service.

    The query section of the prompt is matched against the dataset's
    documents (chunk text is always a substring of its source document);
    the response is the matching document's gold record serialized as
    schema JSON, optionally corrupted. A script table of
    ``(pattern, response)`` pairs takes precedence: the first pattern
    that appears in the query section wins.
    """

    def __init__(
        self,
        dataset=None,
        schema: ExtractionSchema | None = None,
        mode: str = "perfect",
        script: list | None = None,
        exhaustive: bool = False,
    ):
        self.dataset = dataset
        self.schema = schema
        self.mode = mode
        self.script = list(script or [])
        self.exhaustive = exhaustive

    def complete(self, req: CompletionRequest) -> CompletionResponse:
        query = prompting.query_section(req.prompt)
        for pattern, response in self.script:
            if pattern in query:
                return CompletionResponse(text=response, provider_metadata={"mock": True})
        if self.exhaustive or self.dataset is None or self.schema is None:
            raise NoMatch("no script pattern matched the query section")

        for doc, gold in self.dataset.pairs:
            if query.strip() and query.strip() in doc.text:
                values = {
                    f.name: gold.fields.get(f.name, f.empty_value())
                    for f in self.schema.fields
                }
                if self.mode != "perfect":
                    values = _corrupt_values(values, self.mode, self.schema)
                return CompletionResponse(
                    text=serialize_values(values, self.schema)
                    if self.mode == "perfect"
                    else json.dumps(values, ensure_ascii=False),
                    provider_metadata={"mock": True, "document_id": doc.id},
                )
        raise NoMatch("query section does not match any document in the dataset")


def mock_complete(req: CompletionRequest, script: list, exhaustive: bool = True):
    """One-off scripted completion (see MockProvider for the table contract)."""
    return MockProvider(script=script, exhaustive=exhaustive).complete(req)
