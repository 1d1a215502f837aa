"""Clients for text-generating LLM endpoints.

`HttpBackend` speaks the chat-completions wire shape (single user message,
completion read from the first choice). `MockBackend` replays scripted
replies keyed by prompt substrings, so the whole pipeline can run offline
and deterministically. Both enforce the per-handle in-flight cap and both
return batch results aligned with their prompts, failures carried in-slot.
"""

from __future__ import annotations

import json
import os
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import requests

from .errors import (
    BackendError,
    BackendTimeoutError,
    BadStatusError,
    NoRuleMatchedError,
    TransportError,
)
from .prompts import RenderedPrompt

API_KEY_ENV = "REFLECTMT_API_KEY"


@dataclass
class BackendConfig:
    endpoint: str = ""
    model: str = ""
    max_new_tokens: int = 512
    temperature: float = 0.0
    top_p: float = 1.0
    timeout_s: float = 60.0
    max_retries: int = 3
    max_in_flight: int = 4
    retry_backoff_s: float = 0.5

    def __post_init__(self):
        if self.timeout_s <= 0:
            raise ValueError("timeout must be positive")
        if self.max_in_flight < 1:
            raise ValueError("max_in_flight must be at least 1")
        if self.temperature < 0:
            raise ValueError("temperature must be non-negative")

    def identity(self) -> dict:
        """What a run manifest records about the model behind this handle."""
        return {
            "endpoint": self.endpoint,
            "model": self.model,
            "max_new_tokens": self.max_new_tokens,
            "temperature": self.temperature,
            "top_p": self.top_p,
        }


@dataclass
class GenerationResult:
    text: str
    latency_ms: float
    attempts: int


class Backend:
    """Shared batching and in-flight gating; subclasses implement _generate_once."""

    def __init__(self, cfg: BackendConfig):
        self.cfg = cfg
        self._gate = threading.BoundedSemaphore(cfg.max_in_flight)

    def generate(self, prompt: RenderedPrompt) -> GenerationResult:
        with self._gate:
            return self._generate_once(prompt)

    def _generate_once(self, prompt: RenderedPrompt) -> GenerationResult:
        raise NotImplementedError

    def generate_batch(
        self, prompts: list[RenderedPrompt]
    ) -> list[GenerationResult | BackendError]:
        """Results align index-for-index with prompts; a failed item occupies
        its slot as the error instance instead of aborting the batch."""
        if not prompts:
            return []

        def run(prompt: RenderedPrompt):
            try:
                return self.generate(prompt)
            except BackendError as exc:
                return exc

        workers = min(self.cfg.max_in_flight, len(prompts))
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(run, prompts))


class HttpBackend(Backend):
    """Chat-completions client with retries on transport errors and 5xx."""

    def __init__(self, cfg: BackendConfig, api_key_env: str = API_KEY_ENV):
        if not cfg.endpoint:
            raise ValueError("endpoint required for HTTP backend")
        super().__init__(cfg)
        self.api_key_env = api_key_env
        self._session = requests.Session()

    def _headers(self) -> dict:
        headers = {"Content-Type": "application/json"}
        key = os.environ.get(self.api_key_env)
        if key:
            headers["Authorization"] = f"Bearer {key}"
        return headers

    def _generate_once(self, prompt: RenderedPrompt) -> GenerationResult:
        payload = {
            "model": self.cfg.model,
            "messages": [{"role": "user", "content": prompt.text}],
            "temperature": self.cfg.temperature,
            "top_p": self.cfg.top_p,
            "max_tokens": self.cfg.max_new_tokens,
        }
        start = time.monotonic()
        last_error: BackendError | None = None
        attempts = 0
        for attempt in range(self.cfg.max_retries + 1):
            if attempt:
                time.sleep(self.cfg.retry_backoff_s * (2 ** (attempt - 1)))
            attempts += 1
            try:
                resp = self._session.post(
                    self.cfg.endpoint,
                    json=payload,
                    headers=self._headers(),
                    timeout=self.cfg.timeout_s,
                )
            except requests.Timeout:
                last_error = BackendTimeoutError(
                    f"no response within {self.cfg.timeout_s}s"
                )
                continue
            except requests.RequestException as exc:
                last_error = TransportError(str(exc))
                continue

            if 400 <= resp.status_code < 500:
                raise BadStatusError(resp.status_code, resp.text[:200])
            if resp.status_code != 200:
                last_error = BadStatusError(resp.status_code, resp.text[:200])
                continue

            try:
                text = resp.json()["choices"][0]["message"]["content"]
            except (ValueError, LookupError, TypeError) as exc:
                raise TransportError(f"malformed completion body: {exc}") from None
            latency_ms = (time.monotonic() - start) * 1000.0
            return GenerationResult(text=text, latency_ms=latency_ms, attempts=attempts)

        assert last_error is not None
        raise last_error


@dataclass(frozen=True)
class MockRule:
    match: str
    reply: str


class MockBackend(Backend):
    """Deterministic playback: first rule whose substring matches answers.

    An empty match string matches everything, so a final {"match": "", ...}
    rule acts as the scripted default. Prompts matched by no rule fail with
    NoRuleMatchedError (in-slot when batched).
    """

    def __init__(self, rules: list[MockRule], cfg: BackendConfig | None = None):
        super().__init__(cfg or BackendConfig(endpoint="mock://", model="mock"))
        self.rules = list(rules)

    def _generate_once(self, prompt: RenderedPrompt) -> GenerationResult:
        for rule in self.rules:
            if rule.match in prompt.text:
                return GenerationResult(text=rule.reply, latency_ms=0.0, attempts=1)
        raise NoRuleMatchedError(f"no scripted reply for prompt: {prompt.text[:80]!r}...")


def mock_from_script(path: str | Path, cfg: BackendConfig | None = None) -> MockBackend:
    """Load {"match": substring, "reply": text} rules from a JSONL script."""
    rules = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                rules.append(MockRule(match=obj["match"], reply=obj["reply"]))
            except (json.JSONDecodeError, KeyError, TypeError) as exc:
                raise ValueError(f"{path}:{lineno}: bad mock rule ({exc})") from None
    return MockBackend(rules, cfg=cfg)
