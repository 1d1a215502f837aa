"""Sentence-level translation quality scoring.

Two interchangeable scorers produce [0, 1] scores: `RemoteScorer` posts
batches to the neural scoring service (POST /score), `LexicalScorer` is a
deterministic character n-gram F-score for offline runs and tests. Scores
are memoized per (source, hypothesis, reference) so repeated segments cost
one remote call.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass

import requests

from .errors import ScoreOutOfRangeError, ScorerUnavailableError
from .kernels import char_ngram_stats

CHRF_MAX_ORDER = 6
CHRF_BETA = 2.0


@dataclass(frozen=True)
class ScoreRequestItem:
    source: str
    hypothesis: str
    reference: str

    def __post_init__(self):
        if not self.hypothesis:
            raise ValueError("hypothesis must be non-empty")
        if not self.reference:
            raise ValueError("reference must be non-empty")


def _strip_whitespace(text: str) -> str:
    return "".join(text.split())


def lexical_score(hypothesis: str, reference: str) -> float:
    """Character n-gram F-score, orders 1-6, recall weighted beta=2.

    Whitespace is removed before counting. Precision and recall are averaged
    over the orders where both sides have n-grams, then combined once into
    F-beta, so identical strings score 1.0 regardless of length.
    """
    hyp = _strip_whitespace(hypothesis)
    ref = _strip_whitespace(reference)
    precision_sum = 0.0
    recall_sum = 0.0
    effective_orders = 0
    for hyp_total, ref_total, matches in char_ngram_stats(hyp, ref, CHRF_MAX_ORDER):
        if hyp_total > 0 and ref_total > 0:
            precision_sum += matches / hyp_total
            recall_sum += matches / ref_total
            effective_orders += 1
    if effective_orders == 0:
        return 0.0
    precision = precision_sum / effective_orders
    recall = recall_sum / effective_orders
    if precision + recall == 0.0:
        return 0.0
    beta_sq = CHRF_BETA**2
    return (1 + beta_sq) * precision * recall / (beta_sq * precision + recall)


def _cache_key(item: ScoreRequestItem) -> str:
    blob = json.dumps([item.source, item.hypothesis, item.reference])
    return hashlib.sha256(blob.encode("utf-8")).hexdigest()


class _MemoCache:
    def __init__(self):
        self._lock = threading.Lock()
        self._scores: dict[str, float] = {}

    def get(self, key: str) -> float | None:
        with self._lock:
            return self._scores.get(key)

    def put(self, key: str, score: float):
        with self._lock:
            self._scores[key] = score


class _CachingScorer:
    """score_batch with per-item memoization; subclasses score the misses."""

    kind = "?"

    def __init__(self):
        self._cache = _MemoCache()

    def _score_unique(self, items: list[ScoreRequestItem]) -> list[float]:
        raise NotImplementedError

    def score_batch(self, items: list[ScoreRequestItem]) -> list[float]:
        """One [0, 1] score per item, in input order."""
        keys = [_cache_key(item) for item in items]
        missing: dict[str, ScoreRequestItem] = {}
        for key, item in zip(keys, items):
            if self._cache.get(key) is None and key not in missing:
                missing[key] = item
        if missing:
            fresh = self._score_unique(list(missing.values()))
            for key, score in zip(missing.keys(), fresh):
                if not 0.0 <= score <= 1.0:
                    raise ScoreOutOfRangeError(f"scorer returned {score}, outside [0, 1]")
                self._cache.put(key, score)
        out = []
        for key in keys:
            score = self._cache.get(key)
            assert score is not None
            out.append(score)
        return out


class LexicalScorer(_CachingScorer):
    kind = "lexical"

    def _score_unique(self, items: list[ScoreRequestItem]) -> list[float]:
        return [lexical_score(item.hypothesis, item.reference) for item in items]


class RemoteScorer(_CachingScorer):
    """Client for the scoring service: POST /score, GET /health."""

    kind = "remote"

    def __init__(self, endpoint: str, timeout_s: float = 120.0):
        super().__init__()
        self.endpoint = endpoint.rstrip("/")
        self.timeout_s = timeout_s
        self._session = requests.Session()

    def health(self) -> dict:
        try:
            resp = self._session.get(f"{self.endpoint}/health", timeout=self.timeout_s)
        except requests.RequestException as exc:
            raise ScorerUnavailableError(str(exc)) from None
        if resp.status_code != 200:
            raise ScorerUnavailableError(f"health check returned HTTP {resp.status_code}")
        return resp.json()

    def _score_unique(self, items: list[ScoreRequestItem]) -> list[float]:
        payload = {
            "items": [
                {"src": i.source, "mt": i.hypothesis, "ref": i.reference} for i in items
            ]
        }
        try:
            resp = self._session.post(
                f"{self.endpoint}/score", json=payload, timeout=self.timeout_s
            )
        except requests.RequestException as exc:
            raise ScorerUnavailableError(str(exc)) from None
        if resp.status_code != 200:
            raise ScorerUnavailableError(
                f"scoring service returned HTTP {resp.status_code}: {resp.text[:200]}"
            )
        try:
            scores = resp.json()["scores"]
        except (ValueError, KeyError) as exc:
            raise ScorerUnavailableError(f"malformed scoring response: {exc}") from None
        if not isinstance(scores, list) or len(scores) != len(items):
            raise ScorerUnavailableError(
                f"expected {len(items)} scores, got {scores!r:.80}"
            )
        return [float(s) for s in scores]


def make_scorer(kind: str, endpoint: str | None = None):
    if kind == "lexical":
        return LexicalScorer()
    if kind == "remote":
        if not endpoint:
            raise ValueError("remote scorer requires an endpoint")
        return RemoteScorer(endpoint)
    raise ValueError(f"unknown scorer kind {kind!r}")
