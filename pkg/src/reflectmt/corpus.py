"""Corpus ingestion and quality tiering.

Parallel files feed the basic-translation builder; multi-candidate files
(one source sentence, many system translations with scores in [0, 1]) feed
the quality-prediction and draft-refinement builders. Tiers are cut globally
per language pair: top 10% of scores are Good, bottom 50% Bad, rest Medium.
The input file delimits the pool — callers who want per-year cuts split
their files accordingly.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum
from pathlib import Path

from .errors import (
    EmptyFieldError,
    EmptyInputError,
    MalformedLineError,
    ScoreOutOfRangeError,
)


class QualityTier(Enum):
    GOOD = "Good"
    MEDIUM = "Medium"
    BAD = "Bad"

    @property
    def rank(self) -> int:
        """Good > Medium > Bad, for monotonicity checks."""
        return {"Good": 2, "Medium": 1, "Bad": 0}[self.value]


@dataclass(frozen=True)
class ParallelSegment:
    src_lang: str
    tgt_lang: str
    source: str
    reference: str
    lineno: int


@dataclass(frozen=True)
class Candidate:
    text: str
    raw_score: float
    system_id: str
    index: int


@dataclass(frozen=True)
class CandidatePool:
    src_lang: str
    tgt_lang: str
    source: str
    candidates: tuple[Candidate, ...]
    lineno: int

    @property
    def pair_key(self) -> tuple[str, str]:
        return (self.src_lang, self.tgt_lang)


def _read_jsonl(path: str | Path):
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise MalformedLineError(f"invalid JSON ({exc.msg})", lineno) from None
            if not isinstance(obj, dict):
                raise MalformedLineError("expected a JSON object", lineno)
            yield lineno, obj


def _text_field(obj: dict, key: str, lineno: int) -> str:
    value = obj.get(key)
    if not isinstance(value, str) or not value.strip():
        raise EmptyFieldError(f"missing or empty field {key!r}", lineno)
    return value


def ingest_parallel(path: str | Path) -> list[ParallelSegment]:
    """Read {"src_lang","tgt_lang","source","reference"} JSONL, order-preserving."""
    segments = []
    for lineno, obj in _read_jsonl(path):
        segments.append(
            ParallelSegment(
                src_lang=_text_field(obj, "src_lang", lineno),
                tgt_lang=_text_field(obj, "tgt_lang", lineno),
                source=_text_field(obj, "source", lineno),
                reference=_text_field(obj, "reference", lineno),
                lineno=lineno,
            )
        )
    return segments


def ingest_candidates(path: str | Path) -> list[CandidatePool]:
    """Read multi-candidate JSONL; candidates keep file order as their index."""
    pools = []
    for lineno, obj in _read_jsonl(path):
        raw_cands = obj.get("candidates")
        if not isinstance(raw_cands, list) or not raw_cands:
            raise MalformedLineError("missing or empty 'candidates' array", lineno)
        candidates = []
        for idx, cand in enumerate(raw_cands):
            if not isinstance(cand, dict):
                raise MalformedLineError(f"candidate {idx} is not an object", lineno)
            text = cand.get("text")
            system = cand.get("system")
            score = cand.get("score")
            if not isinstance(text, str) or not isinstance(system, str) or not system:
                raise MalformedLineError(f"candidate {idx} missing text/system", lineno)
            if not isinstance(score, (int, float)) or isinstance(score, bool):
                raise MalformedLineError(f"candidate {idx} has non-numeric score", lineno)
            if not 0.0 <= score <= 1.0:
                raise ScoreOutOfRangeError(
                    f"line {lineno}: candidate {idx} score {score} outside [0, 1]"
                )
            candidates.append(
                Candidate(text=text, raw_score=float(score), system_id=system, index=idx)
            )
        pools.append(
            CandidatePool(
                src_lang=_text_field(obj, "src_lang", lineno),
                tgt_lang=_text_field(obj, "tgt_lang", lineno),
                source=_text_field(obj, "source", lineno),
                candidates=tuple(candidates),
                lineno=lineno,
            )
        )
    return pools


def tier_counts(n: int) -> tuple[int, int, int]:
    """(good, medium, bad) bucket sizes for n ranked candidates.

    ceil for the 10% Good cut so every non-empty pool has a Good candidate;
    floor for the 50% Bad cut. Integer arithmetic, no float boundaries.
    """
    good = (n + 9) // 10
    bad = n // 2
    return good, n - good - bad, bad


def assign_tiers(
    pools: list[CandidatePool],
) -> dict[tuple[int, int], QualityTier]:
    """Tier every candidate, keyed by (pool position, candidate index).

    Candidates of one language pair form a single ranking by score descending;
    ties break by (system_id, pool position, candidate index) so the result is
    independent of score-equal orderings in the input file.
    """
    if not any(pool.candidates for pool in pools):
        raise EmptyInputError("no candidates to tier")

    by_pair: dict[tuple[str, str], list[tuple[float, str, int, int]]] = {}
    for pool_pos, pool in enumerate(pools):
        entries = by_pair.setdefault(pool.pair_key, [])
        for cand in pool.candidates:
            entries.append((cand.raw_score, cand.system_id, pool_pos, cand.index))

    tiers: dict[tuple[int, int], QualityTier] = {}
    for entries in by_pair.values():
        entries.sort(key=lambda e: (-e[0], e[1], e[2], e[3]))
        good, medium, _ = tier_counts(len(entries))
        for rank, (_, _, pool_pos, cand_idx) in enumerate(entries):
            if rank < good:
                tier = QualityTier.GOOD
            elif rank < good + medium:
                tier = QualityTier.MEDIUM
            else:
                tier = QualityTier.BAD
            tiers[(pool_pos, cand_idx)] = tier
    return tiers


def scale_score(raw: float) -> int:
    """Map a [0, 1] score to an integer 0-100, rounding halves away from zero.

    Goes through Decimal(str(raw)) so a score written as 0.835 in an input
    file rounds on its decimal value (84), not on its binary representation.
    """
    if not 0.0 <= raw <= 1.0:
        raise ScoreOutOfRangeError(f"raw score {raw} outside [0, 1]")
    scaled = (Decimal(str(raw)) * 100).quantize(Decimal("1"), rounding=ROUND_HALF_UP)
    return min(100, max(0, int(scaled)))
