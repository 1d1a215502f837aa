"""Builders for the three supervised fine-tuning datasets.

Basic translation maps parallel segments one-to-one. Quality prediction and
draft refinement sample candidates per tier, without replacement, from a
seeded RNG, so a (inputs, quota, seed) triple fully determines the emitted
bytes. Draft refinement uses each pool's top-scored candidate as the target
and never offers it as a draft.
"""

from __future__ import annotations

import json
import random
from dataclasses import dataclass, field
from pathlib import Path

from .corpus import CandidatePool, ParallelSegment, QualityTier, scale_score
from .errors import InsufficientPoolError
from .languages import name_for_code
from .prompts import (
    AssessmentKind,
    LanguagePair,
    QualityAssessment,
    TaskKind,
    render_basic_translation,
    render_draft_refinement,
    render_quality_prediction,
)

# Pinned in run manifests: the sampling stream is CPython's Mersenne Twister
# seeded with QuotaConfig.seed, consumed tier by tier in GOOD, MEDIUM, BAD order.
RNG_ALGORITHM = "python-random-mt19937"

TIER_ORDER = (QualityTier.GOOD, QualityTier.MEDIUM, QualityTier.BAD)


@dataclass(frozen=True)
class SftInstance:
    task: TaskKind
    prompt: str
    completion: str


@dataclass(frozen=True)
class QuotaConfig:
    """Per-tier instance counts for the two sampled tasks, plus the RNG seed."""

    qp_per_tier: dict[QualityTier, int]
    dr_per_tier: dict[QualityTier, int]
    seed: int

    def __post_init__(self):
        for quota in (self.qp_per_tier, self.dr_per_tier):
            for tier, count in quota.items():
                if count < 0:
                    raise ValueError(f"negative quota for {tier.value}: {count}")


@dataclass
class DatasetBuild:
    """Sampled instances plus what could not be satisfied."""

    instances: list[SftInstance]
    shortfalls: dict[QualityTier, int] = field(default_factory=dict)
    skipped_pools: int = 0

    @property
    def warning_count(self) -> int:
        return sum(self.shortfalls.values()) + self.skipped_pools


def _pair_for(pool_or_segment) -> LanguagePair:
    return LanguagePair(
        src=name_for_code(pool_or_segment.src_lang),
        tgt=name_for_code(pool_or_segment.tgt_lang),
    )


def build_basic_translation(segments: list[ParallelSegment]) -> list[SftInstance]:
    """One instance per segment; the reference is the completion."""
    instances = []
    for seg in segments:
        prompt = render_basic_translation(_pair_for(seg), seg.source)
        instances.append(
            SftInstance(task=prompt.task, prompt=prompt.text, completion=seg.reference)
        )
    return instances


def _tier_populations(
    pools: list[CandidatePool],
    tiers: dict[tuple[int, int], QualityTier],
    exclude: dict[int, int] | None = None,
    eligible_pools: set[int] | None = None,
) -> dict[QualityTier, list[tuple[int, int]]]:
    populations: dict[QualityTier, list[tuple[int, int]]] = {t: [] for t in TIER_ORDER}
    for pool_pos, pool in enumerate(pools):
        if eligible_pools is not None and pool_pos not in eligible_pools:
            continue
        for cand in pool.candidates:
            if exclude is not None and exclude.get(pool_pos) == cand.index:
                continue
            populations[tiers[(pool_pos, cand.index)]].append((pool_pos, cand.index))
    return populations


def _sample(
    population: list[tuple[int, int]],
    want: int,
    tier: QualityTier,
    rng: random.Random,
    allow_undersample: bool,
) -> tuple[list[tuple[int, int]], int]:
    if len(population) < want:
        if not allow_undersample:
            raise InsufficientPoolError(tier, have=len(population), want=want)
        return list(population), want - len(population)
    return rng.sample(population, want), 0


def build_quality_prediction(
    pools: list[CandidatePool],
    tiers: dict[tuple[int, int], QualityTier],
    kind: AssessmentKind,
    quota: QuotaConfig,
    allow_undersample: bool = False,
) -> DatasetBuild:
    """Sampled candidates become completions of the form "text\\n[token]".

    TC tokens are the candidate's tier label; QE tokens are the raw score
    scaled to 0-100.
    """
    rng = random.Random(quota.seed)
    populations = _tier_populations(pools, tiers)
    build = DatasetBuild(instances=[])
    for tier in TIER_ORDER:
        want = quota.qp_per_tier.get(tier, 0)
        picked, missing = _sample(populations[tier], want, tier, rng, allow_undersample)
        if missing:
            build.shortfalls[tier] = missing
        for pool_pos, cand_idx in picked:
            pool = pools[pool_pos]
            cand = pool.candidates[cand_idx]
            prompt = render_quality_prediction(_pair_for(pool), pool.source, kind)
            token = tier.value if kind is AssessmentKind.TC else str(scale_score(cand.raw_score))
            build.instances.append(
                SftInstance(
                    task=prompt.task,
                    prompt=prompt.text,
                    completion=f"{cand.text}\n[{token}]",
                )
            )
    return build


def pool_reference_index(pool: CandidatePool) -> int:
    """Index of the pool's target candidate: highest score, ties by system then index."""
    best = min(pool.candidates, key=lambda c: (-c.raw_score, c.system_id, c.index))
    return best.index


def build_draft_refinement(
    pools: list[CandidatePool],
    tiers: dict[tuple[int, int], QualityTier],
    kind: AssessmentKind,
    quota: QuotaConfig,
    allow_undersample: bool = False,
) -> DatasetBuild:
    """Drafts come from the non-reference candidates of each pool.

    The completion is the pool's reference (top-scored candidate); pools with
    fewer than two candidates cannot contribute and are counted as skipped.
    """
    rng = random.Random(quota.seed)
    references: dict[int, int] = {}
    eligible: set[int] = set()
    skipped = 0
    for pool_pos, pool in enumerate(pools):
        if len(pool.candidates) < 2:
            skipped += 1
            continue
        eligible.add(pool_pos)
        references[pool_pos] = pool_reference_index(pool)

    populations = _tier_populations(pools, tiers, exclude=references, eligible_pools=eligible)
    build = DatasetBuild(instances=[], skipped_pools=skipped)
    for tier in TIER_ORDER:
        want = quota.dr_per_tier.get(tier, 0)
        picked, missing = _sample(populations[tier], want, tier, rng, allow_undersample)
        if missing:
            build.shortfalls[tier] = missing
        for pool_pos, cand_idx in picked:
            pool = pools[pool_pos]
            draft = pool.candidates[cand_idx]
            reference = pool.candidates[references[pool_pos]]
            if kind is AssessmentKind.TC:
                assessment = QualityAssessment.tc(tier.value)
            else:
                assessment = QualityAssessment.qe(scale_score(draft.raw_score))
            prompt = render_draft_refinement(
                _pair_for(pool), pool.source, draft.text, assessment
            )
            build.instances.append(
                SftInstance(task=prompt.task, prompt=prompt.text, completion=reference.text)
            )
    return build


def emit_jsonl(instances: list[SftInstance], path: str | Path) -> int:
    """Write one {"task","prompt","completion"} object per line; returns the count."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for inst in instances:
            record = {
                "task": inst.task.value,
                "prompt": inst.prompt,
                "completion": inst.completion,
            }
            fh.write(json.dumps(record, ensure_ascii=False))
            fh.write("\n")
    return len(instances)
