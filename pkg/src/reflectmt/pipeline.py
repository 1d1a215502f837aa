"""Two-stage self-reflection inference, the post-editing variant, and the
single-stage baseline.

Stage 1 asks for a translation plus a self-assessment; stage 2 feeds the
draft and its (possibly overridden) assessment back for refinement. Items
run concurrently up to the backend's in-flight cap; each item's stage 2
starts only after its own stage 1, and a failure is confined to its record.
"""

from __future__ import annotations

import json
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from enum import Enum
from pathlib import Path

from .backend import Backend
from .errors import (
    BackendError,
    KindMismatchError,
    LengthMismatchError,
    PromptError,
    ScoreOutOfRangeError,
)
from .prompts import (
    LABELS,
    AssessmentKind,
    LanguagePair,
    QualityAssessment,
    RenderedPrompt,
    parse_refined_output,
    parse_stage1_output,
    render_basic_translation,
    render_draft_refinement,
    render_quality_prediction,
)


class OverrideMode(Enum):
    NONE = "none"
    ALL_GOOD = "good"
    ALL_BAD = "bad"
    RANDOM = "random"
    BLANK = "blank"


@dataclass(frozen=True)
class LabelOverride:
    """How stage-2 hints are manipulated for the label-role ablations."""

    mode: OverrideMode = OverrideMode.NONE
    seed: int | None = None

    def __post_init__(self):
        if self.mode is OverrideMode.RANDOM and self.seed is None:
            raise ValueError("random override requires a seed")

    @classmethod
    def none(cls) -> "LabelOverride":
        return cls(OverrideMode.NONE)

    @classmethod
    def all_good(cls) -> "LabelOverride":
        return cls(OverrideMode.ALL_GOOD)

    @classmethod
    def all_bad(cls) -> "LabelOverride":
        return cls(OverrideMode.ALL_BAD)

    @classmethod
    def random_seeded(cls, seed: int) -> "LabelOverride":
        return cls(OverrideMode.RANDOM, seed=seed)

    @classmethod
    def blank(cls) -> "LabelOverride":
        return cls(OverrideMode.BLANK)


@dataclass
class ReflectionRecord:
    id: int
    source: str
    draft: str | None = None
    assessment: QualityAssessment | None = None
    refined: str | None = None
    stage1_prompt: str | None = None
    stage2_prompt: str | None = None
    stage1_latency_ms: float | None = None
    stage2_latency_ms: float | None = None
    stage1_raw: str | None = None
    error: str | None = None

    @property
    def ok(self) -> bool:
        return self.error is None


# Overrides that force a label exist only for label-mode runs; blanking the
# hint is meaningful in both modes.
_TC_ONLY_MODES = (OverrideMode.ALL_GOOD, OverrideMode.ALL_BAD, OverrideMode.RANDOM)


def _check_override(kind: AssessmentKind, override: LabelOverride):
    if kind is AssessmentKind.QE and override.mode in _TC_ONLY_MODES:
        raise KindMismatchError(
            f"override {override.mode.value!r} only applies to label-mode runs"
        )


def _preassigned_labels(override: LabelOverride, n: int) -> list[str] | None:
    """Random override labels are drawn per input index before dispatch, so
    completion order cannot change the sequence."""
    if override.mode is not OverrideMode.RANDOM:
        return None
    rng = random.Random(override.seed)
    return [rng.choice(LABELS) for _ in range(n)]


def _apply_override(
    parsed: QualityAssessment, override: LabelOverride, random_label: str | None
) -> QualityAssessment:
    if override.mode is OverrideMode.ALL_GOOD:
        return QualityAssessment.tc("Good")
    if override.mode is OverrideMode.ALL_BAD:
        return QualityAssessment.tc("Bad")
    if override.mode is OverrideMode.RANDOM:
        assert random_label is not None
        return QualityAssessment.tc(random_label)
    return parsed


def _run_indexed(backend: Backend, n: int, worker) -> list:
    workers = min(backend.cfg.max_in_flight, max(n, 1))
    with ThreadPoolExecutor(max_workers=workers) as pool:
        return list(pool.map(worker, range(n)))


def _stage2(
    record: ReflectionRecord,
    pair: LanguagePair,
    kind: AssessmentKind,
    hint: QualityAssessment | None,
    backend: Backend,
):
    try:
        prompt2 = render_draft_refinement(pair, record.source, record.draft, hint, kind=kind)
    except PromptError as exc:
        record.error = f"stage2 render: {exc}"
        return
    record.stage2_prompt = prompt2.text
    try:
        result = backend.generate(prompt2)
    except BackendError as exc:
        record.error = f"stage2: {exc}"
        return
    record.stage2_latency_ms = result.latency_ms
    try:
        record.refined = parse_refined_output(result.text)
    except PromptError as exc:
        record.error = f"stage2 parse: {exc}"


def reflect(
    sources: list[str],
    pair: LanguagePair,
    kind: AssessmentKind,
    override: LabelOverride,
    backend: Backend,
) -> list[ReflectionRecord]:
    """Full two-stage run; one record per source, errors carried in-slot."""
    _check_override(kind, override)
    random_labels = _preassigned_labels(override, len(sources))

    def worker(i: int) -> ReflectionRecord:
        record = ReflectionRecord(id=i, source=sources[i])
        prompt1 = render_quality_prediction(pair, sources[i], kind)
        record.stage1_prompt = prompt1.text
        try:
            result = backend.generate(prompt1)
        except BackendError as exc:
            record.error = f"stage1: {exc}"
            return record
        record.stage1_latency_ms = result.latency_ms
        try:
            draft, parsed = parse_stage1_output(result.text, kind)
        except (PromptError, ScoreOutOfRangeError) as exc:
            record.stage1_raw = result.text
            record.error = f"stage1 parse: {exc}"
            return record
        record.draft = draft
        assessment = _apply_override(parsed, override, random_labels[i] if random_labels else None)
        record.assessment = assessment
        hint = None if override.mode is OverrideMode.BLANK else assessment
        _stage2(record, pair, kind, hint, backend)
        return record

    return _run_indexed(backend, len(sources), worker)


def ape(
    sources: list[str],
    base_translations: list[str],
    pair: LanguagePair,
    kind: AssessmentKind,
    backend: Backend,
) -> list[ReflectionRecord]:
    """Post-editing: assess an externally produced translation, then refine it.

    The stage-1 prompt embeds the base translation right after the response
    cue, so the model only emits the quality token; whatever text the model
    echoes before the token is ignored and the token attaches to the base.
    """
    if len(sources) != len(base_translations):
        raise LengthMismatchError(
            f"{len(sources)} sources vs {len(base_translations)} base translations"
        )

    def worker(i: int) -> ReflectionRecord:
        record = ReflectionRecord(id=i, source=sources[i])
        base = base_translations[i]
        if not base.strip():
            record.error = "empty base translation"
            return record
        seed_prompt = render_quality_prediction(pair, sources[i], kind)
        prompt1 = RenderedPrompt(text=seed_prompt.text + base, task=seed_prompt.task)
        record.stage1_prompt = prompt1.text
        try:
            result = backend.generate(prompt1)
        except BackendError as exc:
            record.error = f"stage1: {exc}"
            return record
        record.stage1_latency_ms = result.latency_ms
        try:
            _, parsed = parse_stage1_output(result.text, kind)
        except (PromptError, ScoreOutOfRangeError) as exc:
            record.stage1_raw = result.text
            record.error = f"stage1 parse: {exc}"
            return record
        record.draft = base
        record.assessment = parsed
        _stage2(record, pair, kind, parsed, backend)
        return record

    return _run_indexed(backend, len(sources), worker)


def baseline_translate(
    sources: list[str], pair: LanguagePair, backend: Backend
) -> list[ReflectionRecord]:
    """Single-stage translation; the output lands in the draft slot and no
    assessment or refinement is attached."""

    def worker(i: int) -> ReflectionRecord:
        record = ReflectionRecord(id=i, source=sources[i])
        prompt = render_basic_translation(pair, sources[i])
        record.stage1_prompt = prompt.text
        try:
            result = backend.generate(prompt)
        except BackendError as exc:
            record.error = f"generate: {exc}"
            return record
        record.stage1_latency_ms = result.latency_ms
        try:
            record.draft = parse_refined_output(result.text)
        except PromptError as exc:
            record.error = f"parse: {exc}"
        return record

    return _run_indexed(backend, len(sources), worker)


def record_to_dict(record: ReflectionRecord) -> dict:
    quality = None
    if record.assessment is not None:
        quality = {
            "kind": record.assessment.kind.value,
            "value": record.assessment.token()
            if record.assessment.kind is AssessmentKind.TC
            else record.assessment.score,
        }
    return {
        "id": record.id,
        "source": record.source,
        "draft": record.draft,
        "quality": quality,
        "refined": record.refined,
        "error": record.error,
    }


def write_records(records: list[ReflectionRecord], path: str | Path) -> int:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for record in records:
            fh.write(json.dumps(record_to_dict(record), ensure_ascii=False))
            fh.write("\n")
    return len(records)


def read_records(path: str | Path) -> list[dict]:
    """Read run output JSONL back for evaluation; returns raw dicts."""
    records = []
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            if line.strip():
                records.append(json.loads(line))
    return records
