"""Prompt templates for the five task variants, and parsers for model output.

Rendering is byte-exact and pure: the golden fixtures under tests/golden/ pin
every template. All prompts share one wrapper and end with the response cue;
the quality-prediction variants drop the "### Note" line that disambiguates
plain translation from translate-and-assess.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from enum import Enum

from .errors import (
    EmptyDraftError,
    EmptyOutputError,
    EmptyPairError,
    EmptySourceError,
    KindMismatchError,
    MissingQualityTokenError,
    ScoreOutOfRangeError,
    UnknownLabelError,
)

WRAPPER = "Write a response that appropriately completes the request.\n\n### Request:\n"
RESPONSE_CUE = "### Response: "
NOTE_LINE = "### Note: A translation with no errors could be\n\n"

LABELS = ("Good", "Medium", "Bad")


class TaskKind(Enum):
    BASIC_TRANSLATION = "basic_translation"
    QUALITY_PREDICTION_TC = "quality_prediction_tc"
    QUALITY_PREDICTION_QE = "quality_prediction_qe"
    DRAFT_REFINEMENT_TC = "draft_refinement_tc"
    DRAFT_REFINEMENT_QE = "draft_refinement_qe"


class AssessmentKind(Enum):
    TC = "tc"
    QE = "qe"


@dataclass(frozen=True)
class LanguagePair:
    """Display names substituted into the instructions, e.g. Chinese/English."""

    src: str
    tgt: str

    def __post_init__(self):
        if not self.src.strip() or not self.tgt.strip():
            raise EmptyPairError("language names must be non-empty")
        if self.src == self.tgt:
            raise EmptyPairError(f"source and target language are both {self.src!r}")


@dataclass(frozen=True)
class RenderedPrompt:
    text: str
    task: TaskKind


@dataclass(frozen=True)
class QualityAssessment:
    """A label (TC mode) or an integer 0-100 score (QE mode)."""

    kind: AssessmentKind
    label: str | None = None
    score: int | None = None

    def __post_init__(self):
        if self.kind is AssessmentKind.TC:
            if self.label not in LABELS or self.score is not None:
                raise UnknownLabelError(f"bad TC assessment: label={self.label!r}")
        else:
            if self.label is not None or not isinstance(self.score, int):
                raise ScoreOutOfRangeError(f"bad QE assessment: score={self.score!r}")
            if not 0 <= self.score <= 100:
                raise ScoreOutOfRangeError(f"score {self.score} outside [0, 100]")

    @classmethod
    def tc(cls, label: str) -> "QualityAssessment":
        return cls(kind=AssessmentKind.TC, label=label)

    @classmethod
    def qe(cls, score: int) -> "QualityAssessment":
        return cls(kind=AssessmentKind.QE, score=score)

    def token(self) -> str:
        """The bare quality token as it appears inside brackets."""
        return self.label if self.kind is AssessmentKind.TC else str(self.score)


def _require_source(source: str):
    if not source.strip():
        raise EmptySourceError("source text is empty")


def render_basic_translation(pair: LanguagePair, source: str) -> RenderedPrompt:
    """Plain translation prompt, with the disambiguating note line."""
    _require_source(source)
    text = (
        WRAPPER
        + f"Translate from {pair.src} to {pair.tgt}.\n"
        + source
        + "\n\n"
        + NOTE_LINE
        + RESPONSE_CUE
    )
    return RenderedPrompt(text=text, task=TaskKind.BASIC_TRANSLATION)


def render_quality_prediction(
    pair: LanguagePair, source: str, kind: AssessmentKind
) -> RenderedPrompt:
    """Translate-and-assess prompt. No note line; the instruction itself
    distinguishes the task. The TC instruction carries no trailing period."""
    _require_source(source)
    if kind is AssessmentKind.TC:
        instruction = (
            f"Translate from {pair.src} to {pair.tgt}, "
            'and label the translation quality as "Good", "Medium" or "Bad"\n'
        )
        task = TaskKind.QUALITY_PREDICTION_TC
    else:
        instruction = (
            f"Translate from {pair.src} to {pair.tgt}, "
            "and score the translation quality from 0 to 100.\n"
        )
        task = TaskKind.QUALITY_PREDICTION_QE
    return RenderedPrompt(text=WRAPPER + instruction + source + "\n\n" + RESPONSE_CUE, task=task)


def render_draft_refinement(
    pair: LanguagePair,
    source: str,
    draft: str,
    assessment: QualityAssessment | None,
    kind: AssessmentKind | None = None,
) -> RenderedPrompt:
    """Refinement prompt carrying the draft in a hint block.

    `assessment=None` renders the blank variant: the hint header and draft
    stay, the bracketed quality token is omitted. In that case `kind` decides
    whether the header says "label" or "score" (defaults to TC wording).
    """
    _require_source(source)
    if not draft.strip():
        raise EmptyDraftError("draft text is empty")
    if assessment is not None:
        if kind is not None and assessment.kind is not kind:
            raise KindMismatchError(
                f"assessment is {assessment.kind.value}, run mode is {kind.value}"
            )
        kind = assessment.kind
    elif kind is None:
        kind = AssessmentKind.TC

    quality_word = "label" if kind is AssessmentKind.TC else "score"
    token = f"[{assessment.token()}] " if assessment is not None else ""
    text = (
        WRAPPER
        + f"Translate from {pair.src} to {pair.tgt}.\n"
        + source
        + "\n\n"
        + f"### Hint:\nDraft with quality {quality_word}:\n"
        + token
        + draft
        + "\n"
        + NOTE_LINE
        + RESPONSE_CUE
    )
    task = (
        TaskKind.DRAFT_REFINEMENT_TC
        if kind is AssessmentKind.TC
        else TaskKind.DRAFT_REFINEMENT_QE
    )
    return RenderedPrompt(text=text, task=task)


# The emitted format is "draft\n[token]"; when reading model output we accept
# optional spaces between the newline and the bracket, and (for post-editing
# runs, where the prompt already contains the translation) a completion that
# is nothing but the bracket group.
_TOKEN_RE = re.compile(r"\n[ \t]*\[([^\[\]\n]*)\]\Z")
_BARE_TOKEN_RE = re.compile(r"[ \t]*\[([^\[\]\n]*)\]\Z")


def parse_stage1_output(raw: str, kind: AssessmentKind) -> tuple[str, QualityAssessment]:
    """Split a stage-1 completion into (draft, assessment).

    The split point is the final newline-plus-bracket group that closes at the
    end of the string (trailing whitespace ignored). The delimiter newline is
    consumed; everything before it is the draft.
    """
    work = raw.rstrip()
    match = _TOKEN_RE.search(work)
    if match is not None:
        draft = work[: match.start()]
        if draft.endswith("\r"):
            draft = draft[:-1]
    else:
        match = _BARE_TOKEN_RE.fullmatch(work)
        if match is None:
            raise MissingQualityTokenError(
                f"no terminal bracketed quality token in {raw!r}"
            )
        draft = ""
    token = match.group(1).strip()

    if kind is AssessmentKind.TC:
        if token not in LABELS:
            raise UnknownLabelError(f"unknown quality label {token!r}")
        return draft, QualityAssessment.tc(token)

    try:
        score = int(token, 10)
    except ValueError:
        raise MissingQualityTokenError(
            f"terminal bracket group {token!r} is not an integer score"
        ) from None
    if not 0 <= score <= 100:
        raise ScoreOutOfRangeError(f"score {score} outside [0, 100]")
    return draft, QualityAssessment.qe(score)


def parse_refined_output(raw: str) -> str:
    """Stage-2 output is plain text; trim surrounding whitespace."""
    if raw == "":
        raise EmptyOutputError("empty stage-2 output")
    return raw.strip()
