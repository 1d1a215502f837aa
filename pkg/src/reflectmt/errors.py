"""Exception hierarchy shared across the toolkit.

Every error carries enough context (line numbers, tiers, HTTP codes) for the
CLI to print an actionable message without a traceback.
"""

from __future__ import annotations


class ReflectMtError(Exception):
    """Base class for all toolkit errors."""


# --- prompt rendering / parsing ---------------------------------------------

class PromptError(ReflectMtError):
    pass


class EmptySourceError(PromptError):
    pass


class EmptyPairError(PromptError):
    """Source and target language are the same (or blank)."""


class EmptyDraftError(PromptError):
    pass


class KindMismatchError(PromptError):
    """A TC assessment was used in a QE context or vice versa."""


class ParseError(PromptError):
    pass


class MissingQualityTokenError(ParseError):
    """Model output has no terminal bracketed quality token."""


class UnknownLabelError(ParseError):
    pass


class ScoreOutOfRangeError(ReflectMtError):
    """An integer quality score is outside [0, 100], or a raw score outside [0, 1]."""


class EmptyOutputError(ParseError):
    pass


class UnknownLanguageCodeError(ReflectMtError):
    pass


# --- corpus ingestion --------------------------------------------------------

class IngestError(ReflectMtError):
    def __init__(self, message: str, lineno: int):
        super().__init__(f"line {lineno}: {message}")
        self.lineno = lineno


class MalformedLineError(IngestError):
    pass


class EmptyFieldError(IngestError):
    pass


class EmptyInputError(ReflectMtError):
    pass


# --- dataset building --------------------------------------------------------

class InsufficientPoolError(ReflectMtError):
    def __init__(self, tier, have: int, want: int):
        super().__init__(
            f"tier {getattr(tier, 'value', tier)}: {have} candidates available, {want} requested"
        )
        self.tier = tier
        self.have = have
        self.want = want


# --- backend -----------------------------------------------------------------

class BackendError(ReflectMtError):
    pass


class BackendTimeoutError(BackendError):
    pass


class TransportError(BackendError):
    pass


class BadStatusError(BackendError):
    def __init__(self, code: int, detail: str = ""):
        super().__init__(f"HTTP {code}" + (f": {detail}" if detail else ""))
        self.code = code


class NoRuleMatchedError(BackendError):
    pass


# --- scorer ------------------------------------------------------------------

class ScorerUnavailableError(ReflectMtError):
    pass


# --- metrics -----------------------------------------------------------------

class MetricError(ReflectMtError):
    pass


class LengthMismatchError(MetricError):
    pass


class EmptyCorpusError(MetricError):
    pass


class EmptyMatrixError(MetricError):
    pass


class ConstantVectorError(MetricError):
    pass


class IndexOutOfRangeError(MetricError):
    def __init__(self, segment: int, message: str = ""):
        super().__init__(f"segment {segment}" + (f": {message}" if message else ""))
        self.segment = segment
