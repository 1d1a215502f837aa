"""Corpus and per-segment evaluation.

BLEU follows the WMT convention: mteval-13a tokenization (punctuation split,
no lowercasing), 4-gram precisions with exponential smoothing of zero counts,
brevity penalty, corpus-level. Edit distance is the insert/delete-only
variant (substitution costs 2) normalized by the summed string lengths.
Classification metrics and Pearson's r run on exact rational arithmetic
internally, so algebraic identities (weighted recall == accuracy, r(x,x)=1)
hold exactly in the returned floats.
"""

from __future__ import annotations

import json
import math
import re
from collections import Counter
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

from .errors import (
    ConstantVectorError,
    EmptyCorpusError,
    EmptyInputError,
    EmptyMatrixError,
    IndexOutOfRangeError,
    LengthMismatchError,
    MalformedLineError,
    MetricError,
)
from .kernels import indel_distance
from .prompts import LABELS, AssessmentKind
from .scorer import ScoreRequestItem

BLEU_ORDER = 4

# --- BLEU --------------------------------------------------------------------

_13A_RULES = [
    (re.compile(r"([\{-\~\[-\` -\&\(-\+\:-\@\/])"), r" \1 "),
    (re.compile(r"([^0-9])([\.,])"), r"\1 \2 "),
    (re.compile(r"([\.,])([^0-9])"), r" \1 \2"),
    (re.compile(r"([0-9])(-)"), r"\1 - "),
]


def tokenize_13a(line: str) -> str:
    """Minimal WMT tokenization equivalent to mteval-v13a."""
    norm = line.replace("<skipped>", "")
    norm = norm.replace("-\n", "")
    norm = norm.replace("\n", " ")
    norm = norm.replace("&quot;", '"')
    norm = norm.replace("&amp;", "&")
    norm = norm.replace("&lt;", "<")
    norm = norm.replace("&gt;", ">")
    norm = f" {norm} "
    for pattern, repl in _13A_RULES:
        norm = pattern.sub(repl, norm)
    return " ".join(norm.split())


def _ngram_counts(tokens: list[str]) -> Counter:
    counts: Counter = Counter()
    for n in range(1, BLEU_ORDER + 1):
        for i in range(len(tokens) - n + 1):
            counts[tuple(tokens[i : i + n])] += 1
    return counts


def corpus_bleu(hypotheses: list[str], references: list[str]) -> float:
    """Corpus BLEU on the 0-100 scale, single reference per segment."""
    if len(hypotheses) != len(references):
        raise LengthMismatchError(
            f"{len(hypotheses)} hypotheses vs {len(references)} references"
        )
    if not hypotheses:
        raise EmptyCorpusError("no segment pairs")

    correct = [0] * BLEU_ORDER
    total = [0] * BLEU_ORDER
    sys_len = 0
    ref_len = 0
    for hyp, ref in zip(hypotheses, references):
        hyp_tokens = tokenize_13a(hyp.rstrip()).split()
        ref_tokens = tokenize_13a(ref.rstrip()).split()
        sys_len += len(hyp_tokens)
        ref_len += len(ref_tokens)
        ref_counts = _ngram_counts(ref_tokens)
        for ngram, count in _ngram_counts(hyp_tokens).items():
            n = len(ngram)
            total[n - 1] += count
            correct[n - 1] += min(count, ref_counts.get(ngram, 0))

    # Exponential smoothing: each zero match count halves a pseudo-precision
    # floor. An order with no hypothesis n-grams at all leaves its precision
    # at zero, which zeroes the geometric mean (matching the convention of
    # the WMT reference scorer).
    precisions = [0.0] * BLEU_ORDER
    smooth = 1.0
    for n in range(1, BLEU_ORDER + 1):
        if total[n - 1] == 0:
            break
        if correct[n - 1] == 0:
            smooth *= 2
            precisions[n - 1] = 100.0 / (smooth * total[n - 1])
        else:
            precisions[n - 1] = 100.0 * correct[n - 1] / total[n - 1]

    if any(p == 0.0 for p in precisions):
        return 0.0
    if sys_len < ref_len:
        bp = math.exp(1 - ref_len / sys_len) if sys_len > 0 else 0.0
    else:
        bp = 1.0
    if all(p == precisions[0] for p in precisions):
        geo_mean = precisions[0]  # exact when every order agrees (e.g. identity)
    else:
        geo_mean = math.exp(math.fsum(math.log(p) for p in precisions) / BLEU_ORDER)
    return bp * geo_mean


# --- normalized indel edit distance -------------------------------------------

@dataclass(frozen=True)
class PairEditStats:
    distance: int
    len1: int
    len2: int
    ratio: float


@dataclass(frozen=True)
class EditDistanceStats:
    pairs: tuple[PairEditStats, ...]
    mean: float


def avg_edit_distance(pairs: list[tuple[str, str]]) -> EditDistanceStats:
    """Character-level indel distance per pair, normalized by len1 + len2.

    Two empty strings contribute 0 by convention. The mean is the plain
    arithmetic mean of the per-pair ratios.
    """
    if not pairs:
        raise EmptyInputError("no string pairs")
    stats = []
    for a, b in pairs:
        dist = indel_distance(a, b)
        denom = len(a) + len(b)
        ratio = dist / denom if denom else 0.0
        stats.append(PairEditStats(distance=dist, len1=len(a), len2=len(b), ratio=ratio))
    mean = math.fsum(s.ratio for s in stats) / len(stats)
    return EditDistanceStats(pairs=tuple(stats), mean=mean)


# --- quality-label classification --------------------------------------------

@dataclass(frozen=True)
class ConfusionMatrix3:
    """3x3 counts over (Good, Medium, Bad); rows gold, columns predicted."""

    counts: tuple[tuple[int, int, int], ...]

    def __post_init__(self):
        if len(self.counts) != 3 or any(len(row) != 3 for row in self.counts):
            raise EmptyMatrixError("confusion matrix must be 3x3")
        if any(c < 0 for row in self.counts for c in row):
            raise EmptyMatrixError("confusion matrix counts must be non-negative")

    @classmethod
    def from_pairs(cls, gold: list[str], predicted: list[str]) -> "ConfusionMatrix3":
        if len(gold) != len(predicted):
            raise LengthMismatchError(f"{len(gold)} gold vs {len(predicted)} predicted")
        index = {label: i for i, label in enumerate(LABELS)}
        rows = [[0, 0, 0] for _ in range(3)]
        for g, p in zip(gold, predicted):
            rows[index[g]][index[p]] += 1
        return cls(counts=tuple(tuple(row) for row in rows))

    @property
    def total(self) -> int:
        return sum(sum(row) for row in self.counts)

    def row_sum(self, i: int) -> int:
        return sum(self.counts[i])

    def col_sum(self, j: int) -> int:
        return sum(row[j] for row in self.counts)


@dataclass(frozen=True)
class WeightedPRF:
    precision: float
    recall: float
    f1: float


def classification_metrics(matrix: ConfusionMatrix3) -> WeightedPRF:
    """Per-class precision/recall/F1 (0/0 defined as 0), weighted by gold support."""
    total = matrix.total
    if total == 0:
        raise EmptyMatrixError("confusion matrix is empty")
    weighted_p = Fraction(0)
    weighted_r = Fraction(0)
    weighted_f = Fraction(0)
    for i in range(3):
        tp = matrix.counts[i][i]
        support = matrix.row_sum(i)
        col = matrix.col_sum(i)
        precision = Fraction(tp, col) if col else Fraction(0)
        recall = Fraction(tp, support) if support else Fraction(0)
        f1 = (
            2 * precision * recall / (precision + recall)
            if precision + recall
            else Fraction(0)
        )
        weighted_p += support * precision
        weighted_r += support * recall
        weighted_f += support * f1
    return WeightedPRF(
        precision=float(weighted_p / total),
        recall=float(weighted_r / total),
        f1=float(weighted_f / total),
    )


# --- correlation --------------------------------------------------------------

def pearson_r(xs: list[float], ys: list[float]) -> float:
    """Product-moment correlation, exact rational arithmetic up to one sqrt.

    Perfectly (anti-)correlated inputs return exactly +/-1.0, and the result
    is exactly invariant under positive affine transforms of either argument.
    """
    if len(xs) != len(ys):
        raise LengthMismatchError(f"{len(xs)} xs vs {len(ys)} ys")
    n = len(xs)
    if n < 2:
        raise EmptyInputError("need at least two points")
    fx = [Fraction(x) for x in xs]
    fy = [Fraction(y) for y in ys]
    sx, sy = sum(fx), sum(fy)
    sxx = sum(v * v for v in fx)
    syy = sum(v * v for v in fy)
    sxy = sum(a * b for a, b in zip(fx, fy))
    var_x = n * sxx - sx * sx
    var_y = n * syy - sy * sy
    if var_x == 0 or var_y == 0:
        raise ConstantVectorError("correlation undefined for a constant vector")
    cov = n * sxy - sx * sy
    if cov == 0:
        return 0.0
    r_squared = cov * cov / (var_x * var_y)
    r = math.sqrt(float(r_squared))
    return r if cov > 0 else -r


# --- unaligned translation words ----------------------------------------------

def utw_rate(
    target_tokens: list[list[str]],
    alignments: list[set[tuple[int, int]]],
) -> float:
    """Percentage of target token positions that no alignment pair touches."""
    if len(target_tokens) != len(alignments):
        raise LengthMismatchError(
            f"{len(target_tokens)} token lists vs {len(alignments)} alignment sets"
        )
    total = 0
    unaligned = 0
    for seg, (tokens, pairs) in enumerate(zip(target_tokens, alignments)):
        covered = set()
        for _, j in pairs:
            if not 0 <= j < len(tokens):
                raise IndexOutOfRangeError(
                    seg, f"target index {j} with {len(tokens)} tokens"
                )
            covered.add(j)
        total += len(tokens)
        unaligned += len(tokens) - len(covered)
    if total == 0:
        raise EmptyInputError("no target tokens")
    return 100.0 * unaligned / total


def read_pharaoh(path: str | Path) -> list[set[tuple[int, int]]]:
    """Parse an "i-j" alignment file, one line per segment, 0-based indices."""
    text = Path(path).read_text(encoding="utf-8")
    alignments = []
    for lineno, line in enumerate(text.splitlines(), start=1):
        pairs = set()
        for token in line.split():
            left, sep, right = token.partition("-")
            if not sep or not left.isdigit() or not right.isdigit():
                raise MalformedLineError(f"bad alignment token {token!r}", lineno)
            pairs.add((int(left), int(right)))
        alignments.append(pairs)
    return alignments


# --- refinement deltas by predicted label --------------------------------------

@dataclass(frozen=True)
class LabelDelta:
    count: int
    proportion_pct: float
    mean_delta: float | None


def delta_by_label(records, references: list[str], scorer) -> dict[str, LabelDelta]:
    """Per predicted label: share of records and mean score change from
    draft to refinement, on the 0-100 scale."""
    if len(records) != len(references):
        raise LengthMismatchError(f"{len(records)} records vs {len(references)} references")
    if not records:
        raise EmptyInputError("no records")
    for record in records:
        if not record.ok or record.draft is None or record.refined is None:
            raise MetricError(f"record {record.id} did not complete both stages")
        if record.assessment is None or record.assessment.kind is not AssessmentKind.TC:
            raise MetricError(f"record {record.id} carries no quality label")

    draft_items = [
        ScoreRequestItem(source=r.source, hypothesis=r.draft, reference=ref)
        for r, ref in zip(records, references)
    ]
    refined_items = [
        ScoreRequestItem(source=r.source, hypothesis=r.refined, reference=ref)
        for r, ref in zip(records, references)
    ]
    draft_scores = scorer.score_batch(draft_items)
    refined_scores = scorer.score_batch(refined_items)

    out = {}
    for label in LABELS:
        deltas = [
            (after - before) * 100.0
            for r, before, after in zip(records, draft_scores, refined_scores)
            if r.assessment.label == label
        ]
        out[label] = LabelDelta(
            count=len(deltas),
            proportion_pct=100.0 * len(deltas) / len(records),
            mean_delta=math.fsum(deltas) / len(deltas) if deltas else None,
        )
    return out


# --- report container -----------------------------------------------------------

@dataclass
class EvalReport:
    """Named metric sections, each recording the digests of its inputs."""

    sections: dict = field(default_factory=dict)

    def add_section(self, name: str, payload: dict, inputs: dict | None = None):
        entry = dict(payload)
        if inputs:
            entry["inputs"] = inputs
        self.sections[name] = entry

    def to_dict(self) -> dict:
        return {"sections": self.sections}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False, indent=2)

    def to_text(self) -> str:
        def fmt(value):
            return f"{value:.4f}" if isinstance(value, float) else value

        lines = []
        for name, payload in self.sections.items():
            lines.append(name)
            for key, value in payload.items():
                if key == "inputs":
                    continue
                if isinstance(value, dict):
                    inner = "  ".join(f"{k}={fmt(v)}" for k, v in value.items())
                    lines.append(f"  {key:<20} {inner}")
                else:
                    lines.append(f"  {key:<20} {fmt(value)}")
        return "\n".join(lines)
