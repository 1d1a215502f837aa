"""Acceptance suite: one test per release criterion.

Each test prints an "ACCEPTANCE PASS" line with its runtime; a failure keeps
the line out. The whole suite runs offline against the deterministic mock
backend and the lexical scorer.
"""

import math
import random
import time

import pytest

from _bleu_fixtures import EXPECTED_BLEU, bleu_test_corpora
from reflectmt.backend import BackendConfig, MockBackend, MockRule
from reflectmt.corpus import Candidate, CandidatePool, QualityTier, assign_tiers
from reflectmt.dataset import (
    QuotaConfig,
    build_draft_refinement,
    build_quality_prediction,
    emit_jsonl,
)
from reflectmt.errors import NoRuleMatchedError
from reflectmt.metrics import (
    ConfusionMatrix3,
    avg_edit_distance,
    classification_metrics,
    corpus_bleu,
    pearson_r,
)
from reflectmt.pipeline import LabelOverride, ape, reflect
from reflectmt.prompts import (
    AssessmentKind,
    LanguagePair,
    QualityAssessment,
    render_basic_translation,
    render_draft_refinement,
    render_quality_prediction,
)

ZH_EN = LanguagePair(src="Chinese", tgt="English")


class Timer:
    def __init__(self, name, budget_s):
        self.name = name
        self.budget_s = budget_s

    def __enter__(self):
        self.start = time.monotonic()
        return self

    def __exit__(self, exc_type, *_):
        elapsed = time.monotonic() - self.start
        if exc_type is None:
            assert elapsed < self.budget_s, (
                f"{self.name} took {elapsed:.2f}s, budget {self.budget_s}s"
            )
            print(f"ACCEPTANCE PASS: {self.name} ({elapsed:.2f}s)")
        else:
            print(f"ACCEPTANCE FAIL: {self.name}")
        return False


def make_pools(n_pools, per_pool):
    pools = []
    step = 1.0 / (n_pools * per_pool + 1)
    k = 0
    for p in range(n_pools):
        cands = []
        for i in range(per_pool):
            k += 1
            cands.append(
                Candidate(text=f"pool{p}-cand{i}", raw_score=k * step, system_id=f"sys{i}", index=i)
            )
        pools.append(
            CandidatePool(src_lang="zh", tgt_lang="en", source=f"source {p}",
                          candidates=tuple(cands), lineno=p + 1)
        )
    return pools


def test_prompt_goldens(golden):
    with Timer("prompt goldens byte-match", budget_s=1.0):
        renders = {
            "basic_translation.txt": render_basic_translation(
                ZH_EN, "一辆 1948 年的福特水星汽车穿过佐治亚州门罗小镇的一群围观者，朝着小小的摩尔滩桥隆隆奔行。"
            ),
            "quality_prediction_tc.txt": render_quality_prediction(
                LanguagePair(src="English", tgt="German"),
                "北京大兴国际机场首航开启了北京“双机场”时代。",
                AssessmentKind.TC,
            ),
            "quality_prediction_qe.txt": render_quality_prediction(
                ZH_EN, "7月26日在上海拍摄的公共卫生防疫专业委员会成立仪式现场。", AssessmentKind.QE
            ),
            "draft_refinement_tc.txt": render_draft_refinement(
                ZH_EN,
                "虽然朱雨玲连追3分，但丁宁还是利用发球以11：9拿下首局。",
                "Although he had only three points, he took the ball to 11:9.",
                QualityAssessment.tc("Bad"),
            ),
            "draft_refinement_qe.txt": render_draft_refinement(
                ZH_EN,
                "虽然朱雨玲连追3分，但丁宁还是利用发球以11：9拿下首局。",
                "Although he had only three points, he took the ball to 11:9.",
                QualityAssessment.qe(30),
            ),
        }
        for name, rendered in renders.items():
            assert rendered.text == golden(name), f"{name} drifted from the golden file"


def test_tier_proportions():
    with Timer("tier proportions 100/400/500 + ceil/floor property", budget_s=5.0):
        pools = make_pools(n_pools=100, per_pool=10)  # 1000 distinct scores
        tiers = assign_tiers(pools)
        counts = {t: 0 for t in QualityTier}
        for tier in tiers.values():
            counts[tier] += 1
        assert counts[QualityTier.GOOD] == 100
        assert counts[QualityTier.MEDIUM] == 400
        assert counts[QualityTier.BAD] == 500

        rng = random.Random(42)
        sizes = {1, 2, 3, 9, 10, 11, 4999, 5000} | {rng.randint(1, 5000) for _ in range(40)}
        for n in sizes:
            single = CandidatePool(
                src_lang="zh", tgt_lang="en", source="s",
                candidates=tuple(
                    Candidate(text=f"c{i}", raw_score=(i + 1) / (n + 1), system_id=f"s{i}", index=i)
                    for i in range(n)
                ),
                lineno=1,
            )
            got = {t: 0 for t in QualityTier}
            for tier in assign_tiers([single]).values():
                got[tier] += 1
            assert got[QualityTier.GOOD] == math.ceil(n / 10)
            assert got[QualityTier.BAD] == math.floor(n / 2)
            assert got[QualityTier.MEDIUM] == n - math.ceil(n / 10) - math.floor(n / 2)


def test_dataset_determinism_and_quotas(tmp_path):
    with Timer("dataset quotas exact + seeded reruns byte-identical", budget_s=5.0):
        pools = make_pools(n_pools=60, per_pool=10)
        tiers = assign_tiers(pools)
        quota = QuotaConfig(
            qp_per_tier={QualityTier.GOOD: 30, QualityTier.MEDIUM: 30, QualityTier.BAD: 30},
            dr_per_tier={QualityTier.GOOD: 8, QualityTier.MEDIUM: 8, QualityTier.BAD: 4},
            seed=20240612,
        )
        emitted = []
        for run in range(2):
            qp = build_quality_prediction(pools, tiers, AssessmentKind.TC, quota)
            dr = build_draft_refinement(pools, tiers, AssessmentKind.TC, quota)
            assert len(qp.instances) == 90 and qp.warning_count == 0
            assert len(dr.instances) == 20 and dr.warning_count == 0

            qp_tokens = [inst.completion.rsplit("\n[", 1)[1].rstrip("]") for inst in qp.instances]
            assert {t: qp_tokens.count(t) for t in ("Good", "Medium", "Bad")} == {
                "Good": 30, "Medium": 30, "Bad": 30,
            }
            dr_tokens = [
                inst.prompt.split("Draft with quality label:\n[")[1].split("]")[0]
                for inst in dr.instances
            ]
            assert {t: dr_tokens.count(t) for t in ("Good", "Medium", "Bad")} == {
                "Good": 8, "Medium": 8, "Bad": 4,
            }

            qp_path = tmp_path / f"qp{run}.jsonl"
            dr_path = tmp_path / f"dr{run}.jsonl"
            emit_jsonl(qp.instances, qp_path)
            emit_jsonl(dr.instances, dr_path)
            emitted.append(qp_path.read_bytes() + dr_path.read_bytes())
        assert emitted[0] == emitted[1]


def test_edit_distance_oracle():
    with Timer("indel distance == DP oracle on 1000 random pairs", budget_s=10.0):

        def oracle(a, b):
            table = [[0] * (len(b) + 1) for _ in range(len(a) + 1)]
            for i in range(len(a) + 1):
                table[i][0] = i
            for j in range(len(b) + 1):
                table[0][j] = j
            for i in range(1, len(a) + 1):
                for j in range(1, len(b) + 1):
                    sub = table[i - 1][j - 1] + (0 if a[i - 1] == b[j - 1] else 2)
                    table[i][j] = min(table[i - 1][j] + 1, table[i][j - 1] + 1, sub)
            return table[-1][-1]

        rng = random.Random(7)
        alphabet = "abcd"
        for _ in range(1000):
            a = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 12)))
            b = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 12)))
            stats = avg_edit_distance([(a, b), (b, a), (a, a)])
            assert stats.pairs[0].distance == oracle(a, b)
            assert stats.pairs[0].distance == stats.pairs[1].distance
            assert stats.pairs[2].distance == 0 and stats.pairs[2].ratio == 0.0


def test_pearson_r_criterion():
    with Timer("pearson r: formula match 1e-9, exact at +/-1", budget_s=5.0):

        def formula(xs, ys):
            n = len(xs)
            mx, my = sum(xs) / n, sum(ys) / n
            cov = sum((x - mx) * (y - my) for x, y in zip(xs, ys))
            vx = sum((x - mx) ** 2 for x in xs)
            vy = sum((y - my) ** 2 for y in ys)
            return cov / math.sqrt(vx * vy)

        rng = random.Random(13)
        for _ in range(100):
            n = rng.randint(2, 60)
            xs = [rng.uniform(-100, 100) for _ in range(n)]
            ys = [rng.uniform(-100, 100) for _ in range(n)]
            if len(set(xs)) == 1 or len(set(ys)) == 1:
                continue
            assert pearson_r(xs, ys) == pytest.approx(formula(xs, ys), abs=1e-9)

        xs = [rng.uniform(-5, 5) for _ in range(50)]
        assert pearson_r(xs, xs) == 1.0
        assert pearson_r(xs, [-x for x in xs]) == -1.0


def test_weighted_prf_criterion():
    with Timer("weighted P/R/F1: hand values 1e-9, recall == accuracy", budget_s=5.0):
        matrix = ConfusionMatrix3(counts=((40, 7, 3), (5, 20, 5), (2, 4, 14)))
        prf = classification_metrics(matrix)
        # hand-derived: P_c = (40/47, 20/31, 7/11), R_c = (4/5, 2/3, 7/10),
        # F_c = (80/97, 40/61, 2/3), supports (50, 30, 20) of 100
        assert prf.precision == pytest.approx(
            (50 * 40 / 47 + 30 * 20 / 31 + 20 * 7 / 11) / 100, abs=1e-9
        )
        assert prf.recall == pytest.approx(0.74, abs=1e-9)
        assert prf.f1 == pytest.approx(
            (50 * 80 / 97 + 30 * 40 / 61 + 20 * 2 / 3) / 100, abs=1e-9
        )

        rng = random.Random(29)
        checked = 0
        while checked < 100:
            counts = tuple(tuple(rng.randint(0, 40) for _ in range(3)) for _ in range(3))
            m = ConfusionMatrix3(counts=counts)
            if m.total == 0:
                continue
            checked += 1
            trace = sum(counts[i][i] for i in range(3))
            assert classification_metrics(m).recall == trace / m.total


def test_bleu_criterion():
    with Timer("BLEU: identity == 100.0, 20 corpora within 0.01 of reference", budget_s=5.0):
        refs = ["the cat sat on the mat .", "a longer reference sentence follows here",
                "third line , with punctuation !"]
        assert corpus_bleu(list(refs), refs) == 100.0
        for (hyps, corpus_refs), expected in zip(bleu_test_corpora(), EXPECTED_BLEU):
            assert corpus_bleu(hyps, corpus_refs) == pytest.approx(expected, abs=0.01)


def _fifty_segment_mock(concurrency=8):
    labels = ["Good", "Medium", "Bad"]
    rules = []
    for i in range(50):
        rules.append(MockRule(match=f"draft-{i:03d} text", reply=f"refined-{i:03d}"))
    for i in range(50):
        rules.append(
            MockRule(match=f"segment {i:03d}", reply=f"draft-{i:03d} text\n[{labels[i % 3]}]")
        )
    cfg = BackendConfig(endpoint="mock://", max_in_flight=concurrency)
    return MockBackend(rules, cfg=cfg), [f"segment {i:03d}" for i in range(50)]


def test_end_to_end_reflection_criterion():
    with Timer("e2e reflection: threading, blank, seeded rerun", budget_s=5.0):
        backend, sources = _fifty_segment_mock()

        records = reflect(sources, ZH_EN, AssessmentKind.TC, LabelOverride.none(), backend)
        assert len(records) == 50 and all(r.ok for r in records)
        for record in records:
            assert record.draft in record.stage2_prompt
            assert f"[{record.assessment.label}]" in record.stage2_prompt

        blank = reflect(sources, ZH_EN, AssessmentKind.TC, LabelOverride.blank(), backend)
        for record in blank:
            hint = record.stage2_prompt.split("### Hint:\n")[1].split("### Note")[0]
            assert record.draft in hint
            assert "[" not in hint

        seeded = [
            reflect(sources, ZH_EN, AssessmentKind.TC, LabelOverride.random_seeded(7), backend)
            for _ in range(2)
        ]
        first = [r.assessment.label for r in seeded[0]]
        second = [r.assessment.label for r in seeded[1]]
        assert first == second
        for record in seeded[0]:
            assert f"[{record.assessment.label}]" in record.stage2_prompt


def test_ape_criterion():
    with Timer("post-editing: prompt ends with base, labels attach", budget_s=5.0):
        labels = ["Good", "Medium", "Bad"]
        rules = [MockRule(match="### Hint", reply="polished output")]
        rules += [
            MockRule(match=f"external base {i:02d}", reply=f"\n[{labels[i % 3]}]")
            for i in range(12)
        ]
        backend = MockBackend(rules, cfg=BackendConfig(endpoint="mock://", max_in_flight=4))
        sources = [f"src {i:02d}" for i in range(12)]
        bases = [f"external base {i:02d}" for i in range(12)]
        records = ape(sources, bases, ZH_EN, AssessmentKind.TC, backend)
        assert all(r.ok for r in records)
        for i, record in enumerate(records):
            assert record.stage1_prompt.endswith(f"### Response: {bases[i]}")
            assert record.draft == bases[i]
            assert record.assessment.label == labels[i % 3]


def test_batch_order_criterion():
    with Timer("batch order at concurrency 8 with injected failures", budget_s=5.0):
        failing = {7, 21, 40, 41, 77, 93}
        rules = [
            MockRule(match=f"prompt-{i:03d}", reply=f"reply-{i:03d}")
            for i in range(100)
            if i not in failing
        ]
        backend = MockBackend(rules, cfg=BackendConfig(endpoint="mock://", max_in_flight=8))
        from reflectmt.prompts import RenderedPrompt, TaskKind

        prompts = [
            RenderedPrompt(text=f"prompt-{i:03d}", task=TaskKind.BASIC_TRANSLATION)
            for i in range(100)
        ]
        results = backend.generate_batch(prompts)
        assert len(results) == 100
        for i, result in enumerate(results):
            if i in failing:
                assert isinstance(result, NoRuleMatchedError)
            else:
                assert result.text == f"reply-{i:03d}"
