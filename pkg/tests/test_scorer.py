import json
import threading
from fractions import Fraction
from http.server import BaseHTTPRequestHandler, HTTPServer

import pytest
from hypothesis import given
from hypothesis import strategies as st

from reflectmt.errors import ScoreOutOfRangeError, ScorerUnavailableError
from reflectmt.scorer import (
    LexicalScorer,
    RemoteScorer,
    ScoreRequestItem,
    lexical_score,
    make_scorer,
)


def oracle_chrf(hypothesis, reference, max_order=6, beta=2):
    """Brute-force n-gram precision/recall, then one F-beta at the end."""
    hyp = "".join(hypothesis.split())
    ref = "".join(reference.split())
    precisions, recalls = [], []
    for n in range(1, max_order + 1):
        hyp_grams = [hyp[i : i + n] for i in range(len(hyp) - n + 1)]
        ref_grams = [ref[i : i + n] for i in range(len(ref) - n + 1)]
        if not hyp_grams or not ref_grams:
            continue
        leftover = list(ref_grams)
        matches = 0
        for gram in hyp_grams:
            if gram in leftover:
                leftover.remove(gram)
                matches += 1
        precisions.append(Fraction(matches, len(hyp_grams)))
        recalls.append(Fraction(matches, len(ref_grams)))
    if not precisions:
        return 0.0
    p = sum(precisions) / len(precisions)
    r = sum(recalls) / len(recalls)
    if p + r == 0:
        return 0.0
    return float((1 + beta**2) * p * r / (beta**2 * p + r))


class TestLexicalScore:
    def test_identity(self):
        assert lexical_score("abc", "abc") == 1.0

    def test_disjoint(self):
        assert lexical_score("abc", "xyz") == 0.0

    def test_cat_sat_matches_oracle(self):
        value = lexical_score("cat sat", "the cat sat")
        assert value == pytest.approx(oracle_chrf("cat sat", "the cat sat"), abs=1e-12)
        assert value == pytest.approx(12655 / 22691, abs=1e-12)

    @given(st.text(min_size=1, max_size=30))
    def test_self_score_is_one(self, text):
        if "".join(text.split()):
            assert lexical_score(text, text) == 1.0

    @given(st.text(min_size=1, max_size=20), st.text(min_size=1, max_size=20))
    def test_bounded_and_matches_oracle(self, hyp, ref):
        value = lexical_score(hyp, ref)
        assert 0.0 <= value <= 1.0
        assert value == pytest.approx(oracle_chrf(hyp, ref), abs=1e-9)


class ScoreServer:
    """Scripted /score endpoint that records every item it was asked about."""

    def __init__(self, reply=None, status=200):
        self.items_seen = []
        self.requests = 0
        outer = self

        class Handler(BaseHTTPRequestHandler):
            def do_POST(self):
                length = int(self.headers["Content-Length"])
                payload = json.loads(self.rfile.read(length))
                outer.requests += 1
                outer.items_seen.extend(payload["items"])
                if reply is not None:
                    scores = reply(payload["items"])
                else:
                    scores = [0.5] * len(payload["items"])
                body = json.dumps({"scores": scores}).encode()
                self.send_response(status)
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def do_GET(self):
                body = json.dumps({"status": "ok", "model": "stub"}).encode()
                self.send_response(200)
                self.send_header("Content-Length", str(len(body)))
                self.end_headers()
                self.wfile.write(body)

            def log_message(self, *args):
                pass

        self.server = HTTPServer(("127.0.0.1", 0), Handler)
        threading.Thread(target=self.server.serve_forever, daemon=True).start()

    @property
    def endpoint(self):
        host, port = self.server.server_address
        return f"http://{host}:{port}"

    def close(self):
        self.server.shutdown()
        self.server.server_close()


@pytest.fixture
def score_server():
    servers = []

    def start(**kwargs):
        server = ScoreServer(**kwargs)
        servers.append(server)
        return server

    yield start
    for server in servers:
        server.close()


def item(n, hyp=None, ref=None):
    return ScoreRequestItem(source=f"src{n}", hypothesis=hyp or f"hyp{n}", reference=ref or f"ref{n}")


class TestScoreBatch:
    def test_lexical_identity_is_one(self):
        scorer = LexicalScorer()
        scores = scorer.score_batch([item(1, hyp="same text", ref="same text")])
        assert scores == [1.0]

    def test_lexical_disjoint_is_zero(self):
        scorer = LexicalScorer()
        scores = scorer.score_batch([item(1, hyp="aaa", ref="zzz")])
        assert scores == [0.0]

    def test_remote_passthrough_order(self, score_server):
        server = score_server(reply=lambda items: [0.5, 0.7][: len(items)])
        scorer = RemoteScorer(server.endpoint)
        assert scorer.score_batch([item(1), item(2)]) == [0.5, 0.7]

    def test_remote_unavailable(self):
        scorer = RemoteScorer("http://127.0.0.1:1")
        with pytest.raises(ScorerUnavailableError):
            scorer.score_batch([item(1)])

    def test_remote_out_of_range(self, score_server):
        server = score_server(reply=lambda items: [1.5] * len(items))
        scorer = RemoteScorer(server.endpoint)
        with pytest.raises(ScoreOutOfRangeError):
            scorer.score_batch([item(1)])

    def test_memoization_dedupes_remote_calls(self, score_server):
        server = score_server(reply=lambda items: [0.25] * len(items))
        scorer = RemoteScorer(server.endpoint)
        batch = [item(1), item(2), item(1), item(2)]
        first = scorer.score_batch(batch)
        second = scorer.score_batch(batch)
        assert first == second == [0.25] * 4
        assert len(server.items_seen) == 2  # each unique item crossed the wire once

    def test_concat_equals_parts(self):
        scorer = LexicalScorer()
        items = [item(i, hyp=f"text {i} x", ref=f"text {i} y") for i in range(6)]
        whole = scorer.score_batch(items)
        parts = scorer.score_batch(items[:3]) + scorer.score_batch(items[3:])
        assert whole == parts

    def test_health(self, score_server):
        server = score_server()
        assert RemoteScorer(server.endpoint).health() == {"status": "ok", "model": "stub"}

    def test_item_validation(self):
        with pytest.raises(ValueError):
            ScoreRequestItem(source="s", hypothesis="", reference="r")
        with pytest.raises(ValueError):
            ScoreRequestItem(source="s", hypothesis="h", reference="")


class TestMakeScorer:
    def test_kinds(self):
        assert make_scorer("lexical").kind == "lexical"
        assert make_scorer("remote", "http://x").kind == "remote"
        with pytest.raises(ValueError):
            make_scorer("remote")
        with pytest.raises(ValueError):
            make_scorer("neural")
