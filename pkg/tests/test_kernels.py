import pytest
from hypothesis import given
from hypothesis import strategies as st

from reflectmt import _pykernels
from reflectmt import kernels

try:
    from reflectmt import _speedups
except ImportError:
    _speedups = None

needs_compiled = pytest.mark.skipif(_speedups is None, reason="compiled kernels not built")

texts = st.text(
    alphabet=st.characters(blacklist_categories=("Cs",)), max_size=40
)


class TestPureKernels:
    @pytest.mark.parametrize(
        "a,b,expected",
        [("", "", 0), ("abc", "abc", 0), ("", "ab", 2), ("abc", "axc", 2), ("kitten", "sitting", 5)],
    )
    def test_indel_known_values(self, a, b, expected):
        assert _pykernels.indel_distance(a, b) == expected

    def test_ngram_stats_identity(self):
        assert _pykernels.char_ngram_stats("ab", "ab", 3) == [(2, 2, 2), (1, 1, 1), (0, 0, 0)]


@needs_compiled
class TestParity:
    @given(a=texts, b=texts)
    def test_indel_distance_matches(self, a, b):
        assert _speedups.indel_distance(a, b) == _pykernels.indel_distance(a, b)

    @given(a=texts, b=texts, order=st.integers(min_value=1, max_value=8))
    def test_ngram_stats_match(self, a, b, order):
        assert _speedups.char_ngram_stats(a, b, order) == _pykernels.char_ngram_stats(a, b, order)

    def test_cjk_text(self):
        a = "虽然朱雨玲连追3分"
        b = "虽然朱玉玲连追三分了"
        assert _speedups.indel_distance(a, b) == _pykernels.indel_distance(a, b)


class TestSelection:
    def test_backend_reported(self):
        assert kernels.BACKEND in ("compiled", "pure")
        assert kernels.indel_distance("ab", "ba") == 2
