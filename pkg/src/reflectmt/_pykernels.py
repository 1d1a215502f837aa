"""Pure-Python implementations of the counting kernels.

`reflectmt.kernels` swaps these for the compiled versions when the extension
built from _speedups.pyx is importable. Both implementations must stay
behaviourally identical; tests/test_kernels.py enforces parity.
"""

from __future__ import annotations


def indel_distance(a: str, b: str) -> int:
    """Edit distance counting insertions and deletions only.

    A substitution therefore costs 2. Equals len(a) + len(b) - 2 * LCS(a, b),
    computed with a two-row LCS table over characters.
    """
    if a == b:
        return 0
    if not a or not b:
        return len(a) + len(b)
    if len(a) < len(b):
        a, b = b, a
    prev = [0] * (len(b) + 1)
    curr = [0] * (len(b) + 1)
    for ca in a:
        for j, cb in enumerate(b, start=1):
            if ca == cb:
                curr[j] = prev[j - 1] + 1
            else:
                curr[j] = curr[j - 1] if curr[j - 1] >= prev[j] else prev[j]
        prev, curr = curr, prev
    lcs = prev[len(b)]
    return len(a) + len(b) - 2 * lcs


def char_ngram_stats(hyp: str, ref: str, max_order: int) -> list[tuple[int, int, int]]:
    """Per order n = 1..max_order: (hyp n-gram count, ref n-gram count, clipped matches)."""
    stats = []
    for n in range(1, max_order + 1):
        hyp_total = max(len(hyp) - n + 1, 0)
        ref_total = max(len(ref) - n + 1, 0)
        if hyp_total == 0 or ref_total == 0:
            stats.append((hyp_total, ref_total, 0))
            continue
        ref_counts: dict[str, int] = {}
        for i in range(ref_total):
            gram = ref[i : i + n]
            ref_counts[gram] = ref_counts.get(gram, 0) + 1
        matches = 0
        for i in range(hyp_total):
            gram = hyp[i : i + n]
            remaining = ref_counts.get(gram, 0)
            if remaining > 0:
                ref_counts[gram] = remaining - 1
                matches += 1
        stats.append((hyp_total, ref_total, matches))
    return stats
