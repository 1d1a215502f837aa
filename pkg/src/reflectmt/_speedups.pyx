# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled twins of the kernels in _pykernels.py.

Same signatures, same results; tests/test_kernels.py checks parity. The
edit-distance DP runs over raw code points in C arrays, the n-gram counter
keeps Python dicts but with typed index loops.
"""

from libc.stdlib cimport free, malloc


def indel_distance(str a, str b):
    """Edit distance counting insertions and deletions only (substitution = 2)."""
    cdef Py_ssize_t la = len(a), lb = len(b)
    if la == 0 or lb == 0:
        return la + lb
    if a == b:
        return 0
    cdef str long_s = a, short_s = b
    if la < lb:
        long_s, short_s = b, a
        la, lb = lb, la

    cdef int *prev = <int *> malloc((lb + 1) * sizeof(int))
    cdef int *curr = <int *> malloc((lb + 1) * sizeof(int))
    if prev == NULL or curr == NULL:
        free(prev)
        free(curr)
        raise MemoryError()

    cdef Py_ssize_t i, j
    cdef Py_UCS4 ca
    cdef int above, left, lcs
    cdef int *tmp
    try:
        for j in range(lb + 1):
            prev[j] = 0
        for i in range(la):
            ca = long_s[i]
            curr[0] = 0
            for j in range(1, lb + 1):
                if ca == <Py_UCS4> short_s[j - 1]:
                    curr[j] = prev[j - 1] + 1
                else:
                    left = curr[j - 1]
                    above = prev[j]
                    curr[j] = left if left >= above else above
            tmp = prev
            prev = curr
            curr = tmp
        lcs = prev[lb]
    finally:
        free(prev)
        free(curr)
    return la + lb - 2 * lcs


def char_ngram_stats(str hyp, str ref, int max_order):
    """Per order n = 1..max_order: (hyp n-gram count, ref n-gram count, clipped matches)."""
    cdef Py_ssize_t lh = len(hyp), lr = len(ref)
    cdef Py_ssize_t i
    cdef int n
    cdef Py_ssize_t remaining, hyp_total, ref_total, matches
    cdef dict ref_counts
    cdef str gram
    stats = []
    for n in range(1, max_order + 1):
        hyp_total = lh - n + 1 if lh >= n else 0
        ref_total = lr - n + 1 if lr >= n else 0
        if hyp_total == 0 or ref_total == 0:
            stats.append((hyp_total, ref_total, 0))
            continue
        ref_counts = {}
        for i in range(ref_total):
            gram = ref[i:i + n]
            ref_counts[gram] = ref_counts.get(gram, 0) + 1
        matches = 0
        for i in range(hyp_total):
            gram = hyp[i:i + n]
            remaining = ref_counts.get(gram, 0)
            if remaining > 0:
                ref_counts[gram] = remaining - 1
                matches += 1
        stats.append((hyp_total, ref_total, matches))
    return stats
