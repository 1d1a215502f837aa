#!/usr/bin/env python3
"""Times the compiled kernels against the pure-Python fallbacks.

Run after `pip install -e . --no-build-isolation`:

    python benchmarks/bench_kernels.py [--pairs 2000] [--min-len 40] [--max-len 200]

The workload mirrors real evaluation runs: character-level edit distance and
chrF-style n-gram statistics over sentence-sized strings.
"""

import argparse
import random
import string
import time

from reflectmt import _pykernels

try:
    from reflectmt import _speedups
except ImportError:
    _speedups = None


def make_pairs(n, min_len, max_len, seed=1234):
    rng = random.Random(seed)
    alphabet = string.ascii_lowercase + "    ,.!?"
    pairs = []
    for _ in range(n):
        a = "".join(rng.choice(alphabet) for _ in range(rng.randint(min_len, max_len)))
        # derive b from a with edits, as a refined translation would be
        b = list(a)
        for _ in range(rng.randint(0, len(a) // 4)):
            op = rng.randint(0, 2)
            pos = rng.randrange(len(b)) if b else 0
            if op == 0 and b:
                b[pos] = rng.choice(alphabet)
            elif op == 1:
                b.insert(pos, rng.choice(alphabet))
            elif b:
                del b[pos]
        pairs.append((a, "".join(b)))
    return pairs


def bench(label, fn, pairs, repeat=3):
    best = float("inf")
    checksum = 0
    for _ in range(repeat):
        start = time.perf_counter()
        checksum = 0
        for a, b in pairs:
            checksum += fn(a, b)
        best = min(best, time.perf_counter() - start)
    return best, checksum


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--pairs", type=int, default=2000)
    parser.add_argument("--min-len", type=int, default=40)
    parser.add_argument("--max-len", type=int, default=200)
    args = parser.parse_args()

    pairs = make_pairs(args.pairs, args.min_len, args.max_len)
    print(f"{args.pairs} string pairs, lengths {args.min_len}-{args.max_len}\n")

    workloads = [
        ("indel_distance", lambda mod: mod.indel_distance),
        ("char_ngram_stats(6)", lambda mod: (lambda a, b: len(mod.char_ngram_stats(a, b, 6)))),
    ]
    for name, pick in workloads:
        pure_t, pure_sum = bench("pure", pick(_pykernels), pairs)
        print(f"{name:<22} pure     {pure_t * 1000:8.1f} ms")
        if _speedups is not None:
            comp_t, comp_sum = bench("compiled", pick(_speedups), pairs)
            assert comp_sum == pure_sum, "kernel outputs diverged"
            print(f"{name:<22} compiled {comp_t * 1000:8.1f} ms   ({pure_t / comp_t:4.1f}x)")
        else:
            print(f"{name:<22} compiled   (extension not built)")
        print()


if __name__ == "__main__":
    main()
