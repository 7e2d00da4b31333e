"""Benchmark the compiled token-scan kernels against the pure-Python
fallback.

The two implementations are imported directly (bypassing the import-time
selection in grafter._kernels) so one process can time both.  An
end-to-end augmentation timing runs on whichever backend the package
selected; set GRAFTER_PURE=1 before launching to see the fallback there.

Usage:
    python benchmarks/bench_kernels.py [--sequences 20000] [--length 25]
"""

from __future__ import annotations

import argparse
import random
import time

from grafter import _kernels, _kernels_py

try:
    from grafter import _speedups
except ImportError:
    _speedups = None

ENTITY_TYPES = ["PROBLEM", "TEST", "TREATMENT"]


def make_tag_sequences(rng: random.Random, count: int, length: int) -> list[list[str]]:
    sequences = []
    for _ in range(count):
        tags: list[str] = []
        prev = "O"
        for _ in range(length):
            r = rng.random()
            if r < 0.55:
                tags.append("O")
            elif r < 0.8 or prev == "O":
                tags.append(f"B-{rng.choice(ENTITY_TYPES)}")
            else:
                tags.append("I" + prev[1:])
            prev = tags[-1]
        sequences.append(tags)
    return sequences


def time_call(fn, repeats: int = 3) -> float:
    best = float("inf")
    for _ in range(repeats):
        start = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - start)
    return best


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sequences", type=int, default=20000)
    parser.add_argument("--length", type=int, default=25)
    parser.add_argument("--repeats", type=int, default=3)
    args = parser.parse_args()

    rng = random.Random(99)
    sequences = make_tag_sequences(rng, args.sequences, args.length)
    spans = [_kernels_py.mention_spans(tags) for tags in sequences]

    benches = {
        "first_violation": lambda impl: [impl.first_violation(t) for t in sequences],
        "mention_spans": lambda impl: [impl.mention_spans(t) for t in sequences],
        "splits_any_span": lambda impl: [
            impl.splits_any_span(sp, 2, 9) for sp in spans
        ],
    }

    print(f"{args.sequences} sequences x {args.length} tags, best of {args.repeats}")
    print(f"{'kernel':<18} {'python':>10} {'cython':>10} {'speedup':>8}")
    for name, runner in benches.items():
        py = time_call(lambda: runner(_kernels_py), args.repeats)
        if _speedups is None:
            print(f"{name:<18} {py * 1e3:>8.1f}ms {'n/a':>10} {'n/a':>8}")
            continue
        cy = time_call(lambda: runner(_speedups), args.repeats)
        print(f"{name:<18} {py * 1e3:>8.1f}ms {cy * 1e3:>8.1f}ms {py / cy:>7.1f}x")

    # end-to-end: synonym-replace a fuzzed corpus on the selected backend
    from grafter.augment import AugmentationPlan, Resources, Thesaurus, augment_corpus
    from grafter.corpus import Corpus, Sentence, Tag, Token

    words = [f"w{i}" for i in range(30)]
    sentences = []
    for sid in range(2000):
        tags = make_tag_sequences(rng, 1, 15)[0]
        tokens = tuple(Token(rng.choice(words), Tag.parse(t)) for t in tags)
        sentences.append(Sentence(sid, tokens))
    corpus = Corpus.from_sentences(sentences)
    thesaurus = Thesaurus({w: [[w + "x"]] for w in words})
    plan = AugmentationPlan(strategy="sr", num_samples=5, seed=3)
    start = time.perf_counter()
    augmented, stats = augment_corpus(corpus, Resources(thesaurus=thesaurus), plan)
    elapsed = time.perf_counter() - start
    print(
        f"\nend-to-end sr x5 on 2000 sentences [{_kernels.BACKEND} backend]: "
        f"{elapsed:.2f}s, {stats.emitted} outputs"
    )


if __name__ == "__main__":
    main()
