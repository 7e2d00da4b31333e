"""Pure-Python token-scan kernels.

These are the hot primitives behind BIO validation, mention extraction and
mention-boundary checks.  ``grafter._speedups`` is the compiled twin with
the exact same contract; ``grafter._kernels`` picks one at import time.

All functions take canonical surface tags ("B-X", "I-X", "O") as produced
by ``Tag.surface``; behaviour on other strings is unspecified beyond being
reported as a violation.
"""


def first_violation(tags):
    """Index of the first BIO-invalid tag, or -1 if the sequence is valid.

    A tag ``I-X`` is valid only when the previous tag is ``B-X`` or ``I-X``.
    """
    prev = None
    for i, tag in enumerate(tags):
        c0 = tag[0] if tag else "?"
        if c0 == "B" or c0 == "O":
            prev = tag
            continue
        if c0 != "I":
            return i
        if prev is None or prev[0] == "O" or prev[2:] != tag[2:]:
            return i
        prev = tag
    return -1


def mention_spans(tags):
    """Scan tags into ``(start, end, entity_type)`` half-open spans.

    Assumes a valid sequence; on invalid input a dangling ``I-X`` opens a
    new span (IOB1-style recovery) so the scan never fails.
    """
    spans = []
    start = -1
    cur = None
    for i, tag in enumerate(tags):
        c0 = tag[0] if tag else "O"
        if c0 == "B":
            if start >= 0:
                spans.append((start, i, cur))
            start = i
            cur = tag[2:]
        elif c0 == "I":
            etype = tag[2:]
            if start >= 0 and etype == cur:
                continue
            if start >= 0:
                spans.append((start, i, cur))
            start = i
            cur = etype
        else:
            if start >= 0:
                spans.append((start, i, cur))
                start = -1
                cur = None
    if start >= 0:
        spans.append((start, len(tags), cur))
    return spans


def splits_any_span(spans, lo, hi):
    """True iff [lo, hi) partially overlaps any (start, end, ...) span.

    Partial overlap means the two ranges intersect but the span is not
    fully contained in [lo, hi); this is the negation of the
    mention-complete condition.
    """
    for span in spans:
        s = span[0]
        e = span[1]
        if s < hi and lo < e and not (lo <= s and e <= hi):
            return True
    return False
