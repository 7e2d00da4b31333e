# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled token-scan kernels; same contract as grafter._kernels_py."""


cdef bint _same_entity_type(unicode a, unicode b):
    # compare the characters after the "B-"/"I-" prefix without allocating
    cdef Py_ssize_t la = len(a)
    cdef Py_ssize_t lb = len(b)
    cdef Py_ssize_t k
    cdef Py_UCS4 ca, cb
    if la != lb:
        return False
    for k in range(2, la):
        ca = a[k]
        cb = b[k]
        if ca != cb:
            return False
    return True


def first_violation(tags):
    """Index of the first BIO-invalid tag, or -1 if the sequence is valid."""
    cdef Py_ssize_t i, n = len(tags)
    cdef unicode tag, prev = None
    cdef Py_UCS4 c0
    for i in range(n):
        tag = <unicode> tags[i]
        c0 = tag[0] if len(tag) else u'?'
        if c0 == u'B' or c0 == u'O':
            prev = tag
            continue
        if c0 != u'I':
            return i
        if prev is None or prev[0] == u'O' or not _same_entity_type(prev, tag):
            return i
        prev = tag
    return -1


def mention_spans(tags):
    """Scan tags into (start, end, entity_type) half-open spans."""
    cdef Py_ssize_t i, n = len(tags)
    cdef Py_ssize_t start = -1
    cdef unicode tag, cur = None
    cdef Py_UCS4 c0
    spans = []
    for i in range(n):
        tag = <unicode> tags[i]
        c0 = tag[0] if len(tag) else u'O'
        if c0 == u'B':
            if start >= 0:
                spans.append((start, i, cur))
            start = i
            cur = tag[2:]
        elif c0 == u'I':
            if start >= 0 and _same_entity_type_str(cur, tag):
                continue
            if start >= 0:
                spans.append((start, i, cur))
            start = i
            cur = tag[2:]
        else:
            if start >= 0:
                spans.append((start, i, cur))
                start = -1
                cur = None
    if start >= 0:
        spans.append((start, n, cur))
    return spans


cdef bint _same_entity_type_str(unicode etype, unicode tag):
    # etype against the suffix of tag (after the 2-char prefix)
    cdef Py_ssize_t le = len(etype)
    cdef Py_ssize_t k
    cdef Py_UCS4 ca, cb
    if le != len(tag) - 2:
        return False
    for k in range(le):
        ca = etype[k]
        cb = tag[k + 2]
        if ca != cb:
            return False
    return True


def splits_any_span(spans, lo, hi):
    """True iff [lo, hi) partially overlaps any (start, end, ...) span."""
    cdef Py_ssize_t clo = lo
    cdef Py_ssize_t chi = hi
    cdef Py_ssize_t s, e
    for span in spans:
        s = span[0]
        e = span[1]
        if s < chi and clo < e and not (clo <= s and e <= chi):
            return True
    return False
