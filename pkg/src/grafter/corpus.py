"""Data model and I/O for BIO-tagged corpora.

The on-disk format is CoNLL-style token-per-line text: ``<token>\\t<tag>``
with a blank line after every sentence.  Tags follow the IOB2 scheme:
``B-X`` opens a mention of entity type ``X``, ``I-X`` continues it, ``O``
marks tokens outside any mention.

All types are immutable after construction and safe to share across
threads.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, Sequence

from grafter._kernels import first_violation, mention_spans

logger = logging.getLogger(__name__)


class ConllError(ValueError):
    """Malformed CoNLL input (wrong field count, bad tag syntax)."""


class BioValidationError(ValueError):
    """A tag sequence violates the BIO scheme."""

    def __init__(self, message: str, sentence_id: int, token_index: int):
        super().__init__(message)
        self.sentence_id = sentence_id
        self.token_index = token_index


_TAG_CACHE: dict[tuple[str, str | None], "Tag"] = {}


@dataclass(frozen=True)
class Tag:
    """One IOB2 tag: kind ``B``/``I``/``O`` plus the entity type.

    ``entity_type`` is present exactly when the kind is not ``O``.
    """

    kind: str
    entity_type: str | None = None

    def __post_init__(self) -> None:
        if self.kind not in ("B", "I", "O"):
            raise ValueError(f"bad tag kind {self.kind!r}")
        if self.kind == "O":
            if self.entity_type is not None:
                raise ValueError("O tag cannot carry an entity type")
        elif not self.entity_type:
            raise ValueError(f"{self.kind} tag requires a nonempty entity type")

    @classmethod
    def of(cls, kind: str, entity_type: str | None = None) -> "Tag":
        """Memoized constructor; tag objects are shared freely."""
        key = (kind, entity_type)
        tag = _TAG_CACHE.get(key)
        if tag is None:
            tag = _TAG_CACHE.setdefault(key, cls(kind, entity_type))
        return tag

    @classmethod
    def parse(cls, text: str) -> "Tag":
        """Parse a surface tag.

        Accepts both separator variants ``B-X`` and ``B_X`` (i2b2
        derivatives differ); the canonical surface form always uses ``-``.
        """
        if text == "O":
            return cls.of("O")
        if len(text) >= 3 and text[0] in "BI" and text[1] in "-_":
            return cls.of(text[0], text[2:])
        raise ConllError(f"bad tag {text!r}")

    @cached_property
    def surface(self) -> str:
        """Canonical surface form: ``B-X``, ``I-X`` or ``O``."""
        if self.kind == "O":
            return "O"
        return f"{self.kind}-{self.entity_type}"

    def __str__(self) -> str:
        return self.surface


O_TAG = Tag.of("O")


@dataclass(frozen=True)
class Token:
    """Surface string plus tag; text must be nonempty without whitespace."""

    text: str
    tag: Tag

    def __post_init__(self) -> None:
        if not self.text:
            raise ValueError("token text must be nonempty")
        for ch in self.text:
            if ch.isspace():
                raise ValueError(f"token text {self.text!r} contains whitespace")


@dataclass(frozen=True)
class Sentence:
    """An ordered token sequence; the unit of augmentation."""

    id: int
    tokens: tuple[Token, ...]

    def __post_init__(self) -> None:
        if self.id < 0:
            raise ValueError("sentence id must be >= 0")
        if not self.tokens:
            raise ValueError(f"sentence {self.id} has no tokens")

    def __len__(self) -> int:
        return len(self.tokens)

    @cached_property
    def texts(self) -> tuple[str, ...]:
        return tuple(tok.text for tok in self.tokens)

    @cached_property
    def surface_tags(self) -> tuple[str, ...]:
        return tuple(tok.tag.surface for tok in self.tokens)


@dataclass(frozen=True)
class Mention:
    """A contiguous tagged span: ``tokens[start:end]`` of one entity type."""

    sentence_id: int
    start: int
    end: int
    entity_type: str

    def __post_init__(self) -> None:
        if not 0 <= self.start < self.end:
            raise ValueError(f"bad mention range [{self.start}, {self.end})")

    @property
    def width(self) -> int:
        return self.end - self.start


@dataclass(frozen=True)
class Corpus:
    """Ordered sentences with contiguous ids 0..n-1."""

    sentences: tuple[Sentence, ...]
    entity_types: frozenset[str] = field(default=frozenset())

    def __post_init__(self) -> None:
        for i, sentence in enumerate(self.sentences):
            if sentence.id != i:
                raise ValueError(
                    f"sentence ids must be contiguous: index {i} has id {sentence.id}"
                )

    @classmethod
    def from_sentences(cls, sentences: Iterable[Sentence]) -> "Corpus":
        """Build a corpus, deriving the set of observed entity types."""
        sents = tuple(sentences)
        types = frozenset(
            tok.tag.entity_type
            for s in sents
            for tok in s.tokens
            if tok.tag.entity_type is not None
        )
        return cls(sents, types)

    def first(self, n: int) -> "Corpus":
        """The first ``n`` sentences (ids are a prefix, so they stay valid)."""
        if n < 1:
            raise ValueError("slice must be >= 1")
        return Corpus.from_sentences(self.sentences[:n])

    def __len__(self) -> int:
        return len(self.sentences)

    def __iter__(self) -> Iterator[Sentence]:
        return iter(self.sentences)


@dataclass
class ReadReport:
    """Side channel for parse_conll bookkeeping."""

    repairs: list[tuple[int, int]] = field(default_factory=list)
    extra_column_lines: int = 0
    doc_markers: int = 0


def bio_violation_index(tags: Sequence[str]) -> int:
    """First BIO-invalid position in canonical surface tags, or -1."""
    return first_violation(tags)


def validate_sentence(sentence: Sentence) -> None:
    """Raise BioValidationError if the sentence violates the BIO scheme."""
    idx = first_violation(sentence.surface_tags)
    if idx >= 0:
        raise BioValidationError(
            f"I without preceding B, sentence {sentence.id} token {idx}",
            sentence.id,
            idx,
        )


def is_bio_valid(sentence: Sentence) -> bool:
    return first_violation(sentence.surface_tags) < 0


def bio_violation_indices(tags: Sequence[Tag]) -> list[int]:
    """All positions whose I-tag lacks a matching B/I predecessor."""
    out = []
    prev: Tag = O_TAG
    for i, tag in enumerate(tags):
        if tag.kind == "I" and (
            prev.kind == "O" or prev.entity_type != tag.entity_type
        ):
            out.append(i)
        prev = tag
    return out


def extract_mentions(sentence: Sentence) -> list[Mention]:
    """Mentions of a BIO-valid sentence, disjoint and sorted by start."""
    return [
        Mention(sentence.id, start, end, etype)
        for start, end, etype in mention_spans(sentence.surface_tags)
    ]


def build_mention_pool(corpus: Corpus) -> dict[str, list[tuple[str, ...]]]:
    """Token texts of every mention, keyed by entity type.

    Duplicates are retained in corpus order, so uniform sampling from a
    pool is naturally frequency-weighted.
    """
    pool: dict[str, list[tuple[str, ...]]] = {}
    for sentence in corpus.sentences:
        for m in extract_mentions(sentence):
            pool.setdefault(m.entity_type, []).append(
                sentence.texts[m.start : m.end]
            )
    return pool


def parse_conll(
    text: str, *, strict: bool = True, report: ReadReport | None = None
) -> Corpus:
    """Parse CoNLL-style token-per-line text into a Corpus.

    Lines are ``<token>\\t<tag>``; a blank line ends a sentence.  Inputs
    with extra columns keep the first and last fields; space-separated
    variants are tolerated; ``-DOCSTART-`` document markers are dropped.

    In strict mode (default) a BIO violation raises BioValidationError.
    With ``strict=False`` a dangling ``I-X`` is repaired to ``B-X`` (the
    IOB1 to IOB2 fix) and recorded in ``report.repairs``.
    """
    if report is None:
        report = ReadReport()
    sentences: list[Sentence] = []
    pending: list[tuple[int, str, str]] = []  # (line_no, text, raw tag)

    def flush() -> None:
        if not pending:
            return
        sid = len(sentences)
        tokens: list[Token] = []
        prev = O_TAG
        for idx, (line_no, tok_text, raw_tag) in enumerate(pending):
            try:
                tag = Tag.parse(raw_tag)
            except ConllError as exc:
                raise ConllError(f"line {line_no}: {exc}") from None
            if tag.kind == "I" and (
                prev.kind == "O" or prev.entity_type != tag.entity_type
            ):
                if strict:
                    raise BioValidationError(
                        f"I without preceding B, sentence {sid} token {idx}",
                        sid,
                        idx,
                    )
                tag = Tag.of("B", tag.entity_type)
                report.repairs.append((sid, idx))
            try:
                tokens.append(Token(tok_text, tag))
            except ValueError as exc:
                raise ConllError(f"line {line_no}: {exc}") from None
            prev = tag
        sentences.append(Sentence(sid, tuple(tokens)))
        pending.clear()

    for line_no, line in enumerate(text.splitlines(), start=1):
        line = line.rstrip("\r")
        if not line.strip():
            flush()
            continue
        fields = line.split("\t")
        if len(fields) == 1:
            fields = line.split()
        if len(fields) < 2:
            raise ConllError(
                f"line {line_no}: expected <token>\\t<tag>, got {line!r}"
            )
        if len(fields) > 2:
            report.extra_column_lines += 1
        if fields[0] == "-DOCSTART-":
            report.doc_markers += 1
            continue
        pending.append((line_no, fields[0], fields[-1]))
    flush()

    if report.extra_column_lines:
        logger.warning(
            "dropped extra columns on %d line(s); keeping first and last",
            report.extra_column_lines,
        )
    if report.repairs:
        logger.info("repaired %d dangling I tag(s) to B", len(report.repairs))
    return Corpus.from_sentences(sentences)


def read_conll(
    path: str | Path, *, strict: bool = True, report: ReadReport | None = None
) -> Corpus:
    return parse_conll(
        Path(path).read_text(encoding="utf-8"), strict=strict, report=report
    )


def write_conll(corpus: Corpus) -> str:
    """Serialize to the canonical form: LF endings, ``-`` tag separator,
    one blank line after every sentence.  Byte-deterministic."""
    parts: list[str] = []
    for sentence in corpus.sentences:
        for tok in sentence.tokens:
            parts.append(f"{tok.text}\t{tok.tag.surface}\n")
        parts.append("\n")
    return "".join(parts)


def write_conll_file(corpus: Corpus, path: str | Path) -> None:
    Path(path).write_text(write_conll(corpus), encoding="utf-8")
