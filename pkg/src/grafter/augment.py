"""The four augmentation strategies.

Every strategy is a pure function of (sentence, resources, plan, rng) that
returns BIO-valid augmented sentences.  Randomness always flows through an
explicit ``random.Random`` so a plan seed fixes the entire output; the
corpus driver derives one independent stream per sentence, which makes
results identical regardless of worker count or execution order.

Strategies:

* sr -- per-token Bernoulli synonym replacement from a thesaurus, with
  B/I tag projection over multiword synonyms
* mr -- per-mention Bernoulli replacement with a same-type mention drawn
  from the training pool
* lm -- masked-LM replacement of O-tagged tokens via a fill-mask provider
* cr -- constituency replacement: grafting same-label donor subtrees over
  mention-complete target nodes
"""

from __future__ import annotations

import logging
import random
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, fields
from pathlib import Path
from typing import Callable, Mapping, Sequence

from grafter.corpus import (
    Corpus,
    Sentence,
    Tag,
    Token,
    extract_mentions,
    validate_sentence,
)
from grafter.fillmask import FillMaskProvider, MaskRequest, ProviderError
from grafter.treebank import (
    CR_PHRASE_LABELS,
    AlignmentError,
    ParseTree,
    PhraseIndex,
    TreeNode,
    align,
    base_label,
    eligible_nodes,
)

logger = logging.getLogger(__name__)

STRATEGIES = ("sr", "mr", "lm", "cr")


class ConfigError(ValueError):
    """A plan is missing the resources its strategy requires."""


@dataclass(frozen=True)
class AugmentationPlan:
    """Strategy plus hyperparameters; together with the seed this fully
    determines the augmented corpus.

    ``num_samples`` is the paper grid's k, ``replace_ratio`` the Bernoulli
    probability for sr/mr, ``num_replacements`` the n of masked tokens
    (lm) or grafted non-terminals (cr).
    """

    strategy: str
    num_samples: int = 1
    replace_ratio: float = 0.3
    num_replacements: int = 1
    cr_labels: frozenset[str] = CR_PHRASE_LABELS
    require_mention_child: bool = True
    mentions_only: bool = False
    top_n: int = 10
    seed: int = 0
    max_retries: int = 10

    def __post_init__(self) -> None:
        if self.strategy not in STRATEGIES:
            raise ValueError(f"unknown strategy {self.strategy!r}")
        if self.num_samples < 1:
            raise ValueError("num_samples must be >= 1")
        if not 0.0 <= self.replace_ratio <= 1.0:
            raise ValueError("replace_ratio must be in [0, 1]")
        if self.num_replacements < 1:
            raise ValueError("num_replacements must be >= 1")
        if self.top_n < 1:
            raise ValueError("top_n must be >= 1")
        if self.max_retries < 0:
            raise ValueError("max_retries must be >= 0")
        if not self.cr_labels and self.strategy == "cr":
            raise ValueError("cr requires a nonempty label set")


class Thesaurus:
    """Case-insensitive synonym lexicon: surface form -> synonym token
    sequences (possibly multiword).  Entries equal to their own key are
    dropped at load time."""

    def __init__(self, entries: Mapping[str, Sequence[Sequence[str]]]):
        folded: dict[str, tuple[tuple[str, ...], ...]] = {}
        for key, synonyms in entries.items():
            k = key.casefold()
            kept = []
            for synonym in synonyms:
                seq = tuple(synonym)
                if not seq or any(not t or any(c.isspace() for c in t) for t in seq):
                    raise ValueError(f"bad synonym {synonym!r} for key {key!r}")
                if len(seq) == 1 and seq[0].casefold() == k:
                    continue
                kept.append(seq)
            if kept:
                folded.setdefault(k, ())
                folded[k] = folded[k] + tuple(kept)
        self._entries = folded

    @classmethod
    def load(cls, path: str | Path) -> "Thesaurus":
        """Read a TSV lexicon: ``key<TAB>syn1a syn1b<TAB>syn2a ...``."""
        entries: dict[str, list[list[str]]] = {}
        for line_no, line in enumerate(
            Path(path).read_text(encoding="utf-8").splitlines(), start=1
        ):
            if not line.strip() or line.startswith("#"):
                continue
            fields_ = line.rstrip("\r").split("\t")
            if len(fields_) < 2:
                raise ValueError(
                    f"{path}:{line_no}: expected key<TAB>synonym..., got {line!r}"
                )
            key = fields_[0]
            for raw in fields_[1:]:
                tokens = raw.split()
                if not tokens:
                    raise ValueError(f"{path}:{line_no}: empty synonym field")
                entries.setdefault(key, []).append(tokens)
        return cls(entries)

    def lookup(self, text: str) -> tuple[tuple[str, ...], ...]:
        return self._entries.get(text.casefold(), ())

    def __contains__(self, text: str) -> bool:
        return text.casefold() in self._entries

    def __len__(self) -> int:
        return len(self._entries)


@dataclass(frozen=True)
class Edit:
    """One replacement in source-sentence coordinates."""

    start: int
    end: int
    replacement: tuple[str, ...]


@dataclass(frozen=True)
class Provenance:
    source_id: int
    strategy: str
    sample_index: int
    edits: tuple[Edit, ...]


@dataclass(frozen=True)
class AugmentedSentence:
    tokens: tuple[Token, ...]
    provenance: Provenance

    def to_sentence(self, new_id: int) -> Sentence:
        return Sentence(new_id, self.tokens)


@dataclass
class AugmentStats:
    """Additive counters surfaced in the run manifest."""

    sentences_in: int = 0
    emitted: int = 0
    dedup_dropped: int = 0
    retries_used: int = 0
    provider_failures: int = 0
    skipped_no_eligible: int = 0
    skipped_unaligned: int = 0
    targets_without_donor: int = 0
    edits_applied: int = 0

    def merge(self, other: "AugmentStats") -> None:
        for f in fields(self):
            setattr(self, f.name, getattr(self, f.name) + getattr(other, f.name))


@dataclass
class Resources:
    """Per-strategy inputs for the corpus driver."""

    thesaurus: Thesaurus | None = None
    mention_pool: Mapping[str, Sequence[tuple[str, ...]]] | None = None
    provider: FillMaskProvider | None = None
    trees: Sequence[ParseTree | None] | None = None
    phrase_index: PhraseIndex | None = None


def sentence_rng(seed: int, sentence_id: int) -> random.Random:
    """Independent per-sentence stream, stable across platforms and runs.

    String seeding hashes all bits, so neighbouring sentence ids do not
    produce correlated streams the way small integer seeds can.
    """
    return random.Random(f"{seed}:{sentence_id}")


def project_tags(tag: Tag, length: int) -> tuple[Tag, ...]:
    """Spread one token's tag over a multi-token replacement.

    B-X becomes B-X I-X... so the mention still opens exactly once; I-X
    and O replicate unchanged.
    """
    if length < 1:
        raise ValueError("length must be >= 1")
    if tag.kind == "B":
        return (tag,) + (Tag.of("I", tag.entity_type),) * (length - 1)
    return (tag,) * length


def _restore_case(original: str, seq: tuple[str, ...]) -> tuple[str, ...]:
    # keep sentence-initial capitalization when the thesaurus entry is lowercase
    if original[:1].isupper() and seq[0][:1].islower():
        return (seq[0][0].upper() + seq[0][1:],) + seq[1:]
    return seq


def _weighted_choice(rng: random.Random, items: Sequence[tuple[str, float]]) -> str:
    total = sum(score for _, score in items)
    if total <= 0:
        return items[rng.randrange(len(items))][0]
    x = rng.random() * total
    acc = 0.0
    for token, score in items:
        acc += score
        if x < acc:
            return token
    return items[-1][0]


def _collect_samples(
    sentence: Sentence,
    plan: AugmentationPlan,
    make_candidate: Callable[[], tuple[list[Token], list[Edit]]],
    stats: AugmentStats,
) -> list[AugmentedSentence]:
    """Shared sample loop: dedup against the source and sibling samples,
    with a retry budget before a sample slot is given up."""
    seen = {tuple(sentence.tokens)}
    kept: list[AugmentedSentence] = []
    for sample_index in range(plan.num_samples):
        produced = False
        for attempt in range(plan.max_retries + 1):
            if attempt:
                stats.retries_used += 1
            try:
                tokens, edits = make_candidate()
            except ProviderError as exc:
                stats.provider_failures += 1
                logger.debug(
                    "sentence %d sample %d: provider failure: %s",
                    sentence.id,
                    sample_index,
                    exc,
                )
                produced = True  # not a dedup miss; the slot is spent
                break
            key = tuple(tokens)
            if key in seen:
                continue
            seen.add(key)
            augmented = AugmentedSentence(
                tuple(tokens),
                Provenance(sentence.id, plan.strategy, sample_index, tuple(edits)),
            )
            validate_sentence(augmented.to_sentence(sentence.id))
            kept.append(augmented)
            stats.emitted += 1
            stats.edits_applied += len(edits)
            produced = True
            break
        if not produced:
            stats.dedup_dropped += 1
    return kept


def augment_sr(
    sentence: Sentence,
    thesaurus: Thesaurus,
    plan: AugmentationPlan,
    rng: random.Random,
    stats: AugmentStats | None = None,
) -> list[AugmentedSentence]:
    """Synonym replacement: each token flips Bernoulli(replace_ratio); a
    selected token with a thesaurus entry is swapped for one uniformly
    chosen synonym sequence, tags projected across its length."""
    assert plan.strategy == "sr"
    stats = stats if stats is not None else AugmentStats()

    def make_candidate() -> tuple[list[Token], list[Edit]]:
        out: list[Token] = []
        edits: list[Edit] = []
        for i, tok in enumerate(sentence.tokens):
            selected = rng.random() < plan.replace_ratio
            if selected and (not plan.mentions_only or tok.tag.kind != "O"):
                synonyms = thesaurus.lookup(tok.text)
                if synonyms:
                    seq = _restore_case(tok.text, synonyms[rng.randrange(len(synonyms))])
                    tags = project_tags(tok.tag, len(seq))
                    out.extend(Token(t, g) for t, g in zip(seq, tags))
                    edits.append(Edit(i, i + 1, seq))
                    continue
            out.append(tok)
        return out, edits

    return _collect_samples(sentence, plan, make_candidate, stats)


def augment_mr(
    sentence: Sentence,
    mention_pool: Mapping[str, Sequence[tuple[str, ...]]],
    plan: AugmentationPlan,
    rng: random.Random,
    stats: AugmentStats | None = None,
) -> list[AugmentedSentence]:
    """Mention replacement: each mention flips Bernoulli(replace_ratio)
    and, when selected, is replaced by a same-type pool mention that is
    not text-identical to it.  Entity types and mention count are
    preserved."""
    assert plan.strategy == "mr"
    stats = stats if stats is not None else AugmentStats()
    mentions = extract_mentions(sentence)
    candidates_per_mention: list[list[tuple[str, ...]]] = []
    for m in mentions:
        target = sentence.texts[m.start : m.end]
        candidates = [
            tuple(seq)
            for seq in mention_pool.get(m.entity_type, ())
            if tuple(seq) != target
        ]
        if not candidates:
            stats.targets_without_donor += 1
            logger.debug(
                "sentence %d: no replacement pool for %r/%s",
                sentence.id,
                " ".join(target),
                m.entity_type,
            )
        candidates_per_mention.append(candidates)

    def make_candidate() -> tuple[list[Token], list[Edit]]:
        chosen: list[tuple[int, tuple[str, ...]]] = []  # (mention idx, texts)
        for idx, candidates in enumerate(candidates_per_mention):
            if rng.random() >= plan.replace_ratio:
                continue
            if not candidates:
                continue
            chosen.append((idx, candidates[rng.randrange(len(candidates))]))
        tokens = list(sentence.tokens)
        edits: list[Edit] = []
        for idx, seq in reversed(chosen):
            m = mentions[idx]
            tags = project_tags(Tag.of("B", m.entity_type), len(seq))
            tokens[m.start : m.end] = [Token(t, g) for t, g in zip(seq, tags)]
            edits.append(Edit(m.start, m.end, seq))
        edits.reverse()
        return tokens, edits

    return _collect_samples(sentence, plan, make_candidate, stats)


def augment_lm(
    sentence: Sentence,
    provider: FillMaskProvider,
    plan: AugmentationPlan,
    rng: random.Random,
    stats: AugmentStats | None = None,
) -> list[AugmentedSentence]:
    """Masked-LM replacement of O-tagged tokens only.

    Per sample, min(n, #O) distinct O positions are drawn without
    replacement and sent to the provider in one request; each replacement
    is sampled from the returned candidate scores, never reusing the
    original token.  Tags are untouched.
    """
    assert plan.strategy == "lm"
    stats = stats if stats is not None else AugmentStats()
    o_positions = [i for i, tok in enumerate(sentence.tokens) if tok.tag.kind == "O"]
    if not o_positions:
        logger.debug("sentence %d: no O tokens to mask", sentence.id)
        stats.skipped_no_eligible += 1
        return []

    def make_candidate() -> tuple[list[Token], list[Edit]]:
        count = min(plan.num_replacements, len(o_positions))
        positions = sorted(rng.sample(o_positions, count))
        request = MaskRequest(sentence.texts, tuple(positions), plan.top_n)
        response = provider.fill(request)
        tokens = list(sentence.tokens)
        edits: list[Edit] = []
        for pos, candidates in zip(positions, response.candidates):
            viable = [
                (c.token, c.score) for c in candidates if c.token != tokens[pos].text
            ]
            if not viable:
                continue
            text = _weighted_choice(rng, viable)
            tokens[pos] = Token(text, tokens[pos].tag)
            edits.append(Edit(pos, pos + 1, (text,)))
        return tokens, edits

    return _collect_samples(sentence, plan, make_candidate, stats)


def _span_contains(outer: TreeNode, inner: TreeNode) -> bool:
    return outer.start <= inner.start and inner.end <= outer.end


def augment_cr(
    sentence: Sentence,
    tree: ParseTree,
    phrase_index: PhraseIndex,
    plan: AugmentationPlan,
    rng: random.Random,
    stats: AugmentStats | None = None,
) -> list[AugmentedSentence]:
    """Constituency replacement: graft same-label donor subtrees over up
    to n span-disjoint eligible target nodes.

    The tree must already be aligned with the sentence (the corpus driver
    checks and skips misaligned pairs).  When sampled targets nest, the
    outermost wins and inner picks are redrawn.  Donors from the same
    sentence or with identical token text are excluded.
    """
    assert plan.strategy == "cr"
    stats = stats if stats is not None else AugmentStats()
    eligible = eligible_nodes(
        tree, sentence, plan.cr_labels, plan.require_mention_child
    )
    if not eligible:
        logger.debug("sentence %d: no CR-eligible nodes", sentence.id)
        stats.skipped_no_eligible += 1
        return []
    donors_per_node: list[list] = []
    for node in eligible:
        span_texts = sentence.texts[node.start : node.end]
        donors = [
            d
            for d in phrase_index.donors(node.label)
            if d.sentence_id != sentence.id and d.texts != span_texts
        ]
        if not donors:
            stats.targets_without_donor += 1
            logger.debug(
                "sentence %d: no donors for %s[%d:%d]",
                sentence.id,
                base_label(node.label),
                node.start,
                node.end,
            )
        donors_per_node.append(donors)

    def make_candidate() -> tuple[list[Token], list[Edit]]:
        want = min(plan.num_replacements, len(eligible))
        pool = list(range(len(eligible)))
        selected: list[int] = []
        while pool and len(selected) < want:
            i = pool.pop(rng.randrange(len(pool)))
            node = eligible[i]
            if any(_span_contains(eligible[j], node) for j in selected):
                continue
            selected = [j for j in selected if not _span_contains(node, eligible[j])]
            selected.append(i)
        selected.sort(key=lambda j: eligible[j].start)
        tokens = list(sentence.tokens)
        edits: list[Edit] = []
        for i in reversed(selected):
            node = eligible[i]
            donors = donors_per_node[i]
            if not donors:
                continue
            donor = donors[rng.randrange(len(donors))]
            tokens[node.start : node.end] = [
                Token(t, g) for t, g in zip(donor.texts, donor.tags)
            ]
            edits.append(Edit(node.start, node.end, donor.texts))
        edits.reverse()
        return tokens, edits

    return _collect_samples(sentence, plan, make_candidate, stats)


def _require(resource: object, name: str, strategy: str) -> None:
    if resource is None:
        raise ConfigError(f"strategy {strategy!r} requires {name}")


def check_resources(plan: AugmentationPlan, resources: Resources) -> None:
    """Fail before any work when a strategy's inputs are missing."""
    if plan.strategy == "sr":
        _require(resources.thesaurus, "a thesaurus", "sr")
    elif plan.strategy == "mr":
        _require(resources.mention_pool, "a mention pool", "mr")
    elif plan.strategy == "lm":
        _require(resources.provider, "a fill-mask provider", "lm")
    elif plan.strategy == "cr":
        _require(resources.trees, "parse trees", "cr")
        _require(resources.phrase_index, "a phrase index", "cr")


def augment_corpus(
    corpus: Corpus,
    resources: Resources,
    plan: AugmentationPlan,
    *,
    jobs: int = 1,
) -> tuple[Corpus, AugmentStats]:
    """Apply the plan to every sentence and append the results.

    Output order is original sentences followed by augmentations sorted by
    (source id, sample index).  Each sentence gets its own RNG stream
    derived from (seed, sentence id), so the output is byte-identical for
    any ``jobs`` value.
    """
    check_resources(plan, resources)

    def work(sentence: Sentence) -> tuple[list[AugmentedSentence], AugmentStats]:
        stats = AugmentStats(sentences_in=1)
        rng = sentence_rng(plan.seed, sentence.id)
        if plan.strategy == "sr":
            augs = augment_sr(sentence, resources.thesaurus, plan, rng, stats)
        elif plan.strategy == "mr":
            augs = augment_mr(sentence, resources.mention_pool, plan, rng, stats)
        elif plan.strategy == "lm":
            augs = augment_lm(sentence, resources.provider, plan, rng, stats)
        else:
            trees = resources.trees
            tree = trees[sentence.id] if sentence.id < len(trees) else None
            if tree is None:
                stats.skipped_unaligned += 1
                return [], stats
            try:
                align(tree, sentence)
            except AlignmentError as exc:
                logger.debug("sentence %d skipped: %s", sentence.id, exc)
                stats.skipped_unaligned += 1
                return [], stats
            augs = augment_cr(
                sentence, tree, resources.phrase_index, plan, rng, stats
            )
        return augs, stats

    if jobs <= 1:
        results = [work(s) for s in corpus.sentences]
    else:
        with ThreadPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(work, corpus.sentences))

    total = AugmentStats()
    out_sentences = list(corpus.sentences)
    next_id = len(out_sentences)
    for augmented, stats in results:
        total.merge(stats)
        for aug in augmented:
            out_sentences.append(aug.to_sentence(next_id))
            next_id += 1
    return Corpus.from_sentences(out_sentences), total
