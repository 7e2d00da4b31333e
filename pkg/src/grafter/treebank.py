"""Penn-bracketed constituency trees: parsing, token alignment, spans and
the same-label subtree index that drives constituency replacement.

Trees are consumed, never produced; the expected input is one bracketed
tree per line as emitted by an off-the-shelf constituency parser.  A blank
line stands for a missing parse and excludes that sentence from CR.
"""

from __future__ import annotations

import logging
from collections import Counter
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable, Iterator, Mapping, Sequence

from grafter._kernels import splits_any_span
from grafter.corpus import Corpus, Mention, Sentence, Tag, Token, extract_mentions

logger = logging.getLogger(__name__)

PTB_ESCAPES = {
    "-LRB-": "(",
    "-RRB-": ")",
    "-LSB-": "[",
    "-RSB-": "]",
    "-LCB-": "{",
    "-RCB-": "}",
}
PTB_UNESCAPES = {v: k for k, v in PTB_ESCAPES.items()}

# the five phrase categories used for constituency replacement; FRAG is
# excluded by default for its low count
CR_PHRASE_LABELS = frozenset({"NP", "VP", "ADJP", "ADVP", "PP"})


class PtbError(ValueError):
    """Malformed bracketed tree text."""


class AlignmentError(ValueError):
    """Tree leaves do not match sentence tokens."""

    def __init__(self, message: str, index: int):
        super().__init__(message)
        self.index = index


def base_label(label: str) -> str:
    """Strip function tags and indices: NP-SBJ, NP-1, NP=2 -> NP.

    Labels that start with ``-`` (-LRB-, -NONE-) are kept whole.
    """
    if label.startswith("-"):
        return label
    cut = len(label)
    for sep in "-=":
        i = label.find(sep)
        if 0 < i < cut:
            cut = i
    return label[:cut]


@dataclass(frozen=True)
class TreeNode:
    """A tree node covering the half-open leaf range [start, end).

    Leaf nodes carry the surface token in ``text`` and their label is the
    part-of-speech; internal nodes carry a phrasal label and children.
    """

    label: str
    start: int
    end: int
    children: tuple["TreeNode", ...] = ()
    text: str | None = None

    @property
    def is_leaf(self) -> bool:
        return self.text is not None

    @property
    def width(self) -> int:
        return self.end - self.start

    def iter_nodes(self) -> Iterator["TreeNode"]:
        """Preorder traversal including self."""
        stack = [self]
        while stack:
            node = stack.pop()
            yield node
            stack.extend(reversed(node.children))


@dataclass(frozen=True)
class ParseTree:
    """A constituency tree aligned leaf-for-token with one sentence."""

    root: TreeNode
    sentence_id: int = 0

    @cached_property
    def leaf_texts(self) -> tuple[str, ...]:
        return tuple(n.text for n in self.root.iter_nodes() if n.text is not None)

    @property
    def n_leaves(self) -> int:
        return self.root.end

    def iter_nodes(self) -> Iterator[TreeNode]:
        return self.root.iter_nodes()


@dataclass(frozen=True)
class DonorRef:
    """A subtree occurrence usable as graft material: the covered token
    texts and tags, plus where it came from."""

    sentence_id: int
    label: str  # base label
    node: TreeNode
    texts: tuple[str, ...]
    tags: tuple[Tag, ...]


@dataclass(frozen=True)
class PhraseIndex:
    """Donor subtrees pooled across a corpus, keyed by base label."""

    entries: Mapping[str, tuple[DonorRef, ...]]

    def donors(self, label: str) -> tuple[DonorRef, ...]:
        return self.entries.get(base_label(label), ())

    def __len__(self) -> int:
        return sum(len(v) for v in self.entries.values())


def _tokenize_ptb(text: str) -> Iterator[tuple[str, int]]:
    """Yield ("(", col), (")", col) and (atom, col); columns are 1-based."""
    i = 0
    n = len(text)
    while i < n:
        ch = text[i]
        if ch.isspace():
            i += 1
            continue
        if ch in "()":
            yield ch, i + 1
            i += 1
            continue
        j = i
        while j < n and not text[j].isspace() and text[j] not in "()":
            j += 1
        yield text[i:j], i + 1
        i = j


def parse_ptb(text: str, sentence_id: int = 0) -> ParseTree:
    """Parse one bracketed tree.

    PTB bracket escapes (-LRB- etc.) are normalized to literal brackets in
    leaf text.  An unlabeled unary wrapper ``( (S ...) )`` is unwrapped.
    Raises PtbError with a 1-based column on malformed input.
    """
    tokens = list(_tokenize_ptb(text))
    if not tokens:
        raise PtbError("empty input, expected one bracketed tree")
    pos = 0

    def parse_node(next_leaf: int) -> tuple[object, int]:
        # returns (TreeNode | raw atom str, next leaf index); every atom
        # in child position consumes one leaf slot
        nonlocal pos
        tok, col = tokens[pos]
        if tok == ")":
            raise PtbError(f"unexpected ')' at column {col}")
        if tok != "(":
            pos += 1
            return tok, next_leaf + 1
        open_col = col
        pos += 1
        if pos >= len(tokens):
            raise PtbError(f"unbalanced '(' at column {open_col}")
        label = ""
        if tokens[pos][0] not in ("(", ")"):
            label = tokens[pos][0]
            pos += 1
        raw_children: list[tuple[object, int]] = []  # (child, leaf start)
        while pos < len(tokens) and tokens[pos][0] != ")":
            start_leaf = next_leaf
            child, next_leaf = parse_node(next_leaf)
            raw_children.append((child, start_leaf))
        if pos >= len(tokens):
            raise PtbError(f"unbalanced '(' at column {open_col}")
        pos += 1  # consume ")"
        if not raw_children:
            raise PtbError(f"node {label or '()'!r} at column {open_col} has no children")
        if len(raw_children) == 1 and isinstance(raw_children[0][0], str):
            # pre-leaf: (POS token)
            leaf_start = raw_children[0][1]
            word = PTB_ESCAPES.get(raw_children[0][0], raw_children[0][0])
            return TreeNode(label, leaf_start, leaf_start + 1, (), word), next_leaf
        children: list[TreeNode] = []
        for child, start_leaf in raw_children:
            if isinstance(child, str):
                word = PTB_ESCAPES.get(child, child)
                children.append(TreeNode("", start_leaf, start_leaf + 1, (), word))
            else:
                children.append(child)  # type: ignore[arg-type]
        node = TreeNode(label, children[0].start, children[-1].end, tuple(children))
        return node, next_leaf

    first_tok, first_col = tokens[0]
    if first_tok != "(":
        raise PtbError(f"expected '(' at column {first_col}")
    root_obj, _ = parse_node(0)
    if pos != len(tokens):
        raise PtbError(f"trailing content at column {tokens[pos][1]}")
    if isinstance(root_obj, str):
        raise PtbError("expected a bracketed tree, got a bare token")
    root: TreeNode = root_obj  # type: ignore[assignment]
    if root.label == "" and not root.is_leaf:
        if len(root.children) != 1:
            raise PtbError("unlabeled root with multiple children")
        root = root.children[0]
    return ParseTree(root, sentence_id)


def linearize_ptb(tree: ParseTree) -> str:
    """Inverse of parse_ptb: bracketed text with PTB escapes restored."""

    def lin(node: TreeNode) -> str:
        if node.is_leaf:
            word = PTB_UNESCAPES.get(node.text, node.text)  # type: ignore[arg-type]
            return f"({node.label} {word})" if node.label else word
        inner = " ".join(lin(c) for c in node.children)
        return f"({node.label} {inner})"

    return lin(tree.root)


def read_trees(path: str | Path) -> list[ParseTree | None]:
    """One tree per line; a blank line is a missing parse (None).

    Parse errors are logged and yield None rather than aborting, matching
    the graceful-degradation contract of CR.
    """
    out: list[ParseTree | None] = []
    for i, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines()):
        line = line.strip()
        if not line:
            out.append(None)
            continue
        try:
            out.append(parse_ptb(line, sentence_id=i))
        except PtbError as exc:
            logger.warning("%s:%d: unparseable tree: %s", path, i + 1, exc)
            out.append(None)
    return out


def align(tree: ParseTree, sentence: Sentence) -> None:
    """Check leaf-for-token equality; raises AlignmentError at the first
    divergent index.  Escape normalization has already happened in
    parse_ptb, so this is plain string equality."""
    leaves = tree.leaf_texts
    texts = sentence.texts
    for i in range(min(len(leaves), len(texts))):
        if leaves[i] != texts[i]:
            raise AlignmentError(
                f"sentence {sentence.id}: leaf {leaves[i]!r} != token "
                f"{texts[i]!r} at index {i}",
                i,
            )
    if len(leaves) != len(texts):
        i = min(len(leaves), len(texts))
        raise AlignmentError(
            f"sentence {sentence.id}: {len(leaves)} leaves vs "
            f"{len(texts)} tokens (first missing index {i})",
            i,
        )


def is_aligned(tree: ParseTree, sentence: Sentence) -> bool:
    try:
        align(tree, sentence)
    except AlignmentError:
        return False
    return True


def _mention_ranges(sentence: Sentence) -> list[tuple[int, int]]:
    return [(m.start, m.end) for m in extract_mentions(sentence)]


def eligible_nodes(
    tree: ParseTree,
    sentence: Sentence,
    labels: frozenset[str] | set[str] = CR_PHRASE_LABELS,
    require_mention_child: bool = True,
) -> list[TreeNode]:
    """Nodes that may be CR targets, in document order.

    A node qualifies when its base label is in ``labels``, it is neither
    the root nor a part-of-speech pre-leaf, its span is mention-complete
    (no mention straddles the span boundary), and, when
    ``require_mention_child`` is set, the span contains at least one full
    mention.
    """
    ranges = _mention_ranges(sentence)
    out = []
    for node in tree.iter_nodes():
        if node is tree.root or node.is_leaf:
            continue
        if base_label(node.label) not in labels:
            continue
        if splits_any_span(ranges, node.start, node.end):
            continue
        if require_mention_child and not any(
            node.start <= s and e <= node.end for s, e in ranges
        ):
            continue
        out.append(node)
    return out


def build_phrase_index(
    corpus: Corpus,
    trees: Sequence[ParseTree | None],
    labels: frozenset[str] | set[str] = CR_PHRASE_LABELS,
    *,
    require_mention_complete: bool = True,
) -> PhraseIndex:
    """Pool donor subtrees with the wanted labels across the corpus.

    Trees pair with sentences positionally; missing or misaligned trees
    are skipped.  Donors whose span straddles a mention boundary are
    excluded (that exclusion is what makes grafting BIO-safe); disable it
    only for raw distribution counts.
    """
    wanted = {base_label(lab) for lab in labels}
    entries: dict[str, list[DonorRef]] = {lab: [] for lab in sorted(wanted)}
    for sentence in corpus.sentences:
        if sentence.id >= len(trees):
            break
        tree = trees[sentence.id]
        if tree is None:
            continue
        if not is_aligned(tree, sentence):
            logger.debug("sentence %d misaligned with its tree; skipped", sentence.id)
            continue
        ranges = _mention_ranges(sentence)
        for node in tree.iter_nodes():
            if node.is_leaf:
                continue
            lab = base_label(node.label)
            if lab not in wanted:
                continue
            if require_mention_complete and splits_any_span(
                ranges, node.start, node.end
            ):
                continue
            entries[lab].append(
                DonorRef(
                    sentence.id,
                    lab,
                    node,
                    sentence.texts[node.start : node.end],
                    tuple(t.tag for t in sentence.tokens[node.start : node.end]),
                )
            )
    return PhraseIndex({lab: tuple(refs) for lab, refs in entries.items()})


def phrase_counts(trees: Iterable[ParseTree | None]) -> dict[str, int]:
    """Occurrences of each phrasal label across the trees.

    Part-of-speech pre-leaf nodes are not phrases and are not counted;
    function tags are stripped (NP-SBJ counts as NP).
    """
    counts: Counter[str] = Counter()
    for tree in trees:
        if tree is None:
            continue
        for node in tree.iter_nodes():
            if not node.is_leaf:
                counts[base_label(node.label)] += 1
    return dict(counts)


def graft(sentence: Sentence, target: TreeNode, donor: DonorRef) -> list[Token]:
    """Replace the target node's token span with the donor's tokens.

    Both sides must be mention-complete (the donor pool and eligible_nodes
    guarantee it), which makes the result BIO-valid by construction.
    """
    if base_label(target.label) != donor.label:
        raise ValueError(
            f"graft label mismatch: target {base_label(target.label)!r} vs "
            f"donor {donor.label!r}"
        )
    middle = [Token(text, tag) for text, tag in zip(donor.texts, donor.tags)]
    return list(sentence.tokens[: target.start]) + middle + list(
        sentence.tokens[target.end :]
    )
