"""Shared test helpers: compact sentence builders, seeded fuzz generators
for corpora and aligned trees, and brute-force oracles that deliberately
reimplement scanning logic instead of reusing the library's."""

from __future__ import annotations

import random
import re
from collections import Counter

from grafter.corpus import Corpus, Mention, Sentence, Tag, Token
from grafter.fillmask import Candidate, MaskRequest, MaskResponse, ProviderError
from grafter.treebank import ParseTree, TreeNode

VOCAB = [
    "patient", "exam", "mri", "copd", "fever", "labs", "daily", "chest",
    "pain", "stable", "discharge", "dose", "iv", "renal", "biopsy", "acute",
    "left", "mild", "chronic", "cough", "she", "had", "with", "on", "the",
]
ENTITY_TYPES = ("PROBLEM", "TEST", "TREATMENT")
PHRASE_POOL = ["NP", "VP", "PP", "ADJP", "ADVP", "SBAR", "X"]
POS_POOL = ["NN", "NNS", "VBD", "JJ", "DT", "IN", "RB", "CD"]


def sent(text_spec: str, sid: int = 0) -> Sentence:
    """Build a sentence from 'text/TAG text/TAG ...' shorthand."""
    tokens = []
    for part in text_spec.split():
        text, _, tag = part.rpartition("/")
        tokens.append(Token(text, Tag.parse(tag)))
    return Sentence(sid, tuple(tokens))


def corpus_of(*specs: str) -> Corpus:
    return Corpus.from_sentences(sent(spec, sid) for sid, spec in enumerate(specs))


def random_sentence(
    rng: random.Random,
    sid: int = 0,
    max_len: int = 12,
    mention_prob: float = 0.35,
) -> Sentence:
    n = rng.randint(1, max_len)
    tokens: list[Token] = []
    while len(tokens) < n:
        if rng.random() < mention_prob:
            etype = rng.choice(ENTITY_TYPES)
            width = min(rng.randint(1, 3), n - len(tokens))
            tokens.append(Token(rng.choice(VOCAB), Tag.of("B", etype)))
            for _ in range(width - 1):
                tokens.append(Token(rng.choice(VOCAB), Tag.of("I", etype)))
        else:
            tokens.append(Token(rng.choice(VOCAB), Tag.of("O")))
    return Sentence(sid, tuple(tokens))


def random_corpus(rng: random.Random, n: int, **kwargs) -> Corpus:
    return Corpus.from_sentences(
        random_sentence(rng, sid, **kwargs) for sid in range(n)
    )


def random_tree(texts: tuple[str, ...], rng: random.Random, sid: int = 0) -> ParseTree:
    """A random constituency tree whose leaves are exactly ``texts``."""

    def build(lo: int, hi: int) -> TreeNode:
        if hi - lo == 1:
            return TreeNode(rng.choice(POS_POOL), lo, hi, (), texts[lo])
        parts = rng.randint(2, min(4, hi - lo))
        cuts = sorted(rng.sample(range(lo + 1, hi), parts - 1))
        bounds = [lo] + cuts + [hi]
        children = tuple(build(a, b) for a, b in zip(bounds, bounds[1:]))
        return TreeNode(rng.choice(PHRASE_POOL), lo, hi, children)

    n = len(texts)
    if n == 1:
        root = TreeNode("S", 0, 1, (build(0, 1),))
    else:
        parts = rng.randint(2, min(4, n))
        cuts = sorted(rng.sample(range(1, n), parts - 1))
        bounds = [0] + cuts + [n]
        root = TreeNode(
            "S", 0, n, tuple(build(a, b) for a, b in zip(bounds, bounds[1:]))
        )
    return ParseTree(root, sid)


def aligned_fixture(
    rng: random.Random, n: int, **kwargs
) -> tuple[Corpus, list[ParseTree]]:
    corpus = random_corpus(rng, n, **kwargs)
    trees = [random_tree(s.texts, rng, s.id) for s in corpus.sentences]
    return corpus, trees


# ---------------------------------------------------------------------------
# clinical fixtures for the constituency-replacement walkthroughs

HOLTER_HOST = sent(
    "Dr./O Foutchner/O will/O arrange/O for/O an/O outpatient/O "
    "Holter/B-TEST monitor/I-TEST",
    sid=0,
)
HOLTER_HOST_TREE_TEXT = (
    "(S (NP (NNP Dr.) (NNP Foutchner)) (VP (MD will) (VP (VB arrange) "
    "(PP (IN for) (NP (DT an) (JJ outpatient) (NNP Holter) (NN monitor))))))"
)
T2_DONOR = sent(
    "An/O MRI/B-TEST showed/O a/O T2/B-PROBLEM signal/I-PROBLEM "
    "change/I-PROBLEM",
    sid=1,
)
T2_DONOR_TREE_TEXT = (
    "(S (NP (DT An) (NN MRI)) (VP (VBD showed) "
    "(NP (DT a) (NN T2) (NN signal) (NN change))))"
)
BEATS_DONOR = sent("She/O had/O 10/O beats/O", sid=2)
BEATS_DONOR_TREE_TEXT = (
    "(S (NP (PRP She)) (VP (VBD had) (NP (CD 10) (NNS beats))))"
)


def holter_fixture():
    """Host plus two donor sentences with aligned parses; the object NP of
    the host is the only NP target containing a mention."""
    from grafter.corpus import Corpus
    from grafter.treebank import parse_ptb

    corpus = Corpus.from_sentences([HOLTER_HOST, T2_DONOR, BEATS_DONOR])
    trees = [
        parse_ptb(HOLTER_HOST_TREE_TEXT, 0),
        parse_ptb(T2_DONOR_TREE_TEXT, 1),
        parse_ptb(BEATS_DONOR_TREE_TEXT, 2),
    ]
    return corpus, trees


FLARE_HOST = sent(
    "She/O had/O a/O workup/B-TEST by/O her/O neurologist/O and/O an/O "
    "MRI/B-TEST call/O with/O any/O fevers/B-PROBLEM ,/O chills/B-PROBLEM "
    ",/O increasing/B-PROBLEM weakness/I-PROBLEM",
    sid=0,
)
FLARE_HOST_TREE_TEXT = (
    "(S (NP (PRP She)) (VP (VBD had) (NP (DT a) (NN workup)) (PP (IN by) "
    "(NP (PRP$ her) (NN neurologist)))) (CC and) (NP (DT an) (NN MRI)) "
    "(VP (VB call) (PP (IN with) (NP (DT any) (NNS fevers) (, ,) "
    "(NNS chills) (, ,) (VBG increasing) (NN weakness)))))"
)
FLARE_DONOR = sent("symptoms/B-PROBLEM flare/O", sid=1)
FLARE_DONOR_TREE_TEXT = "(S (NP (NNS symptoms)) (VP (VB flare)))"


def flare_fixture():
    """The parser-error walkthrough: a one-word VP donor ('flare') grafted
    over the long host VP."""
    from grafter.corpus import Corpus
    from grafter.treebank import parse_ptb

    corpus = Corpus.from_sentences([FLARE_HOST, FLARE_DONOR])
    trees = [
        parse_ptb(FLARE_HOST_TREE_TEXT, 0),
        parse_ptb(FLARE_DONOR_TREE_TEXT, 1),
    ]
    return corpus, trees


# ---------------------------------------------------------------------------
# on-disk fixture writers shared by the CLI and acceptance suites


def write_corpus(tmp_path, corpus, name="train.conll"):
    from grafter.corpus import write_conll

    path = tmp_path / name
    path.write_text(write_conll(corpus), encoding="utf-8")
    return path


def write_thesaurus(tmp_path, entries, name="syn.tsv"):
    path = tmp_path / name
    lines = []
    for key, synonyms in entries.items():
        fields = [key] + [" ".join(syn) for syn in synonyms]
        lines.append("\t".join(fields))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def write_trees(tmp_path, trees, name="train.ptb"):
    from grafter.treebank import linearize_ptb

    path = tmp_path / name
    lines = ["" if t is None else linearize_ptb(t) for t in trees]
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")
    return path


def read_manifest(path) -> dict:
    out = {}
    for line in path.read_text(encoding="utf-8").splitlines():
        key, _, value = line.partition("=")
        out[key] = value
    return out


# ---------------------------------------------------------------------------
# provider test doubles


class FixedProvider:
    """Always proposes the same single candidate."""

    def __init__(self, token: str = "the", score: float = 1.0):
        self.token = token
        self.score = score

    def fill(self, request: MaskRequest) -> MaskResponse:
        return MaskResponse(
            tuple((Candidate(self.token, self.score),) for _ in request.mask_positions)
        )


class RecordingProvider:
    """Wraps a provider and keeps every request for later inspection."""

    def __init__(self, inner):
        self.inner = inner
        self.requests: list[MaskRequest] = []

    def fill(self, request: MaskRequest) -> MaskResponse:
        self.requests.append(request)
        return self.inner.fill(request)


class FailingProvider:
    def fill(self, request: MaskRequest) -> MaskResponse:
        raise ProviderError("service down")


# ---------------------------------------------------------------------------
# brute-force oracles


def oracle_mentions(sentence: Sentence) -> list[Mention]:
    """Mentions by B-anchored expansion rather than a running scan."""
    tags = [tok.tag for tok in sentence.tokens]
    out = []
    for i, tag in enumerate(tags):
        if tag.kind != "B":
            continue
        j = i + 1
        while (
            j < len(tags)
            and tags[j].kind == "I"
            and tags[j].entity_type == tag.entity_type
        ):
            j += 1
        out.append(Mention(sentence.id, i, j, tag.entity_type))
    return out


def _oracle_base(label: str) -> str:
    if label.startswith("-"):
        return label
    return re.split(r"[-=]", label, maxsplit=1)[0]


def _all_nodes(tree: ParseTree) -> list[TreeNode]:
    out = []

    def walk(node: TreeNode) -> None:
        out.append(node)
        for child in node.children:
            walk(child)

    walk(tree.root)
    return out


def oracle_eligible(
    tree: ParseTree,
    sentence: Sentence,
    labels,
    require_mention_child: bool = True,
) -> list[TreeNode]:
    """Direct condition check over every node."""
    mentions = oracle_mentions(sentence)
    out = []
    for node in _all_nodes(tree):
        if node is tree.root or node.text is not None:
            continue
        if _oracle_base(node.label) not in labels:
            continue
        complete = all(
            (m.start >= node.start and m.end <= node.end)
            or m.end <= node.start
            or m.start >= node.end
            for m in mentions
        )
        if not complete:
            continue
        if require_mention_child and not any(
            m.start >= node.start and m.end <= node.end for m in mentions
        ):
            continue
        out.append(node)
    return out


def oracle_index_entries(
    corpus: Corpus, trees, labels
) -> dict[str, list[tuple[int, tuple[str, ...]]]]:
    """Expected (sentence_id, texts) donor entries per base label."""
    wanted = {_oracle_base(lab) for lab in labels}
    out: dict[str, list[tuple[int, tuple[str, ...]]]] = {}
    for sentence in corpus.sentences:
        tree = trees[sentence.id] if sentence.id < len(trees) else None
        if tree is None or tuple(
            n.text for n in _all_nodes(tree) if n.text is not None
        ) != sentence.texts:
            continue
        mentions = oracle_mentions(sentence)
        for node in _all_nodes(tree):
            if node.text is not None:
                continue
            lab = _oracle_base(node.label)
            if lab not in wanted:
                continue
            if not all(
                (m.start >= node.start and m.end <= node.end)
                or m.end <= node.start
                or m.start >= node.end
                for m in mentions
            ):
                continue
            out.setdefault(lab, []).append(
                (sentence.id, sentence.texts[node.start : node.end])
            )
    return out


def oracle_phrase_counts(lines: list[str]) -> dict[str, int]:
    """Count phrasal labels by scanning bracketed text, not by parsing."""
    counts: Counter[str] = Counter()
    for line in lines:
        if not line.strip():
            continue
        tokens = re.findall(r"\(|\)|[^\s()]+", line)
        # stack entries: [label, node children, atom children, label seen]
        stack: list[list] = []
        prev_open = False
        for tok in tokens:
            if tok == "(":
                stack.append(["", 0, 0])
                prev_open = True
            elif tok == ")":
                label, nodes, atoms = stack.pop()
                if stack:
                    stack[-1][1] += 1
                pre_leaf = nodes == 0 and atoms == 1
                if not pre_leaf and label:
                    counts[_oracle_base(label)] += 1
                prev_open = False
            else:
                if prev_open:
                    stack[-1][0] = tok
                else:
                    stack[-1][2] += 1
                prev_open = False
    return dict(counts)
