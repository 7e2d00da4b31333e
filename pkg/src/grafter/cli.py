"""Command-line surface: augment, stats and validate.

Logging goes to stderr and data to files; stdout is reserved for the
``stats`` tables.  Exit codes are stable: 0 success, 2 configuration or
I/O problems, 3 validation failures.
"""

from __future__ import annotations

import argparse
import logging
import os
import sys
from pathlib import Path

from grafter import __version__
from grafter.augment import (
    AugmentationPlan,
    AugmentStats,
    ConfigError,
    Resources,
    Thesaurus,
    augment_corpus,
)
from grafter.corpus import (
    BioValidationError,
    ConllError,
    Corpus,
    ReadReport,
    bio_violation_indices,
    parse_conll,
    write_conll,
)
from grafter.fillmask import (
    PROVIDER_URL_ENV,
    FillMaskProvider,
    HttpFillMask,
    UnigramProvider,
)
from grafter.treebank import (
    CR_PHRASE_LABELS,
    AlignmentError,
    align,
    build_phrase_index,
    eligible_nodes,
    phrase_counts,
    read_trees,
)

logger = logging.getLogger("grafter")

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VALIDATION = 3


def _parse_labels(raw: str) -> frozenset[str]:
    labels = frozenset(part.strip() for part in raw.split(",") if part.strip())
    if not labels:
        raise argparse.ArgumentTypeError("label list is empty")
    return labels


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="grafter",
        description="BIO-safe data augmentation for token-level sequence labeling",
    )
    parser.add_argument("--version", action="version", version=f"grafter {__version__}")
    parser.add_argument(
        "-v", "--verbose", action="store_true", help="debug logging to stderr"
    )
    sub = parser.add_subparsers(dest="command", required=True)

    aug = sub.add_parser("augment", help="augment a CoNLL corpus")
    aug.add_argument("--input", required=True, help="input CoNLL file")
    aug.add_argument("--output", required=True, help="augmented CoNLL output")
    aug.add_argument(
        "--strategy", required=True, choices=["sr", "mr", "lm", "cr"]
    )
    aug.add_argument("--k", type=int, default=1, help="samples per sentence")
    aug.add_argument(
        "--ratio", type=float, default=0.3, help="replace ratio for sr/mr"
    )
    aug.add_argument(
        "--n",
        type=int,
        default=1,
        help="replaced tokens (lm) or non-terminals (cr) per sample",
    )
    aug.add_argument(
        "--labels",
        type=_parse_labels,
        default=CR_PHRASE_LABELS,
        help="comma list of CR phrase labels (default NP,VP,ADJP,ADVP,PP)",
    )
    aug.add_argument(
        "--no-mention-child",
        action="store_true",
        help="drop the requirement that CR targets contain a mention",
    )
    aug.add_argument("--seed", type=int, default=0)
    aug.add_argument("--slice", type=int, help="use only the first N sentences")
    aug.add_argument("--jobs", type=int, default=1)
    aug.add_argument(
        "--mentions-only",
        action="store_true",
        help="sr: replace only tokens inside mentions",
    )
    aug.add_argument(
        "--lenient",
        action="store_true",
        help="repair dangling I tags instead of failing",
    )
    aug.add_argument("--max-retries", type=int, default=10)
    aug.add_argument("--top-n", type=int, default=10, help="lm candidates per mask")
    aug.add_argument("--thesaurus", help="TSV synonym lexicon (sr)")
    aug.add_argument("--trees", help="PTB tree file, one per line (cr)")
    aug.add_argument(
        "--provider-url",
        help=f"fill-mask service base URL (lm); env {PROVIDER_URL_ENV}; "
        "the special value 'unigram:' uses an in-process provider built "
        "from the input corpus",
    )
    aug.add_argument(
        "--manifest", help="manifest path (default: <output>.manifest)"
    )
    aug.set_defaults(func=cmd_augment)

    stats = sub.add_parser("stats", help="phrase label distribution of a tree file")
    stats.add_argument("--trees", required=True, help="PTB tree file")
    stats.add_argument(
        "--slices",
        help="comma list of sentence counts, e.g. 50,150,500 (default: all)",
    )
    stats.add_argument(
        "--tsv", action="store_true", help="tab-separated instead of aligned"
    )
    stats.set_defaults(func=cmd_stats)

    val = sub.add_parser("validate", help="check a corpus (and optional trees)")
    val.add_argument("--input", required=True, help="CoNLL file to check")
    val.add_argument("--trees", help="PTB tree file to check alignment against")
    val.add_argument(
        "--labels",
        type=_parse_labels,
        default=CR_PHRASE_LABELS,
        help="CR labels used for the zero-eligible report",
    )
    val.set_defaults(func=cmd_validate)
    return parser


def _build_provider(url: str | None, corpus: Corpus) -> FillMaskProvider:
    url = url or os.environ.get(PROVIDER_URL_ENV)
    if not url:
        raise ConfigError(
            f"strategy 'lm' needs --provider-url or {PROVIDER_URL_ENV}"
        )
    if url.startswith("unigram:"):
        return UnigramProvider.from_corpus(corpus)
    return HttpFillMask(url)


def _manifest_lines(
    args: argparse.Namespace, plan: AugmentationPlan, stats: AugmentStats, repairs: int
) -> list[str]:
    # deliberately excludes --jobs: the output is identical for any job
    # count and the manifest should be too
    pairs: list[tuple[str, object]] = [
        ("strategy", plan.strategy),
        ("seed", plan.seed),
        ("k", plan.num_samples),
        ("ratio", plan.replace_ratio),
        ("n", plan.num_replacements),
        ("labels", ",".join(sorted(plan.cr_labels))),
        ("require_mention_child", str(plan.require_mention_child).lower()),
        ("mentions_only", str(plan.mentions_only).lower()),
        ("top_n", plan.top_n),
        ("max_retries", plan.max_retries),
        ("slice", args.slice if args.slice else ""),
        ("lenient", str(bool(args.lenient)).lower()),
        ("input", args.input),
        ("output", args.output),
        ("thesaurus", args.thesaurus or ""),
        ("trees", args.trees or ""),
        ("provider_url", args.provider_url or ""),
        ("input_sentences", stats.sentences_in),
        ("augmented_sentences", stats.emitted),
        ("output_sentences", stats.sentences_in + stats.emitted),
        ("dedup_dropped", stats.dedup_dropped),
        ("retries_used", stats.retries_used),
        ("provider_failures", stats.provider_failures),
        ("sentences_skipped", stats.skipped_no_eligible + stats.skipped_unaligned),
        ("skipped_no_eligible", stats.skipped_no_eligible),
        ("skipped_unaligned", stats.skipped_unaligned),
        ("targets_without_donor", stats.targets_without_donor),
        ("edits_applied", stats.edits_applied),
        ("bio_repairs", repairs),
    ]
    if plan.strategy == "cr":
        pairs.append(("grafts_applied", stats.edits_applied))
    return [f"{key}={value}" for key, value in pairs]


def cmd_augment(args: argparse.Namespace) -> int:
    report = ReadReport()
    corpus = parse_conll(
        Path(args.input).read_text(encoding="utf-8"),
        strict=not args.lenient,
        report=report,
    )
    if args.slice:
        corpus = corpus.first(args.slice)
    plan = AugmentationPlan(
        strategy=args.strategy,
        num_samples=args.k,
        replace_ratio=args.ratio,
        num_replacements=args.n,
        cr_labels=args.labels,
        require_mention_child=not args.no_mention_child,
        mentions_only=args.mentions_only,
        top_n=args.top_n,
        seed=args.seed,
        max_retries=args.max_retries,
    )

    resources = Resources()
    if plan.strategy == "sr":
        if not args.thesaurus:
            raise ConfigError("strategy 'sr' needs --thesaurus")
        resources.thesaurus = Thesaurus.load(args.thesaurus)
    elif plan.strategy == "mr":
        from grafter.corpus import build_mention_pool

        resources.mention_pool = build_mention_pool(corpus)
    elif plan.strategy == "lm":
        resources.provider = _build_provider(args.provider_url, corpus)
    elif plan.strategy == "cr":
        if not args.trees:
            raise ConfigError("strategy 'cr' needs --trees")
        resources.trees = read_trees(args.trees)
        resources.phrase_index = build_phrase_index(
            corpus, resources.trees, plan.cr_labels
        )

    augmented, stats = augment_corpus(corpus, resources, plan, jobs=args.jobs)
    Path(args.output).write_text(write_conll(augmented), encoding="utf-8")
    manifest_path = Path(args.manifest or f"{args.output}.manifest")
    manifest_path.write_text(
        "\n".join(_manifest_lines(args, plan, stats, len(report.repairs))) + "\n",
        encoding="utf-8",
    )
    logger.info(
        "wrote %d sentences (%d augmented) to %s",
        len(augmented),
        stats.emitted,
        args.output,
    )
    return EXIT_OK


def cmd_stats(args: argparse.Namespace) -> int:
    lines = Path(args.trees).read_text(encoding="utf-8").splitlines()
    trees = read_trees(args.trees)
    parse_failures = sum(
        1 for line, tree in zip(lines, trees) if line.strip() and tree is None
    )
    if parse_failures:
        logger.warning("%d line(s) failed to parse", parse_failures)

    if args.slices:
        slices = [int(part) for part in args.slices.split(",") if part.strip()]
    else:
        slices = [len(trees)]
    per_slice = [phrase_counts(trees[:n]) for n in slices]
    labels = set()
    for counts in per_slice:
        labels.update(counts)
    # widest slice dominates the ordering, ties alphabetical
    order = sorted(labels, key=lambda lab: (-per_slice[-1].get(lab, 0), lab))

    headers = ["phrase"] + [str(n) for n in slices]
    rows = [
        [lab] + [str(counts.get(lab, 0)) for counts in per_slice] for lab in order
    ]
    if args.tsv:
        print("\t".join(headers))
        for row in rows:
            print("\t".join(row))
    else:
        widths = [
            max(len(headers[c]), max((len(r[c]) for r in rows), default=0))
            for c in range(len(headers))
        ]
        print("  ".join(h.ljust(widths[c]) for c, h in enumerate(headers)).rstrip())
        for row in rows:
            print(
                "  ".join(cell.rjust(widths[c]) if c else cell.ljust(widths[c])
                          for c, cell in enumerate(row)).rstrip()
            )
    return EXIT_OK


def cmd_validate(args: argparse.Namespace) -> int:
    def report(line: str) -> None:
        print(line, file=sys.stderr)

    read = ReadReport()
    corpus = parse_conll(
        Path(args.input).read_text(encoding="utf-8"), strict=False, report=read
    )
    # repairs recorded by the lenient read are exactly the BIO violations
    violations = 0
    for sid, idx in read.repairs:
        violations += 1
        report(f"bio violation: sentence {sid} token {idx}: I without preceding B")

    seen: dict[tuple, int] = {}
    duplicates = 0
    for sentence in corpus.sentences:
        key = tuple((tok.text, tok.tag.surface) for tok in sentence.tokens)
        if key in seen:
            duplicates += 1
            report(f"duplicate sentence: {sentence.id} repeats {seen[key]}")
        else:
            seen[key] = sentence.id

    misaligned = 0
    no_eligible = 0
    if args.trees:
        trees = read_trees(args.trees)
        for sentence in corpus.sentences:
            tree = trees[sentence.id] if sentence.id < len(trees) else None
            if tree is None:
                misaligned += 1
                report(f"alignment failure: sentence {sentence.id}: no parse")
                continue
            try:
                align(tree, sentence)
            except AlignmentError as exc:
                misaligned += 1
                report(f"alignment failure: {exc}")
                continue
            if not eligible_nodes(tree, sentence, args.labels):
                no_eligible += 1
                report(f"no CR-eligible nodes: sentence {sentence.id}")

    report(
        f"summary: {violations} bio violation(s), {misaligned} alignment "
        f"failure(s), {duplicates} duplicate(s), {no_eligible} sentence(s) "
        "without CR-eligible nodes"
    )
    return EXIT_VALIDATION if violations else EXIT_OK


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(
        stream=sys.stderr,
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(name)s: %(message)s",
        force=True,
    )
    try:
        return args.func(args)
    except BioValidationError as exc:
        logger.error("validation failed: %s", exc)
        return EXIT_VALIDATION
    except (ConfigError, ConllError, OSError, ValueError) as exc:
        logger.error("%s", exc)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
