"""grafter: BIO-safe data augmentation for token-level sequence labeling.

Four replacement strategies over CoNLL-style corpora -- synonym, mention,
masked-LM and constituency-subtree replacement -- with guaranteed BIO
well-formedness and fully seeded, order-independent sampling.
"""

from grafter.augment import (
    AugmentationPlan,
    AugmentedSentence,
    AugmentStats,
    ConfigError,
    Resources,
    Thesaurus,
    augment_corpus,
    augment_cr,
    augment_lm,
    augment_mr,
    augment_sr,
    project_tags,
    sentence_rng,
)
from grafter.corpus import (
    BioValidationError,
    ConllError,
    Corpus,
    Mention,
    Sentence,
    Tag,
    Token,
    build_mention_pool,
    extract_mentions,
    is_bio_valid,
    parse_conll,
    read_conll,
    validate_sentence,
    write_conll,
)
from grafter.fillmask import (
    Candidate,
    FillMaskProvider,
    HttpFillMask,
    MaskRequest,
    MaskResponse,
    ProviderError,
    UnigramProvider,
)
from grafter.treebank import (
    CR_PHRASE_LABELS,
    AlignmentError,
    DonorRef,
    ParseTree,
    PhraseIndex,
    PtbError,
    TreeNode,
    align,
    base_label,
    build_phrase_index,
    eligible_nodes,
    graft,
    linearize_ptb,
    parse_ptb,
    phrase_counts,
    read_trees,
)

__version__ = "0.1.0"
