"""corpusmith: corpus curation for domain- and task-adaptive pretraining.

Builds the data side of adaptive pretraining: sentence ingestion and
packing, domain vocabulary overlap, embedding-based nearest-neighbor
selection of task-relevant text, masking augmentation, cross-domain
n-gram loss matrices, and compute planning. Everything seeded is
reproducible bit for bit; see corpusmith.rng.
"""

from .corpus import (
    Document,
    PackedSequence,
    SentenceRecord,
    dedup_sentences,
    pack_sequences,
    sample_documents,
    split_sentences,
    tokenize,
)
from .embed import EmbedderModel, EmbeddingMatrix, embed_batch, fit_embedder
from .errors import CorpusmithError, DataError, UsageError
from .lmproxy import NgramLM, cross_domain_matrix, eval_loss, train_ngram
from .mask import MaskedSequence, augment_epochs, mask_sequence, unmask
from .plan import PhasePlan, compare_plans, format_steps, plan_phase
from .select import (
    AugmentedCorpus,
    FlatIndex,
    SelectionResult,
    assemble_corpus,
    build_index,
    knn_query,
    select_knn,
    select_random,
)
from .vocab import (
    DomainVocabulary,
    OverlapMatrix,
    build_vocabulary,
    overlap,
    overlap_matrix,
    pick_irrelevant_domain,
)

__version__ = "0.1.0"

__all__ = [
    "AugmentedCorpus",
    "CorpusmithError",
    "DataError",
    "Document",
    "DomainVocabulary",
    "EmbedderModel",
    "EmbeddingMatrix",
    "FlatIndex",
    "MaskedSequence",
    "NgramLM",
    "OverlapMatrix",
    "PackedSequence",
    "PhasePlan",
    "SelectionResult",
    "SentenceRecord",
    "UsageError",
    "assemble_corpus",
    "augment_epochs",
    "build_index",
    "build_vocabulary",
    "compare_plans",
    "cross_domain_matrix",
    "dedup_sentences",
    "embed_batch",
    "eval_loss",
    "fit_embedder",
    "format_steps",
    "knn_query",
    "mask_sequence",
    "overlap",
    "overlap_matrix",
    "pack_sequences",
    "pick_irrelevant_domain",
    "plan_phase",
    "sample_documents",
    "select_knn",
    "select_random",
    "split_sentences",
    "tokenize",
    "train_ngram",
    "unmask",
]
