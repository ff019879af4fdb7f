"""User-history embedding methods and their shared plumbing."""

from .cascade import cascade_embed, merge_history_document, wcascade_embed
from .fusion import FusionModel, fit_fusion, fuse
from .paragraph import ParagraphVectorModel, infer_document, train_paragraph_vectors
from .personality import (
    PersonalityModel,
    personality_features,
    train_personality,
    trait_accuracy,
)
from .seq2seq import (
    SequenceEncoder,
    ed_embed,
    encode_state,
    summary_embed,
    teacher_forced_accuracy,
    train_autoencoder,
    train_summarizer,
)
from .temporal import temporal_weights, weighted_aggregate
from .types import (
    EMPTY_HISTORY_FLAG,
    ZERO_NORM_FLAG,
    Method,
    TokenizedHistory,
    UserEmbedding,
    load_embedding_store,
    write_embedding_store,
    zero_embedding,
)

__all__ = [
    "EMPTY_HISTORY_FLAG",
    "ZERO_NORM_FLAG",
    "FusionModel",
    "Method",
    "ParagraphVectorModel",
    "PersonalityModel",
    "SequenceEncoder",
    "TokenizedHistory",
    "UserEmbedding",
    "cascade_embed",
    "ed_embed",
    "encode_state",
    "fit_fusion",
    "fuse",
    "infer_document",
    "load_embedding_store",
    "merge_history_document",
    "personality_features",
    "summary_embed",
    "teacher_forced_accuracy",
    "temporal_weights",
    "train_autoencoder",
    "train_paragraph_vectors",
    "train_personality",
    "train_summarizer",
    "trait_accuracy",
    "wcascade_embed",
    "weighted_aggregate",
    "write_embedding_store",
    "zero_embedding",
]
