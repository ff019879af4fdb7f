"""User embeddings built by fusing stylometric and personality views.

Two granularities share the same machinery:

* whole-history: merge every history tweet into one document, take its
  paragraph vector and its personality features, fuse them into one vector
  per user.
* per-tweet: fuse each history tweet separately, then combine the per-tweet
  vectors with position-derived weights (later tweets count more) and
  normalize to unit length.
"""

from __future__ import annotations

from collections.abc import Sequence

import numpy as np

from ..errors import EmptyHistoryError
from .fusion import FusionModel, fuse
from .paragraph import ParagraphVectorModel, infer_document
from .personality import PersonalityModel, personality_features
from .temporal import temporal_weights, weighted_aggregate
from .types import (
    EMPTY_HISTORY_FLAG,
    ZERO_NORM_FLAG,
    Method,
    TokenizedHistory,
    UserEmbedding,
    zero_embedding,
)

DOC_SEPARATOR = "<eot>"


def merge_history_document(tweet_tokens: Sequence[Sequence[str]]) -> list[str]:
    """Concatenate history tweets (oldest first) into one document.

    A separator token marks tweet boundaries so the merged document does not
    invent word cooccurrences across tweets.
    """
    kept = [list(tokens) for tokens in tweet_tokens if tokens]
    if not kept:
        raise EmptyHistoryError("history has no non-empty tweets to merge")
    merged: list[str] = []
    for i, tokens in enumerate(kept):
        if i:
            merged.append(DOC_SEPARATOR)
        merged.extend(tokens)
    return merged


def _fused_vector(
    doc: Sequence[str],
    pv_model: ParagraphVectorModel,
    pers_model: PersonalityModel,
    fusion_model: FusionModel,
) -> np.ndarray:
    stylometric = infer_document(pv_model, doc)
    personality = personality_features(pers_model, [doc])[0]
    return fuse(fusion_model, stylometric[None, :], personality[None, :])[0]


def cascade_embed(
    history: TokenizedHistory,
    pv_model: ParagraphVectorModel,
    pers_model: PersonalityModel,
    fusion_model: FusionModel,
) -> UserEmbedding:
    """One fused vector from the user's entire merged history."""
    try:
        doc = merge_history_document(history.tweet_tokens)
    except EmptyHistoryError:
        return zero_embedding(
            history.user_id,
            history.anchor_tweet_id,
            fusion_model.out_dim,
            Method.CASCADE,
        )
    vector = _fused_vector(doc, pv_model, pers_model, fusion_model)
    return UserEmbedding(
        user_id=history.user_id,
        anchor_tweet_id=history.anchor_tweet_id,
        vector=vector,
        method=Method.CASCADE,
    )


def wcascade_embed(
    history: TokenizedHistory,
    pv_model: ParagraphVectorModel,
    pers_model: PersonalityModel,
    fusion_model: FusionModel,
) -> UserEmbedding:
    """Position-weighted sum of per-tweet fused vectors, unit-normalized.

    Tweets are already in chronological order inside the history, so weight
    rank follows recency: the most recent tweets land in the highest-weight
    partition.
    """
    docs = [list(tokens) for tokens in history.tweet_tokens if tokens]
    if not docs:
        return zero_embedding(
            history.user_id,
            history.anchor_tweet_id,
            fusion_model.out_dim,
            Method.W_CASCADE,
        )
    vectors = np.stack(
        [_fused_vector(doc, pv_model, pers_model, fusion_model) for doc in docs]
    )
    weights = temporal_weights(len(docs))
    combined, cancelled = weighted_aggregate(vectors, weights)
    flags = (ZERO_NORM_FLAG,) if cancelled else ()
    return UserEmbedding(
        user_id=history.user_id,
        anchor_tweet_id=history.anchor_tweet_id,
        vector=combined,
        method=Method.W_CASCADE,
        flags=flags,
    )
