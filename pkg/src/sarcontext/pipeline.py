"""End-to-end orchestration: corpus -> splits -> embeddings -> models.

Everything here is pure in-memory plumbing shared by the command-line
entry points and the experiment tests. Sub-models for user embeddings
(paragraph vectors, trait network, fusion, sequence encoders) are fitted on
training-split users only; embeddings for validation/test users are
inferred from those frozen models.
"""

from __future__ import annotations

import hashlib
import statistics
from collections.abc import Iterable, Sequence
from dataclasses import dataclass

import numpy as np

from .corpus import (
    DEFAULT_SARCASM_TAGS,
    LabeledDataset,
    Tweet,
    UserHistory,
)
from .embed import (
    Method,
    SequenceEncoder,
    TokenizedHistory,
    UserEmbedding,
    cascade_embed,
    ed_embed,
    fit_fusion,
    infer_document,
    merge_history_document,
    personality_features,
    summary_embed,
    train_autoencoder,
    train_paragraph_vectors,
    train_personality,
    train_summarizer,
    wcascade_embed,
    zero_embedding,
)
from .errors import EmptyHistoryError
from .evaluation import RunResult, f1_score
from .models import (
    Example,
    ExperimentConfig,
    ModelKind,
    Prediction,
    PredictionFailure,
    TrainedModel,
    predict,
    train_classifier,
)
from .preprocess import (
    Vocabulary,
    build_vocab,
    count_words,
    load_word_vectors,
    normalize_tag_set,
    strip_sarcasm_tags,
    tokenize,
)
from .split import BucketAssignment, SplitSpec, make_splits, stratify_by_user
from .synth import prefix_summary


def tweet_tokens(text: str, tags: frozenset[str]) -> list[str]:
    """Tokenize and drop the distant-supervision hashtags."""
    return strip_sarcasm_tags(tokenize(text), tags)


def tokenize_history(history: UserHistory, tags: frozenset[str]) -> TokenizedHistory:
    """Tokenized history tweets in timeline order; empty tweets dropped."""
    kept = []
    for t in history.tweets:
        tokens = tweet_tokens(t.text, tags)
        if tokens:
            kept.append(tuple(tokens))
    return TokenizedHistory(
        user_id=history.user_id,
        anchor_tweet_id=history.anchor_tweet_id,
        tweet_tokens=tuple(kept),
    )


@dataclass(eq=False)
class PreparedCorpus:
    dataset: LabeledDataset  # after the short-tweet filter
    histories: dict[str, UserHistory]
    tags: frozenset[str]
    assignment: BucketAssignment
    spec: SplitSpec
    train: LabeledDataset
    valid: LabeledDataset
    test: LabeledDataset
    vocab: Vocabulary
    tokens_by_id: dict[str, tuple[str, ...]]

    @property
    def train_users(self) -> set[str]:
        return {t.user_id for t in self.train}


def _split_spec(valid_bucket: int, test_bucket: int, n_buckets: int = 10) -> SplitSpec:
    train = tuple(
        b for b in range(n_buckets) if b not in (valid_bucket, test_bucket)
    )
    return SplitSpec(train=train, valid=valid_bucket, test=test_bucket)


def prepare_corpus(
    dataset: LabeledDataset,
    histories: dict[str, UserHistory],
    seed: int = 0,
    tag_set: Iterable[str] = DEFAULT_SARCASM_TAGS,
    min_words: int = 3,
    valid_bucket: int = 8,
    test_bucket: int = 9,
) -> PreparedCorpus:
    """Filter short tweets, split by user, build the training vocabulary."""
    tags = normalize_tag_set(tag_set)
    tokens_by_id: dict[str, tuple[str, ...]] = {}
    kept: list[Tweet] = []
    for t in dataset:
        tokens = tweet_tokens(t.text, tags)
        if count_words(tokens) >= min_words:
            kept.append(t)
            tokens_by_id[t.id] = tuple(tokens)
    filtered = LabeledDataset(name=dataset.name, tweets=tuple(kept))

    assignment = stratify_by_user(filtered, n_buckets=10, seed=seed)
    spec = _split_spec(valid_bucket, test_bucket)
    train, valid, test = make_splits(filtered, assignment, spec)
    vocab = build_vocab([tokens_by_id[t.id] for t in train])
    return PreparedCorpus(
        dataset=filtered,
        histories=histories,
        tags=tags,
        assignment=assignment,
        spec=spec,
        train=train,
        valid=valid,
        test=test,
        vocab=vocab,
        tokens_by_id=tokens_by_id,
    )


@dataclass(frozen=True)
class EmbedSettings:
    """Knobs for the embedding sub-models (classifier knobs live elsewhere)."""

    d_e: int = 100
    personality_dim: int = 50
    # strong ridge: the fusion is fit on few samples (one or a handful of
    # documents per training user), where sample correlations are inflated
    fusion_eps: float = 1.0
    pv_epochs: int = 25
    pv_negative: int = 5
    pv_lr: float = 0.05
    personality_epochs: int = 60
    personality_emb: int = 50
    personality_lr: float = 0.01
    encoder_hidden: int = 64
    encoder_emb: int = 64
    encoder_epochs: int = 25
    encoder_lr: float = 0.005
    encoder_batch: int = 32


def _pseudo_traits(docs: Sequence[Sequence[str]]) -> list[list[int]]:
    """Deterministic stand-in trait labels from document statistics.

    The published trait-labeled pretraining data is unavailable; these
    content-derived bits give the trait network a learnable objective so its
    hidden layer carries document information.
    """
    lengths = [len(d) for d in docs]
    mean_word = [statistics.fmean(len(t) for t in d) for d in docs]
    diversity = [len(set(d)) / len(d) for d in docs]
    med_len = statistics.median(lengths)
    med_word = statistics.median(mean_word)
    med_div = statistics.median(diversity)

    def bit(text: str) -> int:
        return hashlib.md5(text.encode("utf-8")).digest()[0] & 1

    traits = []
    for i, doc in enumerate(docs):
        traits.append(
            [
                1 if lengths[i] > med_len else 0,
                1 if mean_word[i] > med_word else 0,
                1 if diversity[i] > med_div else 0,
                bit(doc[0]),
                bit(" ".join(doc)),
            ]
        )
    return traits


def _merged_doc(tokenized: TokenizedHistory) -> list[str] | None:
    try:
        return merge_history_document(tokenized.tweet_tokens)
    except EmptyHistoryError:
        return None


def build_embeddings(
    prepared: PreparedCorpus,
    method: Method,
    settings: EmbedSettings = EmbedSettings(),
    seed: int = 0,
) -> dict[str, UserEmbedding]:
    """One embedding per dataset user, via training-split-fitted sub-models.

    Users with no usable history get a flagged zero vector so every tweet
    stays classifiable.
    """
    tokenized = {
        u: tokenize_history(h, prepared.tags) for u, h in prepared.histories.items()
    }
    train_users = sorted(u for u in prepared.train_users if u in tokenized)
    all_users = sorted(prepared.dataset.users())

    def zero(user: str) -> UserEmbedding:
        hist = prepared.histories.get(user)
        return zero_embedding(
            user, hist.anchor_tweet_id if hist else "", settings.d_e, method
        )

    if method in (Method.CASCADE, Method.W_CASCADE):
        if method is Method.CASCADE:
            fit_docs = [
                doc
                for u in train_users
                if (doc := _merged_doc(tokenized[u])) is not None
            ]
        else:
            fit_docs = [
                list(tokens)
                for u in train_users
                for tokens in tokenized[u].tweet_tokens
            ]
        if not fit_docs:
            raise ValueError("no non-empty training-user history documents to fit on")
        pv = train_paragraph_vectors(
            fit_docs,
            dim=settings.d_e,
            epochs=settings.pv_epochs,
            seed=seed,
            negative=settings.pv_negative,
            lr=settings.pv_lr,
        )
        pers = train_personality(
            fit_docs,
            _pseudo_traits(fit_docs),
            hidden_dim=settings.personality_dim,
            emb_dim=settings.personality_emb,
            epochs=settings.personality_epochs,
            learning_rate=settings.personality_lr,
            seed=seed,
        )
        stylometric = np.stack([infer_document(pv, d) for d in fit_docs])
        personality = personality_features(pers, fit_docs)
        fusion = fit_fusion(
            stylometric, personality, out_dim=settings.d_e, eps=settings.fusion_eps
        )
        embed_one = cascade_embed if method is Method.CASCADE else wcascade_embed
        return {
            u: embed_one(tokenized[u], pv, pers, fusion) if u in tokenized else zero(u)
            for u in all_users
        }

    per_tweet = [
        list(tokens) for u in train_users for tokens in tokenized[u].tweet_tokens
    ]
    if not per_tweet:
        raise ValueError("no non-empty training-user history tweets to fit on")
    if method is Method.ED:
        encoder = train_autoencoder(
            per_tweet,
            out_dim=settings.d_e,
            hidden_dim=settings.encoder_hidden,
            emb_dim=settings.encoder_emb,
            epochs=settings.encoder_epochs,
            learning_rate=settings.encoder_lr,
            batch_size=settings.encoder_batch,
            seed=seed,
        )
        embed_one = ed_embed
    elif method is Method.SUMMARY:
        pairs = [(doc, prefix_summary(doc)) for doc in per_tweet]
        pairs = [(s, t) for s, t in pairs if t]
        if not pairs:
            raise ValueError("no summarizable training-user history tweets")
        encoder = train_summarizer(
            pairs,
            out_dim=settings.d_e,
            hidden_dim=settings.encoder_hidden,
            emb_dim=settings.encoder_emb,
            epochs=settings.encoder_epochs,
            learning_rate=settings.encoder_lr,
            batch_size=settings.encoder_batch,
            seed=seed,
        )
        embed_one = summary_embed
    else:
        raise ValueError(f"unhandled method {method}")
    return {
        u: embed_one(tokenized[u], encoder) if u in tokenized else zero(u)
        for u in all_users
    }


def examples_for(
    prepared: PreparedCorpus,
    split: LabeledDataset,
    embeddings: dict[str, UserEmbedding] | None = None,
) -> list[Example]:
    out = []
    for t in split:
        emb = embeddings.get(t.user_id) if embeddings is not None else None
        out.append(
            Example(
                tweet_id=t.id,
                user_id=t.user_id,
                indices=tuple(prepared.vocab.encode(prepared.tokens_by_id[t.id])),
                label=t.label,
                embedding=emb.vector if emb is not None else None,
            )
        )
    return out


@dataclass(eq=False)
class ModelRun:
    trained: TrainedModel
    result: RunResult
    predictions: list[Prediction | PredictionFailure]
    n_failures: int


def run_model(
    prepared: PreparedCorpus,
    kind: ModelKind,
    config: ExperimentConfig,
    embeddings: dict[str, UserEmbedding] | None = None,
    word_vectors: str = "random",
) -> ModelRun:
    """Train one model kind on the prepared splits and score the test split."""
    if kind.needs_embedding and embeddings is None:
        raise ValueError(f"{kind.name} needs user embeddings; build them first")
    word_matrix = (
        load_word_vectors(
            word_vectors, prepared.vocab, dim=config.word_dim, seed=config.seed
        )
        if kind.needs_text
        else None
    )
    train_ex = examples_for(prepared, prepared.train, embeddings)
    valid_ex = examples_for(prepared, prepared.valid, embeddings)
    test_ex = examples_for(prepared, prepared.test, embeddings)
    trained = train_classifier(
        kind, train_ex, valid_ex, config, len(prepared.vocab), word_matrix
    )
    predictions = predict(trained, test_ex)
    scored = [p for p in predictions if isinstance(p, Prediction)]
    scored_ids = {p.tweet_id for p in scored}
    golds = [t for t in prepared.test if t.id in scored_ids]
    result = f1_score(
        scored, golds, dataset=prepared.dataset.name, model=kind.name
    )
    return ModelRun(
        trained=trained,
        result=result,
        predictions=predictions,
        n_failures=len(predictions) - len(scored),
    )
