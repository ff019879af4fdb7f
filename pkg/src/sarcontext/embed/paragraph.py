"""Paragraph vectors, distributed bag-of-words flavor.

Each document owns a vector that is trained to predict the words it contains
through negative sampling (5 noise words per target by default, unigram^0.75
noise distribution). Inference freezes the word output table and fits only a
fresh document vector with the same objective, so vectors for unseen
documents live in the trained space. Everything is driven by seeded
generators: same corpus + seed -> same model, same document -> same inferred
vector.
"""

from __future__ import annotations

import warnings
from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np

from ..errors import ConfigError

NOISE_POWER = 0.75


def _sigmoid(x):
    return 1.0 / (1.0 + np.exp(-np.clip(x, -30.0, 30.0)))


@dataclass(eq=False)
class ParagraphVectorModel:
    dim: int
    seed: int
    epochs: int
    negative: int
    lr: float
    min_lr: float
    token_index: dict[str, int]
    word_out: np.ndarray  # (|V|, dim) output table used by negative sampling
    doc_vectors: np.ndarray  # (n_docs, dim) trained document vectors
    noise_cdf: np.ndarray = field(repr=False, default=None)

    def vocabulary(self) -> list[str]:
        return list(self.token_index)


def _noise_cdf(counts: np.ndarray) -> np.ndarray:
    weights = counts.astype(np.float64) ** NOISE_POWER
    return np.cumsum(weights / weights.sum())


def _sample_noise(rng: np.random.Generator, cdf: np.ndarray, k: int) -> np.ndarray:
    return np.searchsorted(cdf, rng.random(k), side="right")


def _train_document(
    vec: np.ndarray,
    word_ids: np.ndarray,
    word_out: np.ndarray,
    cdf: np.ndarray,
    rng: np.random.Generator,
    epochs: int,
    negative: int,
    lr: float,
    min_lr: float,
    update_words: bool,
) -> None:
    """SGD over one document's words, in place. Linear lr decay across epochs."""
    total_steps = max(epochs, 1)
    for epoch in range(epochs):
        step_lr = lr + (min_lr - lr) * (epoch / total_steps)
        for target in word_ids:
            ids = np.empty(negative + 1, dtype=np.int64)
            ids[0] = target
            ids[1:] = _sample_noise(rng, cdf, negative)
            labels = np.zeros(negative + 1)
            labels[0] = 1.0
            outs = word_out[ids]  # (k+1, dim)
            err = labels - _sigmoid(outs @ vec)  # (k+1,)
            grad_vec = err @ outs
            if update_words:
                word_out[ids] += step_lr * np.outer(err, vec)
            vec += step_lr * grad_vec


def train_paragraph_vectors(
    corpus: Sequence[Sequence[str]],
    dim: int = 100,
    epochs: int = 40,
    seed: int = 0,
    negative: int = 5,
    lr: float = 0.05,
    min_lr: float = 1e-4,
) -> ParagraphVectorModel:
    """Train document vectors for every document in ``corpus``.

    Document order is the identity: ``model.doc_vectors[i]`` belongs to
    ``corpus[i]``.
    """
    if dim < 1:
        raise ConfigError(f"paragraph vector dimension must be >= 1, got {dim}")
    docs = [list(doc) for doc in corpus]
    if not docs:
        raise ValueError("paragraph vector corpus is empty")

    counts: dict[str, int] = {}
    for doc in docs:
        for token in doc:
            counts[token] = counts.get(token, 0) + 1
    if not counts:
        raise ValueError("paragraph vector corpus contains no tokens")
    tokens = sorted(counts, key=lambda t: (-counts[t], t))
    token_index = {t: i for i, t in enumerate(tokens)}
    cdf = _noise_cdf(np.asarray([counts[t] for t in tokens]))

    rng = np.random.default_rng(seed)
    doc_vectors = rng.uniform(-0.5 / dim, 0.5 / dim, size=(len(docs), dim))
    word_out = np.zeros((len(tokens), dim))

    encoded = [
        np.asarray([token_index[t] for t in doc], dtype=np.int64) for doc in docs
    ]
    order = np.arange(len(docs))
    total_steps = max(epochs, 1)
    for epoch in range(epochs):
        rng.shuffle(order)
        step_lr = lr + (min_lr - lr) * (epoch / total_steps)
        for di in order:
            word_ids = encoded[di]
            if word_ids.size == 0:
                continue
            vec = doc_vectors[di]
            for target in word_ids:
                ids = np.empty(negative + 1, dtype=np.int64)
                ids[0] = target
                ids[1:] = _sample_noise(rng, cdf, negative)
                labels = np.zeros(negative + 1)
                labels[0] = 1.0
                outs = word_out[ids]
                err = labels - _sigmoid(outs @ vec)
                word_out[ids] += step_lr * np.outer(err, vec)
                vec += step_lr * (err @ outs)

    return ParagraphVectorModel(
        dim=dim,
        seed=seed,
        epochs=epochs,
        negative=negative,
        lr=lr,
        min_lr=min_lr,
        token_index=token_index,
        word_out=word_out,
        doc_vectors=doc_vectors,
        noise_cdf=cdf,
    )


def infer_document(
    model: ParagraphVectorModel, doc: Sequence[str], epochs: int | None = None
) -> np.ndarray:
    """Fit a vector for ``doc`` against the frozen word table.

    Unknown tokens are skipped; a document with no known tokens gets the zero
    vector (with a warning) so downstream stages always receive something.
    """
    word_ids = np.asarray(
        [model.token_index[t] for t in doc if t in model.token_index],
        dtype=np.int64,
    )
    if word_ids.size == 0:
        warnings.warn(
            "document has no tokens known to the paragraph-vector model; "
            "returning a zero vector",
            stacklevel=2,
        )
        return np.zeros(model.dim)

    rng = np.random.default_rng(model.seed)
    vec = rng.uniform(-0.5 / model.dim, 0.5 / model.dim, size=model.dim)
    _train_document(
        vec,
        word_ids,
        model.word_out,
        model.noise_cdf,
        rng,
        epochs=model.epochs if epochs is None else epochs,
        negative=model.negative,
        lr=model.lr,
        min_lr=model.min_lr,
        update_words=False,
    )
    return vec
