"""Recurrent sequence encoders for per-tweet user embeddings.

One network, two training objectives:

* autoencoder: reproduce the input tweet (ED embeddings).
* summarizer: produce a short summary of the input (SUMMARY embeddings).

Either way the bidirectional encoder's final states are projected to the
embedding width and that projection is the per-tweet vector. The decoder,
attention and output layers exist purely to give the encoder a training
signal; they are discarded at embedding time. Per-tweet vectors are then
combined with the same position weighting used by the weighted cascade.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass, field

import numpy as np
import torch
from torch import nn
from torch.nn.utils.rnn import pack_padded_sequence, pad_packed_sequence

from ..errors import ConfigError
from .temporal import temporal_weights, weighted_aggregate
from .types import (
    ZERO_NORM_FLAG,
    Method,
    TokenizedHistory,
    UserEmbedding,
    zero_embedding,
)

PAD, UNK, SOS, EOS = 0, 1, 2, 3
_SPECIALS = 4


class Seq2SeqNet(nn.Module):
    """Encoder-decoder with multiplicative attention over encoder outputs."""

    def __init__(self, vocab_size: int, emb_dim: int, hidden_dim: int, out_dim: int):
        super().__init__()
        self.embedding = nn.Embedding(vocab_size, emb_dim, padding_idx=PAD)
        self.encoder = nn.LSTM(
            emb_dim, hidden_dim, batch_first=True, bidirectional=True
        )
        self.bridge = nn.Linear(2 * hidden_dim, out_dim)
        self.decoder = nn.LSTM(emb_dim, out_dim, batch_first=True)
        # score(dec_state, enc_output) = dec_state . (attn @ enc_output)
        self.attn = nn.Linear(2 * hidden_dim, out_dim, bias=False)
        self.combine = nn.Linear(out_dim + 2 * hidden_dim, out_dim)
        self.out = nn.Linear(out_dim, vocab_size)

    def encode(
        self, src: torch.Tensor, lengths: torch.Tensor
    ) -> tuple[torch.Tensor, torch.Tensor]:
        emb = self.embedding(src)
        packed = pack_padded_sequence(
            emb, lengths.cpu(), batch_first=True, enforce_sorted=False
        )
        outputs, (h, _) = self.encoder(packed)
        outputs, _ = pad_packed_sequence(
            outputs, batch_first=True, total_length=src.shape[1]
        )
        final = torch.cat([h[0], h[1]], dim=1)  # forward and backward last states
        state = torch.tanh(self.bridge(final))
        return outputs, state

    def decode(
        self,
        dec_in: torch.Tensor,
        enc_outputs: torch.Tensor,
        enc_mask: torch.Tensor,
        state: torch.Tensor,
    ) -> torch.Tensor:
        emb = self.embedding(dec_in)
        h0 = state.unsqueeze(0)
        dec_out, _ = self.decoder(emb, (h0, torch.zeros_like(h0)))
        keys = self.attn(enc_outputs)  # (B, L, out_dim)
        scores = torch.bmm(dec_out, keys.transpose(1, 2))  # (B, T, L)
        scores = scores.masked_fill(~enc_mask.unsqueeze(1), float("-inf"))
        weights = torch.softmax(scores, dim=-1)
        context = torch.bmm(weights, enc_outputs)  # (B, T, 2h)
        combined = torch.tanh(self.combine(torch.cat([dec_out, context], dim=-1)))
        return self.out(combined)

    def forward(self, src, lengths, dec_in):
        enc_outputs, state = self.encode(src, lengths)
        enc_mask = src != PAD
        return self.decode(dec_in, enc_outputs, enc_mask, state)


@dataclass(eq=False)
class SequenceEncoder:
    net: Seq2SeqNet
    token_index: dict[str, int]
    out_dim: int
    objective: str  # "autoencode" or "summarize"
    loss_history: list[float] = field(default_factory=list)


def _build_token_index(corpora: Sequence[Sequence[Sequence[str]]]) -> dict[str, int]:
    counts: dict[str, int] = {}
    for corpus in corpora:
        for doc in corpus:
            for token in doc:
                counts[token] = counts.get(token, 0) + 1
    tokens = sorted(counts, key=lambda t: (-counts[t], t))
    return {t: i + _SPECIALS for i, t in enumerate(tokens)}


def _encode_sources(
    docs: Sequence[Sequence[str]], token_index: dict[str, int]
) -> tuple[torch.Tensor, torch.Tensor]:
    max_len = max(len(d) for d in docs)
    src = torch.full((len(docs), max_len), PAD, dtype=torch.long)
    lengths = torch.zeros(len(docs), dtype=torch.long)
    for row, doc in enumerate(docs):
        for col, token in enumerate(doc):
            src[row, col] = token_index.get(token, UNK)
        lengths[row] = len(doc)
    return src, lengths


def _encode_targets(
    docs: Sequence[Sequence[str]], token_index: dict[str, int]
) -> tuple[torch.Tensor, torch.Tensor]:
    # decoder input starts with SOS, target ends with EOS
    max_len = max(len(d) for d in docs) + 1
    dec_in = torch.full((len(docs), max_len), PAD, dtype=torch.long)
    target = torch.full((len(docs), max_len), PAD, dtype=torch.long)
    for row, doc in enumerate(docs):
        ids = [token_index.get(token, UNK) for token in doc]
        dec_in[row, 0] = SOS
        dec_in[row, 1 : len(ids) + 1] = torch.tensor(ids, dtype=torch.long)
        target[row, : len(ids)] = torch.tensor(ids, dtype=torch.long)
        target[row, len(ids)] = EOS
    return dec_in, target


def _train_seq2seq(
    sources: Sequence[Sequence[str]],
    targets: Sequence[Sequence[str]],
    objective: str,
    out_dim: int,
    hidden_dim: int,
    emb_dim: int,
    epochs: int,
    learning_rate: float,
    batch_size: int,
    seed: int,
) -> SequenceEncoder:
    if out_dim < 1 or hidden_dim < 1:
        raise ConfigError(
            f"encoder dimensions must be >= 1, got out={out_dim} hidden={hidden_dim}"
        )
    pairs = [
        (list(s), list(t)) for s, t in zip(sources, targets) if len(s) and len(t)
    ]
    if len(sources) != len(targets):
        raise ValueError(
            f"got {len(sources)} sources but {len(targets)} targets"
        )
    if not pairs:
        raise ValueError("no non-empty source/target pairs to train on")

    token_index = _build_token_index([[s for s, _ in pairs], [t for _, t in pairs]])
    torch.manual_seed(seed)
    net = Seq2SeqNet(len(token_index) + _SPECIALS, emb_dim, hidden_dim, out_dim)
    optimizer = torch.optim.Adam(net.parameters(), lr=learning_rate)
    loss_fn = nn.CrossEntropyLoss(ignore_index=PAD)

    src, lengths = _encode_sources([s for s, _ in pairs], token_index)
    dec_in, target = _encode_targets([t for _, t in pairs], token_index)

    rng = np.random.default_rng(seed)
    order = np.arange(len(pairs))
    encoder = SequenceEncoder(
        net=net, token_index=token_index, out_dim=out_dim, objective=objective
    )
    net.train()
    for _ in range(epochs):
        rng.shuffle(order)
        epoch_loss = 0.0
        for start in range(0, len(order), batch_size):
            batch = torch.tensor(order[start : start + batch_size])
            optimizer.zero_grad()
            logits = net(src[batch], lengths[batch], dec_in[batch])
            loss = loss_fn(
                logits.reshape(-1, logits.shape[-1]), target[batch].reshape(-1)
            )
            loss.backward()
            optimizer.step()
            epoch_loss += loss.item() * len(batch)
        encoder.loss_history.append(epoch_loss / len(pairs))
    net.eval()
    return encoder


def train_autoencoder(
    corpus: Sequence[Sequence[str]],
    out_dim: int = 100,
    hidden_dim: int = 64,
    emb_dim: int = 64,
    epochs: int = 30,
    learning_rate: float = 0.005,
    batch_size: int = 32,
    seed: int = 0,
) -> SequenceEncoder:
    """Train the encoder to reconstruct each input tweet."""
    docs = [list(d) for d in corpus]
    return _train_seq2seq(
        docs,
        docs,
        objective="autoencode",
        out_dim=out_dim,
        hidden_dim=hidden_dim,
        emb_dim=emb_dim,
        epochs=epochs,
        learning_rate=learning_rate,
        batch_size=batch_size,
        seed=seed,
    )


def train_summarizer(
    pairs: Sequence[tuple[Sequence[str], Sequence[str]]],
    out_dim: int = 100,
    hidden_dim: int = 64,
    emb_dim: int = 64,
    epochs: int = 30,
    learning_rate: float = 0.005,
    batch_size: int = 32,
    seed: int = 0,
) -> SequenceEncoder:
    """Train the encoder to produce each tweet's short summary."""
    return _train_seq2seq(
        [s for s, _ in pairs],
        [t for _, t in pairs],
        objective="summarize",
        out_dim=out_dim,
        hidden_dim=hidden_dim,
        emb_dim=emb_dim,
        epochs=epochs,
        learning_rate=learning_rate,
        batch_size=batch_size,
        seed=seed,
    )


def encode_state(
    encoder: SequenceEncoder, tokens: Sequence[str]
) -> tuple[np.ndarray, bool]:
    """Per-tweet vector. Empty input yields zeros and a raised flag."""
    doc = list(tokens)
    if not doc:
        return np.zeros(encoder.out_dim), True
    src, lengths = _encode_sources([doc], encoder.token_index)
    with torch.no_grad():
        _, state = encoder.net.encode(src, lengths)
    return state[0].numpy().astype(np.float64), False


def _weighted_history_embedding(
    history: TokenizedHistory, encoder: SequenceEncoder, method: Method
) -> UserEmbedding:
    docs = [list(tokens) for tokens in history.tweet_tokens if tokens]
    if not docs:
        return zero_embedding(
            history.user_id, history.anchor_tweet_id, encoder.out_dim, method
        )
    vectors = np.stack([encode_state(encoder, doc)[0] for doc in docs])
    combined, cancelled = weighted_aggregate(vectors, temporal_weights(len(docs)))
    return UserEmbedding(
        user_id=history.user_id,
        anchor_tweet_id=history.anchor_tweet_id,
        vector=combined,
        method=method,
        flags=(ZERO_NORM_FLAG,) if cancelled else (),
    )


def ed_embed(history: TokenizedHistory, encoder: SequenceEncoder) -> UserEmbedding:
    if encoder.objective != "autoencode":
        raise ConfigError(
            f"ed embeddings need an autoencoding encoder, got {encoder.objective!r}"
        )
    return _weighted_history_embedding(history, encoder, Method.ED)


def summary_embed(history: TokenizedHistory, encoder: SequenceEncoder) -> UserEmbedding:
    if encoder.objective != "summarize":
        raise ConfigError(
            f"summary embeddings need a summarizing encoder, got {encoder.objective!r}"
        )
    return _weighted_history_embedding(history, encoder, Method.SUMMARY)


def teacher_forced_accuracy(
    encoder: SequenceEncoder,
    sources: Sequence[Sequence[str]],
    targets: Sequence[Sequence[str]] | None = None,
) -> float:
    """Fraction of target tokens predicted correctly given the true prefix.

    With ``targets=None`` the sources are their own targets (autoencoder
    check).
    """
    docs = [list(d) for d in sources]
    outs = docs if targets is None else [list(t) for t in targets]
    pairs = [(s, t) for s, t in zip(docs, outs) if len(s) and len(t)]
    if not pairs:
        raise ValueError("no non-empty pairs to score")
    src, lengths = _encode_sources([s for s, _ in pairs], encoder.token_index)
    dec_in, target = _encode_targets([t for _, t in pairs], encoder.token_index)
    with torch.no_grad():
        logits = encoder.net(src, lengths, dec_in)
    pred = logits.argmax(dim=-1)
    mask = target != PAD
    return float((pred[mask] == target[mask]).float().mean())
