"""Personality feature extractor for user histories.

A small network reads a document as the average of its word embeddings and
predicts five binary personality traits through a tanh hidden layer. The
hidden layer, not the trait predictions, is the product: after training we
read it out as a dense feature vector for each user's merged history
document and hand it to the fusion stage.
"""

from __future__ import annotations

from collections.abc import Sequence
from dataclasses import dataclass

import numpy as np
import torch
from torch import nn

from ..errors import ConfigError

N_TRAITS = 5


class PersonalityNet(nn.Module):
    def __init__(self, vocab_size: int, emb_dim: int, hidden_dim: int):
        super().__init__()
        self.embedding = nn.Embedding(vocab_size, emb_dim, padding_idx=0)
        self.hidden = nn.Linear(emb_dim, hidden_dim)
        self.out = nn.Linear(hidden_dim, N_TRAITS)

    def features(self, indices: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        """(batch, L) int indices + (batch, L) float mask -> (batch, hidden)."""
        emb = self.embedding(indices) * mask.unsqueeze(-1)
        lengths = mask.sum(dim=1, keepdim=True).clamp(min=1.0)
        avg = emb.sum(dim=1) / lengths
        return torch.tanh(self.hidden(avg))

    def forward(self, indices: torch.Tensor, mask: torch.Tensor) -> torch.Tensor:
        return self.out(self.features(indices, mask))


@dataclass(eq=False)
class PersonalityModel:
    net: PersonalityNet
    token_index: dict[str, int]
    hidden_dim: int
    trained_traits: tuple[int, ...]


def _encode_batch(
    docs: Sequence[Sequence[str]], token_index: dict[str, int]
) -> tuple[torch.Tensor, torch.Tensor]:
    # index 0 is reserved for padding, index 1 for unknown tokens
    max_len = max(max((len(d) for d in docs), default=1), 1)
    indices = torch.zeros((len(docs), max_len), dtype=torch.long)
    mask = torch.zeros((len(docs), max_len))
    for row, doc in enumerate(docs):
        for col, token in enumerate(doc):
            indices[row, col] = token_index.get(token, 1)
            mask[row, col] = 1.0
    return indices, mask


def train_personality(
    docs: Sequence[Sequence[str]],
    traits: Sequence[Sequence[int]],
    hidden_dim: int = 100,
    emb_dim: int = 50,
    epochs: int = 50,
    learning_rate: float = 0.01,
    seed: int = 0,
) -> PersonalityModel:
    """Fit the trait network on documents with 5-way binary trait labels.

    Traits whose labels are all-0 or all-1 carry no signal; they are skipped
    in the loss (with a warning) instead of poisoning the shared hidden
    layer with a trivially saturating objective.
    """
    if hidden_dim < 1:
        raise ConfigError(f"personality hidden dimension must be >= 1, got {hidden_dim}")
    if len(docs) != len(traits):
        raise ValueError(
            f"got {len(docs)} documents but {len(traits)} trait rows"
        )
    if len(docs) < 10:
        raise ValueError(
            f"personality training needs at least 10 documents, got {len(docs)}"
        )
    label_matrix = np.asarray(traits, dtype=np.float64)
    if label_matrix.shape != (len(docs), N_TRAITS):
        raise ValueError(
            f"trait rows must each have {N_TRAITS} entries, got shape {label_matrix.shape}"
        )

    counts: dict[str, int] = {}
    for doc in docs:
        for token in doc:
            counts[token] = counts.get(token, 0) + 1
    tokens = sorted(counts, key=lambda t: (-counts[t], t))
    token_index = {t: i + 2 for i, t in enumerate(tokens)}

    active = [
        t for t in range(N_TRAITS) if 0.0 < label_matrix[:, t].mean() < 1.0
    ]
    if len(active) < N_TRAITS:
        import warnings

        skipped = sorted(set(range(N_TRAITS)) - set(active))
        warnings.warn(
            f"traits {skipped} are constant in the training labels and are "
            "excluded from the loss",
            stacklevel=2,
        )
    if not active:
        raise ValueError("every personality trait is constant; nothing to train on")

    torch.manual_seed(seed)
    net = PersonalityNet(len(tokens) + 2, emb_dim, hidden_dim)
    optimizer = torch.optim.Adam(net.parameters(), lr=learning_rate)
    loss_fn = nn.BCEWithLogitsLoss()

    indices, mask = _encode_batch(docs, token_index)
    targets = torch.tensor(label_matrix, dtype=torch.float32)
    active_idx = torch.tensor(active, dtype=torch.long)

    net.train()
    for _ in range(epochs):
        optimizer.zero_grad()
        logits = net(indices, mask)
        loss = loss_fn(logits[:, active_idx], targets[:, active_idx])
        loss.backward()
        optimizer.step()

    net.eval()
    return PersonalityModel(
        net=net,
        token_index=token_index,
        hidden_dim=hidden_dim,
        trained_traits=tuple(active),
    )


def personality_features(
    model: PersonalityModel | None, docs: Sequence[Sequence[str]]
) -> np.ndarray:
    """Hidden-layer activations for each document, as (n, hidden) float64."""
    if model is None:
        raise ConfigError(
            "no personality model available; train one before requesting features"
        )
    if not docs:
        return np.zeros((0, model.hidden_dim))
    indices, mask = _encode_batch(docs, model.token_index)
    with torch.no_grad():
        feats = model.net.features(indices, mask)
    return feats.numpy().astype(np.float64)


def trait_accuracy(
    model: PersonalityModel,
    docs: Sequence[Sequence[str]],
    traits: Sequence[Sequence[int]],
) -> float:
    """Mean accuracy over the traits the model was actually trained on."""
    label_matrix = np.asarray(traits, dtype=np.float64)
    indices, mask = _encode_batch(docs, model.token_index)
    with torch.no_grad():
        preds = (torch.sigmoid(model.net(indices, mask)) >= 0.5).numpy()
    active = list(model.trained_traits)
    return float((preds[:, active] == label_matrix[:, active]).mean())
