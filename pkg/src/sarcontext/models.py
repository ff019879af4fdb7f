"""Tweet classifiers: content-only baseline, user-only and combined heads.

The baseline scores each tweet from its words alone: every word pair gets a
single-dimension score, each word keeps the best score among its pairs,
those maxima become softmax attention over the words, and the attention-
weighted word sum is concatenated with the final state of a recurrent pass.
The other two families consume a per-user embedding vector, either alone
(exclusive) or concatenated with the baseline's features (inclusive).

All heads are single linear layers producing two logits; class index 0 is
non-sarcastic, index 1 sarcastic, and exact probability ties resolve to
non-sarcastic.
"""

from __future__ import annotations

import copy
import json
import math
from collections.abc import Sequence
from dataclasses import asdict, dataclass, field
from pathlib import Path

import numpy as np
import torch
from torch import nn
from torch.nn.utils.rnn import pack_padded_sequence

from .corpus import Label
from .embed.types import Method
from .errors import ConfigError, TrainingError
from .evaluation import binary_f1
from .preprocess import PAD_INDEX

CLASSES = (Label.NON_SARCASTIC, Label.SARCASTIC)
_METHOD_DISPLAY = {
    Method.CASCADE: "CASCADE",
    Method.W_CASCADE: "W-CASCADE",
    Method.ED: "ED",
    Method.SUMMARY: "SUMMARY",
}


@dataclass(frozen=True)
class ModelKind:
    """One of: the text-only baseline, EX-<method>, IN-<method>."""

    mode: str  # "siarn" | "ex" | "in"
    method: Method | None = None

    def __post_init__(self):
        if self.mode not in ("siarn", "ex", "in"):
            raise ConfigError(f"unknown model mode {self.mode!r}")
        if (self.mode == "siarn") != (self.method is None):
            raise ConfigError("embedding-based kinds need a method; siarn takes none")

    @classmethod
    def parse(cls, name: str) -> "ModelKind":
        text = name.strip().lower()
        if text == "siarn":
            return cls("siarn")
        for prefix in ("ex-", "in-"):
            if text.startswith(prefix):
                return cls(prefix[:2], Method.parse(text[len(prefix):]))
        raise ConfigError(
            f"unknown model {name!r}; expected siarn, ex-<method> or in-<method>"
        )

    @property
    def name(self) -> str:
        if self.mode == "siarn":
            return "SIARN"
        return f"{self.mode.upper()}-{_METHOD_DISPLAY[self.method]}"

    @property
    def needs_text(self) -> bool:
        return self.mode in ("siarn", "in")

    @property
    def needs_embedding(self) -> bool:
        return self.mode in ("ex", "in")


@dataclass(frozen=True)
class ExperimentConfig:
    word_dim: int = 100
    composition_dim: int = 100
    embedding_dim: int = 100
    epochs: int = 30
    learning_rate: float = 0.001
    batch_size: int = 16
    seed: int = 0

    def __post_init__(self):
        for name in ("word_dim", "composition_dim", "embedding_dim", "epochs", "batch_size"):
            if getattr(self, name) < 1:
                raise ConfigError(f"{name} must be >= 1, got {getattr(self, name)}")
        if self.learning_rate <= 0:
            raise ConfigError(f"learning_rate must be > 0, got {self.learning_rate}")
        if self.seed < 0:
            raise ConfigError(f"seed must be >= 0, got {self.seed}")


@dataclass(frozen=True)
class Example:
    """One classifiable tweet: encoded tokens plus its author's embedding."""

    tweet_id: str
    user_id: str
    indices: tuple[int, ...]
    label: Label | None = None
    embedding: np.ndarray | None = None


class SiarnExtractor(nn.Module):
    """Intra-attention + recurrent composition feature extractor."""

    def __init__(
        self,
        vocab_size: int,
        word_dim: int = 100,
        composition_dim: int = 100,
        word_matrix: np.ndarray | None = None,
    ):
        super().__init__()
        self.embedding = nn.Embedding(vocab_size, word_dim, padding_idx=PAD_INDEX)
        if word_matrix is not None:
            if word_matrix.shape != (vocab_size, word_dim):
                raise ConfigError(
                    f"word matrix shape {word_matrix.shape} does not match "
                    f"(vocab={vocab_size}, dim={word_dim})"
                )
            with torch.no_grad():
                self.embedding.weight.copy_(torch.as_tensor(word_matrix))
        self.pair = nn.Linear(2 * word_dim, 1)
        self.gru = nn.GRU(word_dim, composition_dim, batch_first=True)
        self.word_dim = word_dim
        self.composition_dim = composition_dim

    @property
    def out_dim(self) -> int:
        return self.word_dim + self.composition_dim

    def attention(self, indices: torch.Tensor, lengths: torch.Tensor) -> torch.Tensor:
        """Per-word attention weights, (B, L); pad positions get weight 0.

        Each unordered word pair {i, j} with i < j is scored once from the
        concatenation [w_i; w_j]; both members see that score when taking
        their per-word maximum. A single-token input has no pairs and its
        pre-softmax maximum defaults to 0, making its attention [1.0].
        """
        emb = self.embedding(indices)  # (B, L, D)
        B, L, D = emb.shape
        left = emb.unsqueeze(2).expand(B, L, L, D)
        right = emb.unsqueeze(1).expand(B, L, L, D)
        raw = torch.sigmoid(
            self.pair(torch.cat([left, right], dim=-1)).squeeze(-1)
        )  # raw[b, i, j] scores the ordered pair (w_i, w_j)
        upper = torch.triu(
            torch.ones(L, L, dtype=torch.bool, device=indices.device), diagonal=1
        )
        sym = raw.masked_fill(~upper, 0.0)
        sym = sym + sym.transpose(1, 2)  # one score per unordered pair, 0 diagonal

        token_valid = torch.arange(L, device=indices.device).unsqueeze(0) < lengths.unsqueeze(1)
        pair_valid = (
            token_valid.unsqueeze(2)
            & token_valid.unsqueeze(1)
            & ~torch.eye(L, dtype=torch.bool, device=indices.device)
        )
        masked = sym.masked_fill(~pair_valid, float("-inf"))
        rowmax = masked.max(dim=2).values
        has_pair = pair_valid.any(dim=2)
        rowmax = torch.where(has_pair, rowmax, torch.zeros_like(rowmax))
        scores = rowmax.masked_fill(~token_valid, float("-inf"))
        return torch.softmax(scores, dim=1)

    def forward(self, indices: torch.Tensor, lengths: torch.Tensor) -> torch.Tensor:
        emb = self.embedding(indices)
        attn = self.attention(indices, lengths)
        v_a = (attn.unsqueeze(-1) * emb).sum(dim=1)
        packed = pack_padded_sequence(
            emb, lengths.cpu(), batch_first=True, enforce_sorted=False
        )
        _, h_n = self.gru(packed)
        v_c = h_n[0]
        return torch.cat([v_a, v_c], dim=1)


class TweetClassifier(nn.Module):
    def __init__(
        self,
        kind: ModelKind,
        vocab_size: int,
        config: ExperimentConfig,
        word_matrix: np.ndarray | None = None,
    ):
        super().__init__()
        self.kind = kind
        self.extractor = (
            SiarnExtractor(
                vocab_size, config.word_dim, config.composition_dim, word_matrix
            )
            if kind.needs_text
            else None
        )
        in_features = 0
        if kind.needs_text:
            in_features += self.extractor.out_dim
        if kind.needs_embedding:
            in_features += config.embedding_dim
        self.head = nn.Linear(in_features, len(CLASSES))

    def exclusive_logits(self, embeddings: torch.Tensor) -> torch.Tensor:
        """User-embedding-only path. Deliberately never sees token indices."""
        if self.kind.mode != "ex":
            raise ConfigError(f"exclusive_logits called on a {self.kind.name} model")
        if embeddings.shape[-1] != self.head.in_features:
            raise ConfigError(
                f"embedding dim {embeddings.shape[-1]} does not match head "
                f"({self.head.in_features})"
            )
        return self.head(embeddings)

    def siarn_logits(self, indices: torch.Tensor, lengths: torch.Tensor) -> torch.Tensor:
        if self.kind.mode != "siarn":
            raise ConfigError(f"siarn_logits called on a {self.kind.name} model")
        return self.head(self.extractor(indices, lengths))

    def inclusive_logits(
        self, indices: torch.Tensor, lengths: torch.Tensor, embeddings: torch.Tensor
    ) -> torch.Tensor:
        if self.kind.mode != "in":
            raise ConfigError(f"inclusive_logits called on a {self.kind.name} model")
        features = self.extractor(indices, lengths)
        if embeddings.shape[-1] != self.head.in_features - self.extractor.out_dim:
            raise ConfigError(
                f"embedding dim {embeddings.shape[-1]} does not match head "
                f"({self.head.in_features - self.extractor.out_dim})"
            )
        return self.head(torch.cat([features, embeddings], dim=1))

    def batch_logits(
        self,
        indices: torch.Tensor | None,
        lengths: torch.Tensor | None,
        embeddings: torch.Tensor | None,
    ) -> torch.Tensor:
        if self.kind.mode == "ex":
            return self.exclusive_logits(embeddings)
        if self.kind.mode == "siarn":
            return self.siarn_logits(indices, lengths)
        return self.inclusive_logits(indices, lengths, embeddings)


@dataclass(frozen=True)
class Prediction:
    tweet_id: str
    p_sarcastic: float
    p_non_sarcastic: float
    label: Label

    def __post_init__(self):
        total = self.p_sarcastic + self.p_non_sarcastic
        if not (
            self.p_sarcastic >= 0.0
            and self.p_non_sarcastic >= 0.0
            and abs(total - 1.0) <= 1e-6
        ):
            raise ValueError(
                f"probabilities ({self.p_non_sarcastic}, {self.p_sarcastic}) "
                "are not a 2-simplex point"
            )

    @property
    def probabilities(self) -> tuple[float, float]:
        """(p_non_sarcastic, p_sarcastic), matching the class index order."""
        return (self.p_non_sarcastic, self.p_sarcastic)


@dataclass(frozen=True)
class PredictionFailure:
    tweet_id: str
    error: str


@dataclass(frozen=True)
class EpochMetrics:
    epoch: int
    train_loss: float
    valid_f1: float


@dataclass(eq=False)
class TrainedModel:
    classifier: TweetClassifier
    kind: ModelKind
    config: ExperimentConfig
    vocab_size: int
    metrics: tuple[EpochMetrics, ...]
    selected_epoch: int


def _model_dtype(classifier: TweetClassifier) -> torch.dtype:
    return next(classifier.parameters()).dtype


def _batch_tensors(
    examples: Sequence[Example], kind: ModelKind, dtype: torch.dtype
) -> tuple[torch.Tensor | None, torch.Tensor | None, torch.Tensor | None]:
    indices = lengths = embeddings = None
    if kind.needs_text:
        max_len = max(len(ex.indices) for ex in examples)
        indices = torch.full((len(examples), max_len), PAD_INDEX, dtype=torch.long)
        lengths = torch.zeros(len(examples), dtype=torch.long)
        for row, ex in enumerate(examples):
            indices[row, : len(ex.indices)] = torch.tensor(ex.indices, dtype=torch.long)
            lengths[row] = len(ex.indices)
    if kind.needs_embedding:
        embeddings = torch.tensor(
            np.stack([ex.embedding for ex in examples]), dtype=dtype
        )
    return indices, lengths, embeddings


def _check_examples(examples: Sequence[Example], kind: ModelKind, role: str) -> None:
    if kind.needs_text:
        empty = [ex.tweet_id for ex in examples if not ex.indices]
        if empty:
            raise ValueError(
                f"{role} examples with no tokens for a text model: {empty[:5]}"
            )
    if kind.needs_embedding:
        missing = [ex.tweet_id for ex in examples if ex.embedding is None]
        if missing:
            raise ValueError(
                f"{role} examples missing user embeddings for {kind.name}: {missing[:5]}"
            )


def _f1_on(
    classifier: TweetClassifier,
    examples: Sequence[Example],
    batch_size: int,
) -> float:
    kind = classifier.kind
    dtype = _model_dtype(classifier)
    tp = fp = fn = 0
    classifier.eval()
    with torch.no_grad():
        for start in range(0, len(examples), batch_size):
            batch = examples[start : start + batch_size]
            logits = classifier.batch_logits(*_batch_tensors(batch, kind, dtype))
            probs = torch.softmax(logits, dim=1)
            pred_sarc = probs[:, 1] > probs[:, 0]
            for ex, hit in zip(batch, pred_sarc.tolist()):
                truth = ex.label == Label.SARCASTIC
                if hit and truth:
                    tp += 1
                elif hit:
                    fp += 1
                elif truth:
                    fn += 1
    classifier.train()
    return binary_f1(tp, fp, fn)


def train_classifier(
    kind: ModelKind,
    train_examples: Sequence[Example],
    valid_examples: Sequence[Example],
    config: ExperimentConfig,
    vocab_size: int,
    word_matrix: np.ndarray | None = None,
) -> TrainedModel:
    """Train one model for exactly config.epochs epochs.

    Cross-entropy, RMSProp (decay 0.9, eps 1e-8), seeded per-epoch shuffling,
    last partial batch included. The returned parameters come from the epoch
    with the best validation F1 (earliest wins on ties).
    """
    train_examples = list(train_examples)
    valid_examples = list(valid_examples)
    if not train_examples:
        raise ValueError("training set is empty")
    if not valid_examples:
        raise ValueError("validation set is empty; checkpoint selection needs one")
    for role, examples in (("training", train_examples), ("validation", valid_examples)):
        unlabeled = [ex.tweet_id for ex in examples if ex.label is None]
        if unlabeled:
            raise ValueError(f"unlabeled {role} examples: {unlabeled[:5]}")
        _check_examples(examples, kind, role)
    if kind.needs_embedding:
        for ex in train_examples + valid_examples:
            if ex.embedding.shape != (config.embedding_dim,):
                raise ConfigError(
                    f"embedding for {ex.tweet_id} has shape {ex.embedding.shape}, "
                    f"expected ({config.embedding_dim},)"
                )

    torch.manual_seed(config.seed)
    torch.set_num_threads(1)  # keeps reruns bit-identical
    classifier = TweetClassifier(kind, vocab_size, config, word_matrix)
    dtype = _model_dtype(classifier)
    optimizer = torch.optim.RMSprop(
        classifier.parameters(), lr=config.learning_rate, alpha=0.9, eps=1e-8
    )
    loss_fn = nn.CrossEntropyLoss()

    targets = torch.tensor(
        [1 if ex.label == Label.SARCASTIC else 0 for ex in train_examples],
        dtype=torch.long,
    )
    rng = np.random.default_rng(config.seed)
    order = np.arange(len(train_examples))

    metrics: list[EpochMetrics] = []
    best_f1 = -1.0
    best_epoch = 0
    best_state: dict | None = None
    classifier.train()
    for epoch in range(1, config.epochs + 1):
        rng.shuffle(order)
        epoch_loss = 0.0
        for start in range(0, len(order), config.batch_size):
            chosen = order[start : start + config.batch_size]
            batch = [train_examples[i] for i in chosen]
            optimizer.zero_grad()
            logits = classifier.batch_logits(*_batch_tensors(batch, kind, dtype))
            loss = loss_fn(logits, targets[chosen])
            loss_value = loss.item()
            if not math.isfinite(loss_value):
                raise TrainingError(
                    f"non-finite loss {loss_value} for {kind.name} at epoch {epoch}, "
                    f"batch starting {start} (lr={config.learning_rate}, "
                    f"seed={config.seed})"
                )
            loss.backward()
            optimizer.step()
            epoch_loss += loss_value * len(batch)
        valid_f1 = _f1_on(classifier, valid_examples, config.batch_size)
        metrics.append(
            EpochMetrics(
                epoch=epoch,
                train_loss=epoch_loss / len(train_examples),
                valid_f1=valid_f1,
            )
        )
        if valid_f1 > best_f1:
            best_f1 = valid_f1
            best_epoch = epoch
            best_state = copy.deepcopy(classifier.state_dict())

    classifier.load_state_dict(best_state)
    classifier.eval()
    return TrainedModel(
        classifier=classifier,
        kind=kind,
        config=config,
        vocab_size=vocab_size,
        metrics=tuple(metrics),
        selected_epoch=best_epoch,
    )


def predict(
    trained: TrainedModel,
    examples: Sequence[Example],
    batch_size: int | None = None,
) -> list[Prediction | PredictionFailure]:
    """One entry per input, in input order.

    Inputs the model cannot score (no embedding for an embedding-based kind,
    no tokens for a text kind) become failure entries; the rest of the run
    is unaffected.
    """
    examples = list(examples)
    kind = trained.kind
    size = trained.config.batch_size if batch_size is None else batch_size
    if size < 1:
        raise ConfigError(f"batch size must be >= 1, got {size}")

    results: list[Prediction | PredictionFailure | None] = [None] * len(examples)
    scoreable: list[tuple[int, Example]] = []
    for pos, ex in enumerate(examples):
        if kind.needs_embedding and ex.embedding is None:
            results[pos] = PredictionFailure(ex.tweet_id, "no user embedding available")
        elif kind.needs_text and not ex.indices:
            results[pos] = PredictionFailure(ex.tweet_id, "empty token sequence")
        else:
            scoreable.append((pos, ex))

    classifier = trained.classifier
    classifier.eval()
    dtype = _model_dtype(classifier)
    with torch.no_grad():
        for start in range(0, len(scoreable), size):
            chunk = scoreable[start : start + size]
            batch = [ex for _, ex in chunk]
            logits = classifier.batch_logits(*_batch_tensors(batch, kind, dtype))
            probs = torch.softmax(logits.double(), dim=1)
            for (pos, ex), row in zip(chunk, probs.tolist()):
                p_non, p_sarc = row
                label = Label.SARCASTIC if p_sarc > p_non else Label.NON_SARCASTIC
                results[pos] = Prediction(
                    tweet_id=ex.tweet_id,
                    p_sarcastic=p_sarc,
                    p_non_sarcastic=p_non,
                    label=label,
                )
    return results


def write_predictions(
    path: str | Path, predictions: Sequence[Prediction | PredictionFailure]
) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for pred in predictions:
            if isinstance(pred, PredictionFailure):
                record = {"tweet_id": pred.tweet_id, "error": pred.error}
            else:
                record = {
                    "tweet_id": pred.tweet_id,
                    "p_sarcastic": pred.p_sarcastic,
                    "label": str(pred.label),
                }
            fh.write(json.dumps(record, sort_keys=True) + "\n")


def save_checkpoint(
    trained: TrainedModel, path: str | Path, sidecar_path: str | Path | None = None
) -> None:
    """Write the parameter archive plus a JSON sidecar describing the run."""
    path = Path(path)
    payload = {
        "model_kind": trained.kind.name,
        "config": asdict(trained.config),
        "vocab_size": trained.vocab_size,
        "state_dict": trained.classifier.state_dict(),
        "metrics": [asdict(m) for m in trained.metrics],
        "selected_epoch": trained.selected_epoch,
    }
    torch.save(payload, path)
    sidecar = {
        "model_kind": trained.kind.name,
        "config": asdict(trained.config),
        "metrics": [asdict(m) for m in trained.metrics],
        "selected_epoch": trained.selected_epoch,
    }
    sidecar_file = Path(sidecar_path) if sidecar_path else path.with_name(path.name + ".json")
    with open(sidecar_file, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(sidecar, fh, indent=2, sort_keys=True)
        fh.write("\n")


def load_checkpoint(path: str | Path) -> TrainedModel:
    payload = torch.load(path, weights_only=True)
    kind = ModelKind.parse(payload["model_kind"])
    config = ExperimentConfig(**payload["config"])
    classifier = TweetClassifier(kind, payload["vocab_size"], config)
    classifier.load_state_dict(payload["state_dict"])
    classifier.eval()
    return TrainedModel(
        classifier=classifier,
        kind=kind,
        config=config,
        vocab_size=payload["vocab_size"],
        metrics=tuple(EpochMetrics(**m) for m in payload["metrics"]),
        selected_epoch=payload["selected_epoch"],
    )
