"""User-embedding value types and the embedding store file format."""

from __future__ import annotations

import json
from collections.abc import Iterable, Sequence
from dataclasses import dataclass, field
from enum import Enum
from pathlib import Path

import numpy as np

from ..errors import ConfigError

EMPTY_HISTORY_FLAG = "empty_history"
ZERO_NORM_FLAG = "zero_norm"

_UNIT_NORM_TOL = 1e-5


class Method(str, Enum):
    CASCADE = "cascade"
    W_CASCADE = "wcascade"
    ED = "ed"
    SUMMARY = "summary"

    def __str__(self) -> str:
        return self.value

    @classmethod
    def parse(cls, name: str) -> "Method":
        try:
            return cls(name.strip().lower().replace("-", "").replace("_", ""))
        except ValueError:
            raise ConfigError(
                f"unknown embedding method {name!r}; expected one of "
                f"{[m.value for m in cls]}"
            ) from None


# Methods whose output is normalized to unit length (or zero-flagged).
NORMALIZED_METHODS = frozenset({Method.W_CASCADE, Method.ED, Method.SUMMARY})


@dataclass(frozen=True, eq=False)
class TokenizedHistory:
    """A user's history after tokenization and tag stripping.

    ``tweet_tokens`` is chronological: the last entry is the most recent
    tweet. Empty-after-stripping tweets are dropped upstream.
    """

    user_id: str
    anchor_tweet_id: str
    tweet_tokens: tuple[tuple[str, ...], ...] = ()

    def __len__(self) -> int:
        return len(self.tweet_tokens)


@dataclass(frozen=True, eq=False)
class UserEmbedding:
    user_id: str
    anchor_tweet_id: str
    vector: np.ndarray
    method: Method
    flags: tuple[str, ...] = field(default=())

    def __post_init__(self):
        vec = np.asarray(self.vector, dtype=np.float64)
        object.__setattr__(self, "vector", vec)
        if vec.ndim != 1:
            raise ValueError("embedding vector must be one-dimensional")
        if not np.all(np.isfinite(vec)):
            raise ValueError(
                f"embedding for user {self.user_id!r} has non-finite entries"
            )
        if self.method in NORMALIZED_METHODS:
            norm = float(np.linalg.norm(vec))
            if abs(norm - 1.0) > _UNIT_NORM_TOL and norm != 0.0:
                raise ValueError(
                    f"{self.method} embedding for user {self.user_id!r} must be "
                    f"unit-norm or zero, got ||v|| = {norm:.6g}"
                )

    @property
    def dim(self) -> int:
        return self.vector.shape[0]

    def is_flagged(self, flag: str) -> bool:
        return flag in self.flags


def write_embedding_store(
    path: str | Path, embeddings: Iterable[UserEmbedding]
) -> None:
    """Text store: one JSON header line, then one row per embedding.

    Row layout: ``user_id anchor_tweet_id flags v1 ... v_d`` with floats at 9
    significant digits and flags comma-joined ('-' when none).
    """
    rows = list(embeddings)
    if not rows:
        raise ValueError("refusing to write an empty embedding store")
    method = rows[0].method
    dim = rows[0].dim
    for emb in rows:
        if emb.method != method or emb.dim != dim:
            raise ValueError("embedding store rows must share method and dimension")
        for ident in (emb.user_id, emb.anchor_tweet_id):
            if any(ch.isspace() for ch in ident):
                raise ValueError(f"identifier {ident!r} contains whitespace")

    header = {"method": method.value, "d_e": dim, "count": len(rows)}
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for emb in rows:
            flags = ",".join(emb.flags) if emb.flags else "-"
            values = " ".join(f"{v:.9g}" for v in emb.vector)
            anchor = emb.anchor_tweet_id or "-"
            fh.write(f"{emb.user_id} {anchor} {flags} {values}\n")


def load_embedding_store(path: str | Path) -> dict[str, UserEmbedding]:
    with open(path, encoding="utf-8") as fh:
        header_line = fh.readline()
        try:
            header = json.loads(header_line)
            method = Method(header["method"])
            dim = int(header["d_e"])
            count = int(header["count"])
        except (json.JSONDecodeError, KeyError, ValueError) as exc:
            raise ConfigError(f"bad embedding store header in {path}: {exc}") from exc

        store: dict[str, UserEmbedding] = {}
        for line in fh:
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 3 + dim:
                raise ConfigError(
                    f"embedding store row has {len(parts) - 3} values, expected {dim}"
                )
            user_id, anchor, flags_field = parts[:3]
            flags = () if flags_field == "-" else tuple(flags_field.split(","))
            vector = np.asarray([float(v) for v in parts[3:]])
            store[user_id] = UserEmbedding(
                user_id=user_id,
                anchor_tweet_id="" if anchor == "-" else anchor,
                vector=vector,
                method=method,
                flags=flags,
            )
    if len(store) != count:
        raise ConfigError(
            f"embedding store {path} declares {count} rows, found {len(store)}"
        )
    return store


def zero_embedding(
    user_id: str, anchor_tweet_id: str, dim: int, method: Method,
    flags: Sequence[str] = (EMPTY_HISTORY_FLAG,),
) -> UserEmbedding:
    return UserEmbedding(
        user_id=user_id,
        anchor_tweet_id=anchor_tweet_id,
        vector=np.zeros(dim),
        method=method,
        flags=tuple(flags),
    )
