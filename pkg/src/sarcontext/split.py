"""User-stratified bucket partitioning and train/valid/test assembly.

All tweets of one user land in one bucket, so an embedding built from that
user's history is only ever seen by one of the three splits. Buckets are
filled by a deterministic greedy pass: users in descending tweet-count order
(ties by user id), each placed into the bucket whose updated sarcastic ratio
deviates least from the global ratio, smaller buckets preferred on ties, and
exact ties broken by a seeded draw.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .corpus import Label, LabeledDataset
from .errors import ConfigError, StratificationError


@dataclass(frozen=True)
class BucketAssignment:
    user_bucket: dict[str, int]
    n_buckets: int
    seed: int

    def bucket_of(self, user_id: str) -> int:
        return self.user_bucket[user_id]

    def tweet_buckets(self, dataset: LabeledDataset) -> dict[str, int]:
        return {t.id: self.user_bucket[t.user_id] for t in dataset}


@dataclass(frozen=True)
class SplitSpec:
    """Which buckets feed each split. Defaults to 0-7 / 8 / 9."""

    train: tuple[int, ...] = (0, 1, 2, 3, 4, 5, 6, 7)
    valid: int = 8
    test: int = 9

    def all_indices(self) -> list[int]:
        return [*self.train, self.valid, self.test]

    def validate(self, n_buckets: int) -> None:
        indices = self.all_indices()
        if sorted(indices) != list(range(n_buckets)):
            raise ConfigError(
                f"split spec {indices} does not partition buckets 0..{n_buckets - 1}"
            )


def stratify_by_user(
    dataset: LabeledDataset, n_buckets: int = 10, seed: int = 0
) -> BucketAssignment:
    """Assign every user to one bucket, balancing class ratio then size.

    Deterministic for a fixed (dataset, n_buckets, seed); the seed only breaks
    exact ties between equally attractive buckets, so reruns are stable and
    different seeds generally produce different assignments.
    """
    if n_buckets < 2:
        raise ValueError(f"n_buckets must be >= 2, got {n_buckets}")
    by_user = dataset.by_user()
    if len(by_user) < n_buckets:
        raise StratificationError(
            f"{len(by_user)} distinct users < {n_buckets} buckets"
        )

    n_sarc_total, n_non_total = dataset.label_counts()
    total = n_sarc_total + n_non_total
    global_ratio = n_sarc_total / total

    user_stats = {
        user: (
            len(tweets),
            sum(1 for t in tweets if t.label is Label.SARCASTIC),
        )
        for user, tweets in by_user.items()
    }
    order = sorted(user_stats, key=lambda u: (-user_stats[u][0], u))

    rng = np.random.default_rng(seed)
    sizes = [0] * n_buckets
    sarcs = [0] * n_buckets
    assignment: dict[str, int] = {}

    for user in order:
        n_user, n_user_sarc = user_stats[user]
        best_key = None
        candidates: list[int] = []
        for b in range(n_buckets):
            ratio = (sarcs[b] + n_user_sarc) / (sizes[b] + n_user)
            key = (abs(ratio - global_ratio), sizes[b])
            if best_key is None or key < best_key:
                best_key = key
                candidates = [b]
            elif key == best_key:
                candidates.append(b)
        chosen = candidates[int(rng.integers(len(candidates)))]
        assignment[user] = chosen
        sizes[chosen] += n_user
        sarcs[chosen] += n_user_sarc

    return BucketAssignment(user_bucket=assignment, n_buckets=n_buckets, seed=seed)


def make_splits(
    dataset: LabeledDataset,
    assignment: BucketAssignment,
    spec: SplitSpec = SplitSpec(),
) -> tuple[LabeledDataset, LabeledDataset, LabeledDataset]:
    """Route tweets into (train, valid, test) by bucket membership."""
    spec.validate(assignment.n_buckets)
    train_buckets = set(spec.train)

    parts: dict[str, list] = {"train": [], "valid": [], "test": []}
    for tweet in dataset:
        bucket = assignment.user_bucket.get(tweet.user_id)
        if bucket is None:
            raise StratificationError(
                f"user {tweet.user_id!r} is not covered by the bucket assignment"
            )
        if bucket in train_buckets:
            parts["train"].append(tweet)
        elif bucket == spec.valid:
            parts["valid"].append(tweet)
        else:
            parts["test"].append(tweet)

    return tuple(
        LabeledDataset(name=f"{dataset.name}.{part}", tweets=tuple(parts[part]))
        for part in ("train", "valid", "test")
    )


def split_of_tweet(spec: SplitSpec, bucket: int) -> str:
    if bucket in spec.train:
        return "train"
    if bucket == spec.valid:
        return "valid"
    return "test"


def write_manifest(
    path: str | Path,
    dataset: LabeledDataset,
    assignment: BucketAssignment,
    spec: SplitSpec,
) -> None:
    """Write the split manifest: a header line, then {tweet_id, split} rows."""
    spec.validate(assignment.n_buckets)
    header = {
        "kind": "split-manifest",
        "seed": assignment.seed,
        "n_buckets": assignment.n_buckets,
        "spec": {"train": list(spec.train), "valid": spec.valid, "test": spec.test},
    }
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(json.dumps(header, sort_keys=True) + "\n")
        for tweet in dataset:
            bucket = assignment.user_bucket[tweet.user_id]
            row = {"tweet_id": tweet.id, "split": split_of_tweet(spec, bucket)}
            fh.write(json.dumps(row, sort_keys=True) + "\n")


def read_manifest(path: str | Path) -> tuple[dict, dict[str, str]]:
    """Return (header, tweet_id -> split name)."""
    with open(path, encoding="utf-8") as fh:
        lines = [line for line in fh.read().splitlines() if line.strip()]
    if not lines:
        raise ConfigError(f"manifest {path} is empty")
    header = json.loads(lines[0])
    if header.get("kind") != "split-manifest":
        raise ConfigError(f"{path} is not a split manifest")
    splits = {}
    for line in lines[1:]:
        row = json.loads(line)
        splits[row["tweet_id"]] = row["split"]
    return header, splits
