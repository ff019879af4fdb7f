"""Data model and ingestion for labeled tweet datasets and user histories.

File contracts (UTF-8, LF, one JSON object per line):

* dataset:   {"id", "user_id", "timestamp", "text", "label"} with label one of
  "sarcastic" / "non_sarcastic" (label may be omitted in unlabeled files).
* histories: the same keys plus "anchor_tweet_id" linking each historical
  tweet to the labeled tweet it precedes. One history per user.

Also home to distant-supervision relabeling and the manual-label vs
hashtag-presence cross-tabulation.
"""

from __future__ import annotations

import json
from collections.abc import Iterable, Iterator
from dataclasses import dataclass, field, replace
from enum import Enum
from pathlib import Path

from .errors import IntegrityError, ParseError
from .preprocess import normalize_tag_set, tokenize

DEFAULT_SARCASM_TAGS = frozenset({"sarcasm", "sarcastic", "satire", "irony"})


class Label(str, Enum):
    SARCASTIC = "sarcastic"
    NON_SARCASTIC = "non_sarcastic"

    def __str__(self) -> str:  # so json/f-strings show the wire value
        return self.value


@dataclass(frozen=True)
class Tweet:
    id: str
    user_id: str
    timestamp: int
    text: str
    label: Label | None = None

    def __post_init__(self):
        if not isinstance(self.timestamp, int) or isinstance(self.timestamp, bool):
            raise ValueError(f"tweet {self.id!r}: timestamp must be an integer")
        if self.timestamp < 0:
            raise ValueError(f"tweet {self.id!r}: timestamp must be >= 0")
        if not self.text.strip():
            raise ValueError(f"tweet {self.id!r}: text is empty")


@dataclass(frozen=True)
class LabeledDataset:
    """An ordered collection of labeled tweets with pairwise-distinct ids."""

    name: str
    tweets: tuple[Tweet, ...]

    def __post_init__(self):
        seen: set[str] = set()
        for tweet in self.tweets:
            if tweet.id in seen:
                raise IntegrityError(f"duplicate tweet id {tweet.id!r}")
            seen.add(tweet.id)
            if tweet.label is None:
                raise IntegrityError(f"tweet {tweet.id!r} has no label")

    def __len__(self) -> int:
        return len(self.tweets)

    def __iter__(self) -> Iterator[Tweet]:
        return iter(self.tweets)

    @property
    def ids(self) -> set[str]:
        return {t.id for t in self.tweets}

    def users(self) -> set[str]:
        return {t.user_id for t in self.tweets}

    def by_user(self) -> dict[str, list[Tweet]]:
        grouped: dict[str, list[Tweet]] = {}
        for tweet in self.tweets:
            grouped.setdefault(tweet.user_id, []).append(tweet)
        return grouped

    def get(self, tweet_id: str) -> Tweet | None:
        for tweet in self.tweets:
            if tweet.id == tweet_id:
                return tweet
        return None

    def label_counts(self) -> tuple[int, int]:
        """(sarcastic, non_sarcastic) counts."""
        n_sarc = sum(1 for t in self.tweets if t.label is Label.SARCASTIC)
        return n_sarc, len(self.tweets) - n_sarc


@dataclass(frozen=True)
class UserHistory:
    """Historical tweets of one user, all posted before the anchor tweet.

    Tweets are stored ascending by timestamp; the highest index is the most
    recent one. Construction sorts; cross-checks against the labeled dataset
    live in load_histories.
    """

    user_id: str
    anchor_tweet_id: str
    tweets: tuple[Tweet, ...] = field(default=())

    def __post_init__(self):
        ordered = tuple(sorted(self.tweets, key=lambda t: (t.timestamp, t.id)))
        object.__setattr__(self, "tweets", ordered)

    def __len__(self) -> int:
        return len(self.tweets)

    def __iter__(self) -> Iterator[Tweet]:
        return iter(self.tweets)


@dataclass(frozen=True)
class DisagreementTable:
    """Cross-tabulation of manual labels against sarcasm-tag presence."""

    sarcastic_with_tag: int
    sarcastic_without_tag: int
    nonsarcastic_with_tag: int
    nonsarcastic_without_tag: int

    def total(self) -> int:
        return (
            self.sarcastic_with_tag
            + self.sarcastic_without_tag
            + self.nonsarcastic_with_tag
            + self.nonsarcastic_without_tag
        )

    def as_tuple(self) -> tuple[int, int, int, int]:
        return (
            self.sarcastic_with_tag,
            self.sarcastic_without_tag,
            self.nonsarcastic_with_tag,
            self.nonsarcastic_without_tag,
        )

    def with_tag_total(self) -> int:
        return self.sarcastic_with_tag + self.nonsarcastic_with_tag


def _parse_record(line: str, line_no: int, *, require_label: bool) -> tuple[Tweet, dict]:
    try:
        raw = json.loads(line)
    except json.JSONDecodeError as exc:
        raise ParseError(f"invalid JSON ({exc.msg})", line_no) from exc
    if not isinstance(raw, dict):
        raise ParseError("record is not a JSON object", line_no)

    for key in ("id", "user_id", "text"):
        if not isinstance(raw.get(key), str):
            raise ParseError(f"missing or non-string field {key!r}", line_no)
    if "timestamp" not in raw:
        raise ParseError("missing field 'timestamp'", line_no)

    label = None
    if "label" in raw and raw["label"] is not None:
        try:
            label = Label(raw["label"])
        except ValueError:
            raise IntegrityError(
                f"line {line_no}: unknown label {raw['label']!r}"
            ) from None
    elif require_label:
        raise IntegrityError(f"line {line_no}: tweet {raw['id']!r} has no label")

    try:
        tweet = Tweet(
            id=raw["id"],
            user_id=raw["user_id"],
            timestamp=raw["timestamp"],
            text=raw["text"],
            label=label,
        )
    except ValueError as exc:
        raise IntegrityError(f"line {line_no}: {exc}") from exc
    return tweet, raw


def _iter_lines(path: str | Path):
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if line.strip():
                yield line_no, line


def load_dataset(path: str | Path) -> LabeledDataset:
    """Load a labeled dataset from JSONL, preserving file order."""
    tweets: list[Tweet] = []
    seen: set[str] = set()
    for line_no, line in _iter_lines(path):
        tweet, _ = _parse_record(line, line_no, require_label=True)
        if tweet.id in seen:
            raise IntegrityError(f"line {line_no}: duplicate tweet id {tweet.id!r}")
        seen.add(tweet.id)
        tweets.append(tweet)
    return LabeledDataset(name=Path(path).stem, tweets=tuple(tweets))


def save_dataset(dataset: LabeledDataset, path: str | Path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for t in dataset:
            rec = {
                "id": t.id,
                "user_id": t.user_id,
                "timestamp": t.timestamp,
                "text": t.text,
                "label": t.label.value,
            }
            fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def load_histories(
    path: str | Path, dataset: LabeledDataset
) -> dict[str, UserHistory]:
    """Load user histories and validate them against ``dataset``.

    Every history tweet must predate its anchor (strictly) and must not
    appear in the labeled set. Returns one UserHistory per user.
    """
    anchors = {t.id: t for t in dataset}
    dataset_ids = dataset.ids

    rows: dict[str, tuple[str, list[Tweet]]] = {}  # user -> (anchor_id, tweets)
    seen_ids: set[str] = set()
    for line_no, line in _iter_lines(path):
        tweet, raw = _parse_record(line, line_no, require_label=False)
        anchor_id = raw.get("anchor_tweet_id")
        if not isinstance(anchor_id, str):
            raise ParseError("missing or non-string field 'anchor_tweet_id'", line_no)
        if tweet.id in dataset_ids:
            raise IntegrityError(
                f"line {line_no}: history tweet {tweet.id!r} also appears in the "
                f"labeled dataset (histories must be disjoint)"
            )
        if tweet.id in seen_ids:
            raise IntegrityError(f"line {line_no}: duplicate history tweet id {tweet.id!r}")
        seen_ids.add(tweet.id)

        anchor = anchors.get(anchor_id)
        if anchor is None:
            raise IntegrityError(
                f"line {line_no}: anchor tweet {anchor_id!r} not in dataset"
            )
        if anchor.user_id != tweet.user_id:
            raise IntegrityError(
                f"line {line_no}: history tweet user {tweet.user_id!r} does not "
                f"match anchor's user {anchor.user_id!r}"
            )
        if tweet.timestamp >= anchor.timestamp:
            raise IntegrityError(
                f"line {line_no}: history tweet {tweet.id!r} (t={tweet.timestamp}) "
                f"not strictly before anchor {anchor_id!r} (t={anchor.timestamp})"
            )

        if tweet.user_id in rows:
            prev_anchor, tweets = rows[tweet.user_id]
            if prev_anchor != anchor_id:
                raise IntegrityError(
                    f"line {line_no}: user {tweet.user_id!r} has histories for "
                    f"two anchors ({prev_anchor!r}, {anchor_id!r})"
                )
            tweets.append(tweet)
        else:
            rows[tweet.user_id] = (anchor_id, [tweet])

    return {
        user: UserHistory(user_id=user, anchor_tweet_id=anchor_id, tweets=tuple(tweets))
        for user, (anchor_id, tweets) in rows.items()
    }


def save_histories(histories: dict[str, UserHistory], path: str | Path) -> None:
    """Write histories as JSONL, one row per history tweet; users sorted."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        for user_id in sorted(histories):
            history = histories[user_id]
            for t in history.tweets:
                rec = {
                    "id": t.id,
                    "user_id": t.user_id,
                    "timestamp": t.timestamp,
                    "text": t.text,
                    "anchor_tweet_id": history.anchor_tweet_id,
                }
                fh.write(json.dumps(rec, ensure_ascii=False) + "\n")


def contains_tag(text: str, tag_set: Iterable[str] = DEFAULT_SARCASM_TAGS) -> bool:
    """True iff the tokenized text contains a whole hashtag from ``tag_set``."""
    tags = normalize_tag_set(tag_set)
    return any(
        t.startswith("#") and t[1:].lower() in tags for t in tokenize(text)
    )


def relabel_distant(
    dataset: LabeledDataset, tag_set: Iterable[str] = DEFAULT_SARCASM_TAGS
) -> LabeledDataset:
    """Relabel every tweet by hashtag presence (distant supervision).

    Original labels are discarded; the result's name carries a '#' suffix.
    Idempotent as long as the marking tags themselves are left in the text.
    """
    tags = normalize_tag_set(tag_set)
    if not tags:
        raise ValueError("tag_set must be non-empty")
    relabeled = tuple(
        replace(
            t,
            label=Label.SARCASTIC if contains_tag(t.text, tags) else Label.NON_SARCASTIC,
        )
        for t in dataset
    )
    return LabeledDataset(name=dataset.name + "#", tweets=relabeled)


def disagreement_table(
    dataset: LabeledDataset, tag_set: Iterable[str] = DEFAULT_SARCASM_TAGS
) -> DisagreementTable:
    """Cross-tabulate manual labels against sarcasm-tag presence."""
    tags = normalize_tag_set(tag_set)
    if not tags:
        raise ValueError("tag_set must be non-empty")
    counts = [[0, 0], [0, 0]]  # [label is sarcastic][has tag]
    for t in dataset:
        row = 0 if t.label is Label.SARCASTIC else 1
        col = 0 if contains_tag(t.text, tags) else 1
        counts[row][col] += 1
    return DisagreementTable(
        sarcastic_with_tag=counts[0][0],
        sarcastic_without_tag=counts[0][1],
        nonsarcastic_with_tag=counts[1][0],
        nonsarcastic_without_tag=counts[1][1],
    )
