"""Deterministic synthetic corpora for desk-scale experiments and tests.

The original tweet collections are unrecoverable, so experiments run on
constructed corpora with known structure: a dataset shaped like the
hand-labeled collection (same totals, same hashtag-disagreement cells), a
corpus where the label signal lives only in user histories, a corpus mixing
a lexical cue with a user prior, and a tiny separable set for overfit
sanity checks.
"""

from __future__ import annotations

import math

import numpy as np

from .corpus import Label, LabeledDataset, Tweet, UserHistory
from .preprocess import is_word

_FILLER = (
    "the", "a", "my", "this", "that", "morning", "evening", "coffee", "rain",
    "train", "meeting", "lunch", "phone", "battery", "update", "traffic",
    "weather", "game", "show", "book", "song", "week", "monday", "friday",
    "work", "home", "again", "really", "just", "still", "always", "never",
    "great", "fine", "late", "early", "long", "slow", "new", "old",
)

_TAG_CYCLE = ("#sarcasm", "#sarcastic", "#satire", "#irony")

# Frozen knobs for the hand-labeled-collection fixture. Under this salt and
# split seed the stratifier leaves the two prolific authors in buckets 8 and
# 5, so that bucket choice reproduces the documented 551/88/62 sizes.
# Regenerating with these values is deterministic.
RILOFF_SALT = 0
RILOFF_SPLIT_SEED = 0
RILOFF_VALID_BUCKET = 8
RILOFF_TEST_BUCKET = 5


def _filler_text(rng: np.random.Generator, n_words: int) -> str:
    words = rng.choice(len(_FILLER), size=n_words)
    return " ".join(_FILLER[int(w)] for w in words)


def _histories_for(
    rng: np.random.Generator,
    dataset: LabeledDataset,
    id_prefix: str,
    per_user: tuple[int, int],
    text_fn=None,
) -> dict[str, UserHistory]:
    """One history per user, anchored at the user's earliest dataset tweet."""
    histories: dict[str, UserHistory] = {}
    counter = 0
    for user_id, tweets in sorted(dataset.by_user().items()):
        anchor = min(tweets, key=lambda t: (t.timestamp, t.id))
        n = int(rng.integers(per_user[0], per_user[1] + 1))
        rows = []
        for k in range(n):
            counter += 1
            if text_fn is None:
                text = _filler_text(rng, int(rng.integers(3, 8)))
            else:
                text = text_fn(user_id, k)
            rows.append(
                Tweet(
                    id=f"{id_prefix}{counter:05d}",
                    user_id=user_id,
                    timestamp=anchor.timestamp - 100 * (n - k),
                    text=text,
                )
            )
        histories[user_id] = UserHistory(
            user_id=user_id, anchor_tweet_id=anchor.id, tweets=tuple(rows)
        )
    return histories


def riloff_like_corpus(
    salt: int = RILOFF_SALT,
) -> tuple[LabeledDataset, dict[str, UserHistory]]:
    """Fixture matching the hand-labeled collection's published statistics.

    701 tweets (192 sarcastic / 509 not); hashtag agreement cells
    (190, 2, 217, 292); every text keeps at least 3 words after hashtag
    removal; each user carries a pre-anchor history.
    """
    rng = np.random.default_rng(776_000 + salt)

    # Two prolific always-sarcastic authors sized to the published
    # validation/test counts; they stay isolated under the greedy
    # stratifier because every mixed bucket is a worse ratio fit. The rest
    # are light accounts carrying the remaining 42 sarcastic tweets.
    counts: list[int] = [88, 62]
    while sum(counts) < 701:
        counts.append(int(rng.integers(1, min(9, 701 - sum(counts) + 1))))
    # owner user index per tweet, users interleaved in timestamp order
    owners: list[int] = []
    for user_idx, count in enumerate(counts):
        owners.extend([user_idx] * count)
    rng.shuffle(owners)

    n = len(owners)
    heavy_positions = [i for i, o in enumerate(owners) if o in (0, 1)]
    light_positions = [i for i, o in enumerate(owners) if o not in (0, 1)]
    sarcastic_at = set(heavy_positions)
    sarcastic_at.update(
        int(light_positions[i])
        for i in rng.choice(len(light_positions), size=42, replace=False)
    )
    sarc_list = sorted(sarcastic_at)
    non_list = [i for i in range(n) if i not in sarcastic_at]
    tagged = set(
        int(sarc_list[i]) for i in rng.choice(192, size=190, replace=False)
    )
    tagged.update(
        int(non_list[i]) for i in rng.choice(len(non_list), size=217, replace=False)
    )

    tweets = []
    tag_i = 0
    for i, owner in enumerate(owners):
        text = _filler_text(rng, int(rng.integers(4, 9)))
        if i in tagged:
            text = f"{text} {_TAG_CYCLE[tag_i % len(_TAG_CYCLE)]}"
            tag_i += 1
        label = Label.SARCASTIC if i in sarcastic_at else Label.NON_SARCASTIC
        tweets.append(
            Tweet(
                id=f"r{i:04d}",
                user_id=f"ru{owner:03d}",
                timestamp=10_000 + 10 * i,
                text=text,
                label=label,
            )
        )
    dataset = LabeledDataset(name="riloff-fixture", tweets=tuple(tweets))
    histories = _histories_for(rng, dataset, "rh", (2, 5))
    return dataset, histories


MARKER_TOKEN = "owlish"


def planted_prior_corpus(
    seed: int,
    n_users: int = 60,
    tweets_per_user: int = 10,
    history_len: int = 8,
    marker_rate: float = 0.8,
) -> tuple[LabeledDataset, dict[str, UserHistory]]:
    """Label signal lives only in user histories, never in the tweet text.

    Half the users are sarcastic-class: all their labeled tweets are
    sarcastic and a marker token appears in at least ``marker_rate`` of
    their history tweets. The other half's histories carry the marker only
    at a 5% background rate. Labeled texts are class-independent filler.
    """
    rng = np.random.default_rng(880_000 + seed)
    tweets = []
    ts = 50_000
    for u in range(n_users):
        sarc_user = u < n_users // 2
        user_id = f"pu{u:03d}"
        for k in range(tweets_per_user):
            ts += 10
            tweets.append(
                Tweet(
                    id=f"p{u:03d}_{k:02d}",
                    user_id=user_id,
                    timestamp=ts,
                    text=_filler_text(rng, int(rng.integers(4, 8))),
                    label=Label.SARCASTIC if sarc_user else Label.NON_SARCASTIC,
                )
            )
    dataset = LabeledDataset(name="planted-prior", tweets=tuple(tweets))

    n_marked = math.ceil(marker_rate * history_len)

    def history_text(user_id: str, k: int) -> str:
        u = int(user_id[2:])
        sarc_user = u < n_users // 2
        base = _filler_text(rng, int(rng.integers(3, 7)))
        if sarc_user:
            # mark the most recent tweets; recency-weighted aggregation
            # then sees the marker at full strength
            marked = k >= history_len - n_marked
        else:
            marked = rng.random() < 0.05
        return f"{MARKER_TOKEN} {base}" if marked else base

    histories = _histories_for(
        rng, dataset, "ph", (history_len, history_len), text_fn=history_text
    )
    return dataset, histories


CUE_TOKEN = "yeahsure"


def mixed_signal_corpus(
    seed: int,
    n_users: int = 80,
    tweets_per_user: int = 12,
    history_len: int = 8,
) -> tuple[LabeledDataset, dict[str, UserHistory]]:
    """Half the labels follow a lexical cue, half follow the user prior.

    Each tweet independently picks its mode: in cue mode the label is a
    fair coin and the cue token appears exactly when the label is
    sarcastic; in prior mode the label is the user's class and the text is
    plain filler. A text-only model can recover only the cue share, a
    user-only model only the prior share; seeing both signals should beat
    either alone.
    """
    rng = np.random.default_rng(990_000 + seed)
    tweets = []
    ts = 90_000
    for u in range(n_users):
        sarc_user = u < n_users // 2
        user_id = f"mu{u:03d}"
        for k in range(tweets_per_user):
            ts += 10
            text = _filler_text(rng, int(rng.integers(4, 8)))
            if rng.random() < 0.5:  # cue mode
                sarc = bool(rng.random() < 0.5)
                if sarc:
                    text = f"{text} {CUE_TOKEN}"
            else:  # prior mode
                sarc = sarc_user
            tweets.append(
                Tweet(
                    id=f"m{u:03d}_{k:02d}",
                    user_id=user_id,
                    timestamp=ts,
                    text=text,
                    label=Label.SARCASTIC if sarc else Label.NON_SARCASTIC,
                )
            )
    dataset = LabeledDataset(name="mixed-signal", tweets=tuple(tweets))

    def history_text(user_id: str, k: int) -> str:
        u = int(user_id[2:])
        sarc_user = u < n_users // 2
        base = _filler_text(rng, int(rng.integers(3, 7)))
        return f"{MARKER_TOKEN} {base}" if sarc_user and k % 4 != 0 else base

    histories = _histories_for(
        rng, dataset, "mh", (history_len, history_len), text_fn=history_text
    )
    return dataset, histories


def toy_overfit_corpus(seed: int = 0) -> LabeledDataset:
    """64 balanced tweets, separable by one cue word; for overfit checks."""
    rng = np.random.default_rng(7_700 + seed)
    tweets = []
    for i in range(64):
        sarc = i % 2 == 0
        text = _filler_text(rng, 5)
        text = f"{text} {CUE_TOKEN}" if sarc else f"{text} anyway"
        tweets.append(
            Tweet(
                id=f"toy{i:02d}",
                user_id=f"tu{i % 8}",
                timestamp=1_000 + i,
                text=text,
                label=Label.SARCASTIC if sarc else Label.NON_SARCASTIC,
            )
        )
    return LabeledDataset(name="toy-overfit", tweets=tuple(tweets))


def prefix_summary(tokens: list[str]) -> list[str]:
    """Stand-in summarization target: the first ⌈w/3⌉ content words,
    where w counts the word-like tokens in the input."""
    content = [t for t in tokens if is_word(t)]
    if not content:
        return []
    return content[: math.ceil(len(content) / 3)]
