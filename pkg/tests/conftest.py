import numpy as np
import pytest

from sarcontext.corpus import Label, LabeledDataset, Tweet, UserHistory


def make_tweet(i, user="u0", text="three plain words", label=Label.NON_SARCASTIC, ts=None):
    return Tweet(
        id=f"t{i:03d}",
        user_id=user,
        timestamp=1000 + i if ts is None else ts,
        text=text,
        label=label,
    )


def make_dataset(rows, name="mini"):
    """rows: iterable of (user, label) or (user, label, text)."""
    tweets = []
    for i, row in enumerate(rows):
        user, label = row[0], row[1]
        text = row[2] if len(row) > 2 else f"word{i} filler tokens here"
        tweets.append(make_tweet(i, user=user, label=label, text=text))
    return LabeledDataset(name=name, tweets=tuple(tweets))


def make_history(user, anchor_id, texts, start_ts=0):
    tweets = tuple(
        Tweet(
            id=f"{user}h{k}",
            user_id=user,
            timestamp=start_ts + 10 * k,
            text=text,
            label=None,
        )
        for k, text in enumerate(texts)
    )
    return UserHistory(user_id=user, anchor_tweet_id=anchor_id, tweets=tweets)


@pytest.fixture
def rng():
    return np.random.default_rng(1234)
