import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from sarcontext.corpus import Label, LabeledDataset, Tweet
from sarcontext.errors import ConfigError, StratificationError
from sarcontext.split import (
    BucketAssignment,
    SplitSpec,
    make_splits,
    read_manifest,
    split_of_tweet,
    stratify_by_user,
    write_manifest,
)


def _tweet(i, user, label):
    return Tweet(id=f"t{i:03d}", user_id=user, timestamp=i, text="a b c", label=label)


def _dataset(labels_by_user, name="d"):
    """labels_by_user: {user: [labels]}"""
    tweets, i = [], 0
    for user in sorted(labels_by_user):
        for label in labels_by_user[user]:
            tweets.append(_tweet(i, user, label))
            i += 1
    return LabeledDataset(name=name, tweets=tuple(tweets))


S, N = Label.SARCASTIC, Label.NON_SARCASTIC


def _bucket_stats(ds, assignment):
    sizes = [0] * assignment.n_buckets
    sarcs = [0] * assignment.n_buckets
    for t in ds:
        b = assignment.user_bucket[t.user_id]
        sizes[b] += 1
        sarcs[b] += t.label is S
    return sizes, sarcs


@pytest.mark.parametrize("seed", [0, 1, 17])
def test_symmetric_twenty_users_balance_exactly(seed):
    """10 sarcastic + 10 non-sarcastic single-tweet users -> 2 per bucket at ratio 0.5."""
    ds = _dataset({f"u{i:02d}": [S if i < 10 else N] for i in range(20)})
    assignment = stratify_by_user(ds, seed=seed)
    sizes, sarcs = _bucket_stats(ds, assignment)
    assert sizes == [2] * 10
    assert sarcs == [1] * 10


def test_fewer_users_than_buckets_is_an_error():
    ds = _dataset({"solo": [S, N, S, N, S]})
    with pytest.raises(StratificationError):
        stratify_by_user(ds, n_buckets=10)


def test_same_seed_reproduces_assignment():
    ds = _dataset({f"u{i:02d}": [S if i % 3 == 0 else N] for i in range(25)})
    a = stratify_by_user(ds, seed=9)
    b = stratify_by_user(ds, seed=9)
    assert a.user_bucket == b.user_bucket


def test_seed_changes_assignment():
    # plenty of exact ties here, so different seeds should diverge
    ds = _dataset({f"u{i:02d}": [S if i < 12 else N] for i in range(24)})
    buckets = {
        tuple(sorted(stratify_by_user(ds, seed=s).user_bucket.items()))
        for s in range(6)
    }
    assert len(buckets) > 1


@st.composite
def random_datasets(draw):
    n_users = draw(st.integers(min_value=10, max_value=25))
    users = [f"u{i:02d}" for i in range(n_users)]
    labels_by_user = {
        u: draw(
            st.lists(st.sampled_from([S, N]), min_size=1, max_size=4)
        )
        for u in users
    }
    return _dataset(labels_by_user)


@given(random_datasets(), st.integers(min_value=0, max_value=99))
@settings(max_examples=60, deadline=None)
def test_splits_partition_and_are_user_disjoint(ds, seed):
    assignment = stratify_by_user(ds, seed=seed)
    train, valid, test = make_splits(ds, assignment)
    parts = [train, valid, test]
    assert sum(len(p) for p in parts) == len(ds)
    assert set.union(*(p.ids for p in parts)) == ds.ids
    users = [p.users() for p in parts]
    assert not (users[0] & users[1])
    assert not (users[0] & users[2])
    assert not (users[1] & users[2])


def test_class_ratio_deviation_bound_on_small_users():
    """Greedy balance bound, checked on fixtures where users have <= 2 tweets.

    Heavy users are mixed-class so no early single-class bucket gets stranded;
    under that shape every non-empty bucket's sarcastic ratio stays within
    2 / ceil(n/10) of the global ratio.
    """
    for trial in range(25):
        rng = np.random.default_rng(7000 + trial)
        labels_by_user = {}
        for u in range(int(rng.integers(10, 22))):
            labels_by_user[f"m{u:02d}"] = [S, N]
        for u in range(int(rng.integers(0, 25))):
            labels_by_user[f"s{u:02d}"] = [S if u % 2 else N]
        ds = _dataset(labels_by_user)
        n = len(ds)
        n_sarc, _ = ds.label_counts()
        global_ratio = n_sarc / n
        bound = 2 / math.ceil(n / 10)
        sizes, sarcs = _bucket_stats(ds, stratify_by_user(ds, seed=trial))
        for b in range(10):
            if sizes[b]:
                assert abs(sarcs[b] / sizes[b] - global_ratio) <= bound


def test_split_spec_must_partition_buckets():
    spec = SplitSpec(train=(0, 1, 2, 3, 4, 5, 6, 7), valid=8, test=8)
    with pytest.raises(ConfigError):
        spec.validate(10)
    SplitSpec().validate(10)  # default is fine


def test_make_splits_empty_dataset():
    ds = LabeledDataset(name="empty", tweets=())
    assignment = BucketAssignment(user_bucket={}, n_buckets=10, seed=0)
    train, valid, test = make_splits(ds, assignment)
    assert (len(train), len(valid), len(test)) == (0, 0, 0)
    assert train.name == "empty.train"


def test_make_splits_requires_covered_users():
    ds = _dataset({"u00": [S]})
    assignment = BucketAssignment(user_bucket={"other": 0}, n_buckets=10, seed=0)
    with pytest.raises(StratificationError, match="not covered"):
        make_splits(ds, assignment)


def test_split_of_tweet_routing():
    spec = SplitSpec(train=(0, 1, 2, 3, 4, 5, 6, 7), valid=8, test=9)
    assert split_of_tweet(spec, 0) == "train"
    assert split_of_tweet(spec, 8) == "valid"
    assert split_of_tweet(spec, 9) == "test"


def test_manifest_roundtrip_and_determinism(tmp_path):
    ds = _dataset({f"u{i:02d}": [S if i % 2 else N, N] for i in range(15)})
    assignment = stratify_by_user(ds, seed=3)
    p1, p2 = tmp_path / "m1.jsonl", tmp_path / "m2.jsonl"
    write_manifest(p1, ds, assignment, SplitSpec())
    write_manifest(p2, ds, assignment, SplitSpec())
    assert p1.read_bytes() == p2.read_bytes()

    header, by_tweet = read_manifest(p1)
    assert header["seed"] == 3
    assert header["spec"]["valid"] == 8
    assert set(by_tweet) == ds.ids
    train, valid, test = make_splits(ds, assignment)
    for t in valid:
        assert by_tweet[t.id] == "valid"
    for t in test:
        assert by_tweet[t.id] == "test"
