import numpy as np
import pytest

from sarcontext.embed.personality import (
    personality_features,
    train_personality,
    trait_accuracy,
)
from sarcontext.errors import ConfigError


def _separable_corpus(n=24):
    """Docs where token identity decides traits 0 and 1; rest alternate."""
    docs, traits = [], []
    for i in range(n):
        loud = i % 2 == 0
        word = "shout" if loud else "whisper"
        docs.append([word, f"filler{i % 3}", word])
        # every trait is a function of the tokens, so 100% is reachable
        traits.append([int(loud), int(not loud), i % 2, int(i % 3 == 0), i % 2])
    return docs, traits


def test_learns_separable_traits():
    docs, traits = _separable_corpus()
    model = train_personality(docs, traits, hidden_dim=12, epochs=120, seed=0)
    assert trait_accuracy(model, docs, traits) >= 0.95
    assert model.trained_traits == (0, 1, 2, 3, 4)


def test_features_shape_and_range():
    docs, traits = _separable_corpus()
    model = train_personality(docs, traits, hidden_dim=7, epochs=20, seed=0)
    feats = personality_features(model, docs[:5])
    assert feats.shape == (5, 7)
    assert feats.dtype == np.float64
    # tanh hidden layer
    assert (np.abs(feats) <= 1.0).all()
    assert personality_features(model, []).shape == (0, 7)


def test_training_is_deterministic():
    docs, traits = _separable_corpus()
    a = train_personality(docs, traits, hidden_dim=6, epochs=15, seed=3)
    b = train_personality(docs, traits, hidden_dim=6, epochs=15, seed=3)
    np.testing.assert_array_equal(
        personality_features(a, docs), personality_features(b, docs)
    )


def test_constant_traits_warned_and_excluded():
    docs, traits = _separable_corpus()
    flat = [[row[0], row[1], 1, 0, row[4]] for row in traits]
    with pytest.warns(UserWarning, match=r"traits \[2, 3\] are constant"):
        model = train_personality(docs, flat, hidden_dim=8, epochs=10, seed=0)
    assert model.trained_traits == (0, 1, 4)
    # accuracy only scored on trained traits, so constant columns don't count
    assert 0.0 <= trait_accuracy(model, docs, flat) <= 1.0


def test_all_constant_traits_is_an_error():
    docs, _ = _separable_corpus()
    constant = [[1, 0, 1, 0, 1]] * len(docs)
    with pytest.warns(UserWarning):
        with pytest.raises(ValueError, match="constant"):
            train_personality(docs, constant)


def test_input_validation():
    docs, traits = _separable_corpus()
    with pytest.raises(ConfigError):
        train_personality(docs, traits, hidden_dim=0)
    with pytest.raises(ValueError, match="trait rows"):
        train_personality(docs, traits[:-1])
    with pytest.raises(ValueError, match="at least 10"):
        train_personality(docs[:4], traits[:4])
    with pytest.raises(ValueError, match="5 entries"):
        train_personality(docs, [[1, 0]] * len(docs))
    with pytest.raises(ConfigError, match="no personality model"):
        personality_features(None, docs)


def test_unknown_tokens_fall_back_to_unk_slot():
    docs, traits = _separable_corpus()
    model = train_personality(docs, traits, hidden_dim=5, epochs=10, seed=0)
    feats = personality_features(model, [["neverseen", "words"]])
    assert feats.shape == (1, 5)
    assert np.isfinite(feats).all()
