"""Tweet text preprocessing: tokenization, tag stripping, vocabulary, encoding.

The tokenizer is deliberately simple tweet handling: lowercase everything,
collapse URLs to ``<url>`` and user mentions to ``<user>``, keep hashtags as
single ``#word`` tokens (they carry label signal downstream), and split any
other punctuation into separate one-character tokens.
"""

from __future__ import annotations

import json
import re
from collections import Counter
from collections.abc import Iterable, Sequence
from pathlib import Path

import numpy as np

from .errors import ConfigError

PAD_TOKEN = "<pad>"
UNK_TOKEN = "<unk>"
PAD_INDEX = 0
UNK_INDEX = 1

URL_TOKEN = "<url>"
MENTION_TOKEN = "<user>"

# Order matters: URLs swallow their internal punctuation, mentions and
# hashtags bind before bare words, single punctuation chars come last.
_TOKEN_RE = re.compile(
    r"""
    https?://\S+ | www\.\S+   # URLs
    | @\w+                    # user mentions
    | \#\w+                   # hashtags, kept whole
    | \w+(?:'\w+)*            # words, contractions intact
    | [^\w\s]                 # any other punctuation, one char at a time
    """,
    re.VERBOSE,
)


def tokenize(text: str) -> list[str]:
    """Lowercase and split tweet text into tokens.

    Deterministic; returns [] for empty or whitespace-only input.
    """
    tokens = []
    for raw in _TOKEN_RE.findall(text.lower()):
        if raw.startswith(("http://", "https://", "www.")):
            tokens.append(URL_TOKEN)
        elif raw.startswith("@"):
            tokens.append(MENTION_TOKEN)
        else:
            tokens.append(raw)
    return tokens


def normalize_tag_set(tag_set: Iterable[str]) -> frozenset[str]:
    """Lowercase tags and drop any leading '#' so both spellings work."""
    return frozenset(tag.lstrip("#").lower() for tag in tag_set)


def strip_sarcasm_tags(tokens: Sequence[str], tag_set: Iterable[str]) -> list[str]:
    """Remove hashtag tokens matching ``tag_set`` (case-insensitive), keeping order."""
    tags = normalize_tag_set(tag_set)
    return [t for t in tokens if not (t.startswith("#") and t[1:].lower() in tags)]


def is_word(token: str) -> bool:
    """A word for length-filtering purposes: any token with an alphanumeric char."""
    return any(ch.isalnum() for ch in token)


def count_words(tokens: Sequence[str]) -> int:
    return sum(1 for t in tokens if is_word(t))


def filter_short(
    tweets: Iterable[Sequence[str]], min_words: int = 3
) -> list[Sequence[str]]:
    """Keep only token sequences with at least ``min_words`` non-punctuation tokens."""
    if min_words < 1:
        raise ValueError(f"min_words must be >= 1, got {min_words}")
    return [tokens for tokens in tweets if count_words(tokens) >= min_words]


class Vocabulary:
    """Token-to-index map with PAD(0)/UNK(1) specials and hapax collapsing.

    Tokens seen fewer than twice in the corpus never enter the map; they
    encode to UNK. Indices are contiguous, ordered by descending corpus
    frequency with lexicographic tie-breaking, so construction is
    deterministic for a given corpus.
    """

    def __init__(self, index: dict[str, int], freqs: Counter):
        self._index = index
        self._tokens = [None] * len(index)
        for token, i in index.items():
            self._tokens[i] = token
        self.freqs = freqs

    def __len__(self) -> int:
        return len(self._index)

    def __contains__(self, token: str) -> bool:
        return token in self._index

    def index_of(self, token: str) -> int:
        return self._index.get(token, UNK_INDEX)

    def token_at(self, index: int) -> str:
        return self._tokens[index]

    def encode(self, tokens: Sequence[str]) -> list[int]:
        return [self._index.get(t, UNK_INDEX) for t in tokens]

    def decode(self, indices: Sequence[int]) -> list[str]:
        return [self._tokens[i] for i in indices]

    def tokens(self) -> list[str]:
        return list(self._tokens)

    def dump_jsonl(self, path: str | Path) -> None:
        """Audit dump: one {token, index, freq} object per line, index order."""
        with open(path, "w", encoding="utf-8") as fh:
            for i, token in enumerate(self._tokens):
                rec = {"token": token, "index": i, "freq": self.freqs.get(token, 0)}
                fh.write(json.dumps(rec) + "\n")


def build_vocab(corpus: Iterable[Sequence[str]]) -> Vocabulary:
    """Build a Vocabulary from every token sequence in ``corpus``.

    ``corpus`` must contain at least one sequence (sequences may be empty).
    Hapax tokens (corpus frequency 1) are excluded and will encode to UNK.
    """
    freqs: Counter = Counter()
    n_sequences = 0
    for tokens in corpus:
        n_sequences += 1
        freqs.update(tokens)
    if n_sequences == 0:
        raise ValueError("cannot build a vocabulary from an empty corpus")

    index = {PAD_TOKEN: PAD_INDEX, UNK_TOKEN: UNK_INDEX}
    kept = sorted(
        (t for t, c in freqs.items() if c >= 2),
        key=lambda t: (-freqs[t], t),
    )
    for token in kept:
        index[token] = len(index)
    return Vocabulary(index, freqs)


def encode(tokens: Sequence[str], vocab: Vocabulary) -> list[int]:
    """Map tokens to vocabulary indices, unknowns to UNK. Never emits PAD."""
    return vocab.encode(tokens)


def load_word_vectors(
    path: str | Path,
    vocab: Vocabulary,
    dim: int = 100,
    seed: int = 0,
) -> np.ndarray:
    """Build the |V| x dim word-embedding init matrix.

    Rows for tokens found in the vector file are copied verbatim; all other
    rows (UNK included) are drawn uniform in [-0.05, 0.05] from a generator
    seeded with ``seed``. The PAD row is all zeros. Passing the literal path
    "random" skips the file and leaves every non-PAD row random.
    """
    if dim < 1:
        raise ValueError(f"dim must be >= 1, got {dim}")
    rng = np.random.default_rng(seed)
    matrix = rng.uniform(-0.05, 0.05, size=(len(vocab), dim))
    matrix[PAD_INDEX] = 0.0

    if str(path) != "random":
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, start=1):
                parts = line.rstrip("\n").split(" ")
                if len(parts) < 2:
                    continue
                token, values = parts[0], parts[1:]
                if token not in vocab:
                    continue
                if len(values) != dim:
                    raise ConfigError(
                        f"word-vector file {path} line {line_no}: expected {dim} "
                        f"dims, found {len(values)}"
                    )
                idx = vocab.index_of(token)
                if idx in (PAD_INDEX, UNK_INDEX):
                    continue
                matrix[idx] = np.asarray([float(v) for v in values])

    return matrix.astype(np.float32)
