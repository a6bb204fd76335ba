import numpy as np
import pytest


class StubAdapter:
    """In-memory model: fixed vocabulary plus a logits function of the prefix."""

    def __init__(self, vocab_tokens, logits_fn):
        self.vocab_tokens = list(vocab_tokens)
        self._logits_fn = logits_fn

    def next_token_probs(self, prefix_text: str) -> np.ndarray:
        logits = np.asarray(self._logits_fn(prefix_text), dtype=np.float64)
        z = logits - logits.max()
        e = np.exp(z)
        return e / e.sum()


WORD_VOCAB = [
    "the", "film", "was", "shot", "made", "new", "long", ".", ",", "a",
    "town", "river", "garden", "quiet", "small", "old",
]


@pytest.fixture
def uniform_adapter():
    return StubAdapter(WORD_VOCAB[:8], lambda text: np.zeros(8))


@pytest.fixture
def one_hot_adapter():
    def logits(text):
        out = np.full(8, -1500.0)
        out[3] = 1500.0
        return out

    return StubAdapter(WORD_VOCAB[:8], logits)


@pytest.fixture
def nodes_small():
    return [
        {"prefix_id": "n00000", "prefix_words": ["The", "film"]},
        {"prefix_id": "n00001", "prefix_words": ["The", "film", "was"]},
        {"prefix_id": "n00002", "prefix_words": ["A"]},
    ]
