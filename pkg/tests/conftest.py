import json
import math
from pathlib import Path

import numpy as np
import pytest

from cptrie.dist_io import DistributionRecord, TokenEntry

FIXTURES = Path(__file__).parent / "fixtures"


@pytest.fixture(scope="session")
def fixture_corpus() -> Path:
    return FIXTURES / "corpus"

@pytest.fixture(scope="session")
def fixture_wordlist() -> Path:
    return FIXTURES / "wordlist.txt"


@pytest.fixture(scope="session")
def expected() -> dict:
    return json.loads((FIXTURES / "expected.json").read_text())


def make_record(
    rng: np.random.Generator,
    vocab: int,
    listed: int | None = None,
    prefix_id: str = "r0",
    concentration: float = 1.0,
) -> DistributionRecord:
    """Random valid record: Dirichlet draw over `vocab`, top-`listed` exported.

    With listed == vocab (default) the export is complete and tail_mass is 0.
    """
    listed = vocab if listed is None else listed
    probs = np.sort(rng.dirichlet(np.full(vocab, concentration)))[::-1]
    probs = probs[probs > 0]
    listed = min(listed, len(probs))
    entropy = float(-np.sum(probs * np.log(probs)))
    head = probs[:listed]
    tail = float(max(1.0 - head.sum(), 0.0)) if listed < len(probs) else 0.0
    return DistributionRecord(
        prefix_id=prefix_id,
        vocab_size=vocab,
        entropy_nats=entropy,
        tail_mass=tail,
        tokens=tuple(
            TokenEntry(rank=i + 1, surface=f"tok{i}", word_initial=True, prob=float(p))
            for i, p in enumerate(head)
        ),
    )


def zipf_record(s: float, vocab: int, prefix_id: str = "z0") -> DistributionRecord:
    """Fully listed exact-Zipf record with exponent s."""
    weights = np.array([1.0 / i**s for i in range(1, vocab + 1)])
    probs = weights / weights.sum()
    entropy = float(-np.sum(probs * np.log(probs)))
    return DistributionRecord(
        prefix_id=prefix_id,
        vocab_size=vocab,
        entropy_nats=entropy,
        tail_mass=0.0,
        tokens=tuple(
            TokenEntry(rank=i + 1, surface=f"tok{i}", word_initial=True, prob=float(p))
            for i, p in enumerate(probs)
        ),
    )


def uniform_record(vocab: int, prefix_id: str = "u0") -> DistributionRecord:
    p = 1.0 / vocab
    return DistributionRecord(
        prefix_id=prefix_id,
        vocab_size=vocab,
        entropy_nats=math.log(vocab),
        tail_mass=0.0,
        tokens=tuple(
            TokenEntry(rank=i + 1, surface=f"tok{i}", word_initial=True, prob=p)
            for i in range(vocab)
        ),
    )


def toy_nodes_and_records(sizes):
    """One node per support size; toy records have support at the top ranks."""
    from cptrie.trie import EvaluationNode

    nodes = []
    records = {}
    for i, size in enumerate(sizes):
        pid = f"t{i}"
        words = tuple(f"w{j}" for j in range(size))
        nodes.append(EvaluationNode(pid, ("p",), words, 1))
        probs = [2.0 ** -(j + 1) for j in range(size)]
        probs[-1] *= 2  # make the mass sum to exactly 1
        records[pid] = record_from_probs(
            probs, surfaces=list(words), word_initial=[True] * size, prefix_id=pid
        )
    return nodes, records


def deep_nodes_and_records(sizes, extra):
    """Support at the top ranks followed by `extra` noise tokens, mimicking a
    real export that lists far beyond the optimal cut. The geometric decay
    varies per node so size steps across nodes land at distinct thetas."""
    from cptrie.trie import EvaluationNode

    nodes = []
    records = {}
    for i, size in enumerate(sizes):
        pid = f"d{i}"
        words = tuple(f"w{j}" for j in range(size))
        nodes.append(EvaluationNode(pid, ("p",), words, 1))
        n = size + extra
        surfaces = list(words) + [f"zq{j}" for j in range(extra)]
        ratio = 0.45 + 0.04 * (i % 11)
        weights = [ratio**j for j in range(n)]
        total = sum(weights)
        probs = [w / total for w in weights]
        records[pid] = record_from_probs(
            probs, surfaces=surfaces, word_initial=[True] * n, prefix_id=pid
        )
    return nodes, records


def record_from_probs(
    probs,
    vocab: int | None = None,
    entropy: float | None = None,
    tail: float = 0.0,
    prefix_id: str = "p0",
    surfaces=None,
    word_initial=None,
) -> DistributionRecord:
    """Record straight from an explicit descending probability list."""
    probs = list(probs)
    n = len(probs)
    vocab = n if vocab is None else vocab
    if entropy is None:
        total = sum(probs)
        entropy = -sum(p * math.log(p) for p in probs)
        if tail > 0:  # spread the tail uniformly over the unlisted vocab
            unlisted = vocab - n
            if unlisted > 0 and tail > 0:
                q = tail / unlisted
                entropy += -unlisted * q * math.log(q)
        del total
    surfaces = surfaces or [f"tok{i}" for i in range(n)]
    word_initial = word_initial or [True] * n
    return DistributionRecord(
        prefix_id=prefix_id,
        vocab_size=vocab,
        entropy_nats=entropy,
        tail_mass=tail,
        tokens=tuple(
            TokenEntry(rank=i + 1, surface=surfaces[i], word_initial=word_initial[i], prob=probs[i])
            for i in range(n)
        ),
    )
