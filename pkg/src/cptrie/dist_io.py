"""Model-distribution wire format plus the trie-backed toy language model.

One JSONL record per evaluation prefix:

    {"prefix_id": str, "vocab_size": int, "entropy_nats": float,
     "tail_mass": float,
     "tokens": [{"rank": int, "surface": str, "word_initial": bool,
                 "prob": float}, ...]}

Tokens are the top-N of the vocabulary in non-increasing probability order;
``tail_mass`` is the unlisted remainder and ``entropy_nats`` the entropy of
the full predicted distribution. All invariants are enforced on read, so
everything downstream may assume clean records.

``toy_lm_export`` turns trie child counts into records (count ratios as
probabilities), giving a closed-loop "model" whose optimal cut is exactly
the support size.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from functools import cached_property
from pathlib import Path
from typing import Iterable

import numpy as np

from .errors import (
    DuplicatePrefixIdError,
    EntropyRangeError,
    MassMismatchError,
    NotSortedError,
    RecordValidationError,
)
from .trie import EvaluationNode, TrieNode, node_at

MASS_TOLERANCE = 1e-6
TAIL_CLAMP = -1e-9
ENTROPY_SLACK = 1e-9


@dataclass(frozen=True)
class TokenEntry:
    rank: int
    surface: str
    word_initial: bool
    prob: float


@dataclass
class DistributionRecord:
    prefix_id: str
    vocab_size: int
    entropy_nats: float
    tail_mass: float
    tokens: tuple[TokenEntry, ...]

    @property
    def n(self) -> int:
        """Number of listed tokens (the export's top-N)."""
        return len(self.tokens)

    @cached_property
    def probs(self) -> np.ndarray:
        """Listed probabilities as a contiguous float64 array, rank order."""
        return np.array([t.prob for t in self.tokens], dtype=np.float64)


def validate_record(record: DistributionRecord, line: int | None = None) -> None:
    """Enforce every wire-format invariant; raises RecordValidationError subtypes."""
    if not record.prefix_id:
        raise RecordValidationError("prefix_id must be non-empty", line)
    if record.vocab_size < 1:
        raise RecordValidationError(
            f"vocab_size must be >= 1, got {record.vocab_size}", line
        )
    n = record.n
    if n < 1:
        raise RecordValidationError("tokens must list at least one entry", line)
    if n > record.vocab_size:
        raise RecordValidationError(
            f"{n} listed tokens exceed vocab_size {record.vocab_size}", line
        )
    prev = None
    for i, tok in enumerate(record.tokens):
        if tok.rank != i + 1:
            raise RecordValidationError(
                f"ranks must be contiguous 1..N; entry {i} has rank {tok.rank}", line
            )
        if not tok.surface:
            raise RecordValidationError(f"empty surface at rank {tok.rank}", line)
        if not (0.0 < tok.prob <= 1.0):
            raise RecordValidationError(
                f"prob at rank {tok.rank} must be in (0, 1], got {tok.prob}", line
            )
        if prev is not None and tok.prob > prev:
            raise NotSortedError(
                f"probs not non-increasing at rank {tok.rank} "
                f"({tok.prob} > {prev})",
                line,
            )
        prev = tok.prob
    if record.tail_mass < TAIL_CLAMP:
        raise MassMismatchError(
            f"tail_mass must be >= 0, got {record.tail_mass}", line
        )
    total = float(np.sum(record.probs)) + max(record.tail_mass, 0.0)
    if abs(total - 1.0) > MASS_TOLERANCE:
        raise MassMismatchError(
            f"listed probs + tail_mass = {total!r}, expected 1 within "
            f"{MASS_TOLERANCE}",
            line,
        )
    hi = math.log(record.vocab_size) + ENTROPY_SLACK
    if not (-1e-12 <= record.entropy_nats <= hi):
        raise EntropyRangeError(
            f"entropy_nats {record.entropy_nats} outside [0, ln V] for "
            f"V={record.vocab_size}",
            line,
        )


def record_from_json(obj: dict, line: int | None = None) -> DistributionRecord:
    """Build and validate a record from a parsed JSON object."""
    try:
        tokens = tuple(
            TokenEntry(
                rank=int(t["rank"]),
                surface=str(t["surface"]),
                word_initial=bool(t["word_initial"]),
                prob=float(t["prob"]),
            )
            for t in obj["tokens"]
        )
        tail = float(obj["tail_mass"])
        record = DistributionRecord(
            prefix_id=str(obj["prefix_id"]),
            vocab_size=int(obj["vocab_size"]),
            entropy_nats=float(obj["entropy_nats"]),
            tail_mass=0.0 if TAIL_CLAMP <= tail < 0.0 else tail,
            tokens=tokens,
        )
    except (KeyError, TypeError, ValueError) as exc:
        raise RecordValidationError(f"bad record field: {exc!r}", line) from exc
    validate_record(record, line)
    return record


def record_to_json(record: DistributionRecord) -> dict:
    return {
        "prefix_id": record.prefix_id,
        "vocab_size": record.vocab_size,
        "entropy_nats": record.entropy_nats,
        "tail_mass": record.tail_mass,
        "tokens": [
            {
                "rank": t.rank,
                "surface": t.surface,
                "word_initial": t.word_initial,
                "prob": t.prob,
            }
            for t in record.tokens
        ],
    }


def read_records(path: str | Path) -> dict[str, DistributionRecord]:
    """Read and validate a JSONL distribution file, keyed by prefix_id."""
    records: dict[str, DistributionRecord] = {}
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                raise RecordValidationError(f"malformed JSON: {exc}", line_no) from exc
            record = record_from_json(obj, line_no)
            if record.prefix_id in records:
                raise DuplicatePrefixIdError(
                    f"duplicate prefix_id {record.prefix_id!r}", line_no
                )
            records[record.prefix_id] = record
    return records


def write_records(records: Iterable[DistributionRecord], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record_to_json(record), ensure_ascii=True) + "\n")


@dataclass(frozen=True)
class EntropyDiagnostic:
    listed_entropy: float
    flagged: bool


def full_entropy_check(record: DistributionRecord) -> EntropyDiagnostic:
    """Recompute the listed-portion entropy and sanity-check the reported one.

    The reported full entropy must lie in [0, ln V]; a value below the
    listed-portion entropy (beyond 1e-6) cannot come from any full
    distribution extending the listed tokens and is flagged.
    """
    hi = math.log(record.vocab_size) + ENTROPY_SLACK
    if not (-1e-12 <= record.entropy_nats <= hi):
        raise EntropyRangeError(
            f"entropy_nats {record.entropy_nats} outside [0, ln V] for "
            f"V={record.vocab_size}"
        )
    listed = 0.0
    for tok in record.tokens:
        listed -= tok.prob * math.log(tok.prob)
    return EntropyDiagnostic(
        listed_entropy=listed,
        flagged=record.entropy_nats < listed - 1e-6,
    )


def toy_lm_export(
    root: TrieNode, nodes: Iterable[EvaluationNode]
) -> list[DistributionRecord]:
    """Build one record per node from trie child counts.

    prob(child) = child.pass_count / total over siblings; full distribution,
    so tail_mass is 0, every token is word-initial, and the support words
    occupy exactly ranks 1..|support|.
    """
    records = []
    for node in nodes:
        tn = node_at(root, node.prefix_words)
        if tn is None:
            raise RecordValidationError(
                f"prefix {node.prefix_id!r} ({' '.join(node.prefix_words)}) "
                "does not resolve in the trie"
            )
        if not tn.children:
            raise RecordValidationError(
                f"prefix {node.prefix_id!r} has empty support"
            )
        items = sorted(tn.children.items(), key=lambda kv: (-kv[1].pass_count, kv[0]))
        total = sum(child.pass_count for _, child in items)
        probs = [child.pass_count / total for _, child in items]
        entropy = 0.0
        for p in probs:
            entropy -= p * math.log(p)
        record = DistributionRecord(
            prefix_id=node.prefix_id,
            vocab_size=len(items),
            entropy_nats=entropy,
            tail_mass=0.0,
            tokens=tuple(
                TokenEntry(rank=i + 1, surface=key, word_initial=True, prob=p)
                for i, ((key, _), p) in enumerate(zip(items, probs))
            ),
        )
        validate_record(record)
        records.append(record)
    return records
