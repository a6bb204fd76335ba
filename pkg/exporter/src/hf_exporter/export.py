"""Core export logic: prefix rendering, boundary conventions, record building.

The evaluation protocol needs each exported token tagged with whether it
starts a new word. That convention lives in the tokenizer, so everything
here works from the raw vocabulary strings: a metaspace marker, the
byte-level leading-space marker, or a plain word-per-token vocabulary. A
vocabulary matching none of these aborts with a diagnostic rather than
guessing.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Protocol, Sequence

import numpy as np

METASPACE = "▁"  # sentencepiece word-boundary marker
BYTE_SPACE = "Ġ"  # byte-level BPE leading-space marker (Ġ)

MIN_TOP_N = 64


class BoundaryConventionError(RuntimeError):
    """The tokenizer's word-boundary convention could not be determined."""


@dataclass(frozen=True)
class ExportConfig:
    model_id: str
    top_n: int = 4096
    device: str = "cpu"
    batch_size: int = 8

    def __post_init__(self) -> None:
        if self.top_n < MIN_TOP_N:
            raise ValueError(f"top_n must be >= {MIN_TOP_N}, got {self.top_n}")
        if self.batch_size < 1:
            raise ValueError("batch_size must be >= 1")


class ModelAdapter(Protocol):
    """What the exporter needs from a model: its raw vocabulary strings
    (index = token id) and full next-token probabilities for a prefix."""

    vocab_tokens: Sequence[str]

    def next_token_probs(self, prefix_text: str) -> np.ndarray: ...


def is_punct_unit(unit: str) -> bool:
    return len(unit) == 1 and not unit.isalnum()


def render_prefix(words: Sequence[str]) -> str:
    """Words joined by single spaces; punctuation attached without a
    preceding space ("The film was" + "," -> "The film was,")."""
    out: list[str] = []
    for w in words:
        if out and not is_punct_unit(w):
            out.append(" ")
        out.append(w)
    return "".join(out)


def detect_convention(vocab_tokens: Iterable[str]) -> str:
    """Classify the vocabulary's boundary convention.

    Returns "metaspace", "byte_level", or "word_level". Mixed or unmarked
    multi-word vocabularies raise BoundaryConventionError.
    """
    saw_meta = False
    saw_byte = False
    plain = True
    for tok in vocab_tokens:
        if tok.startswith(METASPACE):
            saw_meta = True
        elif tok.startswith(BYTE_SPACE):
            saw_byte = True
        if not (tok.isalpha() or (len(tok) == 1 and not tok.isalnum())):
            plain = False
    if saw_meta:
        return "metaspace"
    if saw_byte:
        return "byte_level"
    if plain:
        return "word_level"
    raise BoundaryConventionError(
        "no metaspace or byte-level boundary marker found and the vocabulary "
        "is not plain word-per-token; cannot assign word_initial flags"
    )


def token_surface(raw: str, convention: str) -> tuple[str, bool]:
    """Map a raw vocabulary string to (surface, word_initial).

    The marker is stripped from the surface. A token is word-initial when it
    carries the boundary marker or its visible text starts with a non-letter
    (punctuation opens a new unit in the trie); in a word-per-token
    vocabulary every token is word-initial. Marker- or whitespace-only
    tokens get a single-space surface and can never match a support unit.
    """
    if convention == "word_level":
        return raw, True
    marker = METASPACE if convention == "metaspace" else BYTE_SPACE
    marked = raw.startswith(marker)
    visible = raw[len(marker):] if marked else raw
    visible = visible.strip()
    if not visible:
        return " ", False
    return visible, marked or not visible[0].isalpha()


def _full_entropy(probs: np.ndarray) -> float:
    nz = probs[probs > 0.0]
    return float(-np.sum(nz * np.log(nz)))


def build_record(
    prefix_id: str,
    probs: np.ndarray,
    vocab_tokens: Sequence[str],
    convention: str,
    top_n: int,
) -> dict:
    """Rank-sort one distribution and emit the wire-format object.

    Ties break by ascending token id for bit-reproducible exports;
    zero-probability tokens are never listed.
    """
    order = np.argsort(-probs, kind="stable")[:top_n]
    entropy = _full_entropy(probs)
    tokens = []
    listed_mass = 0.0
    for rank, token_id in enumerate(order.tolist(), 1):
        p = float(probs[token_id])
        if p <= 0.0:
            break
        surface, word_initial = token_surface(vocab_tokens[token_id], convention)
        tokens.append(
            {"rank": rank, "surface": surface, "word_initial": word_initial, "prob": p}
        )
        listed_mass += p
    return {
        "prefix_id": prefix_id,
        "vocab_size": len(vocab_tokens),
        "entropy_nats": entropy,
        "tail_mass": max(1.0 - listed_mass, 0.0),
        "tokens": tokens,
    }


def read_nodes(path: str | Path) -> list[dict]:
    nodes = []
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
                nodes.append(
                    {"prefix_id": obj["prefix_id"], "prefix_words": list(obj["prefix_words"])}
                )
            except (json.JSONDecodeError, KeyError) as exc:
                raise ValueError(f"{path}:{line_no}: bad node record: {exc}") from exc
    return nodes


def export(
    nodes: Sequence[dict],
    adapter: ModelAdapter,
    config: ExportConfig,
) -> list[dict]:
    """One record per node, in node order."""
    convention = detect_convention(adapter.vocab_tokens)
    records = []
    for node in nodes:
        text = render_prefix(node["prefix_words"])
        probs = np.asarray(adapter.next_token_probs(text), dtype=np.float64)
        records.append(
            build_record(
                node["prefix_id"], probs, adapter.vocab_tokens, convention, config.top_n
            )
        )
    return records


def write_records(records: Iterable[dict], path: str | Path) -> None:
    with open(path, "w", encoding="utf-8") as fh:
        for record in records:
            fh.write(json.dumps(record, ensure_ascii=True) + "\n")
