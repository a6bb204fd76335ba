"""Standalone re-validation of exported distribution files before handoff.

Deliberately independent of the consumer side: every wire-format invariant
is checked again here, so a broken export is caught at the producer.
"""

from __future__ import annotations

import json
import math
from pathlib import Path

MASS_TOLERANCE = 1e-6
TAIL_CLAMP = -1e-9


def _check_record(obj: dict, line: int, seen_ids: set[str], out: list[str]) -> None:
    def fail(message: str) -> None:
        out.append(f"line {line}: {message}")

    for field in ("prefix_id", "vocab_size", "entropy_nats", "tail_mass", "tokens"):
        if field not in obj:
            fail(f"missing field {field!r}")
            return
    prefix_id = obj["prefix_id"]
    if prefix_id in seen_ids:
        fail(f"duplicate prefix_id {prefix_id!r}")
    seen_ids.add(prefix_id)
    vocab = obj["vocab_size"]
    tokens = obj["tokens"]
    if not tokens:
        fail("no tokens listed")
        return
    if len(tokens) > vocab:
        fail(f"{len(tokens)} tokens exceed vocab_size {vocab}")
    prev = None
    mass = 0.0
    for i, tok in enumerate(tokens):
        if tok.get("rank") != i + 1:
            fail(f"ranks not contiguous at position {i}")
            return
        surface = tok.get("surface")
        if not isinstance(surface, str) or not surface:
            fail(f"empty surface at rank {i + 1}")
        if not isinstance(tok.get("word_initial"), bool):
            fail(f"word_initial missing or non-boolean at rank {i + 1}")
        p = tok.get("prob")
        if not isinstance(p, (int, float)) or not (0.0 < p <= 1.0):
            fail(f"prob out of (0, 1] at rank {i + 1}")
            return
        if prev is not None and p > prev:
            fail(f"probs not sorted at rank {i + 1}")
        prev = p
        mass += p
    tail = obj["tail_mass"]
    if tail < TAIL_CLAMP:
        fail(f"negative tail_mass {tail}")
    if abs(mass + max(tail, 0.0) - 1.0) > MASS_TOLERANCE:
        fail(f"mass {mass + max(tail, 0.0)} differs from 1 beyond {MASS_TOLERANCE}")
    entropy = obj["entropy_nats"]
    if not (-1e-12 <= entropy <= math.log(vocab) + 1e-9):
        fail(f"entropy {entropy} outside [0, ln {vocab}]")


def verify_roundtrip(path: str | Path) -> list[str]:
    """Validate every record in a distributions JSONL file.

    Returns a list of human-readable diagnostics; empty means the file is
    safe to hand to the evaluation side.
    """
    diagnostics: list[str] = []
    seen_ids: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                obj = json.loads(line)
            except json.JSONDecodeError as exc:
                diagnostics.append(f"line {line_no}: parse error: {exc}")
                continue
            _check_record(obj, line_no, seen_ids, diagnostics)
    return diagnostics
