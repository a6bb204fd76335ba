"""Corpus ingestion: sentence segmentation, unit tokenization, word-list filtering.

Raw document text becomes a stream of unit sequences, one per accepted
sentence. A unit is either a maximal run of letters or a single punctuation
character. Sentences containing a letter-run absent from the word list, or
any digit, are rejected; heading-like lines (no terminal punctuation and at
most ``heading_max_units`` units) never reach tokenization. Every rejection
carries a reason code and the counts partition the input exactly:
accepted + unknown_word + digit + heading == total candidates.

Ingestion is deterministic: identical bytes and config yield identical
token streams, which keeps trie builds byte-reproducible.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from enum import Enum
from pathlib import Path
from typing import Iterator

from .errors import DataValidationError, EmptyWordListError

logger = logging.getLogger(__name__)

TERMINALS = ".!?"

# A terminal '.' does not end a sentence when the token it closes (lowercased,
# period included) is in the abbreviation stop-set.
DEFAULT_ABBREVIATIONS = frozenset({
    "mr.", "mrs.", "ms.", "dr.", "prof.", "st.", "mt.", "no.", "vs.",
    "etc.", "e.g.", "i.e.", "jr.", "sr.", "co.", "inc.", "ltd.", "fig.",
})


@dataclass(frozen=True)
class WordList:
    """Set of allowed words, stored lowercased; membership is case-insensitive."""

    entries: frozenset[str]

    @property
    def size(self) -> int:
        return len(self.entries)

    def __contains__(self, word: str) -> bool:
        return word.lower() in self.entries


def load_word_list(path: str | Path) -> WordList:
    """Load a one-word-per-line UTF-8 word list, lowercasing and deduplicating.

    Raises EmptyWordListError when no entries survive (blank file).
    """
    entries = set()
    with open(path, encoding="utf-8") as fh:
        for line in fh:
            word = line.strip()
            if word:
                entries.add(word.lower())
    if not entries:
        raise EmptyWordListError(f"word list {str(path)!r} contains no entries")
    return WordList(frozenset(entries))


@dataclass(frozen=True)
class IngestConfig:
    abbreviations: frozenset[str] = DEFAULT_ABBREVIATIONS
    heading_max_units: int = 8

    @staticmethod
    def from_file(path: str | Path) -> "IngestConfig":
        """Parse a plain-text ``key = value`` config file.

        Keys: ``abbreviations`` (path to a one-per-line stop-set file,
        replacing the default) and ``heading-max-units``.
        """
        abbreviations = DEFAULT_ABBREVIATIONS
        heading_max_units = 8
        with open(path, encoding="utf-8") as fh:
            for line_no, raw in enumerate(fh, 1):
                line = raw.strip()
                if not line or line.startswith("#"):
                    continue
                if "=" not in line:
                    raise DataValidationError(
                        f"{path}:{line_no}: expected 'key = value', got {line!r}"
                    )
                key, _, value = line.partition("=")
                key = key.strip()
                value = value.strip()
                if key == "abbreviations":
                    with open(value, encoding="utf-8") as afh:
                        abbreviations = frozenset(
                            w.strip().lower() for w in afh if w.strip()
                        )
                elif key == "heading-max-units":
                    heading_max_units = int(value)
                else:
                    raise DataValidationError(f"{path}:{line_no}: unknown key {key!r}")
        return IngestConfig(abbreviations, heading_max_units)


class RejectReason(str, Enum):
    UNKNOWN_WORD = "unknown_word"
    HEADING = "heading"
    DIGIT = "digit"


@dataclass(frozen=True)
class Rejection:
    reason: RejectReason
    detail: str


@dataclass(frozen=True)
class SentenceTokens:
    """One accepted sentence as an ordered unit sequence."""

    words: tuple[str, ...]
    source_id: str


@dataclass
class IngestCounters:
    accepted: int = 0
    unknown_word: int = 0
    digit: int = 0
    heading: int = 0

    @property
    def total(self) -> int:
        return self.accepted + self.unknown_word + self.digit + self.heading

    def add(self, other: "IngestCounters") -> None:
        self.accepted += other.accepted
        self.unknown_word += other.unknown_word
        self.digit += other.digit
        self.heading += other.heading


def _scan_units(text: str) -> list[str]:
    """Split text into maximal letter runs plus every other non-space char singly."""
    units: list[str] = []
    run: list[str] = []
    for ch in text:
        if ch.isalpha():
            run.append(ch)
            continue
        if run:
            units.append("".join(run))
            run.clear()
        if not ch.isspace():
            units.append(ch)
    if run:
        units.append("".join(run))
    return units


def _is_heading(line: str, config: IngestConfig) -> bool:
    if any(ch in TERMINALS for ch in line):
        return False
    return len(_scan_units(line)) <= config.heading_max_units


def _tail_token(text: str, i: int) -> str:
    """Token ending at the period text[i], lowercased, period included."""
    j = i
    while j > 0 and not text[j - 1].isspace():
        j -= 1
    return text[j:i + 1].lower()


def _split_flow(text: str, abbreviations: frozenset[str]) -> tuple[list[str], int]:
    """Split flowed paragraph text at terminal punctuation.

    Returns (sentences, dropped) where dropped counts a trailing fragment
    that never reached a terminal (treated like a heading: an incomplete
    sentence).
    """
    sentences: list[str] = []
    dropped = 0
    start = 0
    n = len(text)
    for i, ch in enumerate(text):
        if ch not in TERMINALS:
            continue
        if i + 1 < n and not text[i + 1].isspace():
            continue
        if ch == "." and _tail_token(text, i) in abbreviations:
            continue
        chunk = text[start:i + 1].strip()
        if chunk:
            sentences.append(chunk)
        start = i + 1
    if text[start:].strip():
        dropped += 1
    return sentences, dropped


def _segment(document: str, config: IngestConfig) -> tuple[list[str], int]:
    """Segment a document into sentence candidates, dropping heading-like lines.

    Lines are flowed together within a paragraph (blank line = paragraph
    break) so sentences wrapped across lines survive. Returns
    (sentences, heading_drops).
    """
    sentences: list[str] = []
    dropped = 0
    para: list[str] = []

    def flush() -> None:
        nonlocal dropped
        if not para:
            return
        got, frag = _split_flow(" ".join(para), config.abbreviations)
        para.clear()
        sentences.extend(got)
        dropped += frag

    for line in document.splitlines():
        stripped = line.strip()
        if not stripped:
            flush()
            continue
        if _is_heading(stripped, config):
            dropped += 1
            continue
        para.append(stripped)
    flush()
    return sentences, dropped


def split_sentences(document: str, config: IngestConfig | None = None) -> list[str]:
    """Split a document into raw sentence strings (heading lines dropped)."""
    sentences, _ = _segment(document, config or IngestConfig())
    return sentences


def tokenize_and_filter(
    sentence: str, word_list: WordList, source_id: str = ""
) -> SentenceTokens | Rejection:
    """Tokenize one sentence into units and apply the word-list filter.

    Digits reject before unknown words regardless of position (the digit
    check runs over the whole unit list first).
    """
    units = _scan_units(sentence)
    if not units:
        return Rejection(RejectReason.HEADING, "<blank>")
    for u in units:
        if len(u) == 1 and u.isdigit():
            return Rejection(RejectReason.DIGIT, u)
    for u in units:
        if u.isalpha() and u not in word_list:
            return Rejection(RejectReason.UNKNOWN_WORD, u)
    return SentenceTokens(tuple(units), source_id)


def ingest_document(
    text: str,
    word_list: WordList,
    config: IngestConfig | None = None,
    source_id: str = "",
) -> tuple[list[SentenceTokens], IngestCounters]:
    """Run segmentation + filtering over one document, tallying reason codes."""
    config = config or IngestConfig()
    counters = IngestCounters()
    sentences, heading_drops = _segment(text, config)
    counters.heading += heading_drops
    accepted: list[SentenceTokens] = []
    for raw in sentences:
        result = tokenize_and_filter(raw, word_list, source_id)
        if isinstance(result, SentenceTokens):
            counters.accepted += 1
            accepted.append(result)
        elif result.reason is RejectReason.UNKNOWN_WORD:
            counters.unknown_word += 1
        elif result.reason is RejectReason.DIGIT:
            counters.digit += 1
        else:
            counters.heading += 1
    return accepted, counters


def iter_documents(
    input_path: str | Path, docs_per_line: bool = False
) -> Iterator[tuple[str, str]]:
    """Yield (source_id, text) pairs from a file, a directory, or a per-line manifest.

    A directory yields each regular file (sorted by name) as one document;
    with docs_per_line each non-empty line of the file is a document.
    """
    path = Path(input_path)
    if path.is_dir():
        for child in sorted(path.iterdir()):
            if child.is_file():
                yield child.name, child.read_text(encoding="utf-8")
        return
    if docs_per_line:
        with open(path, encoding="utf-8") as fh:
            for line_no, line in enumerate(fh, 1):
                if line.strip():
                    yield f"{path.name}:{line_no}", line
        return
    yield path.name, path.read_text(encoding="utf-8")
