"""Exception hierarchy shared across the toolkit.

Two base classes drive the CLI exit codes: DataValidationError (exit 3,
malformed or inconsistent inputs) and ProtocolError (exit 4, the evaluation
protocol itself cannot proceed, e.g. an export is too shallow).
"""

from __future__ import annotations


class DataValidationError(Exception):
    """An input file or record failed a schema or invariant check."""


class ProtocolError(Exception):
    """The evaluation protocol cannot proceed on the given data."""


class EmptyWordListError(DataValidationError):
    """Word-list file contained no entries; a filter accepting nothing is a misconfiguration."""


class EmptyCorpusError(DataValidationError):
    """No accepted sentences (or an empty trie where a populated one is required)."""


class TrieFormatError(DataValidationError):
    """Trie JSON is malformed or violates a count invariant.

    `node_path` names the offending node as a /-joined unit path.
    """

    def __init__(self, message: str, node_path: str | None = None):
        self.node_path = node_path
        if node_path is not None:
            message = f"{message} (at node path {node_path!r})"
        super().__init__(message)


class RecordValidationError(DataValidationError):
    """A distribution record violated the wire-format invariants."""

    def __init__(self, message: str, line: int | None = None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NotSortedError(RecordValidationError):
    """Listed probabilities are not non-increasing."""


class MassMismatchError(RecordValidationError):
    """Listed probabilities plus tail mass do not sum to 1 within tolerance."""


class DuplicatePrefixIdError(RecordValidationError):
    """The same prefix_id appeared on more than one record."""


class EntropyRangeError(RecordValidationError):
    """Reported full-distribution entropy falls outside [0, ln V]."""


class RankOverflowError(ProtocolError):
    """A truncation cutoff fell beyond the exported top-N; re-export deeper."""


class UncoveredSupportError(ProtocolError):
    """Some support words cannot be covered by any listed word-initial token."""

    def __init__(self, words, prefix_id: str | None = None):
        self.words = tuple(sorted(words))
        self.prefix_id = prefix_id
        where = f" for prefix {prefix_id!r}" if prefix_id else ""
        super().__init__(
            f"support words {list(self.words)} not covered within the exported "
            f"top-N{where}; re-export with a larger --top-n"
        )


class DegenerateZipfError(ProtocolError):
    """Estimated Zipf exponent is <= 1, so the target-surprise cut is undefined."""


class ZeroVarianceError(DataValidationError):
    """A correlation was requested over a variable with zero variance."""
