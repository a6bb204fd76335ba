"""hf_exporter: dump a causal LM's next-token distributions for evaluation prefixes.

Reads the evaluation-nodes JSONL produced by the trie toolkit, queries a
model for each prefix, and writes distribution records in the shared JSONL
wire format (rank-sorted top-N probabilities with surface text and
word-boundary flags, full-distribution entropy, tail mass).
"""

__version__ = "0.1.0"
