"""cptrie: context-preserving tries and tuning-independent truncation-sampling evaluation.

Pipeline: ingest a text corpus into a word-level prefix trie built from
whole sentences, select evaluation prefixes, export next-token
distributions (toy trie-backed or from a real model via the companion
exporter package), score truncation methods with probability-independent
recall/risk metrics, and calibrate each method's parameter to a target
average risk.
"""

__version__ = "0.1.0"
