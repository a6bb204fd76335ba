"""Model adapters. The HuggingFace adapter is the production path; tests use
in-memory stubs implementing the same two-member interface."""

from __future__ import annotations

import logging

import numpy as np

logger = logging.getLogger(__name__)


class HFAdapter:
    """Causal LM via transformers, queried one batch of prefixes at a time.

    Prefixes are prepended with the model's start token when it has one (so
    sentence-starting prefixes sit in the position the trie assumes), padded
    on the left, and scored at temperature 1.
    """

    def __init__(self, model_id: str, device: str = "cpu"):
        import torch
        from transformers import AutoModelForCausalLM, AutoTokenizer

        self._torch = torch
        self.tokenizer = AutoTokenizer.from_pretrained(model_id)
        self.model = AutoModelForCausalLM.from_pretrained(model_id)
        self.model.to(device)
        self.model.eval()
        self.device = device
        if self.tokenizer.pad_token is None:
            self.tokenizer.pad_token = self.tokenizer.eos_token
        self.tokenizer.padding_side = "left"
        vocab_size = self.model.get_output_embeddings().weight.shape[0]
        self.vocab_tokens = [
            tok if tok is not None else f"<unused:{i}>"
            for i, tok in enumerate(self.tokenizer.convert_ids_to_tokens(range(vocab_size)))
        ]
        logger.info("loaded %s (vocab %d) on %s", model_id, vocab_size, device)

    def _encode(self, texts: list[str]):
        if self.tokenizer.bos_token:
            texts = [self.tokenizer.bos_token + t for t in texts]
        return self.tokenizer(texts, return_tensors="pt", padding=True).to(self.device)

    def next_token_probs_batch(self, texts: list[str]) -> np.ndarray:
        with self._torch.no_grad():
            batch = self._encode(texts)
            logits = self.model(**batch).logits[:, -1, :]
            probs = self._torch.softmax(logits.double(), dim=-1)
        return probs.cpu().numpy()

    def next_token_probs(self, prefix_text: str) -> np.ndarray:
        return self.next_token_probs_batch([prefix_text])[0]
