"""Text encoder backends.

Two implementations of the same contract (text -> fixed-width vector):
a deterministic hashed n-gram featurizer (the light path every test runs on)
and a pretrained contextual transformer encoder (the heavy path, loaded
lazily so the package works without torch installed).
"""

from __future__ import annotations

import re
import zlib

import numpy as np

_TOKEN_RE = re.compile(r"[a-z0-9]+")


class HashedNgramBackend:
    """Hashed word uni/bigram featurizer with signed buckets, L2-normalized.

    Fully deterministic: hashing uses crc32, never Python's salted hash().
    """

    def __init__(self, width: int = 512, word_ngrams: tuple[int, ...] = (1, 2)):
        if width < 8:
            raise ValueError("width must be >= 8")
        self.width = width
        self.word_ngrams = tuple(word_ngrams)
        self.name = f"hashed-ngram-{width}"

    def _features(self, text: str) -> np.ndarray:
        vec = np.zeros(self.width)
        tokens = _TOKEN_RE.findall(text.lower())
        for n in self.word_ngrams:
            for i in range(len(tokens) - n + 1):
                gram = " ".join(tokens[i : i + n])
                h = zlib.crc32(gram.encode("utf-8"))
                sign = 1.0 if (h >> 31) & 1 == 0 else -1.0
                vec[h % self.width] += sign
        norm = np.linalg.norm(vec)
        if norm > 0:
            vec /= norm
        return vec

    def encode(self, texts: list[str]) -> np.ndarray:
        return np.stack([self._features(t) for t in texts]) if texts else np.zeros((0, self.width))


class TransformerBackend:
    """Mean-pooled hidden states of a pretrained transformer encoder.

    Requires the 'heavy' extra (transformers + torch); imports happen on
    first use. Runs in eval mode under no_grad, so encoding is deterministic.
    """

    def __init__(self, model_name: str = "roberta-large", device: str = "cpu", max_length: int = 512):
        try:
            import torch
            from transformers import AutoModel, AutoTokenizer
        except ImportError as exc:
            raise RuntimeError(
                "the heavy encoder path needs the 'heavy' extra (pip install percept[heavy])"
            ) from exc
        self._torch = torch
        self.tokenizer = AutoTokenizer.from_pretrained(model_name)
        self.model = AutoModel.from_pretrained(model_name).to(device).eval()
        self.device = device
        self.max_length = max_length
        self.width = int(self.model.config.hidden_size)
        self.name = f"transformer-{model_name}"

    def encode(self, texts: list[str]) -> np.ndarray:
        if not texts:
            return np.zeros((0, self.width))
        torch = self._torch
        out = []
        with torch.no_grad():
            for start in range(0, len(texts), 16):
                batch = texts[start : start + 16]
                enc = self.tokenizer(
                    batch, truncation=True, max_length=self.max_length,
                    padding=True, return_tensors="pt",
                ).to(self.device)
                hidden = self.model(**enc).last_hidden_state
                mask = enc["attention_mask"].unsqueeze(-1).float()
                pooled = (hidden * mask).sum(dim=1) / mask.sum(dim=1).clamp(min=1.0)
                out.append(pooled.cpu().numpy())
        return np.concatenate(out, axis=0)


def get_backend(name: str, **kwargs):
    """Factory: 'light' -> HashedNgramBackend, 'heavy' -> TransformerBackend."""
    if name == "light":
        return HashedNgramBackend(**kwargs)
    if name == "heavy":
        return TransformerBackend(**kwargs)
    raise ValueError(f"unknown backend {name!r}; expected 'light' or 'heavy'")
