"""Character-level transcript conditioning for cross-attention."""

from __future__ import annotations

import dataclasses

import torch
import torch.nn as nn


@dataclasses.dataclass
class TextEmbedding:
    data: torch.Tensor  # (max_len, dim) or batched (B, max_len, dim)
    is_null: bool


class CharTextEncoder(nn.Module):
    """Learned per-character embedding plus learned positional embedding.

    Index 0 is the pad token; the null embedding is the all-zeros sequence.
    """

    def __init__(self, charset: str, max_len: int = 8, dim: int = 64):
        super().__init__()
        if len(set(charset)) != len(charset):
            raise ValueError("charset contains duplicates")
        self.charset = charset
        self.max_len = max_len
        self.dim = dim
        self.index = {ch: i + 1 for i, ch in enumerate(charset)}
        self.char_emb = nn.Embedding(len(charset) + 1, dim, padding_idx=0)
        self.pos_emb = nn.Parameter(torch.randn(max_len, dim) * 0.02)

    def tokenize(self, text: str) -> torch.Tensor:
        if len(text) > self.max_len:
            raise ValueError(f"text longer than max_len={self.max_len}: {text!r}")
        bad = [c for c in text if c not in self.index]
        if bad:
            raise ValueError(f"characters outside charset: {bad!r}")
        ids = [self.index[c] for c in text] + [0] * (self.max_len - len(text))
        return torch.tensor(ids, dtype=torch.long)

    def embed_text(self, text: str, null: bool = False) -> TextEmbedding:
        if null:
            return TextEmbedding(data=torch.zeros(self.max_len, self.dim), is_null=True)
        ids = self.tokenize(text)
        return TextEmbedding(data=self.char_emb(ids) + self.pos_emb, is_null=False)

    def embed_batch(self, texts: list[str]) -> torch.Tensor:
        ids = torch.stack([self.tokenize(t) for t in texts])
        return self.char_emb(ids) + self.pos_emb[None]

    def null_embedding(self, batch: int = 1) -> torch.Tensor:
        return torch.zeros(batch, self.max_len, self.dim)
