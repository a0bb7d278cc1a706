"""A small decoder-only transformer trained from scratch.

This is the desk-scale backend: word-level vocabulary, a few layers of
causal self-attention, greedy decoding. It exists so the whole pipeline
can be trained and verified on a laptop without any pretrained weights.
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Sequence

import torch
from torch import nn

from .backend import TorchLMBackend
from .vocab import Vocab

CHECKPOINT_VERSION = 1
CHECKPOINT_KIND = "mini-decoder-lm"


@dataclass(frozen=True)
class MiniLMConfig:
    n_layers: int = 4
    d_model: int = 128
    n_heads: int = 4
    max_context: int = 128
    seed: int = 0
    dtype: str = "float32"  # float64 is used by the gradient checks

    def __post_init__(self):
        if self.d_model % self.n_heads != 0:
            raise ValueError("d_model must be divisible by n_heads")
        if self.dtype not in ("float32", "float64"):
            raise ValueError(f"unsupported dtype {self.dtype!r}")

    @property
    def torch_dtype(self) -> torch.dtype:
        return torch.float64 if self.dtype == "float64" else torch.float32


class CausalSelfAttention(nn.Module):
    def __init__(self, d_model: int, n_heads: int, max_context: int):
        super().__init__()
        self.n_heads = n_heads
        self.head_dim = d_model // n_heads
        self.qkv = nn.Linear(d_model, 3 * d_model)
        self.proj = nn.Linear(d_model, d_model)
        mask = torch.tril(torch.ones(max_context, max_context, dtype=torch.bool))
        self.register_buffer("causal_mask", mask, persistent=False)

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        b, t, c = x.shape
        q, k, v = self.qkv(x).split(c, dim=2)
        q = q.view(b, t, self.n_heads, self.head_dim).transpose(1, 2)
        k = k.view(b, t, self.n_heads, self.head_dim).transpose(1, 2)
        v = v.view(b, t, self.n_heads, self.head_dim).transpose(1, 2)
        att = (q @ k.transpose(-2, -1)) / math.sqrt(self.head_dim)
        att = att.masked_fill(~self.causal_mask[:t, :t], float("-inf"))
        att = torch.softmax(att, dim=-1)
        out = (att @ v).transpose(1, 2).contiguous().view(b, t, c)
        return self.proj(out)


class Block(nn.Module):
    def __init__(self, d_model: int, n_heads: int, max_context: int):
        super().__init__()
        self.ln1 = nn.LayerNorm(d_model)
        self.attn = CausalSelfAttention(d_model, n_heads, max_context)
        self.ln2 = nn.LayerNorm(d_model)
        self.mlp = nn.Sequential(
            nn.Linear(d_model, 4 * d_model),
            nn.GELU(),
            nn.Linear(4 * d_model, d_model),
        )

    def forward(self, x: torch.Tensor) -> torch.Tensor:
        x = x + self.attn(self.ln1(x))
        return x + self.mlp(self.ln2(x))


class MiniDecoderLM(nn.Module):
    def __init__(self, vocab_size: int, config: MiniLMConfig):
        super().__init__()
        self.tok_emb = nn.Embedding(vocab_size, config.d_model)
        self.pos_emb = nn.Embedding(config.max_context, config.d_model)
        self.blocks = nn.ModuleList(
            Block(config.d_model, config.n_heads, config.max_context)
            for _ in range(config.n_layers)
        )
        self.ln_f = nn.LayerNorm(config.d_model)
        self.head = nn.Linear(config.d_model, vocab_size, bias=False)
        self.apply(self._init_weights)

    @staticmethod
    def _init_weights(module: nn.Module) -> None:
        if isinstance(module, (nn.Linear, nn.Embedding)):
            nn.init.normal_(module.weight, mean=0.0, std=0.02)
            if isinstance(module, nn.Linear) and module.bias is not None:
                nn.init.zeros_(module.bias)

    def forward(self, ids: torch.Tensor) -> torch.Tensor:
        t = ids.size(1)
        pos = torch.arange(t, device=ids.device)
        x = self.tok_emb(ids) + self.pos_emb(pos)
        for block in self.blocks:
            x = block(x)
        return self.head(self.ln_f(x))


class MiniBackend(TorchLMBackend):
    """Generator backend wrapping ``MiniDecoderLM`` plus a word vocabulary."""

    def __init__(self, vocab: Vocab, config: MiniLMConfig = MiniLMConfig()):
        self.vocab = vocab
        self.config = config
        torch.manual_seed(config.seed)
        self._model = MiniDecoderLM(len(vocab), config).to(config.torch_dtype)
        self._optimizer = None

    @property
    def max_context(self) -> int:
        return self.config.max_context

    @property
    def pad_id(self) -> int:
        return self.vocab.pad_id

    @property
    def bos_id(self) -> int:
        return self.vocab.bos_id

    @property
    def eos_id(self) -> int:
        return self.vocab.eos_id

    def encode(self, text: str) -> list[int]:
        return self.vocab.encode(text)

    def decode(self, ids: Sequence[int]) -> str:
        return self.vocab.decode(ids)

    @property
    def module(self) -> MiniDecoderLM:
        return self._model

    def save(self, path) -> None:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        torch.save(
            {
                "format_version": CHECKPOINT_VERSION,
                "kind": CHECKPOINT_KIND,
                "config": asdict(self.config),
                "vocab_tokens": list(self.vocab.tokens),
                "state_dict": self._model.state_dict(),
            },
            path,
        )

    @classmethod
    def load(cls, path) -> "MiniBackend":
        payload = torch.load(path, map_location="cpu")
        if payload.get("kind") != CHECKPOINT_KIND:
            raise ValueError(f"{path}: not a {CHECKPOINT_KIND} checkpoint")
        if payload.get("format_version") != CHECKPOINT_VERSION:
            raise ValueError(f"{path}: unsupported checkpoint version")
        backend = cls(Vocab(tuple(payload["vocab_tokens"])), MiniLMConfig(**payload["config"]))
        backend._model.load_state_dict(payload["state_dict"])
        return backend
