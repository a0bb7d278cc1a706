"""The trainable autoregressive generator contract and shared torch plumbing.

A backend owns its parameters and tokenizer, maps strings to token ids
with begin/end markers, and exposes exactly three behaviors: a training
step on (input, target) id pairs, a loss probe, and greedy generation.
Training sequences are packed as

    input tokens  +  <bos>  +  target tokens  +  <eos>

and the loss covers only the target tokens plus the end marker; the input
prefix is context, not supervision.
"""

from __future__ import annotations

from abc import ABC, abstractmethod
from dataclasses import dataclass
from typing import Sequence

import torch

Pair = tuple[list[int], list[int]]  # (input ids, target ids), no markers


@dataclass(frozen=True)
class TrainConfig:
    epochs: int = 40
    batch_size: int = 16
    learning_rate: float = 2e-3
    max_target_length: int = 64  # decoding cap, tokens
    seed: int = 0

    def __post_init__(self):
        if self.epochs <= 0 or self.batch_size <= 0:
            raise ValueError("epochs and batch_size must be positive")
        if self.learning_rate <= 0:
            raise ValueError("learning_rate must be positive")
        if self.max_target_length < 8:
            raise ValueError("max_target_length must be >= 8")


class GeneratorBackend(ABC):
    """Opaque trainable decoder. Greedy generation is deterministic."""

    @property
    @abstractmethod
    def max_context(self) -> int: ...

    @property
    @abstractmethod
    def bos_id(self) -> int: ...

    @property
    @abstractmethod
    def eos_id(self) -> int: ...

    @abstractmethod
    def encode(self, text: str) -> list[int]:
        """Token ids for ``text``, without begin/end markers."""

    @abstractmethod
    def decode(self, ids: Sequence[int]) -> str:
        """Text for ``ids``; markers and padding are dropped."""

    @abstractmethod
    def train_step(self, batch: Sequence[Pair], learning_rate: float) -> float:
        """One optimizer step on ``batch``; returns mean per-token loss."""

    @abstractmethod
    def batch_loss(self, batch: Sequence[Pair]) -> float:
        """Mean per-token loss on ``batch`` without updating parameters."""

    @abstractmethod
    def generate_ids(self, prefix_ids: Sequence[int], max_new_tokens: int) -> list[int]:
        """Greedy continuation after ``prefix_ids + [bos]``, up to the end
        marker or ``max_new_tokens``, whichever first. The end marker is
        not included in the result."""

    @abstractmethod
    def save(self, path) -> None: ...


def masked_loss(
    logits: torch.Tensor, labels: torch.Tensor, mask: torch.Tensor
) -> torch.Tensor:
    """Cross-entropy summed over masked positions, divided by their count.

    ``mask`` multiplies per-token losses, so positions with mask 0 (the
    input prefix and padding) contribute exactly zero to both the value
    and the gradient; their label entries are irrelevant.
    """
    per_token = torch.nn.functional.cross_entropy(
        logits.reshape(-1, logits.size(-1)), labels.reshape(-1), reduction="none"
    )
    mask = mask.reshape(-1).to(per_token.dtype)
    return (per_token * mask).sum() / mask.sum()


def pack_pair(pair: Pair, bos_id: int, eos_id: int) -> tuple[list[int], int]:
    """Full training sequence and its prefix length (input + begin marker)."""
    input_ids, target_ids = pair
    return list(input_ids) + [bos_id] + list(target_ids) + [eos_id], len(input_ids) + 1


def collate(
    batch: Sequence[Pair], pad_id: int, bos_id: int, eos_id: int
) -> tuple[torch.Tensor, torch.Tensor, torch.Tensor]:
    """Teacher-forcing tensors (inputs, labels, loss mask), right-padded."""
    packed = [pack_pair(pair, bos_id, eos_id) for pair in batch]
    width = max(len(seq) for seq, _ in packed)
    x = torch.full((len(packed), width - 1), pad_id, dtype=torch.long)
    y = torch.full((len(packed), width - 1), pad_id, dtype=torch.long)
    mask = torch.zeros((len(packed), width - 1), dtype=torch.float32)
    for row, (seq, prefix_len) in enumerate(packed):
        seq_t = torch.tensor(seq, dtype=torch.long)
        x[row, : len(seq) - 1] = seq_t[:-1]
        y[row, : len(seq) - 1] = seq_t[1:]
        mask[row, prefix_len - 1 : len(seq) - 1] = 1.0
    return x, y, mask


class TorchLMBackend(GeneratorBackend):
    """Shared train/generate logic for torch-based backends.

    Subclasses provide ``_model`` (an nn.Module mapping a (B, T) id tensor
    to (B, T, vocab) logits) plus tokenizer properties.
    """

    _model: torch.nn.Module
    _optimizer: torch.optim.Optimizer | None = None

    def _logits(self, ids: torch.Tensor) -> torch.Tensor:
        return self._model(ids)

    @property
    @abstractmethod
    def pad_id(self) -> int: ...

    def _batch_tensors(self, batch: Sequence[Pair]):
        if not batch:
            raise ValueError("empty batch")
        return collate(batch, self.pad_id, self.bos_id, self.eos_id)

    def train_step(self, batch: Sequence[Pair], learning_rate: float) -> float:
        x, y, mask = self._batch_tensors(batch)
        if self._optimizer is None:
            self._optimizer = torch.optim.Adam(self._model.parameters(), lr=learning_rate)
        for group in self._optimizer.param_groups:
            group["lr"] = learning_rate
        self._model.train()
        self._optimizer.zero_grad()
        loss = masked_loss(self._logits(x), y, mask)
        loss.backward()
        self._optimizer.step()
        return float(loss.detach())

    @torch.no_grad()
    def batch_loss(self, batch: Sequence[Pair]) -> float:
        x, y, mask = self._batch_tensors(batch)
        self._model.eval()
        return float(masked_loss(self._logits(x), y, mask))

    @torch.no_grad()
    def generate_ids(self, prefix_ids: Sequence[int], max_new_tokens: int) -> list[int]:
        self._model.eval()
        ids = list(prefix_ids) + [self.bos_id]
        if len(ids) > self.max_context:
            raise ValueError(
                f"prompted input of {len(ids)} tokens exceeds context {self.max_context}"
            )
        generated: list[int] = []
        while len(generated) < max_new_tokens and len(ids) < self.max_context:
            x = torch.tensor([ids], dtype=torch.long)
            next_id = int(torch.argmax(self._logits(x)[0, -1]))
            if next_id == self.eos_id:
                break
            generated.append(next_id)
            ids.append(next_id)
        return generated
