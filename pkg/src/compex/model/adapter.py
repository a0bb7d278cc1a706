"""Adapter for an externally pretrained decoder-only checkpoint.

The desk-scale pipeline never depends on pretrained weights; this slot
exists for full-scale runs where a local Hugging Face checkpoint
directory is available. Requires the optional ``transformers`` extra.
"""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import torch

from .backend import TorchLMBackend


class PretrainedDecoderBackend(TorchLMBackend):
    def __init__(self, checkpoint_dir: str | Path, seed: int = 0):
        try:
            from transformers import AutoModelForCausalLM, AutoTokenizer
        except ImportError as exc:  # pragma: no cover
            raise ImportError(
                "the pretrained-decoder adapter needs the 'transformers' package; "
                "install compex[adapter]"
            ) from exc
        checkpoint_dir = Path(checkpoint_dir)
        if not checkpoint_dir.is_dir():
            raise ValueError(f"{checkpoint_dir}: not a checkpoint directory")
        torch.manual_seed(seed)
        self._tokenizer = AutoTokenizer.from_pretrained(checkpoint_dir)
        self._model = AutoModelForCausalLM.from_pretrained(checkpoint_dir)
        self._model.eval()
        self._optimizer = None
        self._checkpoint_dir = checkpoint_dir
        if self._tokenizer.eos_token_id is None:
            raise ValueError("adapter checkpoint must define an end-of-sequence token")

    def _logits(self, ids: torch.Tensor) -> torch.Tensor:
        return self._model(input_ids=ids).logits

    @property
    def max_context(self) -> int:
        config = self._model.config
        for attr in ("n_positions", "max_position_embeddings"):
            if getattr(config, attr, None):
                return int(getattr(config, attr))
        return 1024

    @property
    def pad_id(self) -> int:
        if self._tokenizer.pad_token_id is not None:
            return self._tokenizer.pad_token_id
        return self.eos_id

    @property
    def bos_id(self) -> int:
        # many decoder-only tokenizers reuse one marker for begin and end
        if self._tokenizer.bos_token_id is not None:
            return self._tokenizer.bos_token_id
        return self.eos_id

    @property
    def eos_id(self) -> int:
        return self._tokenizer.eos_token_id

    def encode(self, text: str) -> list[int]:
        return self._tokenizer.encode(text, add_special_tokens=False)

    def decode(self, ids: Sequence[int]) -> str:
        return self._tokenizer.decode(ids, skip_special_tokens=True).strip()

    def save(self, path) -> None:
        path = Path(path)
        path.mkdir(parents=True, exist_ok=True)
        self._model.save_pretrained(path)
        self._tokenizer.save_pretrained(path)
