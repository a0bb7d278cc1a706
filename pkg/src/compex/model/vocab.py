"""Word-level vocabulary for the from-scratch generator backend.

Tokens are lowercased whitespace chunks, with one twist: a trailing ";"
is split off as its own token so the relation joiner "; " survives the
tokenize/detokenize round trip exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterable

PAD, BOS, EOS, UNK = "<pad>", "<bos>", "<eos>", "<unk>"
SPECIALS = (PAD, BOS, EOS, UNK)


def lm_tokenize(text: str) -> list[str]:
    tokens = []
    for chunk in text.lower().split():
        if len(chunk) > 1 and chunk.endswith(";"):
            tokens.append(chunk[:-1])
            tokens.append(";")
        else:
            tokens.append(chunk)
    return tokens


def lm_detokenize(tokens: list[str]) -> str:
    return " ".join(tokens).replace(" ;", ";")


@dataclass(frozen=True)
class Vocab:
    tokens: tuple[str, ...]
    index: dict[str, int] = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        object.__setattr__(self, "index", {t: i for i, t in enumerate(self.tokens)})

    @classmethod
    def build(cls, texts: Iterable[str]) -> "Vocab":
        words = sorted({tok for text in texts for tok in lm_tokenize(text)})
        return cls(tokens=SPECIALS + tuple(words))

    def __len__(self) -> int:
        return len(self.tokens)

    @property
    def pad_id(self) -> int:
        return self.index[PAD]

    @property
    def bos_id(self) -> int:
        return self.index[BOS]

    @property
    def eos_id(self) -> int:
        return self.index[EOS]

    @property
    def unk_id(self) -> int:
        return self.index[UNK]

    def encode(self, text: str) -> list[int]:
        unk = self.unk_id
        return [self.index.get(tok, unk) for tok in lm_tokenize(text)]

    def decode(self, ids: Iterable[int]) -> str:
        special = {self.pad_id, self.bos_id, self.eos_id}
        return lm_detokenize([self.tokens[i] for i in ids if i not in special])
