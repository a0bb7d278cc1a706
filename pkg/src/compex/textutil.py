"""Text normalization shared by grounding, linearization, and scoring."""

from __future__ import annotations


def normalize_element(s: str) -> str:
    """Lowercase, trim, and collapse internal whitespace runs to one space.

    Idempotent; this is the normalization under which relation elements are
    compared and grounded.
    """
    return " ".join(s.lower().split())


def word_tokenize(text: str) -> list[str]:
    """Whitespace tokenization. Joining with single spaces reproduces the
    text up to whitespace normalization."""
    return text.split()


def detokenize(tokens: list[str]) -> str:
    return " ".join(tokens)
