"""Grounding checks: every relation element must occur in the source text.

An element is grounded when its normalized form appears as a contiguous
token subsequence of the normalized source tokens. Matching whole tokens
(not raw substrings) keeps "her" from matching inside "weather".
Generated relations that fail the check are discarded, never repaired.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import TYPE_CHECKING, Sequence

from .textutil import normalize_element, word_tokenize

if TYPE_CHECKING:
    from .data import Relation


class UngroundedElementError(ValueError):
    """Raised where grounding is a precondition, naming the offending element."""

    def __init__(self, element: str, text: str):
        self.element = element
        super().__init__(f"element {element!r} does not occur in text {text!r}")


def _norm_tokens(text: str) -> list[str]:
    return [t.lower() for t in word_tokenize(text)]


def first_occurrence(element: str, text: str) -> int | None:
    """Token index where the normalized element first matches, or None.

    The index refers to the whitespace tokenization of ``text``.
    """
    needle = normalize_element(element).split()
    if not needle:
        return None
    hay = _norm_tokens(text)
    width = len(needle)
    for i in range(len(hay) - width + 1):
        if hay[i : i + width] == needle:
            return i
    return None


def is_grounded(element: str, text: str) -> bool:
    return first_occurrence(element, text) is not None


@dataclass
class FilterResult:
    """Partition of candidate relations into grounded and discarded.

    ``discarded`` pairs each rejected relation with the elements that
    failed the check.
    """

    kept: list["Relation"] = field(default_factory=list)
    discarded: list[tuple["Relation", list[str]]] = field(default_factory=list)


def ground_filter(relations: Sequence["Relation"], text: str) -> FilterResult:
    """Keep relations whose three elements are all grounded in ``text``.

    Order is preserved among kept relations; |kept| + |discarded| equals
    the input size.
    """
    result = FilterResult()
    for rel in relations:
        offending = [el for el in (rel.t1, rel.t2, rel.aspect) if not is_grounded(el, text)]
        if offending:
            result.discarded.append((rel, offending))
        else:
            result.kept.append(rel)
    return result
