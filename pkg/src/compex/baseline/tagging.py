"""BIO tagging of comparative elements and Cartesian relation building.

The pipeline baseline labels tokens as comparison targets (T) or aspects
(A), then combines extracted spans into relation tuples: every unordered
pair of targets crossed with every aspect.
"""

from __future__ import annotations

import logging
from itertools import combinations, permutations
from typing import Sequence

from ..data import Relation, Sentence
from ..grounding import UngroundedElementError, first_occurrence
from ..textutil import normalize_element

logger = logging.getLogger(__name__)

LABELS = ("O", "B-T", "I-T", "B-A", "I-A")


def validate_bio(tags: Sequence[str]) -> None:
    """Raise ``ValueError`` unless ``tags`` is a valid BIO sequence."""
    previous = "O"
    for i, tag in enumerate(tags):
        if tag not in LABELS:
            raise ValueError(f"position {i}: unknown tag {tag!r}")
        if tag.startswith("I-") and previous not in (f"B-{tag[2:]}", f"I-{tag[2:]}"):
            raise ValueError(f"position {i}: {tag} cannot follow {previous}")
        previous = tag


def gold_to_tags(sentence: Sentence) -> list[str]:
    """Project gold relation elements onto token labels.

    Each element is located by its first occurrence; targets become
    B-T/I-T spans and aspects B-A/I-A spans. Overlapping projections are
    resolved first-match-wins in relation order. Raises
    ``UngroundedElementError`` if any gold element is missing from the
    text.
    """
    tags = ["O"] * len(sentence.tokens)
    for rel in sentence.relations:
        for element, kind in ((rel.t1, "T"), (rel.t2, "T"), (rel.aspect, "A")):
            start = first_occurrence(element, sentence.text)
            if start is None:
                raise UngroundedElementError(element, sentence.text)
            width = len(normalize_element(element).split())
            span = range(start, start + width)
            if all(tags[i] == "O" for i in span):
                tags[start] = f"B-{kind}"
                for i in span[1:]:
                    tags[i] = f"I-{kind}"
    return tags


def build_tagged_corpus(
    sentences: Sequence[Sentence],
) -> tuple[list[tuple[Sentence, list[str]]], int]:
    """Tag every sentence, skipping (with a count) those with ungrounded gold."""
    tagged, skipped = [], 0
    for sentence in sentences:
        try:
            tagged.append((sentence, gold_to_tags(sentence)))
        except UngroundedElementError as exc:
            logger.warning("skipping sentence %s: %s", sentence.id, exc)
            skipped += 1
    return tagged, skipped


def _spans(tags: Sequence[str]) -> list[tuple[str, int, int]]:
    spans = []
    i = 0
    while i < len(tags):
        if tags[i].startswith("B-"):
            kind = tags[i][2:]
            j = i + 1
            while j < len(tags) and tags[j] == f"I-{kind}":
                j += 1
            spans.append((kind, i, j))
            i = j
        else:
            i += 1
    return spans


def tags_to_relations(
    sentence: Sentence, tags: Sequence[str], ordered_pairs: bool = False
) -> list[Relation]:
    """Cartesian-product relation building from tagged spans.

    With fewer than two targets or no aspect the result is empty. The
    default pairs targets unordered (i < j); ``ordered_pairs`` emits both
    orders, for sensitivity checks only.
    """
    validate_bio(tags)
    targets, aspects = [], []
    for kind, start, end in _spans(tags):
        text = " ".join(sentence.tokens[start:end])
        (targets if kind == "T" else aspects).append(text)
    if len(targets) < 2 or not aspects:
        return []
    pair_iter = permutations(targets, 2) if ordered_pairs else combinations(targets, 2)
    return [Relation(t1=a, t2=b, aspect=aspect) for a, b in pair_iter for aspect in aspects]
