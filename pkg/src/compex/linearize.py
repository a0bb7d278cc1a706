"""Bidirectional mapping between relation tuples and generated text.

A relation (t1, t2, aspect) is rendered as "t1 vs. t2 in aspect"; multiple
relations are joined with "; ". That string is the wire format, bit-exact.
" vs. " and " in " are reserved delimiters, so the serializer refuses
elements that contain them instead of emitting ambiguous text.

The parser is total: it must survive arbitrary decoder output. Segments
that do not match the format are dropped and counted, never raised on.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

from .data import Relation, Sentence
from .grounding import UngroundedElementError, first_occurrence

RELATION_JOINER = "; "
TARGET_DELIM = " vs. "
ASPECT_DELIM = " in "

# ";" alone is also refused: the generator's tokenizer treats it as
# punctuation, and an element containing it would not survive the
# tokenize/detokenize round trip.
_FORBIDDEN_IN_ELEMENTS = (TARGET_DELIM, ASPECT_DELIM, ";")


@dataclass(frozen=True)
class LinearizedSample:
    """One (prompted input, target text) training pair."""

    input_text: str
    target_text: str
    sentence_id: str


@dataclass
class ParseResult:
    relations: list[Relation] = field(default_factory=list)
    dropped_segments: int = 0


def element_positions(relation: Relation, text: str) -> tuple[int, int, int]:
    """First-occurrence token positions of (t1, t2, aspect) in ``text``."""
    positions = []
    for el in (relation.t1, relation.t2, relation.aspect):
        pos = first_occurrence(el, text)
        if pos is None:
            raise UngroundedElementError(el, text)
        positions.append(pos)
    return tuple(positions)


def canonical_order(relations: Sequence[Relation], text: str) -> list[Relation]:
    """Order targets and relations by their positions in the source text.

    Within a relation, t1 becomes the target whose first occurrence comes
    earlier (equal positions keep the given order, so a target compared
    with itself stays put). The relation list is then sorted by
    (pos(t1), pos(t2), pos(aspect)), which groups relations sharing a
    first target. Raises ``UngroundedElementError`` for any element that
    does not occur in the text.
    """
    keyed = []
    for rel in relations:
        p1, p2, pa = element_positions(rel, text)
        if p2 < p1:
            rel = Relation(t1=rel.t2, t2=rel.t1, aspect=rel.aspect)
            p1, p2 = p2, p1
        keyed.append(((p1, p2, pa), rel))
    keyed.sort(key=lambda item: item[0])
    return [rel for _, rel in keyed]


def serialize_relations(relations: Sequence[Relation]) -> str:
    """Render relations as '<t1> vs. <t2> in <aspect>' joined by '; '.

    The list must be non-empty (a no-relation sentence is not a training
    target) and already canonically ordered. Elements containing reserved
    delimiters raise ``ValueError``.
    """
    if not relations:
        raise ValueError("cannot serialize an empty relation list")
    parts = []
    for rel in relations:
        for el in (rel.t1, rel.t2, rel.aspect):
            for bad in _FORBIDDEN_IN_ELEMENTS:
                if bad in el:
                    raise ValueError(
                        f"element {el!r} contains reserved delimiter {bad!r}"
                    )
        parts.append(f"{rel.t1}{TARGET_DELIM}{rel.t2}{ASPECT_DELIM}{rel.aspect}")
    return RELATION_JOINER.join(parts)


def _parse_segment(segment: str) -> Relation | None:
    # t1 ends at the first " vs. "; t2 and aspect split at the rightmost
    # " in " after it. Targets containing " vs. " are unsupported; an
    # aspect containing " in " therefore parses with the tail " in " as
    # the delimiter.
    vs_at = segment.find(TARGET_DELIM)
    if vs_at < 0:
        return None
    t1 = segment[:vs_at]
    remainder = segment[vs_at + len(TARGET_DELIM) :]
    in_at = remainder.rfind(ASPECT_DELIM)
    if in_at < 0:
        return None
    t2 = remainder[:in_at]
    aspect = remainder[in_at + len(ASPECT_DELIM) :]
    try:
        return Relation(t1=t1, t2=t2, aspect=aspect)
    except ValueError:
        return None


def parse_relations(generated: str) -> ParseResult:
    """Parse decoder output back into relations. Total: never raises.

    Splits on '; ', then parses each segment; segments that do not fit
    the format are dropped and counted in ``dropped_segments``.
    """
    result = ParseResult()
    text = generated.strip()
    if not text:
        return result
    for segment in text.split(RELATION_JOINER):
        segment = segment.strip()
        relation = _parse_segment(segment) if segment else None
        if relation is None:
            result.dropped_segments += 1
        else:
            result.relations.append(relation)
    return result


def usable_relations(sentence: Sentence) -> tuple[list[Relation], int]:
    """Relations of ``sentence`` that can become a training target.

    Drops relations with ungrounded elements or reserved delimiters
    inside elements; returns (kept, dropped_count).
    """
    kept, dropped = [], 0
    for rel in sentence.relations:
        grounded = all(
            first_occurrence(el, sentence.text) is not None
            for el in (rel.t1, rel.t2, rel.aspect)
        )
        clean = not any(
            bad in el
            for el in (rel.t1, rel.t2, rel.aspect)
            for bad in _FORBIDDEN_IN_ELEMENTS
        )
        if grounded and clean:
            kept.append(rel)
        else:
            dropped += 1
    return kept, dropped
