"""Dataset model and ingestion for comparative relation corpora.

A corpus is a JSONL file, one object per line:

    {"id": "optional-string", "text": "...", "relations": [{"t1": ..., "t2": ..., "aspect": ...}]}

Relations are 3-tuples (t1, t2, aspect). The two targets are unordered:
two relations are equal when their target sets and aspects agree under
``normalize_element``.
"""

from __future__ import annotations

import json
import logging
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

from .grounding import is_grounded
from .textutil import normalize_element, word_tokenize

logger = logging.getLogger(__name__)

SPLIT_RATIO = (7, 1, 2)  # train : dev : test


@dataclass(frozen=True, eq=False)
class Relation:
    """A comparison of two targets on one aspect.

    Fields are stripped at construction and must be non-empty. Equality
    and hashing treat {t1, t2} as an unordered pair and normalize all
    elements, so ("D80", "D70", "Weight") == ("d70", "d80", "weight").
    """

    t1: str
    t2: str
    aspect: str

    def __post_init__(self):
        for name in ("t1", "t2", "aspect"):
            value = getattr(self, name).strip()
            if not value:
                raise ValueError(f"relation field {name!r} is empty")
            object.__setattr__(self, name, value)

    def key(self) -> tuple[frozenset[str], str]:
        return (
            frozenset((normalize_element(self.t1), normalize_element(self.t2))),
            normalize_element(self.aspect),
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, Relation):
            return NotImplemented
        return self.key() == other.key()

    def __hash__(self) -> int:
        return hash(self.key())

    def to_dict(self) -> dict:
        return {"t1": self.t1, "t2": self.t2, "aspect": self.aspect}

    @classmethod
    def from_dict(cls, d: dict) -> "Relation":
        return cls(t1=str(d["t1"]), t2=str(d["t2"]), aspect=str(d["aspect"]))


@dataclass(frozen=True)
class Sentence:
    """A source sentence with its (possibly empty) gold relation set."""

    id: str
    text: str
    tokens: tuple[str, ...] = ()
    relations: tuple[Relation, ...] = ()

    def __post_init__(self):
        if not self.tokens:
            object.__setattr__(self, "tokens", tuple(word_tokenize(self.text)))

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "text": self.text,
            "relations": [r.to_dict() for r in self.relations],
        }


@dataclass
class DatasetSplit:
    train: list[Sentence]
    dev: list[Sentence]
    test: list[Sentence]
    seed: int


@dataclass
class DatasetStats:
    """Corpus-level counts plus the relations-per-sentence histogram.

    Fractions are reported against two denominators: all sentences
    (including a zero-relation bucket) and only sentences carrying at
    least one relation.
    """

    sentence_count: int
    relation_count: int
    histogram: dict[int, int]
    fractions_all: dict[int, float]
    fractions_comparative: dict[int, float]

    def to_dict(self) -> dict:
        return {
            "sentence_count": self.sentence_count,
            "relation_count": self.relation_count,
            "histogram": {str(k): v for k, v in sorted(self.histogram.items())},
            "fractions_all": {str(k): v for k, v in sorted(self.fractions_all.items())},
            "fractions_comparative": {
                str(k): v for k, v in sorted(self.fractions_comparative.items())
            },
        }


class DatasetFormatError(ValueError):
    """Malformed corpus file; message names the offending line."""


def _parse_record(record: dict, line_no: int, fallback_id: str) -> Sentence:
    if not isinstance(record, dict):
        raise DatasetFormatError(f"line {line_no}: record is not an object")
    text = record.get("text")
    if not isinstance(text, str) or not text.strip():
        raise DatasetFormatError(f"line {line_no}: missing or empty 'text' field")
    raw_relations = record.get("relations")
    if not isinstance(raw_relations, list):
        raise DatasetFormatError(f"line {line_no}: missing 'relations' array")
    relations = []
    for k, raw in enumerate(raw_relations):
        try:
            relations.append(Relation.from_dict(raw))
        except (KeyError, TypeError, ValueError) as exc:
            raise DatasetFormatError(f"line {line_no}: bad relation #{k + 1}: {exc}") from exc
    sid = str(record.get("id", fallback_id))
    return Sentence(id=sid, text=text, relations=tuple(relations))


def load_dataset(path: str | Path) -> list[Sentence]:
    """Read a JSONL corpus, in file order.

    Missing ids default to the 1-based line number. Gold elements that
    fail the grounding check are reported as warnings through the module
    logger, not errors, so noisy annotations stay usable for recall
    accounting. Malformed records and empty files raise
    ``DatasetFormatError``.
    """
    path = Path(path)
    sentences: list[Sentence] = []
    seen_ids: set[str] = set()
    with path.open(encoding="utf-8") as fh:
        for line_no, line in enumerate(fh, start=1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DatasetFormatError(f"line {line_no}: invalid JSON: {exc}") from exc
            sentence = _parse_record(record, line_no, fallback_id=str(line_no))
            if sentence.id in seen_ids:
                raise DatasetFormatError(f"line {line_no}: duplicate id {sentence.id!r}")
            seen_ids.add(sentence.id)
            for rel in sentence.relations:
                for el in (rel.t1, rel.t2, rel.aspect):
                    if not is_grounded(el, sentence.text):
                        logger.warning(
                            "sentence %s: element %r not grounded in text", sentence.id, el
                        )
            sentences.append(sentence)
    if not sentences:
        raise DatasetFormatError(f"{path}: empty dataset")
    return sentences


def save_dataset(sentences: Iterable[Sentence], path: str | Path) -> None:
    from .fileio import atomic_write_text

    lines = [json.dumps(s.to_dict(), ensure_ascii=False, sort_keys=True) for s in sentences]
    atomic_write_text(path, "\n".join(lines) + "\n")


def _largest_remainder(total: int, ratio: Sequence[int]) -> list[int]:
    """Apportion ``total`` into integer parts proportional to ``ratio``.

    Floor quotas first, then hand out the remainder by largest fractional
    part; ties go to the earlier bucket.
    """
    denom = sum(ratio)
    quotas = [total * r / denom for r in ratio]
    sizes = [int(q) for q in quotas]
    remainders = [q - s for q, s in zip(quotas, sizes)]
    for i in sorted(range(len(ratio)), key=lambda i: -remainders[i])[: total - sum(sizes)]:
        sizes[i] += 1
    return sizes


def split_dataset(sentences: Sequence[Sentence], seed: int) -> DatasetSplit:
    """Shuffle deterministically and split 7:1:2 by largest remainder."""
    if len(sentences) < 10:
        raise ValueError(f"need at least 10 sentences to split, got {len(sentences)}")
    shuffled = list(sentences)
    random.Random(seed).shuffle(shuffled)
    n_train, n_dev, n_test = _largest_remainder(len(shuffled), SPLIT_RATIO)
    return DatasetSplit(
        train=shuffled[:n_train],
        dev=shuffled[n_train : n_train + n_dev],
        test=shuffled[n_train + n_dev :],
        seed=seed,
    )


def dataset_stats(sentences: Sequence[Sentence]) -> DatasetStats:
    histogram: dict[int, int] = {}
    for s in sentences:
        histogram[len(s.relations)] = histogram.get(len(s.relations), 0) + 1
    n = len(sentences)
    n_comparative = sum(c for k, c in histogram.items() if k > 0)
    fractions_all = {k: c / n for k, c in histogram.items()} if n else {}
    fractions_comparative = {
        k: c / n_comparative for k, c in histogram.items() if k > 0
    } if n_comparative else {}
    return DatasetStats(
        sentence_count=n,
        relation_count=sum(len(s.relations) for s in sentences),
        histogram=histogram,
        fractions_all=fractions_all,
        fractions_comparative=fractions_comparative,
    )


def _pair_from_index(idx: int, n: int) -> tuple[int, int]:
    # Ordered pairs (i, j), i != j, enumerated as i * (n - 1) + j' with the
    # diagonal removed.
    i, j = divmod(idx, n - 1)
    if j >= i:
        j += 1
    return i, j


def augment_concat(
    train: Sequence[Sentence], num_pairs: int, seed: int
) -> list[Sentence]:
    """Build synthetic multi-relation sentences by concatenating pairs.

    Samples ``num_pairs`` ordered pairs of distinct training sentences
    without replacement. The synthetic text is first + single space +
    second, relations follow concatenation order, and ids are marked
    "aug-<first>-<second>".
    """
    n = len(train)
    if n < 2:
        raise ValueError("need at least 2 sentences to augment")
    if num_pairs < 1:
        raise ValueError("num_pairs must be >= 1")
    available = n * (n - 1)
    if num_pairs > available:
        raise ValueError(
            f"num_pairs={num_pairs} exceeds the {available} distinct ordered pairs"
        )
    indices = random.Random(seed).sample(range(available), num_pairs)
    out = []
    for idx in indices:
        i, j = _pair_from_index(idx, n)
        first, second = train[i], train[j]
        out.append(
            Sentence(
                id=f"aug-{first.id}-{second.id}",
                text=f"{first.text} {second.text}",
                relations=first.relations + second.relations,
            )
        )
    return out
