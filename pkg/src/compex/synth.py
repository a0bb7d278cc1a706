"""Templated synthetic corpus with known gold relations.

The real review corpora cannot be redistributed, so tests and demos run
on generated product-comparison sentences: lowercase, punctuation-free,
with every gold element grounded by construction. Sentences carry zero,
one, two, or three relations; multi-relation sentences are built from
conjoined or concatenated single-relation clauses.
"""

from __future__ import annotations

import random
from dataclasses import dataclass

from .data import Relation, Sentence

ENTITIES = (
    "d70", "d80", "d90", "x100", "x200", "k5", "k7", "m6",
    "g7", "a9", "p30", "z50", "q60", "r8", "s11", "t12",
)

ASPECTS = (
    "weight", "price", "zoom", "battery life", "screen", "autofocus",
    "grip", "durability", "speed", "image quality", "color", "noise",
)

SINGLE_TEMPLATES = (
    "the {t1} is better than the {t2} in {a}",
    "the {t1} beats the {t2} on {a}",
    "i prefer the {t1} over the {t2} for {a}",
    "compared to the {t2} the {t1} wins on {a}",
    "{t1} has better {a} than {t2}",
    "between the {t1} and the {t2} the gap in {a} is huge",
)

# one shared first target compared against two others
SHARED_TEMPLATES = (
    "the {t1} beats the {t2} and the {t3} on {a}",
    "the {t1} tops both the {t2} and the {t3} in {a}",
)

ZERO_TEMPLATES = (
    "the {t1} arrived yesterday and looks great",
    "my {t1} stopped working after a week",
    "i bought the {t1} last month and it still works",
    "the {t1} ships with a solid case",
)


@dataclass(frozen=True)
class SynthConfig:
    n_sentences: int = 500
    seed: int = 0
    # relations-per-sentence mix: fractions for 0, 1, 2, 3
    frac_zero: float = 0.04
    frac_one: float = 0.88
    frac_two: float = 0.06
    frac_three: float = 0.02

    def __post_init__(self):
        total = self.frac_zero + self.frac_one + self.frac_two + self.frac_three
        if abs(total - 1.0) > 1e-9:
            raise ValueError(f"fractions must sum to 1, got {total}")
        if self.n_sentences < 10:
            raise ValueError("n_sentences must be at least 10")


def _allocate(config: SynthConfig) -> list[int]:
    fractions = (config.frac_zero, config.frac_one, config.frac_two, config.frac_three)
    quotas = [config.n_sentences * f for f in fractions]
    counts = [int(q) for q in quotas]
    leftovers = sorted(range(4), key=lambda i: -(quotas[i] - counts[i]))
    for i in leftovers[: config.n_sentences - sum(counts)]:
        counts[i] += 1
    plan = [k for k, c in enumerate(counts) for _ in range(c)]
    return plan


def _single_clause(rng: random.Random, entities: list[str], aspects: list[str]):
    t1, t2 = entities.pop(), entities.pop()
    aspect = aspects.pop()
    text = rng.choice(SINGLE_TEMPLATES).format(t1=t1, t2=t2, a=aspect)
    return text, [Relation(t1=t1, t2=t2, aspect=aspect)]


def _shared_clause(rng: random.Random, entities: list[str], aspects: list[str]):
    t1, t2, t3 = entities.pop(), entities.pop(), entities.pop()
    aspect = aspects.pop()
    text = rng.choice(SHARED_TEMPLATES).format(t1=t1, t2=t2, t3=t3, a=aspect)
    return text, [Relation(t1, t2, aspect), Relation(t1, t3, aspect)]


def _make_sentence(rng: random.Random, n_relations: int, sid: str) -> Sentence:
    entities = rng.sample(ENTITIES, 7)
    aspects = rng.sample(ASPECTS, 3)
    if n_relations == 0:
        text = rng.choice(ZERO_TEMPLATES).format(t1=entities.pop())
        relations: list[Relation] = []
    elif n_relations == 1:
        text, relations = _single_clause(rng, entities, aspects)
    elif n_relations == 2:
        if rng.random() < 0.5:
            text, relations = _shared_clause(rng, entities, aspects)
        else:
            a_text, a_rels = _single_clause(rng, entities, aspects)
            b_text, b_rels = _single_clause(rng, entities, aspects)
            text, relations = f"{a_text} {b_text}", a_rels + b_rels
    elif n_relations == 3:
        if rng.random() < 0.5:
            a_text, a_rels = _shared_clause(rng, entities, aspects)
            b_text, b_rels = _single_clause(rng, entities, aspects)
        else:
            a_text, a_rels = _single_clause(rng, entities, aspects)
            b_text, b_rels = _shared_clause(rng, entities, aspects)
        text, relations = f"{a_text} {b_text}", a_rels + b_rels
    else:
        raise ValueError(f"unsupported relation count {n_relations}")
    return Sentence(id=sid, text=text, relations=tuple(relations))


def generate_corpus(config: SynthConfig = SynthConfig()) -> list[Sentence]:
    """Deterministic under the config seed."""
    rng = random.Random(config.seed)
    plan = _allocate(config)
    rng.shuffle(plan)
    width = len(str(config.n_sentences))
    return [
        _make_sentence(rng, k, f"s{i:0{width}d}") for i, k in enumerate(plan)
    ]
