import random

import pytest

from compex.data import Relation, Sentence


def make_sentence(sid, text, relations=()):
    return Sentence(id=sid, text=text, relations=tuple(relations))


@pytest.fixture
def simple_sentence():
    return make_sentence(
        "s1", "D80 beats D70 on weight", [Relation("D80", "D70", "weight")]
    )


def camera_shaped_corpus():
    """1279 sentences / 1780 relations with the published per-count mix:
    952 one-relation, 223 two-relation, 94 three-relation, 10 ten-relation."""
    sentences = []
    counts = [1] * 952 + [2] * 223 + [3] * 94 + [10] * 10
    assert len(counts) == 1279 and sum(counts) == 1780
    for i, k in enumerate(counts):
        relations = []
        parts = []
        for j in range(k):
            t1, t2, aspect = f"cam{i}a{j}", f"cam{i}b{j}", f"asp{i}x{j}"
            parts.append(f"the {t1} beats the {t2} on {aspect}")
            relations.append(Relation(t1, t2, aspect))
        sentences.append(make_sentence(f"c{i}", " ".join(parts), relations))
    return sentences


def compsent_shaped_corpus():
    """628 sentences / 751 relations: 538 one, 73 two, 16 three, 1 nineteen."""
    sentences = []
    counts = [1] * 538 + [2] * 73 + [3] * 16 + [19]
    assert len(counts) == 628 and sum(counts) == 751
    for i, k in enumerate(counts):
        relations = []
        parts = []
        for j in range(k):
            t1, t2, aspect = f"p{i}a{j}", f"p{i}b{j}", f"f{i}x{j}"
            parts.append(f"{t1} is worse than {t2} for {aspect}")
            relations.append(Relation(t1, t2, aspect))
        sentences.append(make_sentence(f"d{i}", " ".join(parts), relations))
    return sentences


def random_grounded_case(rng: random.Random, max_relations: int = 4):
    """A templated sentence plus a grounded relation list over it."""
    n_rel = rng.randint(1, max_relations)
    parts, relations = [], []
    for j in range(n_rel):
        t1 = f"item{rng.randrange(50)}x{j}"
        t2 = f"item{rng.randrange(50)}y{j}"
        aspect = rng.choice(
            [f"prop{rng.randrange(20)}", f"prop{rng.randrange(20)} quality"]
        )
        template = rng.choice(
            [
                "the {t1} is better than the {t2} in {a}",
                "compared to the {t2} the {t1} wins on {a}",
                "{t1} has better {a} than {t2}",
            ]
        )
        parts.append(template.format(t1=t1, t2=t2, a=aspect))
        relations.append(Relation(t1, t2, aspect))
    rng.shuffle(relations)
    return " ".join(parts), relations
