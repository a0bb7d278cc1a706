import itertools
import math
import random

import numpy as np
import pytest

from compex.baseline.crf import NEG_INF, CrfModel, crf_decode, crf_train
from compex.baseline.tagging import (
    LABELS,
    build_tagged_corpus,
    gold_to_tags,
    tags_to_relations,
    validate_bio,
)
from compex.data import Relation

from conftest import make_sentence


def brute_force_path_scores(model: CrfModel, tokens):
    """Score every label path explicitly; the oracle for forward/Viterbi."""
    emis = model.emissions(tokens)
    trans = model.effective_transitions()
    start = model._start_mask()
    n = len(tokens)
    paths = np.array(list(itertools.product(range(len(LABELS)), repeat=n)))
    scores = start[paths[:, 0]] + emis[np.arange(n)[None, :], paths].sum(axis=1)
    if n > 1:
        scores = scores + trans[paths[:, :-1], paths[:, 1:]].sum(axis=1)
    return paths, scores


def random_model(rng: np.random.Generator, tokens, enforce_bio=True) -> CrfModel:
    model = CrfModel(enforce_bio=enforce_bio)
    for feats in model.features(tokens):
        for f in feats:
            if f not in model.feature_weights:
                model.feature_weights[f] = rng.normal(scale=1.0, size=len(LABELS))
    model.transitions = rng.normal(scale=1.0, size=(len(LABELS), len(LABELS)))
    return model


class TestGoldToTags:
    def test_hand_projected_spans(self):
        sentence = make_sentence(
            "s1", "D80 beats D70 on weight", [Relation("D80", "D70", "weight")]
        )
        assert gold_to_tags(sentence) == ["B-T", "O", "B-T", "O", "B-A"]

    def test_no_relations_all_outside(self):
        sentence = make_sentence("s1", "nothing to see here")
        assert gold_to_tags(sentence) == ["O"] * 4

    def test_multiword_aspect_begins_and_continues(self):
        sentence = make_sentence(
            "s1",
            "the cam1 has better image quality than cam2",
            [Relation("cam1", "cam2", "image quality")],
        )
        assert gold_to_tags(sentence) == [
            "O", "B-T", "O", "O", "B-A", "I-A", "O", "B-T",
        ]

    def test_skip_count_for_ungrounded(self):
        good = make_sentence("g", "a beats b on c", [Relation("a", "b", "c")])
        bad = make_sentence("b", "a beats b", [Relation("a", "z", "c")])
        tagged, skipped = build_tagged_corpus([good, bad])
        assert len(tagged) == 1 and skipped == 1

    def test_output_is_valid_bio(self):
        sentence = make_sentence(
            "s1",
            "the cam1 has better image quality than cam2 and cam3",
            [
                Relation("cam1", "cam2", "image quality"),
                Relation("cam1", "cam3", "image quality"),
            ],
        )
        validate_bio(gold_to_tags(sentence))


class TestValidateBio:
    def test_rejects_orphan_inside(self):
        with pytest.raises(ValueError):
            validate_bio(["O", "I-T"])
        with pytest.raises(ValueError):
            validate_bio(["B-A", "I-T"])

    def test_accepts_valid(self):
        validate_bio(["B-T", "I-T", "O", "B-A", "I-A"])


class TestTagsToRelations:
    def test_single_pair(self):
        sentence = make_sentence("s1", "D80 beats D70 on weight")
        tags = ["B-T", "O", "B-T", "O", "B-A"]
        assert tags_to_relations(sentence, tags) == [Relation("D80", "D70", "weight")]

    def test_three_targets_give_all_pairs(self):
        sentence = make_sentence("s1", "X beats Y and Z on p")
        tags = ["B-T", "O", "B-T", "O", "B-T", "O", "B-A"]
        assert tags_to_relations(sentence, tags) == [
            Relation("X", "Y", "p"),
            Relation("X", "Z", "p"),
            Relation("Y", "Z", "p"),
        ]

    def test_single_target_gives_nothing(self):
        sentence = make_sentence("s1", "X on p")
        assert tags_to_relations(sentence, ["B-T", "O", "B-A"]) == []

    def test_ordered_variant_doubles_pairs(self):
        sentence = make_sentence("s1", "X beats Y on p")
        tags = ["B-T", "O", "B-T", "O", "B-A"]
        unordered = tags_to_relations(sentence, tags)
        ordered = tags_to_relations(sentence, tags, ordered_pairs=True)
        assert len(ordered) == 2 * len(unordered)

    def test_output_size_formula(self):
        rng = random.Random(11)
        for _ in range(100)            :
            n_targets = rng.randint(0, 4)
            n_aspects = rng.randint(0, 3)
            tokens, tags = [], []
            for i in range(n_targets):
                tokens += [f"t{i}", "and"]
                tags += ["B-T", "O"]
            for i in range(n_aspects):
                tokens += [f"a{i}", "plus"]
                tags += ["B-A", "O"]
            sentence = make_sentence("s", " ".join(tokens) or "empty")
            if tokens:
                got = tags_to_relations(sentence, tags)
                expected = math.comb(n_targets, 2) * n_aspects
                assert len(got) == expected


class TestForwardAlgorithm:
    def test_two_token_chain_matches_25_path_sum(self):
        rng = np.random.default_rng(0)
        tokens = ["D80", "wins"]
        model = random_model(rng, tokens)
        _, scores = brute_force_path_scores(model, tokens)
        brute = float(np.log(np.sum(np.exp(scores - scores.max()))) + scores.max())
        assert abs(math.exp(model.log_partition(tokens) - brute) - 1) <= 1e-9

    def test_zero_weights_unmasked_gives_n_log_labels(self):
        model = CrfModel(enforce_bio=False)
        for n in (1, 2, 5):
            tokens = [f"w{i}" for i in range(n)]
            assert model.log_partition(tokens) == pytest.approx(n * math.log(5), abs=1e-9)

    def test_partition_oracle_random_sentences(self):
        rng = np.random.default_rng(1)
        words = ["D80", "d70", "beats", "on", "weight", "The", "99"]
        for _ in range(40):
            n = int(rng.integers(1, 7))
            tokens = [words[i] for i in rng.integers(0, len(words), size=n)]
            model = random_model(rng, tokens, enforce_bio=bool(rng.integers(0, 2)))
            _, scores = brute_force_path_scores(model, tokens)
            peak = scores.max()
            brute = float(np.log(np.sum(np.exp(scores - peak))) + peak)
            assert abs(math.exp(model.log_partition(tokens) - brute) - 1) <= 1e-9


class TestViterbi:
    def test_length_one_is_unary_argmax_with_valid_start(self):
        rng = np.random.default_rng(2)
        tokens = ["D80"]
        model = random_model(rng, tokens)
        emis = model.emissions(tokens)[0] + model._start_mask()
        assert model.decode(tokens) == [LABELS[int(np.argmax(emis))]]

    def test_empty_tokens(self):
        assert CrfModel().decode([]) == []

    def test_matches_exhaustive_argmax(self):
        rng = np.random.default_rng(3)
        words = ["D80", "d70", "beats", "on", "weight", "且"]
        for _ in range(40):
            n = int(rng.integers(1, 7))
            tokens = [words[i] for i in rng.integers(0, len(words), size=n)]
            model = random_model(rng, tokens)
            paths, scores = brute_force_path_scores(model, tokens)
            best = paths[int(np.argmax(scores))]
            decoded = model.decode(tokens)
            decoded_ids = [LABELS.index(t) for t in decoded]
            # score equality always; path equality when the argmax is unique
            assert model.sequence_score(tokens, decoded) == pytest.approx(
                float(scores.max()), abs=1e-9
            )
            if np.sum(scores >= scores.max() - 1e-12) == 1:
                assert decoded_ids == list(best)

    def test_never_emits_invalid_bio(self):
        rng = np.random.default_rng(4)
        tokens = ["a", "b", "c", "d"]
        for _ in range(50):
            model = random_model(rng, tokens)
            validate_bio(model.decode(tokens))


class TestCrfTraining:
    def test_overfits_three_token_sentence(self):
        sentence = make_sentence("s1", "d80 versus d70", [Relation("d80", "d70", "versus")])
        model = crf_train([sentence], epochs=100, learning_rate=0.5, seed=0)
        assert crf_decode(model, sentence) == gold_to_tags(sentence)

    def test_empty_corpus_rejected(self):
        with pytest.raises(ValueError):
            crf_train([], epochs=1)

    def test_learns_simple_corpus(self):
        corpus = [
            make_sentence(
                f"s{i}",
                f"the cam{i} beats the cam{i + 50} on zoom",
                [Relation(f"cam{i}", f"cam{i + 50}", "zoom")],
            )
            for i in range(20)
        ]
        model = crf_train(corpus, epochs=60, learning_rate=0.5, seed=0)
        hits = sum(
            crf_decode(model, s) == gold_to_tags(s) for s in corpus
        )
        assert hits >= 18

    def test_invalid_transitions_stay_masked(self):
        sentence = make_sentence("s1", "a beats b on c", [Relation("a", "b", "c")])
        model = crf_train([sentence], epochs=5, learning_rate=0.5, seed=0)
        eff = model.effective_transitions()
        assert eff[LABELS.index("O"), LABELS.index("I-T")] <= NEG_INF / 2
        assert eff[LABELS.index("B-A"), LABELS.index("I-T")] <= NEG_INF / 2


class TestCrfPersistence:
    def test_save_load_roundtrip(self, tmp_path):
        sentence = make_sentence("s1", "d80 versus d70", [Relation("d80", "d70", "versus")])
        model = crf_train([sentence], epochs=30, learning_rate=0.5, seed=0)
        path = tmp_path / "crf.json"
        model.save(path)
        restored = CrfModel.load(path)
        assert restored.decode(sentence.tokens) == model.decode(sentence.tokens)
        assert restored.log_partition(sentence.tokens) == pytest.approx(
            model.log_partition(sentence.tokens)
        )

    def test_rejects_foreign_file(self, tmp_path):
        path = tmp_path / "other.json"
        path.write_text('{"kind": "nope"}')
        with pytest.raises(ValueError):
            CrfModel.load(path)
