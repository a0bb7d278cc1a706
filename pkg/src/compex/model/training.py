"""Training-pair construction, the training loop, and end-to-end extraction."""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

from ..data import Relation, Sentence
from ..grounding import ground_filter
from ..linearize import (
    LinearizedSample,
    canonical_order,
    parse_relations,
    serialize_relations,
    usable_relations,
)
from ..prompts import PromptSpec, inject_prompt
from .backend import GeneratorBackend, Pair, TrainConfig

logger = logging.getLogger(__name__)


@dataclass
class PairBuildResult:
    samples: list[LinearizedSample]
    skipped_sentences: int = 0
    dropped_relations: int = 0


def build_training_pairs(
    sentences: Sequence[Sentence], prompt: PromptSpec
) -> PairBuildResult:
    """Turn gold sentences into (prompted input, serialized target) pairs.

    Relations that are ungrounded or contain reserved delimiters are
    dropped; sentences left without any usable relation are skipped.
    Both counts are reported.
    """
    result = PairBuildResult(samples=[])
    for sentence in sentences:
        relations, dropped = usable_relations(sentence)
        result.dropped_relations += dropped
        if not relations:
            result.skipped_sentences += 1
            continue
        target = serialize_relations(canonical_order(relations, sentence.text))
        result.samples.append(
            LinearizedSample(
                input_text=inject_prompt(sentence.text, prompt),
                target_text=target,
                sentence_id=sentence.id,
            )
        )
    if result.skipped_sentences or result.dropped_relations:
        logger.info(
            "built %d pairs (skipped %d sentences, dropped %d relations)",
            len(result.samples),
            result.skipped_sentences,
            result.dropped_relations,
        )
    return result


@dataclass
class TrainResult:
    loss_history: list[float]  # mean loss per epoch
    dropped_pairs: int = 0

    def rows(self) -> list[tuple[int, float]]:
        return [(epoch + 1, loss) for epoch, loss in enumerate(self.loss_history)]


def _encode_pairs(
    backend: GeneratorBackend, samples: Sequence[LinearizedSample]
) -> tuple[list[Pair], int]:
    pairs: list[Pair] = []
    dropped = 0
    for sample in samples:
        input_ids = backend.encode(sample.input_text)
        target_ids = backend.encode(sample.target_text)
        # input + <bos> + target + <eos> must fit the context window
        if len(input_ids) + len(target_ids) + 2 > backend.max_context:
            dropped += 1
            continue
        pairs.append((input_ids, target_ids))
    return pairs, dropped


def train(
    backend: GeneratorBackend,
    samples: Sequence[LinearizedSample],
    config: TrainConfig,
) -> TrainResult:
    """Train ``backend`` on the samples; returns per-epoch mean losses.

    Pairs that do not fit the backend context are dropped with a count;
    raises if nothing is left to train on. Shuffling is driven by
    ``config.seed`` only, so runs are reproducible.
    """
    if not samples:
        raise ValueError("no training samples")
    pairs, dropped = _encode_pairs(backend, samples)
    if dropped:
        logger.info("dropped %d over-length pairs", dropped)
    if not pairs:
        raise ValueError("all training pairs exceed the backend context length")
    order = list(range(len(pairs)))
    rng = random.Random(config.seed)
    history: list[float] = []
    for _ in range(config.epochs):
        rng.shuffle(order)
        losses = []
        for start in range(0, len(order), config.batch_size):
            batch = [pairs[i] for i in order[start : start + config.batch_size]]
            losses.append(backend.train_step(batch, config.learning_rate))
        history.append(sum(losses) / len(losses))
    return TrainResult(loss_history=history, dropped_pairs=dropped)


def generate(backend: GeneratorBackend, prompted_input: str, max_len: int) -> str:
    """Greedy decoding after the prompted input; deterministic."""
    prefix = backend.encode(prompted_input)
    if len(prefix) + 1 > backend.max_context:
        raise ValueError(
            f"prompted input of {len(prefix)} tokens exceeds context "
            f"length {backend.max_context}"
        )
    return backend.decode(backend.generate_ids(prefix, max_len))


@dataclass
class ExtractionOutcome:
    relations: list[Relation]
    discarded: list[tuple[Relation, list[str]]] = field(default_factory=list)
    dropped_segments: int = 0
    generated_text: str = ""


def extract_with_audit(
    backend: GeneratorBackend,
    sentence: Sentence,
    prompt: PromptSpec,
    config: TrainConfig,
) -> ExtractionOutcome:
    """generate -> parse -> grounding filter -> dedupe, keeping the audit trail."""
    text = generate(backend, inject_prompt(sentence.text, prompt), config.max_target_length)
    parsed = parse_relations(text)
    filtered = ground_filter(parsed.relations, sentence.text)
    unique = list(dict.fromkeys(filtered.kept))
    return ExtractionOutcome(
        relations=unique,
        discarded=filtered.discarded,
        dropped_segments=parsed.dropped_segments,
        generated_text=text,
    )


def extract(
    backend: GeneratorBackend,
    sentence: Sentence,
    prompt: PromptSpec,
    config: TrainConfig,
) -> list[Relation]:
    """Relations extracted from one sentence, fully grounded and deduplicated."""
    return extract_with_audit(backend, sentence, prompt, config).relations


def load_backend(path: str | Path) -> GeneratorBackend:
    """Open a saved backend: a mini checkpoint file or a pretrained-decoder
    directory for the adapter."""
    path = Path(path)
    if path.is_dir():
        from .adapter import PretrainedDecoderBackend

        return PretrainedDecoderBackend(path)
    from .minilm import MiniBackend

    return MiniBackend.load(path)
