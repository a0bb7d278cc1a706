"""Prompt ablation: retrain the same backend under different prompt words.

Everything except the prompt is held fixed (data order, seeds, model
size, optimizer), so metric differences are attributable to the prompt
alone.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable, Sequence

from .data import Sentence
from .evaluation import MetricsReport, corpus_metrics
from .linearize import LinearizedSample
from .model import GeneratorBackend, TrainConfig, build_training_pairs, extract, train
from .prompts import PromptSpec

logger = logging.getLogger(__name__)

BackendFactory = Callable[[Sequence[LinearizedSample]], GeneratorBackend]


@dataclass
class AblationRow:
    prompt: str
    report: MetricsReport


def prompt_ablation(
    backend_factory: BackendFactory,
    prompts: Sequence[str],
    train_sentences: Sequence[Sentence],
    eval_sentences: Sequence[Sentence],
    config: TrainConfig,
) -> list[AblationRow]:
    """Train one backend per prompt and rank the results by F1 (descending).

    ``backend_factory`` receives the training pairs (the vocabulary must
    cover each prompt's words) and must return a freshly seeded backend.
    """
    if len(prompts) < 2:
        raise ValueError("prompt ablation needs at least 2 prompts")
    rows = []
    for prompt_text in prompts:
        prompt = PromptSpec(prompt_text=prompt_text)
        build = build_training_pairs(train_sentences, prompt)
        backend = backend_factory(build.samples)
        train(backend, build.samples, config)
        predictions = {
            s.id: extract(backend, s, prompt, config) for s in eval_sentences
        }
        gold = {s.id: list(s.relations) for s in eval_sentences}
        report = corpus_metrics(predictions, gold)
        logger.info("prompt %r: F1 %.3f", prompt_text, report.f1)
        rows.append(AblationRow(prompt=prompt_text, report=report))
    rows.sort(key=lambda row: -row.report.f1)
    return rows
