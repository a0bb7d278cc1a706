"""Linear-chain CRF over BIO labels, trained by gradient ascent.

Scores are emission weights (handcrafted token features, one weight
vector per feature) plus a learned label-transition matrix. Transitions
into an I- label from anything but its own B-/I- label are structurally
impossible and held at a large negative constant rather than learned.
"""

from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Callable, Sequence

import numpy as np

from ..data import Sentence
from .tagging import LABELS, build_tagged_corpus

logger = logging.getLogger(__name__)

NEG_INF = -1e30  # exp() underflows to exactly 0.0

MODEL_VERSION = 1
MODEL_KIND = "linear-chain-crf"

FeatureFn = Callable[[Sequence[str], int], list[str]]


def token_features(tokens: Sequence[str], i: int) -> list[str]:
    """Feature strings for position ``i``: surface, context, affixes, shape."""
    w = tokens[i]
    wl = w.lower()
    feats = [
        f"w={w}",
        f"wl={wl}",
        f"w-1={tokens[i - 1].lower() if i > 0 else '<s>'}",
        f"w+1={tokens[i + 1].lower() if i + 1 < len(tokens) else '</s>'}",
        f"pre3={wl[:3]}",
        f"suf3={wl[-3:]}",
    ]
    if w.isdigit():
        feats.append("isdigit")
    if w[:1].isupper():
        feats.append("iscap")
    return feats


def _logsumexp(a: np.ndarray, axis=None) -> np.ndarray:
    peak = np.max(a, axis=axis, keepdims=True)
    out = np.log(np.sum(np.exp(a - peak), axis=axis, keepdims=True)) + peak
    return np.squeeze(out, axis=axis) if axis is not None else out.reshape(())


class CrfModel:
    """Feature weights + transition matrix; the feature extractor is the
    pluggable token-encoder seam (saved models assume the default)."""

    def __init__(self, enforce_bio: bool = True, feature_fn: FeatureFn = token_features):
        self.labels = LABELS
        self.n_labels = len(LABELS)
        self.enforce_bio = enforce_bio
        self.feature_fn = feature_fn
        self.feature_weights: dict[str, np.ndarray] = {}
        self.transitions = np.zeros((self.n_labels, self.n_labels))

    # -- structural masks ------------------------------------------------

    def _transition_mask(self) -> np.ndarray:
        mask = np.zeros((self.n_labels, self.n_labels))
        if not self.enforce_bio:
            return mask
        for j, to_label in enumerate(self.labels):
            if not to_label.startswith("I-"):
                continue
            kind = to_label[2:]
            for i, from_label in enumerate(self.labels):
                if from_label not in (f"B-{kind}", f"I-{kind}"):
                    mask[i, j] = NEG_INF
        return mask

    def _start_mask(self) -> np.ndarray:
        mask = np.zeros(self.n_labels)
        if self.enforce_bio:
            for i, label in enumerate(self.labels):
                if label.startswith("I-"):
                    mask[i] = NEG_INF
        return mask

    def effective_transitions(self) -> np.ndarray:
        return self.transitions + self._transition_mask()

    # -- scoring ---------------------------------------------------------

    def features(self, tokens: Sequence[str]) -> list[list[str]]:
        return [self.feature_fn(tokens, i) for i in range(len(tokens))]

    def emissions(self, tokens: Sequence[str]) -> np.ndarray:
        emis = np.zeros((len(tokens), self.n_labels))
        for i, feats in enumerate(self.features(tokens)):
            for f in feats:
                w = self.feature_weights.get(f)
                if w is not None:
                    emis[i] += w
        return emis

    def sequence_score(self, tokens: Sequence[str], tags: Sequence[str]) -> float:
        """Unnormalized log score of one label path."""
        if len(tokens) != len(tags):
            raise ValueError("tags length must match token count")
        emis = self.emissions(tokens)
        trans = self.effective_transitions()
        ids = [self.labels.index(t) for t in tags]
        score = self._start_mask()[ids[0]] + emis[0, ids[0]]
        for i in range(1, len(ids)):
            score += trans[ids[i - 1], ids[i]] + emis[i, ids[i]]
        return float(score)

    def _forward(self, emis: np.ndarray) -> tuple[np.ndarray, float]:
        trans = self.effective_transitions()
        n = emis.shape[0]
        alpha = np.empty_like(emis)
        alpha[0] = emis[0] + self._start_mask()
        for i in range(1, n):
            alpha[i] = _logsumexp(alpha[i - 1][:, None] + trans, axis=0) + emis[i]
        return alpha, float(_logsumexp(alpha[-1]))

    def _backward(self, emis: np.ndarray) -> np.ndarray:
        trans = self.effective_transitions()
        n = emis.shape[0]
        beta = np.zeros_like(emis)
        for i in range(n - 2, -1, -1):
            beta[i] = _logsumexp(trans + (emis[i + 1] + beta[i + 1])[None, :], axis=1)
        return beta

    def log_partition(self, tokens: Sequence[str]) -> float:
        """Log of the sum of exp scores over all label paths (forward algorithm)."""
        if not tokens:
            return 0.0
        _, log_z = self._forward(self.emissions(tokens))
        return log_z

    def decode(self, tokens: Sequence[str]) -> list[str]:
        """Viterbi argmax path; ties resolved toward the lowest label index."""
        if not tokens:
            return []
        emis = self.emissions(tokens)
        trans = self.effective_transitions()
        n = emis.shape[0]
        score = emis[0] + self._start_mask()
        backptr = np.zeros((n, self.n_labels), dtype=int)
        for i in range(1, n):
            candidates = score[:, None] + trans
            backptr[i] = np.argmax(candidates, axis=0)  # first max: lowest index
            score = candidates[backptr[i], np.arange(self.n_labels)] + emis[i]
        best = int(np.argmax(score))
        path = [best]
        for i in range(n - 1, 0, -1):
            best = int(backptr[i, best])
            path.append(best)
        path.reverse()
        return [self.labels[i] for i in path]

    # -- persistence -------------------------------------------------------

    def save(self, path: str | Path) -> None:
        from ..fileio import atomic_write_json

        atomic_write_json(
            path,
            {
                "format_version": MODEL_VERSION,
                "kind": MODEL_KIND,
                "labels": list(self.labels),
                "enforce_bio": self.enforce_bio,
                "feature_weights": {f: w.tolist() for f, w in self.feature_weights.items()},
                "transitions": self.transitions.tolist(),
            },
        )

    @classmethod
    def load(cls, path: str | Path, feature_fn: FeatureFn = token_features) -> "CrfModel":
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
        if payload.get("kind") != MODEL_KIND:
            raise ValueError(f"{path}: not a {MODEL_KIND} model file")
        if payload.get("format_version") != MODEL_VERSION:
            raise ValueError(f"{path}: unsupported model version")
        if tuple(payload["labels"]) != LABELS:
            raise ValueError(f"{path}: unexpected label set {payload['labels']}")
        model = cls(enforce_bio=payload["enforce_bio"], feature_fn=feature_fn)
        model.feature_weights = {
            f: np.asarray(w, dtype=float) for f, w in payload["feature_weights"].items()
        }
        model.transitions = np.asarray(payload["transitions"], dtype=float)
        return model


def crf_train(
    sentences: Sequence[Sentence],
    epochs: int = 30,
    learning_rate: float = 0.5,
    seed: int = 0,
    enforce_bio: bool = True,
) -> CrfModel:
    """Maximize conditional log-likelihood by full-batch gradient ascent.

    The gradient is observed minus expected feature counts, with
    expectations from the forward-backward marginals. Per-epoch mean
    log-likelihood should be non-decreasing for a sufficiently small
    learning rate; a drop is logged as a warning, not an error. Full-batch
    updates make the result independent of ``seed`` (kept for interface
    stability).
    """
    del seed
    tagged, skipped = build_tagged_corpus(sentences)
    if not tagged:
        raise ValueError("no taggable sentences to train on")
    if skipped:
        logger.info("skipped %d sentences with ungrounded gold", skipped)
    model = CrfModel(enforce_bio=enforce_bio)
    cached = []
    for sentence, tags in tagged:
        feats = model.features(sentence.tokens)
        for position in feats:
            for f in position:
                if f not in model.feature_weights:
                    model.feature_weights[f] = np.zeros(model.n_labels)
        ids = [model.labels.index(t) for t in tags]
        cached.append((list(sentence.tokens), feats, ids))

    n = len(cached)
    last_mean_ll = -np.inf
    for epoch in range(epochs):
        grad_w: dict[str, np.ndarray] = {}
        grad_t = np.zeros_like(model.transitions)
        total_ll = 0.0
        trans = model.effective_transitions()
        for tokens, feats, ids in cached:
            emis = model.emissions(tokens)
            alpha, log_z = model._forward(emis)
            beta = model._backward(emis)
            gamma = np.exp(alpha + beta - log_z)

            path = model._start_mask()[ids[0]] + emis[0, ids[0]]
            for i in range(1, len(ids)):
                path += trans[ids[i - 1], ids[i]] + emis[i, ids[i]]
            total_ll += path - log_z

            for i, position in enumerate(feats):
                for f in position:
                    g = grad_w.get(f)
                    if g is None:
                        g = grad_w[f] = np.zeros(model.n_labels)
                    g[ids[i]] += 1.0
                    g -= gamma[i]
            for i in range(1, len(ids)):
                xi = np.exp(
                    alpha[i - 1][:, None] + trans + (emis[i] + beta[i])[None, :] - log_z
                )
                grad_t[ids[i - 1], ids[i]] += 1.0
                grad_t -= xi

        for f, g in grad_w.items():
            model.feature_weights[f] += learning_rate * g / n
        model.transitions += learning_rate * grad_t / n

        mean_ll = total_ll / n
        if mean_ll < last_mean_ll - 1e-9:
            logger.warning(
                "epoch %d: mean log-likelihood decreased (%.6f -> %.6f); "
                "consider a smaller learning rate",
                epoch + 1,
                last_mean_ll,
                mean_ll,
            )
        last_mean_ll = mean_ll
    return model


def crf_decode(model: CrfModel, sentence: Sentence) -> list[str]:
    return model.decode(sentence.tokens)
