"""Exact-match evaluation of extracted relations.

A predicted tuple is correct only when both targets and the aspect all
match a gold tuple, with targets compared as an unordered pair and all
elements normalized. Metrics are micro-averaged: matched, predicted and
gold counts are summed over the corpus before computing P/R/F1.
Predictions are deduplicated before scoring, so repeating one tuple is
neither rewarded nor double-penalized; duplicated gold tuples collapse
the same way.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .data import Relation


@dataclass
class SentenceAudit:
    sentence_id: str
    matched: int
    pairs: list[tuple[Relation, Relation]]  # (predicted, gold)

    def to_dict(self) -> dict:
        return {
            "sentence_id": self.sentence_id,
            "matched": self.matched,
            "pairs": [
                {"predicted": p.to_dict(), "gold": g.to_dict()} for p, g in self.pairs
            ],
        }


@dataclass
class MetricsReport:
    precision: float
    recall: float
    f1: float
    matched: int
    predicted: int
    gold: int
    per_sentence: list[SentenceAudit] = field(default_factory=list)

    def to_dict(self, include_audit: bool = True) -> dict:
        out = {
            "precision": self.precision,
            "recall": self.recall,
            "f1": self.f1,
            "matched": self.matched,
            "predicted": self.predicted,
            "gold": self.gold,
        }
        if include_audit:
            out["per_sentence"] = [a.to_dict() for a in self.per_sentence]
        return out


def _prf(matched: int, predicted: int, gold: int) -> tuple[float, float, float]:
    precision = matched / predicted if predicted else 0.0
    recall = matched / gold if gold else 0.0
    f1 = 2 * precision * recall / (precision + recall) if precision + recall else 0.0
    return precision, recall, f1


def dedupe(relations: Sequence[Relation]) -> list[Relation]:
    """Drop duplicates under unordered-pair equality, keeping first occurrences."""
    return list(dict.fromkeys(relations))


def match_relations(
    predicted: Sequence[Relation], gold: Sequence[Relation]
) -> tuple[int, list[tuple[Relation, Relation]]]:
    """Greedy one-to-one matching of equal tuples.

    Equality is an equivalence here (normalization classes), so greedy
    matching already attains the optimal bipartite matching size.
    """
    unmatched = list(gold)
    pairs = []
    for pred in predicted:
        for i, g in enumerate(unmatched):
            if pred == g:
                pairs.append((pred, g))
                del unmatched[i]
                break
    return len(pairs), pairs


def corpus_metrics(
    predictions: Mapping[str, Sequence[Relation]],
    gold: Mapping[str, Sequence[Relation]],
) -> MetricsReport:
    """Micro-averaged metrics over sentences keyed by id.

    Prediction and gold maps must cover the same ids; anything missing on
    either side is an error.
    """
    missing_gold = sorted(set(predictions) - set(gold))
    missing_pred = sorted(set(gold) - set(predictions))
    if missing_gold or missing_pred:
        parts = []
        if missing_pred:
            parts.append(f"ids without predictions: {', '.join(missing_pred)}")
        if missing_gold:
            parts.append(f"ids without gold: {', '.join(missing_gold)}")
        raise ValueError("; ".join(parts))
    matched = predicted = gold_total = 0
    audits = []
    for sid in gold:
        pred_rels = dedupe(predictions[sid])
        gold_rels = dedupe(gold[sid])
        n, pairs = match_relations(pred_rels, gold_rels)
        matched += n
        predicted += len(pred_rels)
        gold_total += len(gold_rels)
        audits.append(SentenceAudit(sentence_id=sid, matched=n, pairs=pairs))
    precision, recall, f1 = _prf(matched, predicted, gold_total)
    return MetricsReport(
        precision=precision,
        recall=recall,
        f1=f1,
        matched=matched,
        predicted=predicted,
        gold=gold_total,
        per_sentence=audits,
    )


BUCKETS = ("1", "2", ">2")


def bucket_for(gold_count: int) -> str | None:
    """Breakdown bucket by gold relation count; zero-gold sentences have no
    bucket (they carry no recallable relations)."""
    if gold_count <= 0:
        return None
    if gold_count == 1:
        return "1"
    if gold_count == 2:
        return "2"
    return ">2"


def breakdown_by_count(
    predictions: Mapping[str, Sequence[Relation]],
    gold: Mapping[str, Sequence[Relation]],
) -> dict[str, MetricsReport]:
    """Per-bucket micro metrics for sentences with 1, 2, or more relations.

    Buckets with no sentences are absent from the result, not zero-filled.
    """
    grouped: dict[str, tuple[dict, dict]] = {}
    missing = sorted(set(gold) - set(predictions)) + sorted(set(predictions) - set(gold))
    if missing:
        raise ValueError(f"prediction/gold id mismatch: {', '.join(missing)}")
    for sid in gold:
        bucket = bucket_for(len(dedupe(gold[sid])))
        if bucket is None:
            continue
        pred_map, gold_map = grouped.setdefault(bucket, ({}, {}))
        pred_map[sid] = predictions[sid]
        gold_map[sid] = gold[sid]
    return {
        bucket: corpus_metrics(pred_map, gold_map)
        for bucket, (pred_map, gold_map) in grouped.items()
    }
