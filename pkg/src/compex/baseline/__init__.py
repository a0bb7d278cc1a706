from .crf import CrfModel, crf_decode, crf_train
from .tagging import (
    LABELS,
    build_tagged_corpus,
    gold_to_tags,
    tags_to_relations,
    validate_bio,
)

__all__ = [
    "CrfModel",
    "crf_decode",
    "crf_train",
    "LABELS",
    "build_tagged_corpus",
    "gold_to_tags",
    "tags_to_relations",
    "validate_bio",
]
