"""compex: comparative relation extraction toolkit.

Extracts (target, target, aspect) tuples from text with a prompted
generative decoder whose output is grounding-filtered against the source,
and benchmarks it against a sequence-labeling + Cartesian-product
pipeline under an unordered exact-match protocol.
"""

__version__ = "0.1.0"

from .data import (
    DatasetSplit,
    Relation,
    Sentence,
    augment_concat,
    dataset_stats,
    load_dataset,
    normalize_element,
    split_dataset,
)
from .grounding import FilterResult, ground_filter, is_grounded
from .linearize import (
    LinearizedSample,
    canonical_order,
    parse_relations,
    serialize_relations,
)
from .prompts import DEFAULT_PROMPT, PROMPT_CANDIDATES, PromptSpec, inject_prompt

__all__ = [
    "__version__",
    "DatasetSplit",
    "Relation",
    "Sentence",
    "augment_concat",
    "dataset_stats",
    "load_dataset",
    "normalize_element",
    "split_dataset",
    "FilterResult",
    "ground_filter",
    "is_grounded",
    "LinearizedSample",
    "canonical_order",
    "parse_relations",
    "serialize_relations",
    "DEFAULT_PROMPT",
    "PROMPT_CANDIDATES",
    "PromptSpec",
    "inject_prompt",
]
