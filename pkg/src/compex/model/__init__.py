from .backend import GeneratorBackend, TrainConfig
from .minilm import MiniBackend, MiniLMConfig
from .training import (
    PairBuildResult,
    TrainResult,
    build_training_pairs,
    extract,
    generate,
    load_backend,
    train,
)
from .vocab import Vocab

__all__ = [
    "GeneratorBackend",
    "TrainConfig",
    "MiniBackend",
    "MiniLMConfig",
    "Vocab",
    "PairBuildResult",
    "TrainResult",
    "build_training_pairs",
    "extract",
    "generate",
    "load_backend",
    "train",
]
