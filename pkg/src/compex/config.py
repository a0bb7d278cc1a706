"""Run configuration: a flat key=value file with CLI flags on top.

Every key maps to one RunConfig field. Unknown keys are errors so typos
do not silently fall back to defaults. Precedence: CLI flag, then config
file, then the COMPEX_SEED environment variable (seeds only), then the
field default.
"""

from __future__ import annotations

import os
from dataclasses import dataclass, fields
from pathlib import Path

from .model.backend import TrainConfig
from .model.minilm import MiniLMConfig
from .prompts import DEFAULT_PROMPT, PromptSpec

ENV_SEED = "COMPEX_SEED"


@dataclass
class RunConfig:
    # data paths
    data: str | None = None
    train: str | None = None
    dev: str | None = None
    test: str | None = None
    split_seed: int | None = None
    # backend: "mini" or "adapter:<checkpoint dir>"
    backend: str = "mini"
    n_layers: int = 4
    d_model: int = 128
    n_heads: int = 4
    max_context: int = 128
    # prompt injection
    prompt: str = DEFAULT_PROMPT
    separator: str = " "
    # training
    epochs: int = 40
    batch_size: int = 16
    learning_rate: float = 2e-3
    max_target_length: int = 64
    seed: int | None = None
    augment_pairs: int = 0  # 0 = augmentation off
    # outputs
    out_dir: str = "compex-run"

    def resolved_seed(self) -> int:
        if self.seed is not None:
            return self.seed
        env = os.environ.get(ENV_SEED)
        if env is not None:
            try:
                return int(env)
            except ValueError as exc:
                raise ValueError(f"{ENV_SEED} must be an integer, got {env!r}") from exc
        return 0

    def resolved_split_seed(self) -> int:
        return self.split_seed if self.split_seed is not None else self.resolved_seed()

    def prompt_spec(self) -> PromptSpec:
        return PromptSpec(prompt_text=self.prompt, separator=self.separator)

    def train_config(self) -> TrainConfig:
        return TrainConfig(
            epochs=self.epochs,
            batch_size=self.batch_size,
            learning_rate=self.learning_rate,
            max_target_length=self.max_target_length,
            seed=self.resolved_seed(),
        )

    def mini_config(self) -> MiniLMConfig:
        return MiniLMConfig(
            n_layers=self.n_layers,
            d_model=self.d_model,
            n_heads=self.n_heads,
            max_context=self.max_context,
            seed=self.resolved_seed(),
        )

    def to_dict(self) -> dict:
        return {f.name: getattr(self, f.name) for f in fields(self)}


_OPTIONAL_INT = ("split_seed", "seed")


def _coerce(name: str, raw: str):
    hints = {f.name: f.type for f in fields(RunConfig)}
    if name not in hints:
        raise ValueError(f"unknown config key {name!r}")
    if name in _OPTIONAL_INT:
        return int(raw)
    hint = hints[name]
    if hint == "int":
        return int(raw)
    if hint == "float":
        return float(raw)
    return raw


def read_config_file(path: str | Path) -> dict:
    """Parse `key = value` lines; '#' starts a comment, blanks are skipped."""
    values = {}
    for line_no, line in enumerate(Path(path).read_text(encoding="utf-8").splitlines(), 1):
        stripped = line.split("#", 1)[0].strip()
        if not stripped:
            continue
        if "=" not in stripped:
            raise ValueError(f"{path}:{line_no}: expected key = value")
        key, raw = (part.strip() for part in stripped.split("=", 1))
        try:
            values[key] = _coerce(key, raw)
        except ValueError as exc:
            raise ValueError(f"{path}:{line_no}: {exc}") from exc
    return values


def build_run_config(config_path: str | Path | None, overrides: dict) -> RunConfig:
    """File values first, then non-None CLI overrides."""
    values = read_config_file(config_path) if config_path else {}
    values.update({k: v for k, v in overrides.items() if v is not None})
    return RunConfig(**values)
