"""Prompt-word injection: a fixed span appended to the input sentence."""

from __future__ import annotations

from dataclasses import dataclass

DEFAULT_PROMPT = "comparative relations tuple:"

# Candidate prompt set for the ablation runner, ordered from least to most
# task-specific. "[SEP]" carries no linguistic cue and serves as the
# uninformative control.
PROMPT_CANDIDATES = (
    "Let me see:",
    "[SEP]",
    "generate relations:",
    "My name:",
    "relations:",
    "comparative relations:",
    DEFAULT_PROMPT,
)


@dataclass(frozen=True)
class PromptSpec:
    """The injected prompt span and the separator rendered before it."""

    prompt_text: str = DEFAULT_PROMPT
    separator: str = " "

    def __post_init__(self):
        if not self.prompt_text:
            raise ValueError("prompt_text must be non-empty")


def inject_prompt(sentence_text: str, prompt: PromptSpec) -> str:
    """Append the prompt span to the sentence (suffix-only injection)."""
    if not sentence_text:
        raise ValueError("sentence_text must be non-empty")
    return f"{sentence_text}{prompt.separator}{prompt.prompt_text}"
