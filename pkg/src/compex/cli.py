"""Command-line surface: prepare, train, extract, eval, ablate, augment, synth.

Exit codes: 0 ok, 1 runtime error, 2 usage/input error. All failures
print a single line starting with "error:".
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
from pathlib import Path

from . import __version__
from .ablation import prompt_ablation
from .config import RunConfig, build_run_config
from .data import (
    DatasetFormatError,
    Relation,
    Sentence,
    augment_concat,
    dataset_stats,
    load_dataset,
    save_dataset,
    split_dataset,
)
from .fileio import atomic_write_json, read_jsonl, write_jsonl
from .model import MiniBackend, Vocab, build_training_pairs
from .model.training import extract_with_audit, load_backend, train
from .prompts import PROMPT_CANDIDATES, PromptSpec
from .synth import SynthConfig, generate_corpus

logger = logging.getLogger(__name__)


class UsageError(ValueError):
    """Bad invocation or bad input; exits with code 2."""


# ---------------------------------------------------------------------------
# prepare


def _coerce_relation(raw, line_no: int, index: int) -> dict:
    if isinstance(raw, (list, tuple)) and len(raw) == 3:
        t1, t2, aspect = raw
        return {"t1": str(t1), "t2": str(t2), "aspect": str(aspect)}
    if isinstance(raw, dict):
        if {"t1", "t2", "aspect"} <= raw.keys():
            return {"t1": str(raw["t1"]), "t2": str(raw["t2"]), "aspect": str(raw["aspect"])}
        # role-annotated exports: subject/object plus an opinion/aspect field
        if {"subject", "object"} <= raw.keys():
            aspect = raw.get("aspect") or raw.get("opinion_words") or raw.get("opinion")
            if isinstance(aspect, (list, tuple)):
                aspect = " ".join(str(a) for a in aspect)
            if aspect:
                return {"t1": str(raw["subject"]), "t2": str(raw["object"]), "aspect": str(aspect)}
    raise UsageError(f"line {line_no}: relation #{index + 1} has unrecognized shape")


def cmd_prepare(args) -> int:
    from .report import write_stats

    out_path = Path(args.output)
    records = []
    raw_lines = read_jsonl(args.input)
    if not raw_lines:
        raise UsageError(f"{args.input}: empty input")
    for line_no, raw in enumerate(raw_lines, start=1):
        if not isinstance(raw, dict) or not isinstance(raw.get("text"), str):
            raise UsageError(f"line {line_no}: record needs a 'text' field")
        relations = raw.get("relations", [])
        if not isinstance(relations, list):
            raise UsageError(f"line {line_no}: 'relations' must be an array")
        records.append(
            {
                "id": str(raw.get("id", line_no)),
                "text": raw["text"],
                "relations": [
                    _coerce_relation(rel, line_no, k) for k, rel in enumerate(relations)
                ],
            }
        )
    write_jsonl(out_path, records)
    sentences = load_dataset(out_path)  # validates + emits grounding warnings
    stats = dataset_stats(sentences)
    out_dir = out_path.parent
    write_stats(stats, out_dir)
    if args.split_seed is not None:
        split = split_dataset(sentences, args.split_seed)
        for name, part in (("train", split.train), ("dev", split.dev), ("test", split.test)):
            save_dataset(part, out_dir / f"{name}.jsonl")
        print(
            f"split {len(sentences)} sentences -> train {len(split.train)}, "
            f"dev {len(split.dev)}, test {len(split.test)} (seed {args.split_seed})"
        )
    from .report import render_stats_table

    print(render_stats_table(stats), end="")
    print(f"wrote {out_path}")
    return 0


# ---------------------------------------------------------------------------
# synth


def cmd_synth(args) -> int:
    from .report import render_stats_table, write_stats

    config = SynthConfig(n_sentences=args.sentences, seed=args.seed if args.seed is not None else 0)
    sentences = generate_corpus(config)
    out_dir = Path(args.out_dir)
    save_dataset(sentences, out_dir / "corpus.jsonl")
    stats = dataset_stats(sentences)
    write_stats(stats, out_dir)
    if args.split_seed is not None:
        split = split_dataset(sentences, args.split_seed)
        for name, part in (("train", split.train), ("dev", split.dev), ("test", split.test)):
            save_dataset(part, out_dir / f"{name}.jsonl")
        print(
            f"split -> train {len(split.train)}, dev {len(split.dev)}, test {len(split.test)}"
        )
    print(render_stats_table(stats), end="")
    print(f"wrote {out_dir / 'corpus.jsonl'}")
    return 0


# ---------------------------------------------------------------------------
# train


def _run_config(args, require: tuple[str, ...] = ()) -> RunConfig:
    overrides = {
        key: getattr(args, key, None)
        for key in (
            "data", "train", "dev", "test", "split_seed", "backend", "n_layers",
            "d_model", "n_heads", "max_context", "prompt", "separator", "epochs",
            "batch_size", "learning_rate", "max_target_length", "seed",
            "augment_pairs", "out_dir",
        )
    }
    try:
        config = build_run_config(args.config, overrides)
    except (ValueError, OSError) as exc:
        raise UsageError(str(exc)) from exc
    for name in require:
        if getattr(config, name) is None:
            raise UsageError(f"missing required option --{name.replace('_', '-')}")
    return config


def _build_backend(config: RunConfig, samples) -> "object":
    if config.backend == "mini":
        texts = [s.input_text for s in samples] + [s.target_text for s in samples]
        return MiniBackend(Vocab.build(texts), config.mini_config())
    if config.backend.startswith("adapter:"):
        from .model.adapter import PretrainedDecoderBackend

        return PretrainedDecoderBackend(config.backend.split(":", 1)[1], seed=config.resolved_seed())
    raise UsageError(f"unknown backend {config.backend!r} (use 'mini' or 'adapter:<path>')")


def cmd_train(args) -> int:
    from .report import write_loss_history

    config = _run_config(args, require=("train",))
    sentences = load_dataset(config.train)
    if config.augment_pairs:
        sentences = list(sentences) + augment_concat(
            sentences, config.augment_pairs, config.resolved_seed()
        )
        print(f"augmented with {config.augment_pairs} concatenated sentence pairs")
    build = build_training_pairs(sentences, config.prompt_spec())
    if not build.samples:
        raise UsageError("no trainable sentences (all skipped)")
    backend = _build_backend(config, build.samples)
    result = train(backend, build.samples, config.train_config())
    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    checkpoint = out_dir / ("checkpoint.pt" if config.backend == "mini" else "checkpoint")
    backend.save(checkpoint)
    atomic_write_json(out_dir / "run.json", config.to_dict())
    write_loss_history(result.rows(), out_dir)
    print(
        f"trained on {len(build.samples)} pairs for {config.epochs} epochs; "
        f"loss {result.loss_history[0]:.4f} -> {result.loss_history[-1]:.4f}"
    )
    if config.dev:
        dev_sentences = load_dataset(config.dev)
        report = _score_extraction(backend, dev_sentences, config)
        atomic_write_json(out_dir / "dev_metrics.json", report.to_dict(include_audit=False))
        print(f"dev F1 {report.f1:.3f} (P {report.precision:.3f}, R {report.recall:.3f})")
    print(f"wrote {checkpoint}")
    return 0


def _score_extraction(backend, sentences, config: RunConfig):
    from .evaluation import corpus_metrics
    from .model.training import extract

    prompt = config.prompt_spec()
    train_cfg = config.train_config()
    predictions = {s.id: extract(backend, s, prompt, train_cfg) for s in sentences}
    gold = {s.id: list(s.relations) for s in sentences}
    return corpus_metrics(predictions, gold)


# ---------------------------------------------------------------------------
# extract


def _prompt_for_checkpoint(args) -> tuple[str, str]:
    if args.prompt is not None:
        return args.prompt, args.separator or " "
    run_file = Path(args.checkpoint).parent / "run.json"
    if run_file.exists():
        run = json.loads(run_file.read_text(encoding="utf-8"))
        return run.get("prompt", PROMPT_CANDIDATES[-1]), run.get("separator", " ")
    return PROMPT_CANDIDATES[-1], " "


def cmd_extract(args) -> int:
    backend = load_backend(args.checkpoint)
    prompt_text, separator = _prompt_for_checkpoint(args)
    prompt = PromptSpec(prompt_text=prompt_text, separator=separator)
    config = _run_config(args)
    train_cfg = config.train_config()
    sentences = load_dataset(args.input)
    predictions, audit = [], []
    for sentence in sentences:
        outcome = extract_with_audit(backend, sentence, prompt, train_cfg)
        predictions.append(
            {"id": sentence.id, "relations": [r.to_dict() for r in outcome.relations]}
        )
        for relation, offending in outcome.discarded:
            audit.append(
                {
                    "sentence_id": sentence.id,
                    "relation": relation.to_dict(),
                    "offending": offending,
                }
            )
    write_jsonl(args.output, predictions)
    if args.audit:
        audit_path = Path(args.output).with_name("discards.jsonl")
        write_jsonl(audit_path, audit)
        print(f"wrote {audit_path} ({len(audit)} discarded relations)")
    print(f"wrote {args.output} ({len(predictions)} sentences)")
    return 0


# ---------------------------------------------------------------------------
# eval


def _load_predictions(path) -> dict[str, list[Relation]]:
    records = read_jsonl(path)
    predictions = {}
    for line_no, record in enumerate(records, start=1):
        if "id" not in record or "relations" not in record:
            raise UsageError(f"{path}:{line_no}: prediction lines need 'id' and 'relations'")
        predictions[str(record["id"])] = [
            Relation.from_dict(r) for r in record["relations"]
        ]
    if not predictions:
        raise UsageError(f"{path}: empty predictions file")
    return predictions


def cmd_eval(args) -> int:
    from .evaluation import breakdown_by_count, corpus_metrics
    from .report import render_metrics_table, write_metrics

    gold_sentences = load_dataset(args.gold)
    gold = {s.id: list(s.relations) for s in gold_sentences}
    predictions = _load_predictions(args.pred)
    try:
        overall = corpus_metrics(predictions, gold)
        breakdown = breakdown_by_count(predictions, gold)
    except ValueError as exc:
        raise UsageError(str(exc)) from exc
    write_metrics(Path(args.out_dir), overall, breakdown)
    print(render_metrics_table(overall, breakdown), end="")
    print(f"wrote {Path(args.out_dir) / 'metrics.json'}")
    return 0


# ---------------------------------------------------------------------------
# ablate


def cmd_ablate(args) -> int:
    from .report import write_ablation

    config = _run_config(args, require=("train", "test"))
    if config.backend != "mini":
        raise UsageError("prompt ablation supports the mini backend only")
    train_sentences = load_dataset(config.train)
    eval_sentences = load_dataset(config.test)
    if args.prompts:
        prompts = [
            line.strip()
            for line in Path(args.prompts).read_text(encoding="utf-8").splitlines()
            if line.strip()
        ]
    else:
        prompts = list(PROMPT_CANDIDATES)
    if len(prompts) < 2:
        raise UsageError("prompt ablation needs at least 2 prompts")

    def factory(samples):
        texts = [s.input_text for s in samples] + [s.target_text for s in samples]
        return MiniBackend(Vocab.build(texts), config.mini_config())

    rows = prompt_ablation(
        factory, prompts, train_sentences, eval_sentences, config.train_config()
    )
    out_dir = Path(config.out_dir)
    write_ablation(rows, out_dir)
    for row in rows:
        print(f"{row.report.f1:.3f}  {row.prompt}")
    print(f"wrote {out_dir / 'ablation.csv'}")
    return 0


# ---------------------------------------------------------------------------
# augment


def cmd_augment(args) -> int:
    sentences = load_dataset(args.train)
    seed = args.seed if args.seed is not None else RunConfig().resolved_seed()
    if args.num_pairs < 1:
        raise UsageError("--num-pairs must be >= 1")
    synthetic = augment_concat(sentences, args.num_pairs, seed)
    combined = synthetic if args.only_new else list(sentences) + synthetic
    save_dataset(combined, args.output)
    print(
        f"wrote {args.output} ({len(synthetic)} synthetic sentences"
        + ("" if args.only_new else f", {len(sentences)} originals")
        + ")"
    )
    return 0


# ---------------------------------------------------------------------------
# parser


def _add_run_options(sub: argparse.ArgumentParser, training: bool = True) -> None:
    sub.add_argument("--config", help="flat key=value config file")
    sub.add_argument("--seed", type=int, help="global seed (or COMPEX_SEED)")
    if training:
        sub.add_argument("--backend", help="mini or adapter:<checkpoint dir>")
        sub.add_argument("--prompt", help="prompt words appended to the input")
        sub.add_argument("--separator", help="separator before the prompt words")
        sub.add_argument("--epochs", type=int)
        sub.add_argument("--batch-size", dest="batch_size", type=int)
        sub.add_argument("--learning-rate", dest="learning_rate", type=float)
        sub.add_argument("--max-target-length", dest="max_target_length", type=int)
        sub.add_argument("--n-layers", dest="n_layers", type=int)
        sub.add_argument("--d-model", dest="d_model", type=int)
        sub.add_argument("--n-heads", dest="n_heads", type=int)
        sub.add_argument("--max-context", dest="max_context", type=int)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="compex",
        description="Comparative relation extraction toolkit",
    )
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("-v", "--verbose", action="store_true", help="debug logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("prepare", help="convert a raw corpus export to the JSONL schema")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--split-seed", dest="split_seed", type=int)
    p.set_defaults(func=cmd_prepare)

    p = sub.add_parser("synth", help="generate a templated synthetic corpus")
    p.add_argument("--out-dir", dest="out_dir", required=True)
    p.add_argument("--sentences", type=int, default=500)
    p.add_argument("--seed", type=int)
    p.add_argument("--split-seed", dest="split_seed", type=int)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("train", help="train a generator backend")
    p.add_argument("--train", help="training corpus JSONL")
    p.add_argument("--dev", help="optional dev corpus for a post-training score")
    p.add_argument("--out-dir", dest="out_dir")
    p.add_argument("--augment-pairs", dest="augment_pairs", type=int)
    _add_run_options(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("extract", help="extract relations with a trained backend")
    p.add_argument("--checkpoint", required=True)
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--prompt", help="prompt words (defaults to the training run's)")
    p.add_argument("--separator")
    p.add_argument("--audit", action="store_true", help="write discarded-relation audit JSONL")
    p.add_argument("--config")
    p.add_argument("--seed", type=int)
    p.add_argument("--max-target-length", dest="max_target_length", type=int)
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("eval", help="score predictions against gold")
    p.add_argument("--pred", required=True)
    p.add_argument("--gold", required=True)
    p.add_argument("--out-dir", dest="out_dir", default="eval-output")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("ablate", help="compare prompt words under fixed settings")
    p.add_argument("--train", help="training corpus JSONL")
    p.add_argument("--test", help="evaluation corpus JSONL")
    p.add_argument("--prompts", help="file with one prompt per line (default: built-in set)")
    p.add_argument("--out-dir", dest="out_dir")
    _add_run_options(p)
    p.set_defaults(func=cmd_ablate)

    p = sub.add_parser("augment", help="concatenate sentence pairs into synthetic training data")
    p.add_argument("--train", required=True)
    p.add_argument("--num-pairs", dest="num_pairs", type=int, required=True)
    p.add_argument("--seed", type=int)
    p.add_argument("--output", required=True)
    p.add_argument("--only-new", dest="only_new", action="store_true",
                   help="write only the synthetic sentences")
    p.set_defaults(func=cmd_augment)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(levelname)s %(message)s",
    )
    try:
        return args.func(args)
    except (UsageError, DatasetFormatError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except Exception as exc:  # noqa: BLE001 - single-line runtime failures
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
