import json

import pytest

from compex.cli import main
from compex.fileio import read_jsonl

FAST_TRAIN = [
    "--epochs", "2", "--n-layers", "2", "--d-model", "32", "--n-heads", "2",
    "--batch-size", "8", "--seed", "0",
]


def run(argv, capsys=None):
    code = main(argv)
    return code


@pytest.fixture(scope="module")
def synth_dir(tmp_path_factory):
    out = tmp_path_factory.mktemp("synth")
    assert main(["synth", "--out-dir", str(out), "--sentences", "60",
                 "--seed", "0", "--split-seed", "0"]) == 0
    return out


@pytest.fixture(scope="module")
def trained_dir(tmp_path_factory, synth_dir):
    out = tmp_path_factory.mktemp("run")
    code = main(["train", "--train", str(synth_dir / "train.jsonl"),
                 "--out-dir", str(out), *FAST_TRAIN])
    assert code == 0
    return out


class TestSynthCommand:
    def test_writes_corpus_splits_stats_and_figure(self, synth_dir):
        for name in ("corpus.jsonl", "train.jsonl", "dev.jsonl", "test.jsonl",
                     "stats.json", "stats.txt", "stats_histogram.png"):
            assert (synth_dir / name).exists(), name
        assert len(read_jsonl(synth_dir / "corpus.jsonl")) == 60


class TestPrepareCommand:
    def test_converts_role_annotated_and_array_relations(self, tmp_path):
        raw = tmp_path / "raw.jsonl"
        records = [
            {"text": "D80 beats D70 on weight",
             "relations": [{"subject": "D80", "object": "D70", "opinion_words": ["weight"]}]},
            {"text": "k5 vs m6 differ in price", "relations": [["k5", "m6", "price"]]},
            {"text": "plain record", "relations": []},
        ]
        raw.write_text("\n".join(json.dumps(r) for r in records) + "\n")
        out = tmp_path / "data.jsonl"
        assert main(["prepare", "--input", str(raw), "--output", str(out)]) == 0
        rows = read_jsonl(out)
        assert rows[0]["relations"] == [{"aspect": "weight", "t1": "D80", "t2": "D70"}]
        assert rows[1]["relations"] == [{"aspect": "price", "t1": "k5", "t2": "m6"}]
        assert (tmp_path / "stats.json").exists()
        assert (tmp_path / "stats_histogram.png").exists()

    def test_camera_shaped_stats_echo(self, tmp_path, capsys):
        from conftest import camera_shaped_corpus

        raw = tmp_path / "camera.jsonl"
        raw.write_text(
            "\n".join(json.dumps(s.to_dict()) for s in camera_shaped_corpus()) + "\n"
        )
        out = tmp_path / "camera-prepared.jsonl"
        assert main(["prepare", "--input", str(raw), "--output", str(out)]) == 0
        captured = capsys.readouterr().out
        assert "sentences: 1279" in captured
        assert "relations: 1780" in captured

    def test_empty_input_exits_2(self, tmp_path, capsys):
        raw = tmp_path / "empty.jsonl"
        raw.write_text("")
        out = tmp_path / "out.jsonl"
        assert main(["prepare", "--input", str(raw), "--output", str(out)]) == 2
        assert capsys.readouterr().err.startswith("error:")

    def test_ungrounded_relation_warns_but_succeeds(self, tmp_path, caplog):
        raw = tmp_path / "raw.jsonl"
        raw.write_text(json.dumps({
            "text": "D80 beats D70",
            "relations": [{"t1": "D80", "t2": "D90", "aspect": "beats"}],
        }) + "\n")
        out = tmp_path / "out.jsonl"
        assert main(["prepare", "--input", str(raw), "--output", str(out)]) == 0
        warnings = [r for r in caplog.records if "not grounded" in r.getMessage()]
        assert len(warnings) == 1

    def test_bad_relation_shape_exits_2(self, tmp_path, capsys):
        raw = tmp_path / "raw.jsonl"
        raw.write_text(json.dumps({"text": "x", "relations": [{"weird": 1}]}) + "\n")
        assert main(["prepare", "--input", str(raw),
                     "--output", str(tmp_path / "o.jsonl")]) == 2
        assert "error:" in capsys.readouterr().err


class TestTrainCommand:
    def test_writes_checkpoint_losses_and_figure(self, trained_dir):
        for name in ("checkpoint.pt", "run.json", "loss.csv", "loss_curve.png"):
            assert (trained_dir / name).exists(), name
        lines = (trained_dir / "loss.csv").read_text().strip().splitlines()
        assert lines[0] == "epoch,mean_loss"
        assert len(lines) == 3  # header + 2 epochs

    def test_missing_train_path_exits_2(self, capsys):
        assert main(["train", "--out-dir", "/tmp/nope-run"]) == 2
        assert "train" in capsys.readouterr().err


class TestExtractEvalPipeline:
    def test_extract_then_eval_schema_closure(self, tmp_path, synth_dir, trained_dir):
        pred = tmp_path / "predictions.jsonl"
        code = main(["extract", "--checkpoint", str(trained_dir / "checkpoint.pt"),
                     "--input", str(synth_dir / "test.jsonl"),
                     "--output", str(pred), "--audit"])
        assert code == 0
        assert pred.exists()
        assert pred.with_name("discards.jsonl").exists()
        rows = read_jsonl(pred)
        assert all({"id", "relations"} <= set(r) for r in rows)

        out_dir = tmp_path / "eval"
        code = main(["eval", "--pred", str(pred),
                     "--gold", str(synth_dir / "test.jsonl"),
                     "--out-dir", str(out_dir)])
        assert code == 0
        for name in ("metrics.json", "metrics.txt", "metrics.png"):
            assert (out_dir / name).exists(), name
        payload = json.loads((out_dir / "metrics.json").read_text())
        assert 0.0 <= payload["overall"]["f1"] <= 1.0

    def test_eval_gold_against_itself_is_perfect(self, tmp_path, synth_dir, capsys):
        gold_path = synth_dir / "test.jsonl"
        pred = tmp_path / "gold-as-pred.jsonl"
        rows = [
            {"id": r["id"], "relations": r["relations"]}
            for r in read_jsonl(gold_path)
        ]
        pred.write_text("\n".join(json.dumps(r) for r in rows) + "\n")
        out_dir = tmp_path / "eval-perfect"
        assert main(["eval", "--pred", str(pred), "--gold", str(gold_path),
                     "--out-dir", str(out_dir)]) == 0
        payload = json.loads((out_dir / "metrics.json").read_text())
        assert payload["overall"]["f1"] == 1.0

    def test_eval_id_mismatch_exits_2(self, tmp_path, synth_dir, capsys):
        pred = tmp_path / "bad-pred.jsonl"
        pred.write_text(json.dumps({"id": "zz-unknown", "relations": []}) + "\n")
        assert main(["eval", "--pred", str(pred),
                     "--gold", str(synth_dir / "test.jsonl"),
                     "--out-dir", str(tmp_path / "ev")]) == 2
        assert "error:" in capsys.readouterr().err


class TestAugmentCommand:
    def test_zero_pairs_exits_nonzero(self, synth_dir, tmp_path, capsys):
        assert main(["augment", "--train", str(synth_dir / "train.jsonl"),
                     "--num-pairs", "0",
                     "--output", str(tmp_path / "aug.jsonl")]) == 2
        assert capsys.readouterr().err.startswith("error:")

    def test_writes_originals_plus_synthetic(self, synth_dir, tmp_path):
        out = tmp_path / "aug.jsonl"
        assert main(["augment", "--train", str(synth_dir / "train.jsonl"),
                     "--num-pairs", "5", "--seed", "1", "--output", str(out)]) == 0
        rows = read_jsonl(out)
        n_train = len(read_jsonl(synth_dir / "train.jsonl"))
        assert len(rows) == n_train + 5
        synthetic = [r for r in rows if r["id"].startswith("aug-")]
        assert len(synthetic) == 5

    def test_only_new_flag(self, synth_dir, tmp_path):
        out = tmp_path / "aug-only.jsonl"
        assert main(["augment", "--train", str(synth_dir / "train.jsonl"),
                     "--num-pairs", "4", "--seed", "1", "--output", str(out),
                     "--only-new"]) == 0
        rows = read_jsonl(out)
        assert len(rows) == 4 and all(r["id"].startswith("aug-") for r in rows)

    def test_env_seed_fallback(self, synth_dir, tmp_path, monkeypatch):
        monkeypatch.setenv("COMPEX_SEED", "7")
        a = tmp_path / "a.jsonl"
        assert main(["augment", "--train", str(synth_dir / "train.jsonl"),
                     "--num-pairs", "5", "--output", str(a), "--only-new"]) == 0
        monkeypatch.delenv("COMPEX_SEED")
        b = tmp_path / "b.jsonl"
        assert main(["augment", "--train", str(synth_dir / "train.jsonl"),
                     "--num-pairs", "5", "--seed", "7", "--output", str(b),
                     "--only-new"]) == 0
        assert a.read_text() == b.read_text()


class TestAblateCommand:
    def test_two_prompt_ablation_writes_csv_and_figure(self, synth_dir, tmp_path):
        prompts = tmp_path / "prompts.txt"
        prompts.write_text("relations:\n[SEP]\n")
        out_dir = tmp_path / "ablation"
        code = main(["ablate", "--train", str(synth_dir / "train.jsonl"),
                     "--test", str(synth_dir / "dev.jsonl"),
                     "--prompts", str(prompts), "--out-dir", str(out_dir),
                     *FAST_TRAIN])
        assert code == 0
        lines = (out_dir / "ablation.csv").read_text().strip().splitlines()
        assert lines[0] == "prompt,precision,recall,f1"
        assert len(lines) == 3
        assert (out_dir / "ablation.png").exists()

    def test_single_prompt_exits_2(self, synth_dir, tmp_path, capsys):
        prompts = tmp_path / "one.txt"
        prompts.write_text("relations:\n")
        assert main(["ablate", "--train", str(synth_dir / "train.jsonl"),
                     "--test", str(synth_dir / "dev.jsonl"),
                     "--prompts", str(prompts),
                     "--out-dir", str(tmp_path / "ab")]) == 2


class TestConfigFile:
    def test_config_file_with_flag_override(self, synth_dir, tmp_path):
        cfg = tmp_path / "run.cfg"
        cfg.write_text(
            "epochs = 1\nn_layers = 2\nd_model = 32\nn_heads = 2\n"
            "seed = 0\nbatch_size = 8\n# comment line\n"
        )
        out = tmp_path / "cfg-run"
        code = main(["train", "--config", str(cfg),
                     "--train", str(synth_dir / "train.jsonl"),
                     "--out-dir", str(out), "--epochs", "2"])
        assert code == 0
        run = json.loads((out / "run.json").read_text())
        assert run["epochs"] == 2  # flag wins
        assert run["d_model"] == 32  # file value used

    def test_unknown_key_exits_2(self, synth_dir, tmp_path, capsys):
        cfg = tmp_path / "bad.cfg"
        cfg.write_text("no_such_key = 1\n")
        assert main(["train", "--config", str(cfg),
                     "--train", str(synth_dir / "train.jsonl"),
                     "--out-dir", str(tmp_path / "x")]) == 2
        assert "no_such_key" in capsys.readouterr().err


class TestUsageErrors:
    def test_missing_subcommand_exits_2(self):
        with pytest.raises(SystemExit) as exc:
            main([])
        assert exc.value.code == 2

    def test_unknown_backend_exits_2(self, synth_dir, tmp_path, capsys):
        assert main(["train", "--train", str(synth_dir / "train.jsonl"),
                     "--out-dir", str(tmp_path / "r"),
                     "--backend", "quantum"]) == 2
        assert "backend" in capsys.readouterr().err
