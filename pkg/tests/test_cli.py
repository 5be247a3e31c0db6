"""End-to-end CLI tests over a miniature pipeline."""

import json
import os
import subprocess
import sys

import pytest

from linglab.cli import main


def run_cli(argv, capsys):
    code = main(argv)
    captured = capsys.readouterr()
    return code, captured.out, captured.err


class TestBasics:
    def test_no_arguments_usage_exit_2(self):
        proc = subprocess.run(
            [sys.executable, "-m", "linglab.cli"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 2
        assert "usage" in proc.stderr.lower()

    def test_unknown_subcommand_exit_2(self):
        proc = subprocess.run(
            [sys.executable, "-m", "linglab.cli", "frobnicate"],
            capture_output=True, text=True,
        )
        assert proc.returncode == 2

    def test_calibrate_b_prints_shape(self, capsys):
        code, out, _ = run_cli(
            ["calibrate-b", "--target-rate", "0.3", "--target-mass", "0.6"], capsys
        )
        assert code == 0
        b_line = [l for l in out.splitlines() if l.startswith("b* = ")][0]
        b_star = float(b_line.split("=")[1])
        assert 2.69 <= b_star <= 2.72
        f_line = [l for l in out.splitlines() if l.startswith("F(")][0]
        achieved = float(f_line.split("=")[1])
        assert 0.6 <= achieved <= 0.60001

    def test_eval_without_ckpt_config_error(self, capsys):
        code, _, err = run_cli(["eval"], capsys)
        assert code == 2
        assert err.startswith("error: config:")

    def test_seeds_printed(self, capsys, tmp_path):
        code, out, _ = run_cli(
            ["synth", "--n", "5", "--seed", "7", "--out", str(tmp_path / "s")], capsys
        )
        assert code == 0
        assert "seeds: 7" in out


@pytest.fixture(scope="module")
def mini_pipeline(tmp_path_factory):
    """synth -> ingest -> train a throwaway model via the CLI."""
    root = tmp_path_factory.mktemp("cli_pipeline")
    synth_dir = root / "synth"
    prepared = root / "prepared"
    ckpt = root / "ckpt.bin"
    assert main(["synth", "--n", "200", "--seed", "3", "--out", str(synth_dir)]) == 0
    assert main([
        "ingest", "--in", str(synth_dir / "corpus.jsonl"),
        "--schema", str(synth_dir / "schema.json"),
        "--lexicons", str(synth_dir / "lexicons"),
        "--min-freq", "1", "--out", str(prepared),
    ]) == 0
    assert main([
        "train", "--corpus", str(prepared), "--strategy", "pmask", "--b", "3.0",
        "--seed", "1", "--out", str(ckpt),
        "--d", "32", "--n-layers", "1", "--n-heads", "2", "--ffn-size", "64",
        "--max-steps", "12", "--val-every", "6", "--batch-size", "16",
        "--warmup", "2",
    ]) == 0
    return {"root": root, "synth": synth_dir, "prepared": prepared, "ckpt": ckpt}


class TestPipeline:
    def test_artifacts_exist(self, mini_pipeline):
        assert (mini_pipeline["synth"] / "corpus.jsonl").exists()
        assert (mini_pipeline["synth"] / "lexicons" / "lexicon.txt").exists()
        assert (mini_pipeline["prepared"] / "manifest.json").exists()
        assert mini_pipeline["ckpt"].exists()
        assert mini_pipeline["ckpt"].with_suffix(".log.csv").exists()

    def test_resolved_config_written(self, mini_pipeline):
        resolved = mini_pipeline["ckpt"].parent / "resolved_config.json"
        assert resolved.exists()
        data = json.loads(resolved.read_text())
        assert data["strategy"] == "pmask"
        assert data["seed"] == 1

    def test_generate_with_sets(self, mini_pipeline, capsys):
        code, out, _ = run_cli([
            "generate", "--ckpt", str(mini_pipeline["ckpt"]),
            "--set", "n_words=8", "--set", "n_sentences=1",
            "-n", "2", "--seed", "5",
        ], capsys)
        assert code == 0
        assert "seeds: 5" in out

    def test_generate_unknown_attribute_exit_1(self, mini_pipeline, capsys):
        code, _, err = run_cli([
            "generate", "--ckpt", str(mini_pipeline["ckpt"]),
            "--set", "telepathy=3", "-n", "1",
        ], capsys)
        assert code == 1
        assert err.startswith("error: runtime:")

    def test_eval_writes_report(self, mini_pipeline, capsys, tmp_path):
        out_dir = tmp_path / "eval"
        code, out, _ = run_cli([
            "eval", "--ckpt", str(mini_pipeline["ckpt"]),
            "--prepared", str(mini_pipeline["prepared"]),
            "--lexicons", str(mini_pipeline["synth"] / "lexicons"),
            "--n-controlled", "1", "--n-samples", "4", "--seeds", "0,1",
            "--out", str(out_dir),
        ], capsys)
        assert code == 0
        assert (out_dir / "report.json").exists()
        assert (out_dir / "report.csv").exists()
        assert "seeds: 0,1" in out

    def test_report_verifies_and_emits_csv(self, mini_pipeline, capsys, tmp_path):
        eval_dir = tmp_path / "eval2"
        run_cli([
            "eval", "--ckpt", str(mini_pipeline["ckpt"]),
            "--prepared", str(mini_pipeline["prepared"]),
            "--lexicons", str(mini_pipeline["synth"] / "lexicons"),
            "--n-controlled", "1", "--n-samples", "3", "--seeds", "0",
            "--out", str(eval_dir), "--mode", "reference",
        ], capsys)
        code, out, _ = run_cli([
            "report", "--in", str(eval_dir / "report.json"),
            "--out", str(tmp_path / "again.csv"),
        ], capsys)
        assert code == 0
        assert (tmp_path / "again.csv").exists()

    def test_extract_subcommand(self, mini_pipeline, capsys, tmp_path):
        out_file = tmp_path / "attrs.jsonl"
        code, out, _ = run_cli([
            "extract", "--in", str(mini_pipeline["synth"] / "corpus.jsonl"),
            "--schema", str(mini_pipeline["synth"] / "schema.json"),
            "--lexicons", str(mini_pipeline["synth"] / "lexicons"),
            "--out", str(out_file),
        ], capsys)
        assert code == 0
        rows = [json.loads(l) for l in out_file.read_text().splitlines()]
        assert len(rows) == 200
        assert "n_words" in rows[0]["attrs"]

    def test_build_vocab_subcommand(self, mini_pipeline, capsys, tmp_path):
        out_file = tmp_path / "vocab.json"
        code, _, _ = run_cli([
            "build-vocab", "--prepared", str(mini_pipeline["prepared"]),
            "--min-freq", "1", "--out", str(out_file),
        ], capsys)
        assert code == 0
        data = json.loads(out_file.read_text())
        assert data["tokens"][:4] == ["<pad>", "<s>", "</s>", "<unk>"]

    def test_judge_missing_credential(self, mini_pipeline, capsys, tmp_path,
                                      monkeypatch):
        monkeypatch.delenv("LINGGEN_JUDGE_KEY", raising=False)
        report = tmp_path / "r.json"
        report.write_text(json.dumps({"per_seed": [{"samples": []}]}))
        code, _, err = run_cli([
            "judge-fluency", "--in", str(report), "--url", "http://localhost:1/x",
        ], capsys)
        assert code == 2
        assert "LINGGEN_JUDGE_KEY" in err

    def test_config_file_overridden_by_flag(self, mini_pipeline, capsys, tmp_path):
        config = tmp_path / "cfg.json"
        config.write_text(json.dumps({"target-rate": 0.3, "target_mass": 0.6}))
        # file supplies nothing valid for calibrate-b keys; flags win anyway
        code, out, _ = run_cli([
            "calibrate-b", "--config", str(config),
            "--target-rate", "0.2", "--target-mass", "0.5",
        ], capsys)
        assert code == 0
        b_star = float(out.splitlines()[1].split("=")[1])
        achieved = float(out.splitlines()[2].split("=")[1])
        assert 0.5 <= achieved <= 0.50001
