"""Command-line entrypoint covering the full pipeline.

Every run resolves its configuration as flag > config file > default,
writes the resolved values next to its outputs, and prints the seeds it
used, so any experiment is reproducible from the emitted config plus the
input data. Failures exit nonzero with a one-line categorized error.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
import time
from pathlib import Path

import numpy as np

from . import __version__
from .checkpoint import load_checkpoint, save_checkpoint
from .data import IngestConfig, SplitSpec, ingest, load_prepared
from .errors import ConfigError, LingLabError, TrainingDivergedError
from .evaluation import (
    ablate,
    pairwise,
    recompute_aggregates,
    run_eval,
    save_report,
    sweep,
    write_ablate_csv,
    write_pairwise_csv,
    write_report_csv,
    write_sweep_chart,
    write_sweep_csv,
)
from .generation import generate_batch
from .judge import JUDGE_KEY_ENV, judge_fluency
from .masking import calibrate_shape, pmask_cdf, strategy_from_name
from .model import ModelConfig
from .synth import synth_corpus, synth_lexicons, write_corpus
from .textstats import DEFAULT_SCHEMA, AttributeSchema, Lexicons, extract_with_flags
from .training import TrainConfig, train_discriminator, train_lm, write_training_log
from .vocab import build_vocab


class Resolver:
    """flag > config file > default, recording every resolved value."""

    def __init__(self, args: argparse.Namespace):
        self.args = args
        self.file: dict = {}
        if getattr(args, "config", None):
            path = Path(args.config)
            if not path.exists():
                raise ConfigError(f"config file not found: {path}")
            try:
                self.file = json.loads(path.read_text(encoding="utf-8"))
            except json.JSONDecodeError as exc:
                raise ConfigError(f"config file is not valid JSON: {exc}") from exc
            if not isinstance(self.file, dict):
                raise ConfigError("config file must hold a flat JSON object")
        self.resolved: dict = {}

    def get(self, key: str, default=None):
        attr = key.replace(".", "_").replace("-", "_")
        if attr == "in":  # 'in' is a keyword; argparse stores it as in_
            attr = "in_"
        flag = getattr(self.args, attr, None)
        value = flag if flag is not None else self.file.get(key, default)
        self.resolved[key] = value
        return value

    def require(self, key: str):
        value = self.get(key)
        if value is None:
            raise ConfigError(f"--{key.replace('_', '-')} is required")
        return value

    def write(self, out_dir: Path, extra: dict | None = None) -> None:
        payload = dict(self.resolved)
        if extra:
            payload.update(extra)
        payload["version"] = __version__
        (out_dir / "resolved_config.json").write_text(
            json.dumps(payload, indent=2, default=str) + "\n", encoding="utf-8"
        )


def _run_dir(resolver: Resolver, seed) -> Path:
    out = resolver.get("out")
    if out is None:
        stamp = time.strftime("%Y%m%d-%H%M%S")
        out = Path("runs") / f"{stamp}-seed{seed}"
    out = Path(out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _print_seeds(seeds) -> None:
    if seeds is None:
        print("seeds: none")
    elif isinstance(seeds, (list, tuple)):
        print(f"seeds: {','.join(str(s) for s in seeds)}")
    else:
        print(f"seeds: {seeds}")


def _parse_int_list(text: str) -> list[int]:
    try:
        return [int(part) for part in str(text).split(",") if part != ""]
    except ValueError as exc:
        raise ConfigError(f"expected comma-separated integers, got {text!r}") from exc


def _load_lexicons(resolver: Resolver) -> Lexicons:
    lex_dir = resolver.require("lexicons")
    cutoff = resolver.get("cutoff", 2000)
    path = Path(lex_dir)
    if not (path / "lexicon.txt").exists():
        raise ConfigError(f"no lexicon.txt under {path}")
    return Lexicons.load(path, cutoff=int(cutoff))


def _model_config(resolver: Resolver) -> ModelConfig:
    return ModelConfig(
        d=int(resolver.get("d", 128)),
        n_layers=int(resolver.get("n_layers", 4)),
        n_heads=int(resolver.get("n_heads", 4)),
        ffn_size=int(resolver.get("ffn_size", 512)),
        max_len=int(resolver.get("max_len", 100)),
        vocab_size=0,
        integration_mode=str(resolver.get("integration", "sos")),
        dropout=float(resolver.get("dropout", 0.0)),
    )


def _train_config(resolver: Resolver, seed: int) -> TrainConfig:
    return TrainConfig(
        lr=float(resolver.get("lr", 3e-4)),
        warmup_steps=int(resolver.get("warmup", 100)),
        batch_size=int(resolver.get("batch_size", 64)),
        max_steps=int(resolver.get("max_steps", 2000)),
        val_every=int(resolver.get("val_every", 200)),
        val_subset=int(resolver.get("val_subset", 1000)),
        seed=seed,
    )


def _strategy(resolver: Resolver):
    name = str(resolver.get("strategy", "pmask"))
    return strategy_from_name(
        name,
        b=float(resolver.get("b", 3.0)),
        p=float(resolver.get("dropout_p", 0.3)),
        rate=float(resolver.get("fixed_rate", 0.3)),
    )


# ---------------------------------------------------------------------------
# Subcommand handlers
# ---------------------------------------------------------------------------


def cmd_synth(args) -> int:
    resolver = Resolver(args)
    seed = int(resolver.get("seed", 0))
    n = int(resolver.get("n", 1000))
    out = _run_dir(resolver, seed)
    _print_seeds(seed)
    samples = synth_corpus(np.random.default_rng(seed), n)
    write_corpus(samples, out / "corpus.jsonl")
    synth_lexicons().save(out / "lexicons")
    DEFAULT_SCHEMA.save(out / "schema.json")
    resolver.write(out)
    print(f"wrote {n} samples to {out / 'corpus.jsonl'}")
    return 0


def cmd_ingest(args) -> int:
    resolver = Resolver(args)
    input_path = Path(resolver.require("in"))
    schema_path = resolver.get("schema")
    schema = AttributeSchema.load(schema_path) if schema_path else DEFAULT_SCHEMA
    lexicons = _load_lexicons(resolver)
    split_seed = int(resolver.get("split_seed", 0))
    fractions = [float(f) for f in str(resolver.get("fractions", "0.8,0.1,0.1")).split(",")]
    if len(fractions) != 3:
        raise ConfigError("fractions must be three comma-separated numbers")
    out = _run_dir(resolver, split_seed)
    _print_seeds(split_seed)
    config = IngestConfig(
        max_len=int(resolver.get("max_len", 100)),
        min_freq=int(resolver.get("min_freq", 2)),
        split=SplitSpec(fractions=tuple(fractions), seed=split_seed),
    )
    prepared = ingest(input_path, out, schema, lexicons, config)
    resolver.write(out)
    print(f"prepared {sum(prepared.manifest['counts'].values())} records in {out}")
    return 0


def cmd_build_vocab(args) -> int:
    resolver = Resolver(args)
    prepared = load_prepared(resolver.require("prepared"))
    min_freq = int(resolver.get("min_freq", 2))
    _print_seeds(None)
    # rebuild from the stored text, not ids, so min_freq applies to words
    from .vocab import lm_tokenize

    vocab = build_vocab(
        (lm_tokenize(r.text) for r in prepared.split("train")), min_freq=min_freq
    )
    out_path = Path(resolver.get("out") or (prepared.root / "vocab.rebuilt.json"))
    out_path.parent.mkdir(parents=True, exist_ok=True)
    vocab.save(out_path)
    print(f"vocabulary of {len(vocab)} tokens written to {out_path}")
    return 0


def cmd_extract(args) -> int:
    resolver = Resolver(args)
    input_path = Path(resolver.require("in"))
    schema_path = resolver.get("schema")
    schema = AttributeSchema.load(schema_path) if schema_path else DEFAULT_SCHEMA
    lexicons = _load_lexicons(resolver)
    out_path = Path(resolver.require("out"))
    out_path.parent.mkdir(parents=True, exist_ok=True)
    _print_seeds(None)
    n_done = n_skipped = 0
    with open(input_path, encoding="utf-8") as fin, \
         open(out_path, "w", encoding="utf-8") as fout:
        for line in fin:
            if not line.strip():
                continue
            try:
                text = json.loads(line)["text"]
                values, flags = extract_with_flags(text, schema, lexicons)
            except Exception:
                n_skipped += 1
                continue
            row = {
                "attrs": {i: float(v) for i, v in zip(schema.ids, values)},
                "degenerate_ratios": sorted(flags),
            }
            fout.write(json.dumps(row) + "\n")
            n_done += 1
    print(f"extracted {n_done} records to {out_path} (skipped {n_skipped})")
    return 0


def cmd_calibrate_b(args) -> int:
    resolver = Resolver(args)
    rate = float(resolver.get("target_rate", 0.3))
    mass = float(resolver.get("target_mass", 0.6))
    _print_seeds(None)
    b = calibrate_shape(rate, mass)
    achieved = pmask_cdf(rate, b)
    print(f"b* = {b:.6f}")
    print(f"F({rate}, b*) = {achieved:.6f}")
    return 0


def cmd_train(args) -> int:
    resolver = Resolver(args)
    seed = int(resolver.get("seed", 0))
    prepared = load_prepared(resolver.require("corpus"))
    strategy = _strategy(resolver)
    out = resolver.get("out")
    if out is None:
        run_dir = _run_dir(resolver, seed)
        ckpt_path = run_dir / "ckpt.bin"
    else:
        ckpt_path = Path(out)
        ckpt_path.parent.mkdir(parents=True, exist_ok=True)
        run_dir = ckpt_path.parent
    _print_seeds(seed)
    ckpt, log = train_lm(prepared, _model_config(resolver), _train_config(resolver, seed),
                         strategy)
    save_checkpoint(ckpt, ckpt_path)
    write_training_log(log, ckpt_path.with_suffix(".log.csv"))
    resolver.write(run_dir, {"checkpoint": str(ckpt_path)})
    print(f"checkpoint (best val {ckpt.val_loss:.4f} at step {ckpt.step}) -> {ckpt_path}")
    return 0


def cmd_train_disc(args) -> int:
    resolver = Resolver(args)
    seed = int(resolver.get("seed", 0))
    prepared = load_prepared(resolver.require("corpus"))
    out = resolver.get("out")
    if out is None:
        run_dir = _run_dir(resolver, seed)
        ckpt_path = run_dir / "disc.bin"
    else:
        ckpt_path = Path(out)
        ckpt_path.parent.mkdir(parents=True, exist_ok=True)
        run_dir = ckpt_path.parent
    _print_seeds(seed)
    ckpt, log = train_discriminator(prepared, _model_config(resolver),
                                    _train_config(resolver, seed))
    save_checkpoint(ckpt, ckpt_path)
    write_training_log(log, ckpt_path.with_suffix(".log.csv"))
    resolver.write(run_dir, {"checkpoint": str(ckpt_path)})
    print(f"discriminator (best val {ckpt.val_loss:.4f} at step {ckpt.step}) -> {ckpt_path}")
    return 0


def _parse_sets(pairs: list[str] | None) -> dict[str, float]:
    request = {}
    for pair in pairs or []:
        if "=" not in pair:
            raise ConfigError(f"--set expects id=value, got {pair!r}")
        key, _, value = pair.partition("=")
        try:
            request[key.strip()] = float(value)
        except ValueError as exc:
            raise ConfigError(f"--set value for {key!r} is not a number") from exc
    return request


def cmd_generate(args) -> int:
    resolver = Resolver(args)
    ckpt = load_checkpoint(resolver.require("ckpt"))
    if ckpt.role != "lm":
        raise ConfigError("generation needs an 'lm' checkpoint")
    seed = int(resolver.get("seed", 0))
    n = int(resolver.get("n", 1))
    temperature = float(resolver.get("temperature", 1.0))
    top_p = float(resolver.get("top_p", 0.95))
    request = _parse_sets(getattr(args, "set", None))
    _print_seeds(seed)
    rngs = [np.random.default_rng([seed, i]) for i in range(n)]
    texts = generate_batch(ckpt, [request] * n, rngs,
                           temperature=temperature, top_p=top_p)
    out = resolver.get("out")
    if out:
        with open(out, "w", encoding="utf-8") as fh:
            for text in texts:
                fh.write(json.dumps({"text": text}) + "\n")
        print(f"wrote {n} generations to {out}")
    else:
        for text in texts:
            print(text)
    return 0


def cmd_eval(args) -> int:
    resolver = Resolver(args)
    ckpt = load_checkpoint(resolver.require("ckpt"))
    prepared = load_prepared(resolver.require("prepared"))
    lexicons = _load_lexicons(resolver)
    seeds = _parse_int_list(resolver.get("seeds", "0,1,2"))
    out = _run_dir(resolver, "-".join(str(s) for s in seeds))
    _print_seeds(seeds)
    report = run_eval(
        ckpt,
        prepared.split("test") or prepared.split("val"),
        lexicons,
        n_controlled=int(resolver.get("n_controlled", 1)),
        n_samples=int(resolver.get("n_samples", 100)),
        seeds=seeds,
        mode=str(resolver.get("mode", "model")),
        temperature=float(resolver.get("temperature", 1.0)),
        top_p=float(resolver.get("top_p", 0.95)),
        strategy_label=str(resolver.get("strategy_label", "")),
    )
    save_report(report, out / "report.json", out / "report.csv")
    resolver.write(out)
    agg = report["aggregate"]
    print(f"mse_norm_mean = {agg['mse_norm_mean']} "
          f"(std across seeds {agg['mse_norm_std_across_seeds']}), "
          f"degenerate = {agg['degenerate_count']}")
    return 0


def cmd_sweep(args) -> int:
    resolver = Resolver(args)
    specs = resolver.require("ckpt")
    checkpoints = {}
    for spec in specs:
        if "=" not in spec:
            raise ConfigError(f"--ckpt expects label=path, got {spec!r}")
        label, _, path = spec.partition("=")
        checkpoints[label] = load_checkpoint(path)
    prepared = load_prepared(resolver.require("prepared"))
    lexicons = _load_lexicons(resolver)
    counts = tuple(_parse_int_list(resolver.get("counts", "1,2,4,8,16")))
    seeds = tuple(_parse_int_list(resolver.get("seeds", "0,1,2")))
    out = _run_dir(resolver, "-".join(str(s) for s in seeds))
    _print_seeds(list(seeds))
    rows = sweep(
        checkpoints,
        prepared.split("test") or prepared.split("val"),
        lexicons,
        counts=counts,
        seeds=seeds,
        n_samples=int(resolver.get("n_samples", 100)),
        temperature=float(resolver.get("temperature", 1.0)),
        top_p=float(resolver.get("top_p", 0.95)),
    )
    write_sweep_csv(rows, out / "fig2.csv")
    write_sweep_chart(rows, out / "fig2.svg")
    resolver.write(out)
    print(f"sweep table ({len(rows)} rows) -> {out / 'fig2.csv'}")
    return 0


def cmd_pairwise(args) -> int:
    resolver = Resolver(args)
    ckpt = load_checkpoint(resolver.require("ckpt"))
    prepared = load_prepared(resolver.require("prepared"))
    lexicons = _load_lexicons(resolver)
    seed = int(resolver.get("seed", 0))
    out = _run_dir(resolver, seed)
    _print_seeds(seed)
    result = pairwise(
        ckpt,
        prepared.split("test") or prepared.split("val"),
        lexicons,
        samples_per_pair=int(resolver.get("samples_per_pair", 25)),
        seed=seed,
        temperature=float(resolver.get("temperature", 1.0)),
        top_p=float(resolver.get("top_p", 0.95)),
    )
    (out / "pairwise.json").write_text(json.dumps(result, indent=2) + "\n")
    write_pairwise_csv(result, out / "pairwise_raw.csv", out / "pairwise_norm.csv")
    resolver.write(out)
    print(f"pairwise matrices -> {out}")
    return 0


def cmd_ablate(args) -> int:
    resolver = Resolver(args)
    prepared = load_prepared(resolver.require("prepared"))
    lexicons = _load_lexicons(resolver)
    strategies = str(resolver.get("strategies", "none,dropout,fixed,pmask")).split(",")
    modes = str(resolver.get("modes", "sos")).split(",")
    seed = int(resolver.get("seed", 0))
    counts = tuple(_parse_int_list(resolver.get("counts", "1,4")))
    eval_seeds = tuple(_parse_int_list(resolver.get("seeds", "0")))
    out = _run_dir(resolver, seed)
    _print_seeds([seed, *eval_seeds])
    rows = ablate(
        prepared, lexicons, strategies, modes,
        model_config=_model_config(resolver),
        train_config=_train_config(resolver, seed),
        eval_counts=counts,
        eval_seeds=eval_seeds,
        n_samples=int(resolver.get("n_samples", 100)),
        b=float(resolver.get("b", 3.0)),
    )
    write_ablate_csv(rows, out / "ablate.csv")
    resolver.write(out)
    failures = [r for r in rows if r["error"]]
    print(f"ablation grid -> {out / 'ablate.csv'} ({len(failures)} failed cells)")
    return 0


def cmd_judge_fluency(args) -> int:
    resolver = Resolver(args)
    in_path = Path(resolver.require("in"))
    url = resolver.get("url") or resolver.get("judge.url")
    if not url:
        raise ConfigError("judge endpoint missing: pass --url or config key judge.url")
    api_key = os.environ.get(JUDGE_KEY_ENV)
    if not api_key:
        raise ConfigError(f"missing credential: set {JUDGE_KEY_ENV}")
    _print_seeds(None)
    data = json.loads(in_path.read_text(encoding="utf-8"))
    if isinstance(data, dict) and "per_seed" in data:
        texts = [s["text"] for seed_row in data["per_seed"] for s in seed_row["samples"]
                 if s.get("text")]
    else:
        raise ConfigError("judge input must be a report.json with per-sample texts")
    result = judge_fluency(
        texts, url,
        model=str(resolver.get("model", "judge")),
        api_key=api_key,
        max_retries=int(resolver.get("retries", 3)),
    )
    out = resolver.get("out")
    payload = {k: v for k, v in result.items() if k != "verdicts"}
    if out:
        result_path = Path(out)
        result_path.parent.mkdir(parents=True, exist_ok=True)
        result_path.write_text(json.dumps(result, indent=2) + "\n")
        print(f"fluency -> {result_path}")
    print(json.dumps(payload))
    return 0


def cmd_report(args) -> int:
    resolver = Resolver(args)
    in_path = Path(resolver.require("in"))
    report = json.loads(in_path.read_text(encoding="utf-8"))
    _print_seeds(report.get("seeds"))
    rebuilt = recompute_aggregates(report)
    for original, again in zip(report["per_seed"], rebuilt["per_seed"]):
        for key in ("mse_norm_mean", "mse_norm_std", "mse_raw_mean"):
            a, b = original.get(key), again.get(key)
            if (a is None) != (b is None) or (a is not None and abs(a - b) > 1e-12):
                raise LingLabError(
                    f"stored aggregate {key} for seed {original['seed']} "
                    f"does not match its samples"
                )
    out = resolver.get("out")
    if out:
        write_report_csv(report, out)
        print(f"aggregates verified; CSV -> {out}")
    else:
        print(json.dumps(report["aggregate"]))
    return 0


# ---------------------------------------------------------------------------
# Parser assembly
# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="linglab",
        description="Desk-scale laboratory for multi-attribute controlled text generation",
    )
    parser.add_argument("--version", action="version", version=f"linglab {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, handler, flags):
        p = sub.add_parser(name)
        p.add_argument("--config", help="flat JSON config file (flags override it)")
        p.add_argument("--workers", type=int, help="cap worker threads")
        for flag, kwargs in flags.items():
            p.add_argument(flag, **kwargs)
        p.set_defaults(func=handler)
        return p

    add("synth", cmd_synth, {
        "--n": dict(type=int), "--seed": dict(type=int), "--out": dict(),
    })
    add("ingest", cmd_ingest, {
        "--in": dict(dest="in_", metavar="FILE"), "--schema": dict(),
        "--lexicons": dict(), "--out": dict(), "--max-len": dict(type=int),
        "--min-freq": dict(type=int), "--split-seed": dict(type=int),
        "--fractions": dict(), "--cutoff": dict(type=int),
    })
    add("build-vocab", cmd_build_vocab, {
        "--prepared": dict(), "--min-freq": dict(type=int), "--out": dict(),
    })
    add("extract", cmd_extract, {
        "--in": dict(dest="in_", metavar="FILE"), "--schema": dict(),
        "--lexicons": dict(), "--out": dict(), "--cutoff": dict(type=int),
    })
    add("calibrate-b", cmd_calibrate_b, {
        "--target-rate": dict(type=float), "--target-mass": dict(type=float),
    })
    add("train", cmd_train, {
        "--corpus": dict(), "--strategy": dict(), "--b": dict(type=float),
        "--dropout-p": dict(type=float), "--fixed-rate": dict(type=float),
        "--seed": dict(type=int), "--out": dict(),
        "--d": dict(type=int), "--n-layers": dict(type=int),
        "--n-heads": dict(type=int), "--ffn-size": dict(type=int),
        "--max-len": dict(type=int), "--integration": dict(),
        "--dropout": dict(type=float), "--lr": dict(type=float),
        "--batch-size": dict(type=int), "--max-steps": dict(type=int),
        "--val-every": dict(type=int), "--val-subset": dict(type=int),
        "--warmup": dict(type=int),
    })
    add("train-disc", cmd_train_disc, {
        "--corpus": dict(), "--seed": dict(type=int), "--out": dict(),
        "--d": dict(type=int), "--n-layers": dict(type=int),
        "--n-heads": dict(type=int), "--ffn-size": dict(type=int),
        "--max-len": dict(type=int), "--integration": dict(),
        "--dropout": dict(type=float), "--lr": dict(type=float),
        "--batch-size": dict(type=int), "--max-steps": dict(type=int),
        "--val-every": dict(type=int), "--val-subset": dict(type=int),
        "--warmup": dict(type=int),
    })
    add("generate", cmd_generate, {
        "--ckpt": dict(), "--set": dict(action="append"),
        "-n": dict(type=int, dest="n"), "--seed": dict(type=int),
        "--temperature": dict(type=float), "--top-p": dict(type=float),
        "--out": dict(),
    })
    add("eval", cmd_eval, {
        "--ckpt": dict(), "--prepared": dict(), "--lexicons": dict(),
        "--cutoff": dict(type=int), "--n-controlled": dict(type=int),
        "--n-samples": dict(type=int), "--seeds": dict(), "--mode": dict(),
        "--temperature": dict(type=float), "--top-p": dict(type=float),
        "--strategy-label": dict(), "--out": dict(),
    })
    add("sweep", cmd_sweep, {
        "--ckpt": dict(action="append", metavar="LABEL=PATH"),
        "--prepared": dict(), "--lexicons": dict(), "--cutoff": dict(type=int),
        "--counts": dict(), "--seeds": dict(), "--n-samples": dict(type=int),
        "--temperature": dict(type=float), "--top-p": dict(type=float),
        "--out": dict(),
    })
    add("pairwise", cmd_pairwise, {
        "--ckpt": dict(), "--prepared": dict(), "--lexicons": dict(),
        "--cutoff": dict(type=int), "--samples-per-pair": dict(type=int),
        "--seed": dict(type=int), "--temperature": dict(type=float),
        "--top-p": dict(type=float), "--out": dict(),
    })
    add("ablate", cmd_ablate, {
        "--prepared": dict(), "--lexicons": dict(), "--cutoff": dict(type=int),
        "--strategies": dict(), "--modes": dict(), "--counts": dict(),
        "--seeds": dict(), "--seed": dict(type=int),
        "--n-samples": dict(type=int), "--b": dict(type=float),
        "--d": dict(type=int), "--n-layers": dict(type=int),
        "--n-heads": dict(type=int), "--ffn-size": dict(type=int),
        "--max-len": dict(type=int), "--lr": dict(type=float),
        "--batch-size": dict(type=int), "--max-steps": dict(type=int),
        "--val-every": dict(type=int), "--val-subset": dict(type=int),
        "--warmup": dict(type=int), "--out": dict(),
    })
    add("judge-fluency", cmd_judge_fluency, {
        "--in": dict(dest="in_", metavar="FILE"), "--url": dict(),
        "--model": dict(), "--retries": dict(type=int), "--out": dict(),
    })
    add("report", cmd_report, {
        "--in": dict(dest="in_", metavar="FILE"), "--out": dict(),
    })
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "workers", None):
        import torch

        torch.set_num_threads(args.workers)
    try:
        return args.func(args)
    except ConfigError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return 2
    except (FileNotFoundError, json.JSONDecodeError) as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return 2
    except TrainingDivergedError as exc:
        print(f"error: training: {exc}", file=sys.stderr)
        return 1
    except LingLabError as exc:
        print(f"error: runtime: {exc}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"error: config: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
