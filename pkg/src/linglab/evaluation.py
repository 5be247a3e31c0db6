"""Attribute-control evaluation: MSE protocol, sweeps, pairwise matrices, ablations.

Targets are always taken from real held-out records, so requested attribute
combinations are jointly realizable. All scoring happens in z-score space
(raw-unit errors are carried alongside), every random choice derives from
explicit seeds, and per-sample records are kept so aggregates can be
recomputed exactly.
"""

from __future__ import annotations

import csv
import json
from pathlib import Path

import numpy as np

from .checkpoint import Checkpoint
from .data import PreparedCorpus, PreparedRecord
from .errors import EmptyDocumentError
from .generation import generate_batch
from .masking import strategy_from_name
from .model import ModelConfig
from .textstats import Lexicons, extract
from .training import TrainConfig, train_lm

EVAL_MODES = ("model", "vanilla", "reference")

CSV_COLUMNS = [
    "strategy", "integration", "seed", "k_controlled",
    "mse_norm_mean", "mse_norm_std", "mse_raw_mean",
    "degenerate_count", "fluency_rate",
]


def attribute_mse(targets: np.ndarray, achieved: np.ndarray) -> float:
    """Mean squared difference over the controlled subset."""
    targets = np.asarray(targets, dtype=np.float64)
    achieved = np.asarray(achieved, dtype=np.float64)
    if targets.shape != achieved.shape:
        raise ValueError("targets and achieved must have equal length")
    if targets.size == 0:
        raise ValueError("controlled subset is empty")
    return float(((targets - achieved) ** 2).mean())


def _default_generator(ckpt, requests, rngs, temperature, top_p):
    return generate_batch(ckpt, requests, rngs, temperature=temperature, top_p=top_p)


def run_eval(
    ckpt: Checkpoint,
    records: list[PreparedRecord],
    lexicons: Lexicons,
    n_controlled: int,
    n_samples: int,
    seeds: list[int],
    mode: str = "model",
    temperature: float = 1.0,
    top_p: float = 0.95,
    strategy_label: str = "",
    controlled_ids: list[str] | None = None,
    generator=None,
    batch_size: int = 64,
) -> dict:
    """Evaluate attribute control over held-out targets.

    Per sample: draw a held-out record, pick the controlled subset (fixed to
    ``controlled_ids`` when given, else uniformly at random without
    replacement), generate, extract, and score in normalized space.
    Degenerate generations are counted and excluded, never fatal.
    """
    if mode not in EVAL_MODES:
        raise ValueError(f"mode must be one of {EVAL_MODES}")
    if not records:
        raise ValueError("no evaluation records")
    schema = ckpt.schema
    k = len(schema)
    if controlled_ids is not None:
        subset_fixed = np.array([schema.index_of(i) for i in controlled_ids])
        n_controlled = len(subset_fixed)
    else:
        subset_fixed = None
    if not 1 <= n_controlled <= k:
        raise ValueError(f"n_controlled must be in [1, {k}]")
    generate_fn = generator or _default_generator

    per_seed = []
    for seed in seeds:
        chosen_records = []
        subsets = []
        requests = []
        rngs = []
        for i in range(n_samples):
            rng_sel = np.random.default_rng([seed, i, 0])
            record = records[int(rng_sel.integers(len(records)))]
            if subset_fixed is not None:
                subset = subset_fixed
            else:
                subset = np.sort(rng_sel.choice(k, size=n_controlled, replace=False))
            chosen_records.append(record)
            subsets.append(subset)
            if mode == "vanilla":
                requests.append({})
            else:
                requests.append(
                    {schema.ids[j]: float(record.attrs_raw[j]) for j in subset}
                )
            rngs.append(np.random.default_rng([seed, i, 1]))

        if mode == "reference":
            texts = [r.text for r in chosen_records]
        else:
            texts = generate_fn(ckpt, requests, rngs, temperature, top_p)

        samples = []
        degenerate = 0
        for i, (record, subset, text) in enumerate(zip(chosen_records, subsets, texts)):
            controlled = [schema.ids[j] for j in subset]
            targets_raw = record.attrs_raw[subset]
            base = {
                "index": i,
                "controlled_ids": controlled,
                "targets_raw": [float(v) for v in targets_raw],
                "text": text,
            }
            try:
                achieved_full = extract(text, schema, lexicons)
            except EmptyDocumentError:
                degenerate += 1
                samples.append({**base, "degenerate": True})
                continue
            achieved_raw = achieved_full[subset]
            mu = ckpt.normstats.means[subset]
            sd = ckpt.normstats.stds[subset]
            err_norm = ((targets_raw - mu) / sd) - ((achieved_raw - mu) / sd)
            err_raw = targets_raw - achieved_raw
            samples.append({
                **base,
                "degenerate": False,
                "achieved_raw": [float(v) for v in achieved_raw],
                "sq_err_norm": [float(v) for v in err_norm**2],
                "sq_err_raw": [float(v) for v in err_raw**2],
                "mse_norm": attribute_mse((targets_raw - mu) / sd, (achieved_raw - mu) / sd),
                "mse_raw": attribute_mse(targets_raw, achieved_raw),
            })
        per_seed.append({
            "seed": seed,
            "samples": samples,
            **_seed_aggregates(samples),
        })

    report = {
        "mode": mode,
        "strategy": strategy_label,
        "integration": ckpt.config.integration_mode,
        "n_controlled": n_controlled,
        "n_samples": n_samples,
        "seeds": list(seeds),
        "temperature": temperature,
        "top_p": top_p,
        "per_seed": per_seed,
        "aggregate": _cross_seed_aggregates(per_seed),
    }
    return report


def _seed_aggregates(samples: list[dict]) -> dict:
    scored = [s for s in samples if not s["degenerate"]]
    degenerate = len(samples) - len(scored)
    if not scored:
        return {
            "mse_norm_mean": None, "mse_norm_std": None, "mse_raw_mean": None,
            "degenerate_count": degenerate, "n_scored": 0,
        }
    norm = np.array([s["mse_norm"] for s in scored])
    raw = np.array([s["mse_raw"] for s in scored])
    return {
        "mse_norm_mean": float(norm.mean()),
        "mse_norm_std": float(norm.std()),
        "mse_raw_mean": float(raw.mean()),
        "degenerate_count": degenerate,
        "n_scored": len(scored),
    }


def _cross_seed_aggregates(per_seed: list[dict]) -> dict:
    means = [s["mse_norm_mean"] for s in per_seed if s["mse_norm_mean"] is not None]
    raw_means = [s["mse_raw_mean"] for s in per_seed if s["mse_raw_mean"] is not None]
    if not means:
        return {"mse_norm_mean": None, "mse_norm_std_across_seeds": None,
                "mse_raw_mean": None, "degenerate_count": sum(
                    s["degenerate_count"] for s in per_seed)}
    return {
        "mse_norm_mean": float(np.mean(means)),
        "mse_norm_std_across_seeds": float(np.std(means)),
        "mse_raw_mean": float(np.mean(raw_means)),
        "degenerate_count": int(sum(s["degenerate_count"] for s in per_seed)),
    }


def recompute_aggregates(report: dict) -> dict:
    """Rebuild per-seed and cross-seed aggregates from the raw sample records."""
    per_seed = [
        {"seed": s["seed"], **_seed_aggregates(s["samples"])}
        for s in report["per_seed"]
    ]
    return {"per_seed": per_seed, "aggregate": _cross_seed_aggregates(per_seed)}


def save_report(report: dict, json_path: str | Path, csv_path: str | Path | None = None) -> None:
    Path(json_path).write_text(json.dumps(report, indent=2) + "\n", encoding="utf-8")
    if csv_path is not None:
        write_report_csv(report, csv_path)


def write_report_csv(report: dict, path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(CSV_COLUMNS)
        for row in report["per_seed"]:
            writer.writerow([
                report["strategy"], report["integration"], row["seed"],
                report["n_controlled"],
                _fmt(row["mse_norm_mean"]), _fmt(row["mse_norm_std"]),
                _fmt(row["mse_raw_mean"]), row["degenerate_count"],
                _fmt(row.get("fluency_rate")),
            ])


def _fmt(value) -> str:
    return "NA" if value is None else repr(float(value))


def sweep(
    checkpoints: dict[str, Checkpoint],
    records: list[PreparedRecord],
    lexicons: Lexicons,
    counts: tuple[int, ...] = (1, 2, 4, 8, 16),
    seeds: tuple[int, ...] = (0, 1, 2),
    n_samples: int = 100,
    temperature: float = 1.0,
    top_p: float = 0.95,
    generator=None,
) -> list[dict]:
    """MSE table over (strategy, controlled-count, seed); failures become gaps."""
    schemas = {c.schema.ids for c in checkpoints.values()}
    if len(schemas) > 1:
        raise ValueError("sweep checkpoints must share one schema")
    rows = []
    for label, ckpt in checkpoints.items():
        for count in counts:
            for seed in seeds:
                try:
                    report = run_eval(
                        ckpt, records, lexicons, count, n_samples, [seed],
                        strategy_label=label, temperature=temperature,
                        top_p=top_p, generator=generator,
                    )
                    mse = report["per_seed"][0]["mse_norm_mean"]
                    degenerate = report["per_seed"][0]["degenerate_count"]
                except Exception as exc:  # gap marker, run continues
                    mse, degenerate = None, None
                    rows.append({"strategy": label, "count": count, "seed": seed,
                                 "mse_norm_mean": None, "degenerate_count": None,
                                 "error": str(exc)})
                    continue
                rows.append({"strategy": label, "count": count, "seed": seed,
                             "mse_norm_mean": mse, "degenerate_count": degenerate,
                             "error": None})
    return rows


def write_sweep_csv(rows: list[dict], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["strategy", "count", "seed", "mse_norm_mean", "degenerate_count"])
        for row in rows:
            writer.writerow([
                row["strategy"], row["count"], row["seed"],
                _fmt(row["mse_norm_mean"]),
                "NA" if row["degenerate_count"] is None else row["degenerate_count"],
            ])


def write_sweep_chart(rows: list[dict], path: str | Path) -> None:
    """Line chart of mean MSE vs controlled-count, one line per strategy."""
    import matplotlib

    matplotlib.use("Agg")
    matplotlib.rcParams["svg.hashsalt"] = "linglab"  # deterministic element ids
    import matplotlib.pyplot as plt

    strategies = sorted({r["strategy"] for r in rows})
    counts = sorted({r["count"] for r in rows})
    fig, ax = plt.subplots(figsize=(6, 4))
    for label in strategies:
        means = []
        for count in counts:
            vals = [r["mse_norm_mean"] for r in rows
                    if r["strategy"] == label and r["count"] == count
                    and r["mse_norm_mean"] is not None]
            means.append(np.mean(vals) if vals else np.nan)
        ax.plot(counts, means, marker="o", label=label)
    ax.set_xlabel("attributes controlled")
    ax.set_ylabel("normalized MSE")
    ax.set_xticks(counts)
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, metadata={"Date": None})
    plt.close(fig)


def pairwise(
    ckpt: Checkpoint,
    records: list[PreparedRecord],
    lexicons: Lexicons,
    samples_per_pair: int = 25,
    seed: int = 0,
    temperature: float = 1.0,
    top_p: float = 0.95,
    generator=None,
) -> dict:
    """k x k matrix: MSE on the primary attribute i when controlling {i, j}.

    The diagonal controls i alone. Rows are min-max normalized to [0, 1];
    constant rows normalize to zero and are flagged rather than NaN.
    """
    schema = ckpt.schema
    k = len(schema)
    if k < 2:
        raise ValueError("pairwise analysis needs at least 2 attributes")
    raw = np.zeros((k, k))
    for i in range(k):
        for j in range(k):
            ids = [schema.ids[i]] if i == j else [schema.ids[i], schema.ids[j]]
            # one shared eval seed pairs the target draws across cells
            report = run_eval(
                ckpt, records, lexicons, len(ids), samples_per_pair,
                seeds=[seed], controlled_ids=ids, temperature=temperature,
                top_p=top_p, generator=generator,
            )
            samples = report["per_seed"][0]["samples"]
            errs = [s["sq_err_norm"][0] for s in samples if not s["degenerate"]]
            raw[i, j] = float(np.mean(errs)) if errs else np.nan

    norm = np.zeros_like(raw)
    flagged = []
    for i in range(k):
        row = raw[i]
        finite = row[np.isfinite(row)]
        if finite.size == 0 or finite.max() == finite.min():
            flagged.append(schema.ids[i])
            continue
        lo, hi = finite.min(), finite.max()
        norm[i] = np.where(np.isfinite(row), (row - lo) / (hi - lo), 0.0)
    return {
        "ids": list(schema.ids),
        "raw": raw.tolist(),
        "normalized": norm.tolist(),
        "constant_rows": flagged,
        "samples_per_pair": samples_per_pair,
        "seed": seed,
    }


def write_pairwise_csv(result: dict, raw_path: str | Path, norm_path: str | Path) -> None:
    for key, path in (("raw", raw_path), ("normalized", norm_path)):
        with open(path, "w", newline="", encoding="utf-8") as fh:
            writer = csv.writer(fh)
            writer.writerow(["primary"] + result["ids"])
            for attr_id, row in zip(result["ids"], result[key]):
                writer.writerow([attr_id] + [repr(float(v)) for v in row])


def ablate(
    prepared: PreparedCorpus,
    lexicons: Lexicons,
    strategies: list[str],
    modes: list[str],
    model_config: ModelConfig,
    train_config: TrainConfig,
    eval_counts: tuple[int, ...] = (1, 4),
    eval_seeds: tuple[int, ...] = (0,),
    n_samples: int = 100,
    b: float = 3.0,
    generator=None,
) -> list[dict]:
    """Train and evaluate every (strategy x integration) cell on shared data.

    Cell failures are recorded in the row and the grid keeps going.
    """
    rows = []
    test_records = prepared.split("test") or prepared.split("val")
    for strategy_name in strategies:
        for mode in modes:
            cell = {"strategy": strategy_name, "integration": mode}
            try:
                config = ModelConfig(**{**model_config.to_dict(),
                                        "integration_mode": mode})
                ckpt, _ = train_lm(prepared, config, train_config,
                                   strategy_from_name(strategy_name, b=b))
                mses = []
                for count in eval_counts:
                    report = run_eval(
                        ckpt, test_records, lexicons, count, n_samples,
                        list(eval_seeds), strategy_label=strategy_name,
                        generator=generator,
                    )
                    for per_seed in report["per_seed"]:
                        rows.append({**cell, "count": count, "seed": per_seed["seed"],
                                     "mse_norm_mean": per_seed["mse_norm_mean"],
                                     "error": None})
                        if per_seed["mse_norm_mean"] is not None:
                            mses.append(per_seed["mse_norm_mean"])
                rows.append({**cell, "count": "all", "seed": "mean",
                             "mse_norm_mean": float(np.mean(mses)) if mses else None,
                             "error": None})
            except Exception as exc:
                rows.append({**cell, "count": "all", "seed": "mean",
                             "mse_norm_mean": None, "error": str(exc)})
    return rows


def write_ablate_csv(rows: list[dict], path: str | Path) -> None:
    with open(path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.writer(fh)
        writer.writerow(["strategy", "integration", "count", "seed",
                         "mse_norm_mean", "error"])
        for row in rows:
            writer.writerow([
                row["strategy"], row["integration"], row["count"], row["seed"],
                _fmt(row["mse_norm_mean"]), row["error"] or "",
            ])
