"""Command-line entry point and file-format layer.

Subcommands:
    loss    distances/losses for inline vectors or a prediction CSV
    smooth  print a smoothed target distribution
    eval    ordinal metrics for a prediction CSV
    train   run a comparison experiment from a JSON config (alias: bench)

Prediction CSV format: header ``id,p0,...,p{N-1},label``, UTF-8, one
record per line, '.' decimal separator.
"""

from __future__ import annotations

import argparse
import json
import re
import sys
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import ConfigError, CsvParseError, OrdotError, ShapeError
from .exact import wasserstein_convex, wasserstein_linear, wasserstein_onehot, wasserstein_step
from .ground_metric import MetricFamily, build_ground_matrix
from .histograms import Histogram, OneHotLabel, make_histogram, one_hot
from .losses import LossSpec, loss_and_grad
from .metrics import evaluate_probs, threshold_splits
from .sinkhorn import SinkhornConfig, sinkhorn_distance
from .smoothing import SmoothingConfig, smooth_label
from .trainer import (
    ExperimentConfig,
    SyntheticOrdinalConfig,
    TrainConfig,
    comparison_to_csv,
    comparison_to_text,
    run_comparison,
)

_LOSS_KINDS = {
    "onehot": "wasserstein_onehot",
    "linear": "wasserstein_linear",
    "convex": "wasserstein_convex",
    "step": "wasserstein_step",
    "sinkhorn": "sinkhorn",
}


@dataclass(frozen=True)
class PredictionRecord:
    """One row of a prediction CSV."""

    sample_id: str
    probabilities: Histogram
    true_class: int


def read_prediction_csv(path) -> list[PredictionRecord]:
    """Parse a prediction CSV; raises with the offending line number."""
    lines = Path(path).read_text(encoding="utf-8").splitlines()
    if not lines:
        raise CsvParseError(f"{path}: empty file")
    header = lines[0].split(",")
    if len(header) < 3 or header[0] != "id" or header[-1] != "label":
        raise CsvParseError(f"{path}: line 1: header must be id,p0,...,p{{N-1}},label")
    n = len(header) - 2
    if [h for h in header[1:-1]] != [f"p{k}" for k in range(n)]:
        raise CsvParseError(f"{path}: line 1: probability columns must be p0..p{n - 1}")
    records = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        fields = line.split(",")
        if len(fields) != n + 2:
            raise ShapeError(
                f"{path}: line {lineno}: expected {n + 2} fields, got {len(fields)}"
            )
        try:
            probs = [float(x) for x in fields[1:-1]]
            label = int(fields[-1])
        except ValueError as exc:
            raise CsvParseError(f"{path}: line {lineno}: {exc}") from exc
        try:
            hist = make_histogram(probs, mode="renormalize")
            records.append(PredictionRecord(fields[0], hist, OneHotLabel(label, n).true_class))
        except OrdotError as exc:
            raise CsvParseError(f"{path}: line {lineno}: {exc}") from exc
    if not records:
        raise CsvParseError(f"{path}: no data rows")
    return records


def parse_splits(text: str, n: int) -> list[tuple[str, tuple[int, ...]]]:
    """Parse split strings like "0:1-4,0-1:2-4" into (name, positives)."""

    def side(token: str) -> tuple[int, ...]:
        m = re.fullmatch(r"(\d+)(?:-(\d+))?", token)
        if not m:
            raise ConfigError(f"bad split token {token!r}")
        lo = int(m.group(1))
        hi = int(m.group(2)) if m.group(2) else lo
        if lo > hi or hi >= n:
            raise ConfigError(f"split token {token!r} out of range for {n} classes")
        return tuple(range(lo, hi + 1))

    splits = []
    for part in text.split(","):
        if ":" not in part:
            raise ConfigError(f"split {part!r} must look like NEG:POS, e.g. 0-1:2-4")
        neg_s, pos_s = part.split(":", 1)
        negatives = side(neg_s)
        positives = side(pos_s)
        if set(negatives) & set(positives):
            raise ConfigError(f"split {part!r} has overlapping sides")
        name = f"{neg_s} vs {pos_s}"
        splits.append((name, positives))
    return splits


def _vector(text: str) -> np.ndarray:
    try:
        return np.array([float(x) for x in text.split(",")], dtype=np.float64)
    except ValueError as exc:
        raise ConfigError(f"bad vector {text!r}: {exc}") from exc


def _family(args) -> MetricFamily:
    if args.family == "power":
        return MetricFamily.power(args.rho)
    if args.family == "huber":
        return MetricFamily.huber(args.huber_tau)
    if args.family == "step":
        return MetricFamily.step()
    return MetricFamily.linear()


def _emit(payload: dict, as_json: bool, text: str):
    if as_json:
        print(json.dumps(payload, sort_keys=True))
    else:
        print(text)


def _pair_loss(args, s: Histogram, t: Histogram, j_star: int | None) -> float:
    """Loss between an explicit prediction/target pair."""
    fam = _family(args)
    if args.loss == "onehot":
        if j_star is None:
            raise ConfigError("--loss onehot needs --j-star")
        return wasserstein_onehot(s, OneHotLabel(j_star, s.n_classes), build_ground_matrix(s.n_classes, fam))
    if args.loss == "linear":
        return wasserstein_linear(s, t)
    if args.loss == "convex":
        return wasserstein_convex(s, t, build_ground_matrix(s.n_classes, fam))
    if args.loss == "step":
        return wasserstein_step(s, t)
    cfg = SinkhornConfig(epsilon=args.eps)
    return sinkhorn_distance(s, t, build_ground_matrix(s.n_classes, fam), cfg)[0]


def cmd_loss(args) -> int:
    if args.csv:
        records = read_prediction_csv(args.csv)
        values = {}
        for rec in records:
            target = one_hot(rec.true_class, rec.probabilities.n_classes)
            values[rec.sample_id] = _pair_loss(args, rec.probabilities, target, rec.true_class)
        mean = float(np.mean(list(values.values())))
        text = "\n".join(f"{k},{v!r}" for k, v in values.items()) + f"\nmean,{mean!r}"
        _emit({"losses": values, "mean": mean}, args.json, text)
        return 0
    if args.s is None:
        raise ConfigError("need --s (plus --t or --j-star), or --csv")
    if args.grad:
        if args.j_star is None:
            raise ConfigError("--grad needs --j-star (one-hot target)")
        logits = _vector(args.s)
        spec_kwargs = {"kind": _LOSS_KINDS[args.loss]}
        if spec_kwargs["kind"] in ("wasserstein_onehot", "wasserstein_convex", "sinkhorn"):
            spec_kwargs["family"] = _family(args)
        if spec_kwargs["kind"] == "sinkhorn":
            spec_kwargs["sinkhorn"] = SinkhornConfig(epsilon=args.eps)
        out = loss_and_grad(logits, OneHotLabel(args.j_star, logits.shape[0]), LossSpec(**spec_kwargs))
        text = f"{out.value!r}\n" + ",".join(repr(g) for g in out.grad_logits)
        _emit({"loss": out.value, "grad": list(out.grad_logits)}, args.json, text)
        return 0
    s = make_histogram(_vector(args.s), mode="renormalize")
    t = None
    if args.t is not None:
        t = make_histogram(_vector(args.t), mode="renormalize")
    elif args.j_star is not None:
        t = one_hot(args.j_star, s.n_classes)
    elif args.loss != "onehot":
        raise ConfigError("need a target: --t or --j-star")
    value = _pair_loss(args, s, t, args.j_star)
    _emit({"loss": value}, args.json, repr(value))
    return 0


def cmd_smooth(args) -> int:
    cfg = SmoothingConfig(xi=args.xi, eta=args.eta, tau=args.tau, unimodal_norm=args.norm)
    t_bar = smooth_label(OneHotLabel(args.j_star, args.n), cfg)
    text = ",".join(repr(v) for v in t_bar.values)
    _emit({"smoothed": list(t_bar.values)}, args.json, text)
    return 0


def cmd_eval(args) -> int:
    records = read_prediction_csv(args.preds)
    n = records[0].probabilities.n_classes
    probs = np.stack([r.probabilities.values for r in records])
    truths = np.array([r.true_class for r in records], dtype=np.int64)
    splits = parse_splits(args.splits, n) if args.splits else threshold_splits(n)
    report = evaluate_probs(probs, truths, splits, tpr_target=args.tpr)
    lines = [
        f"accuracy  {report.accuracy!r}",
        f"mae       {report.mae!r}",
        f"qwk       {report.qwk!r}",
    ]
    for name, value in report.tnr_at_tpr.items():
        lines.append(f"tnr@tpr={args.tpr} [{name}]  {value!r}")
    lines.append(f"mean_tnr  {report.mean_tnr!r}")
    _emit(report.as_dict(), args.json, "\n".join(lines))
    return 0


# ---------------------------------------------------------------------------
# experiment config parsing
# ---------------------------------------------------------------------------


def _expect(mapping, key, path, required=False, default=None):
    if key not in mapping:
        if required:
            raise ConfigError(f"{path}.{key}: missing required key")
        return default
    return mapping[key]


def _build(cls, kwargs, path):
    try:
        return cls(**kwargs)
    except TypeError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    except OrdotError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


def _loss_spec_from(obj, path) -> LossSpec:
    if not isinstance(obj, dict):
        raise ConfigError(f"{path}: must be an object")
    kwargs = {"kind": _expect(obj, "kind", path, required=True)}
    if "family" in obj:
        fam = obj["family"]
        if not isinstance(fam, dict) or "kind" not in fam:
            raise ConfigError(f"{path}.family: must be an object with a 'kind'")
        kwargs["family"] = _build(MetricFamily, fam, f"{path}.family")
    if "smoothing" in obj:
        kwargs["smoothing"] = _build(SmoothingConfig, obj["smoothing"], f"{path}.smoothing")
    if "sinkhorn" in obj:
        kwargs["sinkhorn"] = _build(SinkhornConfig, obj["sinkhorn"], f"{path}.sinkhorn")
    return _build(LossSpec, kwargs, path)


def load_experiment_config(path) -> ExperimentConfig:
    """Parse an experiment JSON file into an ExperimentConfig."""
    try:
        raw = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: invalid JSON: {exc}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    data = _expect(raw, "data", "config", required=True)
    if not isinstance(data, dict):
        raise ConfigError("config.data: must be an object")
    n_train = _expect(data, "n_train", "config.data", required=True)
    n_val = _expect(data, "n_val", "config.data", required=True)
    data_kwargs = {
        "n_samples": int(n_train) + int(n_val),
        "input_dim": _expect(data, "input_dim", "config.data", required=True),
        "n_classes": _expect(data, "n_classes", "config.data", required=True),
        "noise_inlier": _expect(data, "noise_inlier", "config.data", default=0.0),
        "noise_outlier": _expect(data, "noise_outlier", "config.data", default=0.0),
    }
    data_cfg = _build(SyntheticOrdinalConfig, data_kwargs, "config.data")
    runs_raw = _expect(raw, "runs", "config", required=True)
    if not isinstance(runs_raw, list) or not runs_raw:
        raise ConfigError("config.runs: must be a nonempty list")
    runs = []
    for k, run in enumerate(runs_raw):
        path_k = f"config.runs[{k}]"
        if not isinstance(run, dict):
            raise ConfigError(f"{path_k}: must be an object")
        name = _expect(run, "name", path_k, required=True)
        loss = _loss_spec_from(_expect(run, "loss", path_k, required=True), f"{path_k}.loss")
        train_kwargs = dict(run.get("train", {}))
        train_kwargs["loss"] = loss
        runs.append((str(name), _build(TrainConfig, train_kwargs, f"{path_k}.train")))
    seeds = _expect(raw, "seeds", "config", required=True)
    if not isinstance(seeds, list) or not all(isinstance(x, int) for x in seeds):
        raise ConfigError("config.seeds: must be a list of integers")
    output_dir = str(_expect(raw, "output_dir", "config", default="out"))
    return _build(
        ExperimentConfig,
        {
            "data": data_cfg,
            "n_val": int(n_val),
            "runs": tuple(runs),
            "seeds": tuple(seeds),
            "output_dir": output_dir,
        },
        "config",
    )


def _safe_name(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]", "-", name)


def cmd_train(args) -> int:
    experiment = load_experiment_config(args.config)
    result = run_comparison(experiment)
    out = Path(experiment.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    for row in result.rows:
        for outcome in row.outcomes:
            lines = ["epoch,train_loss,accuracy,mae,qwk,mean_tnr"]
            for rec in outcome.history:
                rep = rec.report
                lines.append(
                    f"{rec.epoch},{rec.train_loss!r},{rep.accuracy!r},"
                    f"{rep.mae!r},{rep.qwk!r},{rep.mean_tnr!r}"
                )
            name = _safe_name(row.name)
            (out / f"history_{name}_seed{outcome.seed}.csv").write_text(
                "\n".join(lines) + "\n", encoding="utf-8"
            )
        # per-epoch series averaged over seeds, for external plotting
        for metric, getter in (
            ("loss", lambda r: r.train_loss),
            ("qwk", lambda r: r.report.qwk),
        ):
            epochs = min((len(o.history) for o in row.outcomes), default=0)
            lines = ["epoch,value"]
            for e in range(epochs):
                v = float(np.mean([getter(o.history[e]) for o in row.outcomes]))
                lines.append(f"{e},{v!r}")
            (out / f"plot_{_safe_name(row.name)}_{metric}.csv").write_text(
                "\n".join(lines) + "\n", encoding="utf-8"
            )
    (out / "comparison.csv").write_text(comparison_to_csv(result), encoding="utf-8")
    (out / "comparison.txt").write_text(comparison_to_text(result), encoding="utf-8")
    print(comparison_to_text(result), end="")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="ordot", description=__doc__)
    sub = parser.add_subparsers(dest="command", required=True)

    p_loss = sub.add_parser("loss", help="Wasserstein/Sinkhorn losses for vectors or a CSV")
    p_loss.add_argument("--loss", required=True, choices=sorted(_LOSS_KINDS))
    p_loss.add_argument("--family", default="linear", choices=["linear", "power", "huber", "step"])
    p_loss.add_argument("--rho", type=float, default=2.0)
    p_loss.add_argument("--huber-tau", type=float, default=1.0)
    p_loss.add_argument("--eps", type=float, default=0.1)
    p_loss.add_argument("--s", help="prediction masses, e.g. 0.5,0.5 (raw logits with --grad)")
    p_loss.add_argument("--t", help="target masses")
    p_loss.add_argument("--j-star", type=int, help="true class for a one-hot target")
    p_loss.add_argument("--csv", help="prediction CSV path")
    p_loss.add_argument("--grad", action="store_true", help="also print the logit gradient")
    p_loss.add_argument("--json", action="store_true")
    p_loss.set_defaults(func=cmd_loss)

    p_smooth = sub.add_parser("smooth", help="print a smoothed target distribution")
    p_smooth.add_argument("--n", type=int, required=True)
    p_smooth.add_argument("--j-star", type=int, required=True)
    p_smooth.add_argument("--xi", type=float, default=0.15)
    p_smooth.add_argument("--eta", type=float, default=0.05)
    p_smooth.add_argument("--tau", type=float, default=1.0)
    p_smooth.add_argument("--norm", default="softmax", choices=["softmax", "sum"])
    p_smooth.add_argument("--json", action="store_true")
    p_smooth.set_defaults(func=cmd_smooth)

    p_eval = sub.add_parser("eval", help="ordinal metrics for a prediction CSV")
    p_eval.add_argument("--preds", required=True)
    p_eval.add_argument("--splits", help='binary splits, e.g. "0:1-4,0-1:2-4,0-2:3-4"')
    p_eval.add_argument("--tpr", type=float, default=0.95)
    p_eval.add_argument("--json", action="store_true")
    p_eval.set_defaults(func=cmd_eval)

    p_train = sub.add_parser("train", aliases=["bench"], help="run a comparison experiment")
    p_train.add_argument("--config", required=True, help="experiment JSON path")
    p_train.set_defaults(func=cmd_train)

    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except OrdotError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
