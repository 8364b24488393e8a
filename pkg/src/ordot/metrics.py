"""Ordinal evaluation metrics: accuracy, MAE, quadratic weighted kappa,
and specificity at a fixed sensitivity over binarized splits."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, DegenerateKappa, InvalidClass, ShapeError, UndefinedTPR


@dataclass(frozen=True, eq=False)
class EvalReport:
    """One evaluation pass over a labeled prediction set."""

    accuracy: float
    mae: float
    qwk: float
    tnr_at_tpr: dict[str, float]
    mean_tnr: float

    def as_dict(self) -> dict:
        return {
            "accuracy": self.accuracy,
            "mae": self.mae,
            "qwk": self.qwk,
            "tnr_at_tpr": dict(self.tnr_at_tpr),
            "mean_tnr": self.mean_tnr,
        }


def _as_index_pair(preds, truths):
    p = np.asarray(preds, dtype=np.int64)
    t = np.asarray(truths, dtype=np.int64)
    if p.ndim != 1 or p.shape != t.shape:
        raise ShapeError(f"prediction/truth shapes differ: {p.shape} vs {t.shape}")
    if p.size == 0:
        raise ShapeError("need at least one sample")
    return p, t


def accuracy(preds, truths) -> float:
    """Fraction of exact class matches."""
    p, t = _as_index_pair(preds, truths)
    return float(np.mean(p == t))


def mae(preds, truths) -> float:
    """Mean absolute class-index error."""
    p, t = _as_index_pair(preds, truths)
    return float(np.mean(np.abs(p - t)))


def qwk(preds, truths, n: int) -> float:
    """Quadratic weighted kappa.

    k = 1 - sum(W * O) / sum(W * E) with weights W_ij = (i-j)^2 / (n-1)^2,
    observed confusion counts O, and expected counts E from the outer
    product of the marginal histograms scaled to the sample count.
    """
    p, t = _as_index_pair(preds, truths)
    if p.min() < 0 or p.max() >= n or t.min() < 0 or t.max() >= n:
        raise InvalidClass(f"class index outside [0, {n})")
    m = p.size
    O = np.zeros((n, n))
    np.add.at(O, (t, p), 1.0)
    hist_t = np.bincount(t, minlength=n).astype(np.float64)
    hist_p = np.bincount(p, minlength=n).astype(np.float64)
    E = np.outer(hist_t, hist_p) / m
    idx = np.arange(n)
    W = (idx[:, None] - idx[None, :]) ** 2 / (n - 1) ** 2
    den = float((W * E).sum())
    if den == 0.0:
        raise DegenerateKappa("both marginals sit on a single class")
    return 1.0 - float((W * O).sum()) / den


def tnr_at_tpr(scores, labels, tpr_target: float = 0.95) -> float:
    """TNR at the largest threshold whose TPR is still >= tpr_target.

    A sample counts as predicted-positive when score >= threshold, so the
    threshold is the ceil(tpr_target * P)-th largest positive score and
    the TNR is the fraction of negatives strictly below it.
    """
    if not 0.0 < tpr_target <= 1.0:
        raise ConfigError(f"tpr_target must lie in (0, 1], got {tpr_target}")
    sc = np.asarray(scores, dtype=np.float64)
    lb = np.asarray(labels).astype(bool)
    if sc.shape != lb.shape or sc.ndim != 1:
        raise ShapeError(f"score/label shapes differ: {sc.shape} vs {lb.shape}")
    pos = sc[lb]
    neg = sc[~lb]
    if pos.size == 0:
        raise UndefinedTPR("no positive samples in split")
    if neg.size == 0:
        raise UndefinedTPR("no negative samples in split")
    k = math.ceil(tpr_target * pos.size)
    threshold = np.sort(pos)[pos.size - k]
    return float(np.mean(neg < threshold))


def mean_tnr_at_tpr(scores_per_split, labels_per_split, tpr_target: float = 0.95):
    """Per-split TNR@TPR and the mean across splits.

    Both arguments are mappings from split name to per-sample arrays.
    """
    if set(scores_per_split) != set(labels_per_split):
        raise ShapeError("score and label splits disagree")
    per_split = {
        name: tnr_at_tpr(scores_per_split[name], labels_per_split[name], tpr_target)
        for name in scores_per_split
    }
    return per_split, float(np.mean(list(per_split.values())))


def _span(lo: int, hi: int) -> str:
    return f"{lo}" if lo == hi else f"{lo}-{hi}"


def threshold_splits(n: int) -> list[tuple[str, tuple[int, ...]]]:
    """All n-1 binarizations of an ordered n-class scale.

    Split k calls classes >= k positive; names read like "0-1 vs 2-4".
    """
    if n < 2:
        raise ShapeError(f"need at least 2 classes, got {n}")
    return [
        (f"{_span(0, k - 1)} vs {_span(k, n - 1)}", tuple(range(k, n)))
        for k in range(1, n)
    ]


def evaluate_probs(probs, truths, splits=None, tpr_target: float = 0.95) -> EvalReport:
    """Full ordinal report from per-class probabilities.

    ``probs`` is (samples, classes); the positive score of a split is the
    total probability mass on its positive classes.
    """
    P = np.asarray(probs, dtype=np.float64)
    t = np.asarray(truths, dtype=np.int64)
    if P.ndim != 2 or P.shape[0] != t.shape[0]:
        raise ShapeError(f"probs shape {P.shape} does not match {t.shape[0]} truths")
    n = P.shape[1]
    if splits is None:
        splits = threshold_splits(n)
    preds = P.argmax(axis=1)
    scores = {}
    labels = {}
    for name, positives in splits:
        positives = tuple(positives)
        if any(not 0 <= c < n for c in positives):
            raise ConfigError(f"split {name!r} references classes outside [0, {n})")
        scores[name] = P[:, positives].sum(axis=1)
        labels[name] = np.isin(t, positives)
    per_split, mean_tnr = mean_tnr_at_tpr(scores, labels, tpr_target)
    return EvalReport(
        accuracy=accuracy(preds, t),
        mae=mae(preds, t),
        qwk=qwk(preds, t, n),
        tnr_at_tpr=per_split,
        mean_tnr=mean_tnr,
    )
