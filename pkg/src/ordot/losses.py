"""Loss layer: logits -> softmax -> loss value and logit gradient.

Gradients are assembled by the chain rule through the softmax Jacobian,
ds_i/dz_n = s_i (delta_in - s_n): given g = dL/ds, the logit gradient is
s * (g - <g, s>).  Every loss below is finite-difference validated in the
test suite, which is treated as ground truth over any hand-quoted
derivative formula.  Subgradient convention: sign(0) = 0.

All losses are shift invariant through the softmax, so logit gradients
sum to zero.

The batch entry point returns the mean loss over the batch and the
gradient of that mean, keeping learning rates batch-size stable.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigError, ShapeError
from .exact import _arc_duals, _monotone_arcs
from .ground_metric import GroundMatrix, MetricFamily, build_ground_matrix
from .histograms import Histogram, OneHotLabel
from .sinkhorn import SinkhornConfig, _solve_batch
from .smoothing import SmoothingConfig, smoothing_table

KINDS = (
    "wasserstein_onehot",
    "wasserstein_linear",
    "wasserstein_convex",
    "wasserstein_step",
    "cross_entropy",
    "smoothed_cross_entropy",
    "regression",
    "sinkhorn",
)

_NEEDS_FAMILY = ("wasserstein_onehot", "wasserstein_convex", "sinkhorn")
_SMOOTHABLE = (
    "wasserstein_linear",
    "wasserstein_convex",
    "wasserstein_step",
    "smoothed_cross_entropy",
    "sinkhorn",
)


@dataclass(frozen=True)
class LossSpec:
    """Which loss to evaluate, plus its metric family and target smoothing.

    ``sinkhorn`` trains against the entropy-regularized transport cost
    (the approximate baseline); its gradient is the converged dual
    potential, exact for the regularized objective.
    """

    kind: str
    family: MetricFamily | None = None
    smoothing: SmoothingConfig | None = None
    sinkhorn: SinkhornConfig | None = None

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown loss kind {self.kind!r}; expected one of {KINDS}")
        if self.kind in _NEEDS_FAMILY and self.family is None:
            raise ConfigError(f"{self.kind} requires a metric family")
        if self.kind == "wasserstein_convex" and self.family is not None and not self.family.is_convex:
            raise ConfigError("wasserstein_convex requires a convex family (linear, power, huber)")
        if self.kind == "smoothed_cross_entropy" and self.smoothing is None:
            raise ConfigError("smoothed_cross_entropy requires a smoothing config")
        if self.smoothing is not None and self.kind not in _SMOOTHABLE:
            raise ConfigError(f"{self.kind} takes a one-hot target; drop the smoothing config")
        if self.sinkhorn is not None and self.kind != "sinkhorn":
            raise ConfigError(f"{self.kind} does not use a sinkhorn config")


@dataclass(frozen=True, eq=False)
class LossValueGrad:
    """Loss value and its gradient with respect to the raw logits."""

    value: float
    grad_logits: np.ndarray


def softmax(logits) -> Histogram:
    """Max-subtracted softmax of a single logit vector."""
    z = np.asarray(logits, dtype=np.float64)
    if z.ndim != 1:
        raise ShapeError(f"expected a logit vector, got shape {z.shape}")
    if not np.all(np.isfinite(z)):
        raise ShapeError("logits must be finite")
    return Histogram(_softmax_rows(z[None, :])[0])


def _softmax_rows(Z: np.ndarray) -> np.ndarray:
    e = np.exp(Z - Z.max(axis=1, keepdims=True))
    return e / e.sum(axis=1, keepdims=True)


def _chain(S: np.ndarray, G: np.ndarray) -> np.ndarray:
    """Pull dL/ds back through the softmax Jacobian to dL/dz."""
    return S * (G - np.sum(G * S, axis=1, keepdims=True))


@lru_cache(maxsize=128)
def _ground(n: int, family: MetricFamily) -> GroundMatrix:
    return build_ground_matrix(n, family)


@lru_cache(maxsize=64)
def _onehot_table(n: int) -> np.ndarray:
    table = np.eye(n)
    table.setflags(write=False)
    return table


def _target_rows(spec: LossSpec, labels: np.ndarray, n: int) -> np.ndarray:
    if spec.smoothing is not None:
        return smoothing_table(n, spec.smoothing)[labels]
    return _onehot_table(n)[labels]


def _dispatch(spec: LossSpec, S: np.ndarray, labels: np.ndarray):
    """Per-kind (values, logit gradients) for a batch of softmax rows."""
    n = S.shape[1]
    kind = spec.kind

    if kind == "wasserstein_onehot":
        rows = _ground(n, spec.family).costs[labels]
        values = np.sum(S * rows, axis=1)
        return values, _chain(S, rows)

    if kind == "wasserstein_linear":
        T = _target_rows(spec, labels, n)
        phi = np.cumsum(S - T, axis=1)
        values = np.abs(phi).sum(axis=1)
        # dL/ds_i = sum over j >= i of sign(phi_j); note the logit-space
        # gradient then carries an extra s_n factor relative to the bare
        # cumulative-sign expression (finite differences arbitrate)
        G = np.flip(np.cumsum(np.flip(np.sign(phi), axis=1), axis=1), axis=1)
        return values, _chain(S, G)

    if kind == "wasserstein_step":
        T = _target_rows(spec, labels, n)
        diff = S - T
        values = 0.5 * np.abs(diff).sum(axis=1)
        return values, _chain(S, 0.5 * np.sign(diff))

    if kind == "wasserstein_convex":
        T = _target_rows(spec, labels, n)
        costs = _ground(n, spec.family).costs
        values = np.empty(S.shape[0])
        G = np.empty_like(S)
        for b in range(S.shape[0]):
            src, dst, mass = _monotone_arcs(S[b], T[b])
            values[b] = mass @ costs[src, dst]
            u, _ = _arc_duals(src, dst, costs)
            G[b] = u
        return values, _chain(S, G)

    if kind == "cross_entropy":
        idx = np.arange(S.shape[0])
        with np.errstate(divide="ignore"):
            values = -np.log(S[idx, labels])
        grad = S.copy()
        grad[idx, labels] -= 1.0
        return values, grad

    if kind == "smoothed_cross_entropy":
        T = _target_rows(spec, labels, n)
        with np.errstate(divide="ignore", invalid="ignore"):
            logS = np.where(T > 0, np.log(S), 0.0)
        values = -np.sum(T * logS, axis=1)
        return values, S - T

    if kind == "regression":
        # differentiable stand-in for argmax regression: squared error of
        # the expected class index
        idx = np.arange(n, dtype=np.float64)
        err = S @ idx - labels
        values = err**2
        G = 2.0 * err[:, None] * idx[None, :]
        return values, _chain(S, G)

    # sinkhorn: value is the sharp transport cost of the regularized plan;
    # the gradient is the converged dual potential (exact for the
    # entropy-regularized objective, a standard surrogate for the sharp one)
    T = _target_rows(spec, labels, n)
    costs = _ground(n, spec.family).costs
    cfg = spec.sinkhorn or SinkhornConfig()
    plans, alpha, _ = _solve_batch(S, T, costs, cfg)
    values = np.einsum("bij,ij->b", plans, costs)
    return values, _chain(S, alpha)


def batch_loss_and_grad(logits: np.ndarray, labels, spec: LossSpec):
    """Mean loss over a batch and the gradient of that mean.

    ``logits`` is (B, N); ``labels`` is a length-B integer vector.
    """
    Z = np.asarray(logits, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64)
    if Z.ndim != 2:
        raise ShapeError(f"expected (batch, classes) logits, got shape {Z.shape}")
    if labels.shape != (Z.shape[0],):
        raise ShapeError(f"labels shape {labels.shape} does not match batch {Z.shape[0]}")
    if labels.size and (labels.min() < 0 or labels.max() >= Z.shape[1]):
        raise ShapeError("label outside [0, n_classes)")
    S = _softmax_rows(Z)
    values, grad = _dispatch(spec, S, labels)
    return float(values.mean()), grad / Z.shape[0]


def loss_and_grad(logits, label: OneHotLabel, spec: LossSpec) -> LossValueGrad:
    """Loss and logit gradient for a single sample."""
    z = np.asarray(logits, dtype=np.float64)
    if z.ndim != 1:
        raise ShapeError(f"expected a logit vector, got shape {z.shape}")
    if label.n_classes != z.shape[0]:
        raise ShapeError(f"label has {label.n_classes} classes, logits {z.shape[0]}")
    value, grad = batch_loss_and_grad(z[None, :], [label.true_class], spec)
    return LossValueGrad(value=value, grad_logits=grad[0])


def regression_readout_loss(logits, label: OneHotLabel, family: MetricFamily) -> float:
    """Cost of the hard argmax readout, f(|argmax s - j*|).

    Evaluation-time baseline only: piecewise constant in the logits, so it
    has no useful gradient.  Training uses the ``regression`` loss kind,
    the squared error of the expected class index.
    """
    z = np.asarray(logits, dtype=np.float64)
    if label.n_classes != z.shape[0]:
        raise ShapeError(f"label has {label.n_classes} classes, logits {z.shape[0]}")
    i_star = int(np.argmax(z))
    return float(family.apply(abs(i_star - label.true_class)))
