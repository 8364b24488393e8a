"""Unimodal-uniform target label smoothing.

A one-hot target assumes perfect annotation.  Ordinal labels are more
often wrong by one class (inlier noise) than by a random class (outlier
noise), so the smoothed target mixes three parts:

    t_bar_j = (1 - xi - eta) * onehot_j + xi * p_j + eta / N

where p is a discrete unimodal distribution peaked at the true class,
built from exp(-|i - j*| / tau).  Unlike a Poisson-shaped output head,
the peak can sit on the first or last class and tau controls the spread
independently.  The N smoothed vectors depend only on the class, so they
are precomputed once per configuration.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache

import numpy as np

from .errors import ConfigError, InvalidMixture
from .histograms import Histogram, OneHotLabel

_NORMS = ("softmax", "sum")


@dataclass(frozen=True)
class SmoothingConfig:
    """Mixture weights (xi unimodal, eta uniform) and unimodal shape."""

    xi: float = 0.15
    eta: float = 0.05
    tau: float = 1.0
    unimodal_norm: str = "softmax"

    def __post_init__(self):
        if not 0.0 <= self.xi <= 1.0:
            raise InvalidMixture(f"xi must lie in [0, 1], got {self.xi}")
        if not 0.0 <= self.eta <= 1.0:
            raise InvalidMixture(f"eta must lie in [0, 1], got {self.eta}")
        if self.xi + self.eta > 1.0:
            raise InvalidMixture(f"xi + eta = {self.xi + self.eta} exceeds 1")
        if self.tau <= 0.0:
            raise ConfigError(f"tau must be > 0, got {self.tau}")
        if self.unimodal_norm not in _NORMS:
            raise ConfigError(f"unimodal_norm must be one of {_NORMS}, got {self.unimodal_norm!r}")


def unimodal_distribution(j_star: int, n: int, tau: float, norm: str = "softmax") -> Histogram:
    """Discrete unimodal distribution peaked at ``j_star``.

    Samples v_i = exp(-|i - j*| / tau) at every class position, then
    normalizes: ``softmax`` feeds v through exp once more before dividing
    by the total; ``sum`` divides v by its total directly.
    """
    label = OneHotLabel(j_star, n)  # validates the index
    if tau <= 0.0:
        raise ConfigError(f"tau must be > 0, got {tau}")
    if norm not in _NORMS:
        raise ConfigError(f"norm must be one of {_NORMS}, got {norm!r}")
    v = np.exp(-np.abs(np.arange(n) - label.true_class) / tau)
    if norm == "softmax":
        w = np.exp(v)
    else:
        w = v
    return Histogram(w / w.sum())


def smooth_label(label: OneHotLabel, cfg: SmoothingConfig) -> Histogram:
    """Mix the one-hot target with unimodal and uniform mass."""
    n = label.n_classes
    p = unimodal_distribution(label.true_class, n, cfg.tau, cfg.unimodal_norm)
    base = np.zeros(n)
    base[label.true_class] = 1.0
    values = (1.0 - cfg.xi - cfg.eta) * base + cfg.xi * p.values + cfg.eta / n
    return Histogram(values)


@lru_cache(maxsize=64)
def smoothing_table(n: int, cfg: SmoothingConfig) -> np.ndarray:
    """All n smoothed targets as a read-only (n, n) array, row per class.

    Smoothing depends only on the class index, so tables are cached and
    training pays nothing per sample.
    """
    table = np.stack([smooth_label(OneHotLabel(j, n), cfg).values for j in range(n)])
    table.setflags(write=False)
    return table
