"""Probability histograms over ordered classes.

A histogram is a dense nonnegative vector over class indices 0..N-1 whose
entries sum to one.  Both model predictions (softmax outputs) and target
label distributions (one-hot or smoothed) are carried as histograms.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateHistogram, InvalidClass, InvalidMass, ShapeError

#: absolute tolerance on |sum - 1| for a valid histogram
MASS_TOL = 1e-9


def _freeze(values: np.ndarray) -> np.ndarray:
    out = np.array(values, dtype=np.float64)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class Histogram:
    """Nonnegative mass per class, summing to one within MASS_TOL."""

    values: np.ndarray
    n_classes: int = field(init=False)

    def __post_init__(self):
        values = _freeze(self.values)
        if values.ndim != 1 or values.shape[0] < 2:
            raise ShapeError(f"histogram needs at least 2 classes, got shape {values.shape}")
        if not np.all(np.isfinite(values)):
            raise InvalidMass("histogram entries must be finite")
        if np.any(values < 0):
            raise InvalidMass(f"negative mass: min entry {values.min()!r}")
        total = float(values.sum())
        if abs(total - 1.0) > MASS_TOL:
            raise InvalidMass(f"mass sums to {total!r}, not 1 within {MASS_TOL}")
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "n_classes", int(values.shape[0]))


@dataclass(frozen=True)
class OneHotLabel:
    """Ground-truth class index for an n-class problem."""

    true_class: int
    n_classes: int

    def __post_init__(self):
        if self.n_classes < 2:
            raise ShapeError(f"need at least 2 classes, got {self.n_classes}")
        if not 0 <= self.true_class < self.n_classes:
            raise InvalidClass(
                f"class {self.true_class} out of range [0, {self.n_classes})"
            )


def make_histogram(values, mode: str = "strict") -> Histogram:
    """Build a histogram from raw nonnegative masses.

    ``strict`` requires the input to sum to 1 within MASS_TOL;
    ``renormalize`` divides by the total (useful for softmax outputs,
    whose rounded entries need not sum exactly to one).
    """
    arr = np.asarray(values, dtype=np.float64)
    if arr.ndim != 1 or arr.size == 0:
        raise ShapeError(f"expected a nonempty vector, got shape {arr.shape}")
    if not np.all(np.isfinite(arr)):
        raise InvalidMass("histogram entries must be finite")
    if np.any(arr < 0):
        raise InvalidMass(f"negative mass: min entry {arr.min()!r}")
    if mode == "strict":
        return Histogram(arr)
    if mode == "renormalize":
        total = float(arr.sum())
        if total <= 0.0:
            raise DegenerateHistogram("zero total mass cannot be renormalized")
        return Histogram(arr / total)
    raise ValueError(f"unknown mode {mode!r}")


def one_hot(j_star: int, n: int) -> Histogram:
    """Histogram with unit mass at class ``j_star``."""
    if n < 2:
        raise ShapeError(f"need at least 2 classes, got {n}")
    if not 0 <= j_star < n:
        raise InvalidClass(f"class {j_star} out of range [0, {n})")
    values = np.zeros(n)
    values[j_star] = 1.0
    return Histogram(values)


def cumulative(h: Histogram) -> np.ndarray:
    """Prefix sums of the mass vector; the last entry is 1 within MASS_TOL."""
    return np.cumsum(h.values)
