"""Ground-cost matrices over class indices on a line.

The base distance between classes i and j is |i - j|; a metric family
lifts it through an increasing function f with f(0) = 0 (f = 1 away from 0
for the step family), giving the per-pair cost of moving probability mass.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, NonConvexMetric, ShapeError

_KINDS = ("linear", "power", "huber", "step")


@dataclass(frozen=True)
class MetricFamily:
    """Increasing function of the base distance: linear, power, huber or step."""

    kind: str
    rho: float = 1.0
    huber_tau: float = 1.0

    def __post_init__(self):
        if self.kind not in _KINDS:
            raise ConfigError(f"unknown metric family {self.kind!r}; expected one of {_KINDS}")
        if self.kind == "power" and self.rho < 1.0:
            raise NonConvexMetric(f"power exponent must be >= 1, got {self.rho}")
        if self.kind == "huber" and self.huber_tau <= 0.0:
            raise ConfigError(f"huber threshold must be > 0, got {self.huber_tau}")

    @classmethod
    def linear(cls) -> "MetricFamily":
        return cls("linear")

    @classmethod
    def power(cls, rho: float) -> "MetricFamily":
        return cls("power", rho=float(rho))

    @classmethod
    def huber(cls, tau: float) -> "MetricFamily":
        return cls("huber", huber_tau=float(tau))

    @classmethod
    def step(cls) -> "MetricFamily":
        return cls("step")

    @property
    def is_convex(self) -> bool:
        """True for families admitting the monotone-coupling solver."""
        return self.kind != "step"

    def apply(self, d):
        """Evaluate the cost function at base distance(s) ``d`` (elementwise).

        linear: d
        power:  d ** rho
        huber:  d**2 below the threshold, tau * (2d - tau) beyond it
        step:   1 wherever d != 0
        """
        d = np.asarray(d, dtype=np.float64)
        if self.kind == "linear":
            out = d.copy()
        elif self.kind == "power":
            out = d**self.rho
        elif self.kind == "huber":
            tau = self.huber_tau
            out = np.where(d <= tau, d**2, tau * (2.0 * d - tau))
        else:
            out = (d != 0).astype(np.float64)
        return out if out.ndim else float(out)


@dataclass(frozen=True, eq=False)
class GroundMatrix:
    """Symmetric n x n cost matrix with zero diagonal, Toeplitz by |i - j|."""

    costs: np.ndarray
    family: MetricFamily

    @property
    def n(self) -> int:
        return self.costs.shape[0]


def base_distance(i: int, j: int) -> float:
    """Distance between class positions on the line."""
    return float(abs(i - j))


def build_ground_matrix(n: int, family: MetricFamily) -> GroundMatrix:
    """Tabulate costs[i][j] = f(|i - j|) for all class pairs."""
    if n < 2:
        raise ShapeError(f"need at least 2 classes, got {n}")
    idx = np.arange(n)
    d = np.abs(idx[:, None] - idx[None, :]).astype(np.float64)
    costs = family.apply(d)
    costs.setflags(write=False)
    return GroundMatrix(costs=costs, family=family)
