"""Exact Wasserstein distances between histograms on a line.

Every function here computes the same LP optimum as ``lp_oracle`` but
exploits the 1-D structure of the ground space:

* one-hot target: only one feasible plan exists, so the distance is the
  cost-weighted sum of prediction mass, O(N);
* linear metric: sum of absolute differences of the cumulative sums, O(N);
* convex metrics (linear / power / huber): the monotone quantile coupling
  is optimal, computed by a two-pointer sweep over cumulative masses, O(N);
* step metric: half the l1 distance between the histograms, O(N).

``lp_oracle`` solves the dense transportation LP with an exact network
simplex and is the reference the closed forms are tested against.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from ._network_simplex import OPTIMAL, PIVOT_LIMIT, transport_simplex
from .errors import OracleFailure, ShapeError, UnsupportedFamily
from .ground_metric import GroundMatrix
from .histograms import Histogram, OneHotLabel

#: marginal tolerance for a valid transport plan
PLAN_TOL = 1e-7

#: largest instance the LP oracle accepts; it is a test oracle, not a
#: production path, and stays dense
MAX_ORACLE_N = 16

#: remaining-mass tie threshold in the two-pointer sweep
TIE_EPS = 1e-12

_MAX_PIVOTS = 10_000


@dataclass(frozen=True, eq=False)
class TransportPlan:
    """Nonnegative matrix whose marginals reproduce source and target."""

    mass: np.ndarray
    source: Histogram
    target: Histogram

    def __post_init__(self):
        mass = np.asarray(self.mass, dtype=np.float64)
        n = self.source.n_classes
        m = self.target.n_classes
        if mass.shape != (n, m):
            raise ShapeError(f"plan shape {mass.shape} does not match ({n}, {m})")
        if np.any(mass < 0):
            raise ShapeError(f"negative plan entry: {mass.min()!r}")
        row_err = np.abs(mass.sum(axis=1) - self.source.values).max()
        col_err = np.abs(mass.sum(axis=0) - self.target.values).max()
        if row_err > PLAN_TOL or col_err > PLAN_TOL:
            raise ShapeError(
                f"plan marginals off by (rows {row_err:.2e}, cols {col_err:.2e})"
            )
        mass.setflags(write=False)
        object.__setattr__(self, "mass", mass)

    def cost(self, g: GroundMatrix) -> float:
        """Total cost of this plan under a ground matrix."""
        return float(np.sum(self.mass * g.costs))


def _check_pair(s: Histogram, t: Histogram):
    if s.n_classes != t.n_classes:
        raise ShapeError(f"histogram sizes differ: {s.n_classes} vs {t.n_classes}")


def _check_ground(s: Histogram, g: GroundMatrix):
    if g.n != s.n_classes:
        raise ShapeError(f"ground matrix is {g.n}x{g.n}, histograms have {s.n_classes} classes")


def wasserstein_onehot(s: Histogram, label: OneHotLabel, g: GroundMatrix) -> float:
    """Distance from ``s`` to the unit mass at ``label.true_class``.

    With a one-hot target every unit of prediction mass must travel to the
    true class, so the optimal cost is sum_i s_i * f(|i - j*|) regardless
    of the metric family.  Acts as a soft attention over all classes:
    mass near the true class is cheap, far mass is expensive.
    """
    if label.n_classes != s.n_classes:
        raise ShapeError(f"label has {label.n_classes} classes, histogram {s.n_classes}")
    _check_ground(s, g)
    return float(s.values @ g.costs[label.true_class])


def wasserstein_linear(s: Histogram, t: Histogram) -> float:
    """Distance under the linear metric f(d) = d.

    Equals the l1 distance between the cumulative sums:
    sum_j |sum_{i<=j} (s_i - t_i)|.
    """
    _check_pair(s, t)
    return float(np.abs(np.cumsum(s.values - t.values)).sum())


def wasserstein_step(s: Histogram, t: Histogram) -> float:
    """Distance under the step metric f(d) = 1 for d != 0.

    Any mass already in place costs nothing and all misplaced mass costs
    one per unit, which collapses to half the l1 distance.
    """
    _check_pair(s, t)
    return 0.5 * float(np.abs(s.values - t.values).sum())


def _monotone_arcs(sv: np.ndarray, tv: np.ndarray):
    """Monotone (quantile) coupling of two mass vectors on the same bins.

    Returns parallel arrays (src, dst, mass): mass[k] moves from bin
    src[k] to bin dst[k], in staircase order.  When the remaining masses
    tie within TIE_EPS both pointers advance, and a zero-mass connector
    arc is recorded so consecutive arcs always share an endpoint (the
    dual-potential chain in the loss layer relies on this).
    """
    n = sv.shape[0]
    src: list[int] = []
    dst: list[int] = []
    mass: list[float] = []
    i = 0
    j = 0
    rem_s = float(sv[0])
    rem_t = float(tv[0])
    while True:
        moved = rem_s if rem_s < rem_t else rem_t
        src.append(i)
        dst.append(j)
        mass.append(moved)
        rem_s -= moved
        rem_t -= moved
        if rem_s <= TIE_EPS and rem_t <= TIE_EPS:
            if i < n - 1 and j < n - 1:
                src.append(i + 1)
                dst.append(j)
                mass.append(0.0)
                i += 1
                j += 1
                rem_s += float(sv[i])
                rem_t += float(tv[j])
            elif i < n - 1:
                i += 1
                rem_s += float(sv[i])
            elif j < n - 1:
                j += 1
                rem_t += float(tv[j])
            else:
                break
        elif rem_s <= TIE_EPS:
            if i == n - 1:
                break
            i += 1
            rem_s += float(sv[i])
        else:
            if j == n - 1:
                break
            j += 1
            rem_t += float(tv[j])
    return np.asarray(src), np.asarray(dst), np.asarray(mass)


def _arc_duals(src: np.ndarray, dst: np.ndarray, costs: np.ndarray):
    """Dual potentials (u, v) with u_i + v_j = costs[i, j] on every arc.

    The arc list forms a connected chain, so fixing u at the first source
    bin determines everything else.  u is the gradient of the transport
    cost with respect to the source masses (up to a constant shift).
    """
    n = costs.shape[0]
    u = np.full(n, np.nan)
    v = np.full(n, np.nan)
    u[src[0]] = 0.0
    for k in range(src.shape[0]):
        i = src[k]
        j = dst[k]
        if np.isnan(v[j]) and not np.isnan(u[i]):
            v[j] = costs[i, j] - u[i]
        elif np.isnan(u[i]) and not np.isnan(v[j]):
            u[i] = costs[i, j] - v[j]
    # bins the sweep never reached (possible only via the 1e-9 total-mass
    # slack): extend the chain through the last visited bin
    for i in range(n):
        if np.isnan(u[i]):
            u[i] = costs[i, dst[-1]] - v[dst[-1]]
    for j in range(n):
        if np.isnan(v[j]):
            v[j] = costs[src[-1], j] - u[src[-1]]
    return u, v


def wasserstein_convex(s: Histogram, t: Histogram, g: GroundMatrix) -> float:
    """Distance under any convex increasing metric (linear, power, huber).

    On a line with convex costs the monotone coupling, which ships mass in
    class order without crossings, is optimal; the sweep costs O(N).
    """
    _check_pair(s, t)
    _check_ground(s, g)
    if not g.family.is_convex:
        raise UnsupportedFamily("step metric has no monotone-coupling form; use wasserstein_step")
    src, dst, mass = _monotone_arcs(s.values, t.values)
    return float(mass @ g.costs[src, dst])


def monotone_plan(s: Histogram, t: Histogram) -> TransportPlan:
    """Materialize the monotone coupling as a full transport plan."""
    _check_pair(s, t)
    src, dst, mass = _monotone_arcs(s.values, t.values)
    plan = np.zeros((s.n_classes, t.n_classes))
    np.add.at(plan, (src, dst), mass)
    return TransportPlan(plan, s, t)


def lp_oracle(s: Histogram, t: Histogram, g: GroundMatrix) -> tuple[float, TransportPlan]:
    """Solve the transportation LP exactly; reference for the closed forms.

    Returns the optimal cost and one optimal plan.  Dense network simplex;
    instances are capped at MAX_ORACLE_N classes.
    """
    _check_pair(s, t)
    _check_ground(s, g)
    n = s.n_classes
    if n > MAX_ORACLE_N:
        raise ShapeError(f"oracle accepts at most {MAX_ORACLE_N} classes, got {n}")
    cost, flow, status, pivots = transport_simplex(
        np.ascontiguousarray(s.values),
        np.ascontiguousarray(t.values),
        np.ascontiguousarray(g.costs),
        _MAX_PIVOTS,
    )
    if status != OPTIMAL:
        reason = "pivot limit" if status == PIVOT_LIMIT else "degenerate basis"
        raise OracleFailure(f"network simplex failed ({reason}) after {pivots} pivots")
    plan = TransportPlan(np.maximum(flow, 0.0), s, t)
    return float(cost), plan
