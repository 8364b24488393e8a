"""Entropy-regularized approximate Wasserstein distance (matrix scaling).

The comparison baseline for the exact closed forms: iterate diagonal
scalings of the kernel K = exp(-D/epsilon) until the scaled plan's
marginals match the inputs, then report the transport cost <plan, D> of
the regularized plan.  O(N^2) per iteration.

Below ``LOG_DOMAIN_EPSILON`` the kernel underflows in double precision,
so iterations run on the dual potentials in the log domain instead.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.special import logsumexp

from .errors import ConfigError, ShapeError, UnderflowError
from .ground_metric import GroundMatrix
from .histograms import Histogram

#: below this regularization strength the plain kernel is unsafe and the
#: solver switches to log-domain iterations
LOG_DOMAIN_EPSILON = 0.05


@dataclass(frozen=True)
class SinkhornConfig:
    """Regularization strength, iteration cap and marginal tolerance."""

    epsilon: float = 0.1
    max_iters: int = 10_000
    convergence_tol: float = 1e-8

    def __post_init__(self):
        if self.epsilon <= 0:
            raise ConfigError(f"epsilon must be > 0, got {self.epsilon}")
        if self.max_iters < 1:
            raise ConfigError(f"max_iters must be >= 1, got {self.max_iters}")
        if self.convergence_tol <= 0:
            raise ConfigError(f"convergence_tol must be > 0, got {self.convergence_tol}")


def _solve_plain(S, T, D, cfg):
    """Kernel-domain scaling for a batch of marginal pairs sharing D."""
    eps = cfg.epsilon
    K = np.exp(-D / eps)
    if np.any(K.sum(axis=1) == 0.0) or np.any(K.sum(axis=0) == 0.0):
        raise UnderflowError(
            f"kernel exp(-D/{eps}) has an all-zero row or column; "
            "increase epsilon (log-domain mode engages below "
            f"{LOG_DOMAIN_EPSILON})"
        )
    U = np.ones_like(S)
    V = np.ones_like(T)
    iters = 0
    with np.errstate(divide="ignore", invalid="ignore"):
        for _ in range(cfg.max_iters):
            U = S / (V @ K.T)
            U = np.nan_to_num(U, nan=0.0, posinf=np.inf)
            V = T / (U @ K)
            V = np.nan_to_num(V, nan=0.0, posinf=np.inf)
            iters += 1
            rows = U * (V @ K.T)
            if not (np.all(np.isfinite(rows)) and np.all(np.isfinite(V))):
                raise UnderflowError(
                    "scaling factors overflowed; increase epsilon or "
                    "reduce the ground-cost range"
                )
            err = np.abs(rows - S).max()
            if err < cfg.convergence_tol:
                break
    plans = U[:, :, None] * K[None, :, :] * V[:, None, :]
    with np.errstate(divide="ignore"):
        alpha = eps * np.log(U)
    return plans, alpha, iters


def _solve_log(S, T, D, cfg, absorb_every: int = 20, tau: float = 1e30):
    """Log-stabilized scaling, safe for any epsilon.

    Runs plain kernel-domain iterations but periodically absorbs the
    scaling factors into log-domain potentials and rebuilds the kernel,
    so the factors never under- or overflow no matter how small epsilon
    is.  Convergence is checked at each absorption.
    """
    eps = cfg.epsilon
    F = np.zeros_like(S)
    G = np.zeros_like(T)
    with np.errstate(divide="ignore", invalid="ignore"):
        Ktil = np.exp((F[:, :, None] + G[:, None, :] - D[None, :, :]) / eps)
    u = np.ones_like(S)
    v = np.ones_like(T)
    iters = 0
    while iters < cfg.max_iters:
        with np.errstate(divide="ignore", invalid="ignore"):
            u = S / np.einsum("bij,bj->bi", Ktil, v)
            u = np.nan_to_num(u, nan=0.0, posinf=1e100)
            v = T / np.einsum("bij,bi->bj", Ktil, u)
            v = np.nan_to_num(v, nan=0.0, posinf=1e100)
        iters += 1
        if (
            iters % absorb_every == 0
            or iters == cfg.max_iters
            or u.max() > tau
            or v.max() > tau
        ):
            with np.errstate(divide="ignore", invalid="ignore"):
                F = F + eps * np.log(u)
                G = G + eps * np.log(v)
                Ktil = np.exp((F[:, :, None] + G[:, None, :] - D[None, :, :]) / eps)
            u[:] = 1.0
            v[:] = 1.0
            err = np.abs(Ktil.sum(axis=2) - S).max()
            if err < cfg.convergence_tol:
                break
    # scaling factors are freshly absorbed, so the kernel IS the plan
    return Ktil, F, iters


def _solve_batch(S, T, D, cfg):
    """Dispatch on epsilon; returns (plans, source potentials, iterations).

    The source potentials are the gradient of the entropy-regularized
    transport objective with respect to the source masses (up to an
    additive constant), used by the training loss layer.
    """
    if cfg.epsilon < LOG_DOMAIN_EPSILON:
        return _solve_log(S, T, D, cfg)
    return _solve_plain(S, T, D, cfg)


def _check(s: Histogram, t: Histogram, g: GroundMatrix):
    if s.n_classes != t.n_classes:
        raise ShapeError(f"histogram sizes differ: {s.n_classes} vs {t.n_classes}")
    if g.n != s.n_classes:
        raise ShapeError(f"ground matrix is {g.n}x{g.n}, histograms have {s.n_classes} classes")


def sinkhorn_plan(
    s: Histogram, t: Histogram, g: GroundMatrix, cfg: SinkhornConfig | None = None
) -> tuple[np.ndarray, int]:
    """Regularized transport plan and the iteration count used."""
    cfg = cfg or SinkhornConfig()
    _check(s, t, g)
    plans, _, iters = _solve_batch(s.values[None, :], t.values[None, :], g.costs, cfg)
    return plans[0], iters


def sinkhorn_distance(
    s: Histogram, t: Histogram, g: GroundMatrix, cfg: SinkhornConfig | None = None
) -> tuple[float, int]:
    """Transport cost <plan, D> of the regularized plan, and iterations.

    Approaches the exact Wasserstein distance from above as epsilon -> 0;
    the entropic bias grows with epsilon.
    """
    cfg = cfg or SinkhornConfig()
    _check(s, t, g)
    plan, iters = sinkhorn_plan(s, t, g, cfg)
    return float(np.sum(plan * g.costs)), iters
