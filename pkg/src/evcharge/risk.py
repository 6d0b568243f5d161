"""Exact VaR, CVaR, and mean-CVaR functionals on finite discrete distributions.

CVaR is computed by sorting with proportional splitting of the atom at the
quantile; this equals the Rockafellar-Uryasev infimum exactly and needs no
solver.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .price_model import DiscreteDist


@dataclass(frozen=True)
class RiskParams:
    """One-period mean-CVaR parameters (lam, alpha)."""

    lam: float    # tail-emphasis weight in [0, 1]
    alpha: float  # tail level in (0, 1)

    def __post_init__(self):
        if not 0.0 <= self.lam <= 1.0:
            raise ValueError("lam must be in [0, 1]")
        if not 0.0 < self.alpha < 1.0:
            raise ValueError("alpha must be in (0, 1)")


@dataclass(frozen=True)
class RiskSchedule:
    """Per-period risk parameters for t = 0..T (length horizon + 1)."""

    per_period: tuple[RiskParams, ...]

    def __post_init__(self):
        if len(self.per_period) < 2:
            raise ValueError("schedule needs at least two periods")
        object.__setattr__(self, "per_period", tuple(self.per_period))

    @classmethod
    def homogeneous(cls, lam: float, alpha: float, horizon: int) -> "RiskSchedule":
        return cls((RiskParams(lam, alpha),) * (horizon + 1))

    @property
    def horizon(self) -> int:
        return len(self.per_period) - 1

    def __getitem__(self, t: int) -> RiskParams:
        return self.per_period[t]


def var_values(values: np.ndarray, probs: np.ndarray, alpha: float) -> float:
    """VaR of an unsorted finite cost distribution: the smallest outcome u with
    P(X <= u) > alpha."""
    order = np.argsort(values, kind="stable")
    v = values[order]
    cum = np.cumsum(probs[order])
    j = int(np.searchsorted(cum, alpha, side="right"))
    return float(v[min(j, len(v) - 1)])


def cvar_values(values: np.ndarray, probs: np.ndarray, alpha: float) -> float:
    """CVaR of an unsorted finite cost distribution: average of the worst
    (1 - alpha) mass, splitting the atom at the quantile proportionally."""
    order = np.argsort(values, kind="stable")
    v = values[order]
    w = probs[order]
    cum = np.cumsum(w)
    j = int(np.searchsorted(cum, alpha, side="right"))
    j = min(j, len(v) - 1)
    upper = float(v[j + 1:] @ w[j + 1:])
    return (upper + v[j] * (cum[j] - alpha)) / (1.0 - alpha)


def mean_cvar_values(values: np.ndarray, probs: np.ndarray, rp: RiskParams) -> float:
    mean = float(values @ probs)
    if rp.lam == 0.0:
        return mean
    return (1.0 - rp.lam) * mean + rp.lam * cvar_values(values, probs, rp.alpha)


def var_discrete(dist: DiscreteDist, alpha: float) -> float:
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    return var_values(dist.support, dist.probs, alpha)


def cvar_discrete(dist: DiscreteDist, alpha: float) -> float:
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must be in (0, 1)")
    return cvar_values(dist.support, dist.probs, alpha)


def mean_cvar(dist: DiscreteDist, rp: RiskParams) -> float:
    return mean_cvar_values(dist.support, dist.probs, rp)


def mean_cvar_rows(values: np.ndarray, probs: np.ndarray, rp: RiskParams) -> np.ndarray:
    """Row-wise mean-CVaR: values is (n_rows, n_outcomes) against a shared
    outcome distribution probs.  Used by the backward-induction solver."""
    mean = values @ probs
    if rp.lam == 0.0:
        return mean
    order = np.argsort(values, axis=1, kind="stable")
    v = np.take_along_axis(values, order, axis=1)
    w = probs[order]
    cum = np.cumsum(w, axis=1)
    rows = np.arange(values.shape[0])
    j = np.argmax(cum > rp.alpha, axis=1)
    # argmax returns 0 when no entry exceeds alpha (rounding at cum[-1]); fall
    # back to the last atom in that case
    j = np.where(cum[rows, -1] > rp.alpha, j, values.shape[1] - 1)
    vw_cum = np.cumsum(v * w, axis=1)
    upper = vw_cum[:, -1] - vw_cum[rows, j]
    cvar = (upper + v[rows, j] * (cum[rows, j] - rp.alpha)) / (1.0 - rp.alpha)
    return (1.0 - rp.lam) * mean + rp.lam * cvar
