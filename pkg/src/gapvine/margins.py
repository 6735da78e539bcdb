"""Marginal survival models for gap times.

Parametric Weibull margins S(g) = exp(-lambda * g^rho), and the modified
nonparametric estimator for gap-time margins under induced dependent
right-censoring: Kaplan-Meier / Nelson-Aalen jumps computed on total
follow-up times, then redistributed per gap index over the clusters
large enough to contribute.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from enum import Enum

import numpy as np

PSEUDO_EPS = 1e-10


@dataclass(frozen=True)
class WeibullMargin:
    lam: float  # scale, per inverse time^rho
    rho: float  # shape

    def __post_init__(self):
        if self.lam <= 0 or self.rho <= 0:
            raise ValueError("Weibull parameters must be positive")


def weibull_surv(m: WeibullMargin, g):
    g = np.asarray(g, dtype=float)
    if np.any(g < 0):
        raise ValueError("times must be >= 0")
    out = np.exp(-m.lam * g ** m.rho)
    return out if np.ndim(out) else float(out)


def weibull_dens(m: WeibullMargin, g):
    g = np.asarray(g, dtype=float)
    if np.any(g < 0):
        raise ValueError("times must be >= 0")
    out = m.lam * m.rho * g ** (m.rho - 1.0) * np.exp(-m.lam * g ** m.rho)
    return out if np.ndim(out) else float(out)


def weibull_quantile(m: WeibullMargin, u):
    """Inverse survival: g with S(g) = u."""
    u = np.asarray(u, dtype=float)
    if np.any(u <= 0.0) or np.any(u >= 1.0):
        raise ValueError("u must lie in (0, 1)")
    out = (-np.log(u) / m.lam) ** (1.0 / m.rho)
    return out if np.ndim(out) else float(out)


class JumpMethod(str, Enum):
    KAPLAN_MEIER = "km"
    NELSON_AALEN = "na"


@dataclass(frozen=True)
class SurvivalJumpTable:
    """Survival jumps of the total-time distribution, one entry per observation.

    times/survival/weights are in processing order (ascending time, events
    before censorings at ties); input_weights maps jumps back to the input
    observation order.  Censored observations carry zero weight.
    """

    times: np.ndarray
    survival: np.ndarray
    weights: np.ndarray
    method: JumpMethod
    input_weights: np.ndarray = field(repr=False, default=None)
    all_censored: bool = False

    @property
    def tail_survival(self) -> float:
        return float(self.survival[-1]) if len(self.survival) else 1.0


def total_time_jumps(total_times, last_status, method=JumpMethod.NELSON_AALEN) -> SurvivalJumpTable:
    """Jump table of the survival estimate on total follow-up times.

    last_status: 1 for event, 0 for right-censored.  Observations are
    processed one at a time with the risk set shrinking by one, events
    before censorings at tied times; Kaplan-Meier jumps are the
    product-limit decrements, Nelson-Aalen jumps the decrements of
    exp(-cumulative hazard).
    """
    t = np.asarray(total_times, dtype=float)
    e = np.asarray(last_status, dtype=int)
    method = JumpMethod(method)
    if len(t) == 0 or np.all(e == 0):
        return SurvivalJumpTable(
            times=np.sort(t), survival=np.ones_like(t), weights=np.zeros_like(t),
            method=method, input_weights=np.zeros_like(t), all_censored=True,
        )
    if np.any(t <= 0):
        raise ValueError("total times must be positive")
    order = np.lexsort((1 - e, t))  # ascending time, events first at ties
    ts, es = t[order], e[order]
    n = len(ts)
    risk = n
    s = 1.0
    cumhaz = 0.0
    surv = np.empty(n)
    jumps = np.zeros(n)
    for i in range(n):
        if es[i] == 1:
            if method is JumpMethod.KAPLAN_MEIER:
                s_new = s * (1.0 - 1.0 / risk)
            else:
                cumhaz += 1.0 / risk
                s_new = np.exp(-cumhaz)
            jumps[i] = s - s_new
            s = s_new
        surv[i] = s
        risk -= 1
    input_weights = np.zeros(n)
    input_weights[order] = jumps
    return SurvivalJumpTable(
        times=ts, survival=surv, weights=jumps, method=method, input_weights=input_weights
    )


def pseudo_copula_data(cluster_gaps, jumps: SurvivalJumpTable):
    """Pseudo copula data u_hat_{i,j} = 1 - sum_{l: d_l >= j} W_l I(y_{l,j} <= y_{i,j}).

    cluster_gaps: list of gap vectors, ordered by decreasing cluster size,
    aligned with the observations behind jumps.input_weights.  Returns a
    list of arrays of the same ragged shape.
    """
    sizes = np.array([len(g) for g in cluster_gaps])
    if np.any(np.diff(sizes) > 0):
        raise ValueError("clusters must be ordered by decreasing size")
    w = jumps.input_weights
    if w is None or len(w) != len(cluster_gaps):
        raise ValueError("jump table does not match the dataset")
    d = sizes.max() if len(sizes) else 0
    out = [np.empty(s) for s in sizes]
    for j in range(1, d + 1):
        # decreasing-size order makes the contributing clusters a prefix
        m = int(np.sum(sizes >= j))
        yj = np.array([cluster_gaps[i][j - 1] for i in range(m)])
        wj = w[:m]
        order = np.argsort(yj, kind="mergesort")
        csum = np.cumsum(wj[order])
        # right-continuous inclusive sum: weight of every y_{l,j} <= y_{i,j}
        idx = np.searchsorted(yj[order], yj, side="right") - 1
        uj = 1.0 - np.where(idx >= 0, csum[np.maximum(idx, 0)], 0.0)
        uj = np.clip(uj, PSEUDO_EPS, 1.0 - PSEUDO_EPS)
        for i in range(m):
            out[i][j - 1] = uj[i]
    if jumps.method is JumpMethod.KAPLAN_MEIER:
        flat = np.concatenate(out) if out else np.array([])
        if np.any(flat <= PSEUDO_EPS):
            raise ValueError(
                "pseudo copula data hit 0 under Kaplan-Meier jumps; use Nelson-Aalen"
            )
    return out
