"""Ordered D-vine copula models.

The variable order is fixed to the gap-time order 1-2-...-d.  Edge
(tree l, position k), l in 1..d-1, k in 1..d-l, carries the pair-copula
c_{k,k+l;k+1..k+l-1}.  Under the simplifying assumption the edge copulas
take only h-transformed arguments; one bottom-up sweep per evaluation
yields the log density, the log density of the first d-1 coordinates,
and the conditional CDF C_{d|1..d-1} simultaneously.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import bicop
from .bicop import EPS, BivariateCopula, CopulaFamily

LOG_FLOOR = -1e10


@dataclass(frozen=True)
class DVineModel:
    d: int
    trees: tuple  # trees[l-1][k-1] -> BivariateCopula for edge (l, k)

    def __post_init__(self):
        if self.d < 2:
            raise ValueError("dimension must be >= 2")
        if len(self.trees) != self.d - 1:
            raise ValueError("need d-1 trees")
        for l, tree in enumerate(self.trees, start=1):
            if len(tree) != self.d - l:
                raise ValueError(f"tree {l} needs {self.d - l} edges")
            for c in tree:
                if not isinstance(c, BivariateCopula):
                    raise TypeError("edges must be BivariateCopula instances")

    def edge(self, l: int, k: int) -> BivariateCopula:
        return self.trees[l - 1][k - 1]

    def edges_tree_major(self):
        """(l, k, copula) triples in tree-major, position-minor order."""
        for l, tree in enumerate(self.trees, start=1):
            for k, c in enumerate(tree, start=1):
                yield l, k, c

    def restrict(self, d_sub: int) -> "DVineModel":
        """The embedded model on variables 1..d_sub (edges with k+l <= d_sub)."""
        if not 2 <= d_sub <= self.d:
            raise ValueError("invalid restriction dimension")
        if d_sub == self.d:
            return self
        return DVineModel(
            d_sub,
            tuple(tuple(tree[: d_sub - l]) for l, tree in enumerate(self.trees[: d_sub - 1], start=1)),
        )

    def taus(self) -> list:
        return [c.tau for _, _, c in self.edges_tree_major()]


def dvine_from_families(d: int, families, thetas=None, taus=None) -> DVineModel:
    """Build a model from tree-major lists of families and theta or tau values."""
    families = list(families)
    if len(families) != d * (d - 1) // 2:
        raise ValueError("need d(d-1)/2 edge families")
    if (thetas is None) == (taus is None):
        raise ValueError("give exactly one of thetas or taus")
    params = []
    for i, fam in enumerate(families):
        fam = CopulaFamily(fam)
        if fam is CopulaFamily.INDEPENDENCE:
            params.append(None)
        elif thetas is not None:
            params.append(float(thetas[i]))
        else:
            params.append(bicop.theta_of_tau(fam, float(taus[i])))
    trees, i = [], 0
    for l in range(1, d):
        tree = []
        for _ in range(d - l):
            tree.append(BivariateCopula(CopulaFamily(families[i]), params[i]))
            i += 1
        trees.append(tuple(tree))
    return DVineModel(d, tuple(trees))


def clayton_vine_of(theta: float, d: int) -> DVineModel:
    """The D-vine identical to the d-dimensional Clayton copula.

    Every edge is Clayton; tree-l edges carry parameter theta/((l-1)theta + 1).
    """
    if theta <= 0:
        raise ValueError("theta must be > 0")
    trees = []
    for l in range(1, d):
        th = theta / ((l - 1) * theta + 1.0)
        trees.append(tuple(BivariateCopula(CopulaFamily.CLAYTON, th) for _ in range(d - l)))
    return DVineModel(d, tuple(trees))


def _clip01(x):
    return np.clip(x, EPS, 1.0 - EPS)


def _sweep(m: DVineModel, u: np.ndarray):
    """Shared evaluation over rows of u (shape (n, dd), 2 <= dd <= m.d).

    Returns (logpdf, logpdf_prefix, cond_last):
      logpdf        log c_{1..dd}(u)
      logpdf_prefix log c_{1..dd-1}(u_1..u_{dd-1})  (0 when dd == 2)
      cond_last     C_{dd|1..dd-1}(u_dd | u_1..u_{dd-1})
    """
    n, dd = u.shape
    with np.errstate(divide="ignore", invalid="ignore"):
        # fwd[k] = C_{k|k+1..k+l-1}, bwd[j] = C_{j|j-l+1..j-1}, 1-based positions
        fwd = {k: u[:, k - 1] for k in range(1, dd + 1)}
        bwd = {j: u[:, j - 1] for j in range(1, dd + 1)}
        logpdf = np.zeros(n)
        logpdf_prefix = np.zeros(n)
        cond_last = None
        for l in range(1, dd):
            new_fwd, new_bwd = {}, {}
            for k in range(1, dd - l + 1):
                c = m.edge(l, k)
                x, y = fwd[k], bwd[k + l]
                contrib = np.log(bicop.pdf(c, x, y))
                logpdf = logpdf + contrib
                if k + l <= dd - 1:
                    logpdf_prefix = logpdf_prefix + contrib
                if l == dd - 1:
                    cond_last = bicop.hfun(c, y, x)
                new_fwd[k] = _clip01(bicop.hfun(c, x, y))
                new_bwd[k + l] = _clip01(bicop.hfun(c, y, x))
            fwd, bwd = new_fwd, new_bwd
    logpdf = np.where(np.isfinite(logpdf), logpdf, LOG_FLOOR)
    logpdf_prefix = np.where(np.isfinite(logpdf_prefix), logpdf_prefix, LOG_FLOOR)
    return logpdf, logpdf_prefix, cond_last


def _prep(m: DVineModel, u):
    u = np.asarray(u, dtype=float)
    scalar = u.ndim == 1
    u = np.atleast_2d(u)
    if not 2 <= u.shape[1] <= m.d:
        raise ValueError("vector length must be in [2, d]")
    if np.any(u < 0.0) or np.any(u > 1.0):
        raise ValueError("copula arguments must lie in [0, 1]")
    return _clip01(u), scalar


def vine_terms(m: DVineModel, u):
    """(logpdf, logpdf_prefix, cond_last) for rows of u in one sweep.

    Used by the likelihood code to evaluate event and censored cluster
    contributions without repeating the recursion.
    """
    u, scalar = _prep(m, u)
    logpdf, prefix, cond = _sweep(m, u)
    if scalar:
        return float(logpdf[0]), float(prefix[0]), float(cond[0])
    return logpdf, prefix, cond


def vine_logpdf(m: DVineModel, u):
    """Log density of the (embedded) D-vine at u (length 2..d, or rows thereof)."""
    u, scalar = _prep(m, u)
    out, _, _ = _sweep(m, u)
    return float(out[0]) if scalar else out


def vine_cond_cdf(m: DVineModel, u):
    """C_{dd|1..dd-1}(u_dd | u_1..u_{dd-1}) for dd = len(u)."""
    u, scalar = _prep(m, u)
    _, _, out = _sweep(m, u)
    return float(out[0]) if scalar else out


def vine_cluster_loglik(m: DVineModel, u, censored: bool):
    """Copula factor of a cluster's log-likelihood contribution.

    Event: log c_{1..dd}(u).  Censored: log c_{1..dd-1}(u_1..u_{dd-1}) +
    log C_{dd|1..dd-1}(u_dd | .), the (dd-1)-order partial derivative of
    the copula.  Length-1 clusters carry no copula information.
    """
    u = np.asarray(u, dtype=float)
    if u.ndim == 1 and u.shape[0] == 1:
        return 0.0
    u, scalar = _prep(m, u)
    logpdf, prefix, cond = _sweep(m, u)
    if censored:
        out = prefix + np.log(np.maximum(cond, 1e-300))
        out = np.where(np.isfinite(out), out, LOG_FLOOR)
    else:
        out = logpdf
    return float(out[0]) if scalar else out


def vine_sample(m: DVineModel, n: int, rng: np.random.Generator) -> np.ndarray:
    """n i.i.d. draws via inverse Rosenblatt along the vine."""
    if n < 1:
        raise ValueError("n must be >= 1")
    w = rng.uniform(size=(n, m.d))
    x = np.empty_like(w)
    x[:, 0] = w[:, 0]
    for i in range(2, m.d + 1):
        # b[j] = C_{j|j+1..i-1}(x_j | .), forward conditionals of the prefix
        b = {j: _clip01(x[:, j - 1]) for j in range(1, i)}
        fwd = dict(b)
        bwd = dict(b)
        for l in range(1, i - 1):
            new_fwd, new_bwd = {}, {}
            for k in range(1, i - l):
                c = m.edge(l, k)
                xk, yk = fwd[k], bwd[k + l]
                new_fwd[k] = _clip01(bicop.hfun(c, xk, yk))
                new_bwd[k + l] = _clip01(bicop.hfun(c, yk, xk))
            fwd, bwd = new_fwd, new_bwd
            for k in new_fwd:
                if k + l == i - 1:
                    b[k] = new_fwd[k]
        q = w[:, i - 1]
        for j in range(1, i):
            q = bicop.hinv(m.edge(i - j, j), q, b[j])
        x[:, i - 1] = q
    return np.clip(x, EPS, 1.0 - EPS)
