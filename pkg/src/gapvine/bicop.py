"""Bivariate one-parameter copula families.

Implements the Independence, Clayton, Gumbel and Frank copulas: CDF,
density, h-functions (conditional CDFs), their inverses, and the
Kendall's tau <-> parameter bijections.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy import integrate, optimize

EPS = 1e-10
FRANK_INDEP_TOL = 1e-5


class CopulaFamily(str, Enum):
    INDEPENDENCE = "independence"
    CLAYTON = "clayton"
    GUMBEL = "gumbel"
    FRANK = "frank"


def _validate_theta(family: CopulaFamily, theta) -> None:
    if family is CopulaFamily.INDEPENDENCE:
        return
    if theta is None or not np.isfinite(theta):
        raise ValueError(f"{family.value} copula requires a finite theta")
    if family is CopulaFamily.CLAYTON and theta <= 0:
        raise ValueError("Clayton theta must be in (0, inf)")
    if family is CopulaFamily.GUMBEL and theta < 1:
        raise ValueError("Gumbel theta must be in [1, inf)")
    if family is CopulaFamily.FRANK and theta == 0:
        raise ValueError("Frank theta must be nonzero")


@dataclass(frozen=True)
class BivariateCopula:
    family: CopulaFamily
    theta: float | None = None

    def __post_init__(self):
        _validate_theta(self.family, self.theta)

    @property
    def tau(self) -> float:
        return tau_of_theta(self.family, self.theta)


INDEPENDENCE = BivariateCopula(CopulaFamily.INDEPENDENCE)


def _clip(x):
    return np.clip(np.asarray(x, dtype=float), EPS, 1.0 - EPS)


def _check_unit(*args):
    for a in args:
        a = np.asarray(a, dtype=float)
        if np.any(a < 0.0) or np.any(a > 1.0):
            raise ValueError("copula arguments must lie in [0, 1]")


def _effective_family(c: BivariateCopula) -> CopulaFamily:
    # Frank degenerates to the product copula as theta -> 0.
    if c.family is CopulaFamily.FRANK and abs(c.theta) < FRANK_INDEP_TOL:
        return CopulaFamily.INDEPENDENCE
    return c.family


def cdf(c: BivariateCopula, u, v):
    """C(u, v)."""
    _check_unit(u, v)
    u, v = _clip(u), _clip(v)
    fam, th = _effective_family(c), c.theta
    if fam is CopulaFamily.INDEPENDENCE:
        out = u * v
    elif fam is CopulaFamily.CLAYTON:
        out = (u ** (-th) + v ** (-th) - 1.0) ** (-1.0 / th)
    elif fam is CopulaFamily.GUMBEL:
        s = (-np.log(u)) ** th + (-np.log(v)) ** th
        out = np.exp(-(s ** (1.0 / th)))
    else:  # Frank
        a = np.expm1(-th)
        out = -np.log1p(np.expm1(-th * u) * np.expm1(-th * v) / a) / th
    return out if np.ndim(out) else float(out)


def pdf(c: BivariateCopula, u, v):
    """Copula density c(u, v) = d2 C / du dv."""
    _check_unit(u, v)
    u, v = _clip(u), _clip(v)
    fam, th = _effective_family(c), c.theta
    if fam is CopulaFamily.INDEPENDENCE:
        out = np.ones_like(u)
    elif fam is CopulaFamily.CLAYTON:
        s = u ** (-th) + v ** (-th) - 1.0
        out = (1.0 + th) * (u * v) ** (-th - 1.0) * s ** (-1.0 / th - 2.0)
    elif fam is CopulaFamily.GUMBEL:
        x, y = -np.log(u), -np.log(v)
        s = x ** th + y ** th
        t = s ** (1.0 / th)
        out = (
            np.exp(-t)
            * (x * y) ** (th - 1.0)
            / (u * v)
            * s ** (2.0 / th - 2.0)
            * (1.0 + (th - 1.0) * s ** (-1.0 / th))
        )
    else:  # Frank
        a = np.expm1(-th)
        g = a + np.expm1(-th * u) * np.expm1(-th * v)
        out = -th * a * np.exp(-th * (u + v)) / g ** 2
    return out if np.ndim(out) else float(out)


def hfun(c: BivariateCopula, u, v):
    """h_{1|2}(u | v) = dC(u, v)/dv, the conditional CDF of U given V = v."""
    _check_unit(u, v)
    u, v = _clip(u), _clip(v)
    fam, th = _effective_family(c), c.theta
    if fam is CopulaFamily.INDEPENDENCE:
        out = u
    elif fam is CopulaFamily.CLAYTON:
        s = u ** (-th) + v ** (-th) - 1.0
        out = v ** (-th - 1.0) * s ** (-1.0 / th - 1.0)
    elif fam is CopulaFamily.GUMBEL:
        x, y = -np.log(u), -np.log(v)
        s = x ** th + y ** th
        out = np.exp(-(s ** (1.0 / th))) * s ** (1.0 / th - 1.0) * y ** (th - 1.0) / v
    else:  # Frank
        a = np.expm1(-th)
        eu, ev = np.expm1(-th * u), np.expm1(-th * v)
        out = np.exp(-th * v) * eu / (a + eu * ev)
    out = np.clip(out, 0.0, 1.0)
    return out if np.ndim(out) else float(out)


def hinv(c: BivariateCopula, p, v):
    """u such that hfun(c, u, v) = p.

    Closed forms for Independence, Clayton and Frank; safeguarded Newton
    with bisection fallback for Gumbel (tol 1e-10, max 100 iterations).
    """
    _check_unit(p, v)
    # p may legitimately be far below EPS (deep tails at strong dependence);
    # only guard against exact 0 and 1 so round-trips with hfun stay exact.
    p = np.clip(np.asarray(p, dtype=float), 1e-300, 1.0 - 1e-16)
    if np.ndim(p) == 0:
        p = float(p)
    v = _clip(v)
    fam, th = _effective_family(c), c.theta
    if fam is CopulaFamily.INDEPENDENCE:
        out = p
    elif fam is CopulaFamily.CLAYTON:
        out = ((p * v ** (th + 1.0)) ** (-th / (th + 1.0)) - v ** (-th) + 1.0) ** (
            -1.0 / th
        )
    elif fam is CopulaFamily.FRANK:
        a = np.expm1(-th)
        ev = np.expm1(-th * v)
        eu = p * a / (np.exp(-th * v) - p * ev)
        out = -np.log1p(eu) / th
    else:
        out = _hinv_newton(c, p, v)
    out = np.clip(out, EPS, 1.0 - EPS)
    return out if np.ndim(out) else float(out)


def _hinv_newton(c: BivariateCopula, p, v):
    scalar = np.ndim(p) == 0 and np.ndim(v) == 0
    p = np.atleast_1d(np.asarray(p, dtype=float))
    v = np.broadcast_to(np.asarray(v, dtype=float), p.shape).copy()
    lo = np.full_like(p, EPS)
    hi = np.full_like(p, 1.0 - EPS)
    u = np.clip(p.copy(), 0.01, 0.99)
    for _ in range(100):
        f = hfun(c, u, v) - p
        lo = np.where(f < 0.0, u, lo)
        hi = np.where(f > 0.0, u, hi)
        d = pdf(c, u, v)
        step = np.where(d > 0.0, f / np.maximum(d, 1e-300), 0.0)
        u_new = u - step
        # fall back to bisection when Newton leaves the bracket
        bad = (u_new <= lo) | (u_new >= hi) | ~np.isfinite(u_new)
        u_new = np.where(bad, 0.5 * (lo + hi), u_new)
        if np.all(np.abs(u_new - u) < 1e-10):
            u = u_new
            break
        u = u_new
    return u[0] if scalar else u


def debye1(theta: float) -> float:
    """First Debye function D1(theta) = (1/theta) * int_0^theta t/(e^t - 1) dt."""
    if theta == 0.0:
        return 1.0
    if theta < 0.0:
        return debye1(-theta) - theta / 2.0

    def integrand(t):
        # t/(e^t - 1) written overflow-safe via e^{-t}
        return np.where(np.abs(t) < 1e-12, 1.0, t * np.exp(-t) / -np.expm1(-t))

    val, _ = integrate.quad(integrand, 0.0, theta, limit=200)
    return val / theta


def tau_of_theta(family: CopulaFamily, theta) -> float:
    _validate_theta(family, theta)
    if family is CopulaFamily.INDEPENDENCE:
        return 0.0
    if family is CopulaFamily.CLAYTON:
        return theta / (theta + 2.0)
    if family is CopulaFamily.GUMBEL:
        return 1.0 - 1.0 / theta
    if abs(theta) < FRANK_INDEP_TOL:
        return 0.0
    return 1.0 - 4.0 / theta + 4.0 * debye1(theta) / theta


def theta_of_tau(family: CopulaFamily, tau) -> float:
    if family is CopulaFamily.INDEPENDENCE:
        if tau != 0.0:
            raise ValueError("Independence only attains tau = 0")
        return 0.0
    if family is CopulaFamily.CLAYTON:
        if not 0.0 < tau < 1.0:
            raise ValueError("Clayton attains tau in (0, 1)")
        return 2.0 * tau / (1.0 - tau)
    if family is CopulaFamily.GUMBEL:
        if not 0.0 < tau < 1.0:
            raise ValueError("Gumbel attains tau in (0, 1)")
        return 1.0 / (1.0 - tau)
    if not -1.0 < tau < 1.0 or tau == 0.0:
        raise ValueError("Frank attains tau in (-1, 1) \\ {0}")
    sign = 1.0 if tau > 0 else -1.0
    f = lambda th: tau_of_theta(CopulaFamily.FRANK, sign * th) - sign * abs(tau)
    theta = optimize.brentq(f, FRANK_INDEP_TOL, 745.0, xtol=1e-12)
    return sign * theta
