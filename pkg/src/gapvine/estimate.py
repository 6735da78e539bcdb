"""Censored-likelihood estimation for gap-time copula models.

Four strategies: one-stage parametric (global or sequential left-right)
with Weibull margins, and two-stage semiparametric (global or sequential
top-down tree-by-tree) with nonparametric Nelson-Aalen margins.  Plus
AIC model selection and bootstrap standard errors.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize, special

from . import archimedean as arch
from . import bicop, dvine, margins as margins_mod
from .bicop import BivariateCopula, CopulaFamily
from .data import GapDataset, make_dataset
from .dvine import DVineModel
from .margins import (
    JumpMethod,
    WeibullMargin,
    pseudo_copula_data,
    total_time_jumps,
    weibull_dens,
    weibull_quantile,
    weibull_surv,
)

LOG_FLOOR = dvine.LOG_FLOOR
HEAVY_TAIL_THRESHOLD = 0.3
INIT_TAU = 0.2


# ---------------------------------------------------------------------------
# model skeletons and fit specification


@dataclass(frozen=True)
class VineSkeleton:
    """D-vine family layout with free parameters, tree-major order."""

    d: int
    families: tuple  # d(d-1)/2 CopulaFamily tags

    def __post_init__(self):
        if len(self.families) != self.d * (self.d - 1) // 2:
            raise ValueError("need d(d-1)/2 edge families")

    def with_thetas(self, thetas) -> DVineModel:
        return dvine.dvine_from_families(self.d, self.families, thetas=thetas)

    @property
    def free_families(self):
        return [f for f in self.families if CopulaFamily(f) is not CopulaFamily.INDEPENDENCE]


@dataclass(frozen=True)
class ArchimedeanSkeleton:
    family: CopulaFamily
    d: int

    def with_theta(self, theta: float) -> arch.ArchimedeanModel:
        return arch.ArchimedeanModel(self.family, theta, self.d)


def independence_skeleton(d: int) -> VineSkeleton:
    return VineSkeleton(d, tuple(CopulaFamily.INDEPENDENCE for _ in range(d * (d - 1) // 2)))


@dataclass(frozen=True)
class FitSpec:
    model: object  # VineSkeleton | ArchimedeanSkeleton
    margins: str = "weibull"  # "weibull" | "nonparametric"
    strategy: str = "global"  # "global" | "sequential"

    def __post_init__(self):
        if self.margins not in ("weibull", "nonparametric"):
            raise ValueError("margins must be 'weibull' or 'nonparametric'")
        if self.strategy not in ("global", "sequential"):
            raise ValueError("strategy must be 'global' or 'sequential'")
        if isinstance(self.model, ArchimedeanSkeleton) and self.strategy == "sequential":
            raise ValueError("sequential strategies are vine-specific; use global")

    @property
    def stages(self) -> int:
        return 2 if self.margins == "nonparametric" else 1


@dataclass
class FitResult:
    spec: FitSpec
    copula_thetas: list  # tree-major; None per independence edge; [theta] for Archimedean
    copula_taus: list
    margin_params: list | None  # WeibullMargin per gap (one-stage) or None
    loglik: float
    aic: float
    n_params: int
    converged: bool
    iterations: int
    copula_estimable: bool = True
    heavy_tail: bool = False
    tail_survival: float | None = None
    message: str = ""
    bootstrap_se: dict | None = None

    def model(self):
        """The fitted copula model object, or None if not estimable."""
        if not self.copula_estimable:
            return None
        if isinstance(self.spec.model, ArchimedeanSkeleton):
            return self.spec.model.with_theta(self.copula_thetas[0])
        return self.spec.model.with_thetas(self.copula_thetas)

    def param_names(self) -> list:
        names = []
        if self.copula_estimable:
            if isinstance(self.spec.model, ArchimedeanSkeleton):
                names.append("theta")
            else:
                sk = self.spec.model
                i = 0
                for l in range(1, sk.d):
                    for k in range(1, sk.d - l + 1):
                        if CopulaFamily(sk.families[i]) is not CopulaFamily.INDEPENDENCE:
                            names.append(f"theta[{l},{k}]")
                        i += 1
        if self.margin_params is not None:
            for j in range(1, len(self.margin_params) + 1):
                names.extend([f"lambda[{j}]", f"rho[{j}]"])
        return names

    def param_values(self) -> np.ndarray:
        vals = []
        if self.copula_estimable:
            vals.extend([t for t in self.copula_thetas if t is not None])
        if self.margin_params is not None:
            for m in self.margin_params:
                vals.extend([m.lam, m.rho])
        return np.array(vals)


# ---------------------------------------------------------------------------
# parameter transforms (unconstrained <-> family ranges)


def _theta_of_x(family: CopulaFamily, x: float) -> float:
    if family is CopulaFamily.CLAYTON:
        return math.exp(x)
    if family is CopulaFamily.GUMBEL:
        return 1.0 + math.exp(x)
    return x  # Frank: identity, |theta| < 1e-5 handled as independence downstream


def _x_of_theta(family: CopulaFamily, theta: float) -> float:
    if family is CopulaFamily.CLAYTON:
        return math.log(theta)
    if family is CopulaFamily.GUMBEL:
        return math.log(max(theta - 1.0, 1e-8))
    return theta


def _x_init(family: CopulaFamily) -> float:
    return _x_of_theta(family, bicop.theta_of_tau(family, INIT_TAU))


def _safe_tau(family: CopulaFamily, theta) -> float:
    if theta is None:
        return 0.0
    family = CopulaFamily(family)
    if family is CopulaFamily.FRANK and abs(theta) < bicop.FRANK_INDEP_TOL:
        return 0.0
    return bicop.tau_of_theta(family, theta)


def weibull_moment_init(gaps: np.ndarray) -> WeibullMargin:
    """Method-of-moments Weibull start from (assumed uncensored) gap times."""
    g = np.asarray(gaps, dtype=float)
    g = g[g > 0]
    if len(g) < 2 or np.std(g) == 0:
        mean = float(np.mean(g)) if len(g) else 1.0
        return WeibullMargin(1.0 / max(mean, 1e-8), 1.0)
    mean, var = float(np.mean(g)), float(np.var(g))
    cv2 = var / mean ** 2

    def f(rho):
        return special.gamma(1.0 + 2.0 / rho) / special.gamma(1.0 + 1.0 / rho) ** 2 - 1.0 - cv2

    try:
        rho = optimize.brentq(f, 0.08, 50.0)
    except ValueError:
        rho = 1.0
    scale_b = mean / special.gamma(1.0 + 1.0 / rho)
    lam = scale_b ** (-rho)
    return WeibullMargin(lam, rho)


# ---------------------------------------------------------------------------
# log-likelihoods


def _margin_logs(mat: np.ndarray, margin_list) -> tuple:
    """(U survival values, log densities) column-wise for a gap matrix."""
    m = mat.shape[1]
    U = np.empty_like(mat)
    logf = np.empty_like(mat)
    for j in range(m):
        mg = margin_list[j]
        U[:, j] = weibull_surv(mg, mat[:, j])
        logf[:, j] = np.log(np.maximum(weibull_dens(mg, mat[:, j]), 1e-300))
    return np.clip(U, bicop.EPS, 1.0 - bicop.EPS), logf


def _copula_terms(model, U: np.ndarray, cens: np.ndarray) -> np.ndarray:
    """Per-row copula log factor: log density (event) or log of the
    (m-1)-order partial derivative (censored)."""
    m = U.shape[1]
    with np.errstate(all="ignore"):
        if isinstance(model, DVineModel):
            logpdf, prefix, cond = dvine.vine_terms(model, U)
            out = np.where(
                cens, prefix + np.log(np.maximum(cond, 1e-300)), logpdf
            )
        else:
            sub = arch.ArchimedeanModel(model.family, model.theta, m)
            ev = np.log(np.maximum(arch.apdf(sub, U), 1e-300))
            cd = np.log(np.maximum(arch.acens_deriv(sub, U), 1e-300))
            out = np.where(cens, cd, ev)
    return np.where(np.isfinite(out), out, LOG_FLOOR)


def loglik_one_stage(dataset: GapDataset, model, margin_list) -> float:
    """Joint parametric log-likelihood: copula factor plus Weibull margins.

    model: DVineModel | ArchimedeanModel | None (None = independence).
    """
    total = 0.0
    with np.errstate(all="ignore"):
        for m, (mat, cens, _) in dataset.group_by_size().items():
            U, logf = _margin_logs(mat, margin_list)
            if m == 1:
                s1 = np.log(np.maximum(U[:, 0], 1e-300))
                contrib = np.where(cens, s1, logf[:, 0])
            else:
                jac = np.where(cens, logf[:, :-1].sum(axis=1), logf.sum(axis=1))
                if model is None:
                    cop = np.where(cens, np.log(np.maximum(U[:, -1], 1e-300)), 0.0)
                else:
                    cop = _copula_terms(model, U, cens)
                contrib = cop + jac
            contrib = np.where(np.isfinite(contrib), contrib, LOG_FLOOR)
            total += float(contrib.sum())
    return total


def loglik_two_stage(uhat_lists, sizes, censored_flags, model) -> float:
    """Pseudo-likelihood of the copula on pseudo copula data (no margin terms)."""
    total = 0.0
    sizes = np.asarray(sizes)
    censored_flags = np.asarray(censored_flags, dtype=bool)
    with np.errstate(all="ignore"):
        for m in np.unique(sizes):
            if m < 2:
                continue
            idx = np.nonzero(sizes == m)[0]
            U = np.vstack([uhat_lists[i] for i in idx])
            cens = censored_flags[idx]
            if model is None:
                cop = np.where(cens, np.log(np.maximum(U[:, -1], 1e-300)), 0.0)
            else:
                cop = _copula_terms(model, U, cens)
            total += float(np.where(np.isfinite(cop), cop, LOG_FLOOR).sum())
    return total


# ---------------------------------------------------------------------------
# optimizer


def _maximize(neg_fun, x0):
    """Nelder-Mead with one perturbed restart; returns (x, fmin, converged, nfev)."""
    opts = dict(xatol=1e-8, fatol=1e-8, maxfev=5000)
    res = optimize.minimize(neg_fun, x0, method="Nelder-Mead", options=opts)
    nfev = res.nfev
    if not res.success:
        x1 = res.x + 0.05 * (1.0 + np.abs(res.x)) * np.where(np.arange(len(res.x)) % 2, -1.0, 1.0)
        res2 = optimize.minimize(neg_fun, x1, method="Nelder-Mead", options=opts)
        nfev += res2.nfev
        if res2.fun <= res.fun:
            res = res2
    return res.x, res.fun, bool(res.success), nfev


# ---------------------------------------------------------------------------
# one-stage fitting


def _build_model(skeleton, free_thetas):
    """Model object from skeleton + free parameter values (independence skipped)."""
    if isinstance(skeleton, ArchimedeanSkeleton):
        return skeleton.with_theta(free_thetas[0])
    thetas, i = [], 0
    for f in skeleton.families:
        if CopulaFamily(f) is CopulaFamily.INDEPENDENCE:
            thetas.append(None)
        else:
            thetas.append(free_thetas[i])
            i += 1
    return skeleton.with_thetas(thetas)


def _free_families(skeleton) -> list:
    if isinstance(skeleton, ArchimedeanSkeleton):
        return [skeleton.family]
    return [CopulaFamily(f) for f in skeleton.free_families]


def _thetas_tree_major(skeleton, free_thetas) -> list:
    if isinstance(skeleton, ArchimedeanSkeleton):
        return [free_thetas[0]]
    out, i = [], 0
    for f in skeleton.families:
        if CopulaFamily(f) is CopulaFamily.INDEPENDENCE:
            out.append(None)
        else:
            out.append(free_thetas[i])
            i += 1
    return out


def _taus_of(skeleton, thetas) -> list:
    if isinstance(skeleton, ArchimedeanSkeleton):
        return [_safe_tau(skeleton.family, thetas[0])]
    return [
        _safe_tau(f, t)
        for f, t in zip([CopulaFamily(x) for x in skeleton.families], thetas)
    ]


def _margin_inits(dataset: GapDataset) -> list:
    inits = []
    for j in range(1, dataset.d + 1):
        vals = [
            c.gaps[j - 1]
            for c in dataset.clusters
            if c.size >= j and not (c.censored and c.size == j)
        ]
        if not vals:  # all censored at this index; fall back to the raw values
            vals = [c.gaps[j - 1] for c in dataset.clusters if c.size >= j]
        inits.append(weibull_moment_init(np.array(vals)))
    return inits


def _n_free_copula(skeleton) -> int:
    return len(_free_families(skeleton))


def aic_of(loglik: float, n_params: int) -> float:
    return -2.0 * loglik + 2.0 * n_params


def fit_one_stage_global(dataset: GapDataset, spec: FitSpec) -> FitResult:
    if spec.margins != "weibull":
        raise ValueError("one-stage fitting requires parametric Weibull margins")
    skeleton = spec.model
    d = dataset.d
    fams = _free_families(skeleton)
    margin_inits = _margin_inits(dataset)
    copula_estimable = d >= 2 and len(fams) > 0

    def unpack(x):
        nc = len(fams) if copula_estimable else 0
        if copula_estimable:
            model = _build_model(skeleton, [_theta_of_x(f, xi) for f, xi in zip(fams, x[:nc])])
        else:
            model = None
        margs = [
            WeibullMargin(math.exp(x[nc + 2 * j]), math.exp(x[nc + 2 * j + 1]))
            for j in range(d)
        ]
        return model, margs

    x0 = [_x_init(f) for f in fams] if copula_estimable else []
    for mg in margin_inits:
        x0.extend([math.log(mg.lam), math.log(mg.rho)])
    x0 = np.array(x0)

    def neg(x):
        model, margs = unpack(x)
        return -loglik_one_stage(dataset, model, margs)

    x, fmin, converged, nfev = _maximize(neg, x0)
    model, margs = unpack(x)
    nc = len(fams) if copula_estimable else 0
    free_thetas = [_theta_of_x(f, xi) for f, xi in zip(fams, x[:nc])]
    thetas = _thetas_tree_major(skeleton, free_thetas) if copula_estimable else [None] * (
        1 if isinstance(skeleton, ArchimedeanSkeleton) else len(skeleton.families)
    )
    n_params = nc + 2 * d
    loglik = -fmin
    return FitResult(
        spec=spec,
        copula_thetas=thetas,
        copula_taus=_taus_of(skeleton, thetas) if copula_estimable else [0.0] * len(thetas),
        margin_params=margs,
        loglik=loglik,
        aic=aic_of(loglik, n_params),
        n_params=n_params,
        converged=converged,
        iterations=nfev,
        copula_estimable=copula_estimable,
        message="" if copula_estimable else "no clusters of size >= 2; copula not estimable",
    )


def fit_one_stage_sequential(dataset: GapDataset, spec: FitSpec) -> FitResult:
    """Left-right estimation: step j fits margin j and the new edges
    (l, k) with k + l = j on clusters of size >= j, earlier estimates frozen."""
    if not isinstance(spec.model, VineSkeleton):
        raise ValueError("sequential one-stage estimation is vine-specific")
    skeleton = spec.model
    d = dataset.d
    margin_inits = _margin_inits(dataset)
    fams_all = [CopulaFamily(f) for f in skeleton.families]

    # step 1: univariate censored Weibull for gap 1 over all clusters
    y1 = np.array([c.gaps[0] for c in dataset.clusters])
    delta1 = np.array([0.0 if (c.size == 1 and c.censored) else 1.0 for c in dataset.clusters])

    def neg1(x):
        mg = WeibullMargin(math.exp(x[0]), math.exp(x[1]))
        with np.errstate(all="ignore"):
            lf = np.log(np.maximum(weibull_dens(mg, y1), 1e-300))
            ls = np.log(np.maximum(weibull_surv(mg, y1), 1e-300))
            ll = np.sum(delta1 * lf + (1.0 - delta1) * ls)
        return -ll if np.isfinite(ll) else -LOG_FLOOR

    x, _, converged, nfev = _maximize(
        neg1, np.array([math.log(margin_inits[0].lam), math.log(margin_inits[0].rho)])
    )
    margs = [WeibullMargin(math.exp(x[0]), math.exp(x[1]))]
    total_nfev = nfev
    all_converged = converged

    # edge index helper: tree-major position of edge (l, k)
    def edge_pos(l, k):
        return sum(d - t for t in range(1, l)) + (k - 1)

    fixed_thetas = [None] * len(fams_all)

    for j in range(2, d + 1):
        sub_clusters = [c for c in dataset.clusters if c.size >= j]
        gap_lists = [c.gaps[:j] for c in sub_clusters]
        cens = [c.censored and c.size == j for c in sub_clusters]
        sub = make_dataset(gap_lists, cens, [c.cluster_id for c in sub_clusters])
        new_edges = []  # (position, family) of edges with k + l = j
        for l in range(1, j):
            k = j - l
            pos = edge_pos(l, k)
            if fams_all[pos] is not CopulaFamily.INDEPENDENCE:
                new_edges.append((pos, fams_all[pos]))

        def unpack(x):
            thetas = list(fixed_thetas)
            for (pos, f), xi in zip(new_edges, x[: len(new_edges)]):
                thetas[pos] = _theta_of_x(f, xi)
            # model on variables 1..j only, from the edges with k + l <= j
            sub_fams, sub_ths = [], []
            for l in range(1, j):
                for k in range(1, j - l + 1):
                    pos = edge_pos(l, k)
                    sub_fams.append(fams_all[pos])
                    sub_ths.append(thetas[pos])
            model = dvine.dvine_from_families(j, sub_fams, thetas=sub_ths)
            mg = WeibullMargin(math.exp(x[-2]), math.exp(x[-1]))
            return model, thetas, margs + [mg]

        x0 = np.array(
            [_x_init(f) for _, f in new_edges]
            + [math.log(margin_inits[j - 1].lam), math.log(margin_inits[j - 1].rho)]
        )

        def neg(x):
            model, _, margs_j = unpack(x)
            return -loglik_one_stage(sub, model, margs_j)

        x, _, converged, nfev = _maximize(neg, x0)
        _, thetas, margs_j = unpack(x)
        fixed_thetas = thetas
        margs = margs_j
        total_nfev += nfev
        all_converged = all_converged and converged

    model = skeleton.with_thetas(fixed_thetas) if d >= 2 else None
    n_params = len([t for t in fixed_thetas if t is not None]) + 2 * d
    loglik = loglik_one_stage(dataset, model, margs)
    return FitResult(
        spec=spec,
        copula_thetas=fixed_thetas,
        copula_taus=_taus_of(skeleton, fixed_thetas),
        margin_params=margs,
        loglik=loglik,
        aic=aic_of(loglik, n_params),
        n_params=n_params,
        converged=all_converged,
        iterations=total_nfev,
        copula_estimable=d >= 2,
    )


# ---------------------------------------------------------------------------
# two-stage fitting


def fit_two_stage(dataset: GapDataset, spec: FitSpec) -> FitResult:
    if spec.margins != "nonparametric":
        raise ValueError("two-stage fitting requires nonparametric margins")
    jumps = total_time_jumps(dataset.total_times, dataset.last_status, JumpMethod.NELSON_AALEN)
    uhat = pseudo_copula_data(dataset.gap_lists(), jumps)
    tail = jumps.tail_survival
    heavy = tail > HEAVY_TAIL_THRESHOLD
    sizes = dataset.sizes
    cens = np.array([c.censored for c in dataset.clusters], dtype=bool)
    skeleton = spec.model
    fams = _free_families(skeleton)
    copula_estimable = dataset.d >= 2 and len(fams) > 0

    if not copula_estimable:
        n_params = 0
        ll = loglik_two_stage(uhat, sizes, cens, None)
        thetas = [None] * (1 if isinstance(skeleton, ArchimedeanSkeleton) else len(skeleton.families))
        return FitResult(
            spec=spec, copula_thetas=thetas, copula_taus=[0.0] * len(thetas),
            margin_params=None, loglik=ll, aic=aic_of(ll, n_params), n_params=n_params,
            converged=True, iterations=0, copula_estimable=False,
            heavy_tail=heavy, tail_survival=tail,
            message="no free copula parameters",
        )

    if spec.strategy == "global":
        def neg(x):
            model = _build_model(skeleton, [_theta_of_x(f, xi) for f, xi in zip(fams, x)])
            return -loglik_two_stage(uhat, sizes, cens, model)

        x0 = np.array([_x_init(f) for f in fams])
        x, fmin, converged, nfev = _maximize(neg, x0)
        free_thetas = [_theta_of_x(f, xi) for f, xi in zip(fams, x)]
        loglik = -fmin
    else:
        free_thetas, converged, nfev = _two_stage_sequential(skeleton, uhat, sizes, cens)
        model = _build_model(skeleton, free_thetas)
        loglik = loglik_two_stage(uhat, sizes, cens, model)

    thetas = _thetas_tree_major(skeleton, free_thetas)
    n_params = len(fams)
    return FitResult(
        spec=spec,
        copula_thetas=thetas,
        copula_taus=_taus_of(skeleton, thetas),
        margin_params=None,
        loglik=loglik,
        aic=aic_of(loglik, n_params),
        n_params=n_params,
        converged=converged,
        iterations=nfev,
        heavy_tail=heavy,
        tail_survival=tail,
    )


def _two_stage_sequential(skeleton: VineSkeleton, uhat, sizes, cens):
    """Algorithm: top-down tree-by-tree censored bivariate fits.

    Clusters are ordered by decreasing size, so the clusters feeding edge
    (l, k) -- those with d_i >= k + l -- are a prefix; censoring status
    propagates as delta_i = I(d_i > k+l) + I(d_i = k+l) * delta_{i,d_i}.
    """
    if not isinstance(skeleton, VineSkeleton):
        raise ValueError("sequential two-stage estimation is vine-specific")
    d = skeleton.d
    sizes = np.asarray(sizes)
    cens = np.asarray(cens, dtype=bool)
    n_ge = {s: int(np.sum(sizes >= s)) for s in range(1, d + 1)}
    fams_all = [CopulaFamily(f) for f in skeleton.families]

    # tree-1 arguments: x side = uhat_{.,k}, y side = uhat_{.,k+1}
    xs = {k: np.array([uhat[i][k - 1] for i in range(n_ge[k + 1])]) for k in range(1, d)}
    ys = {k: np.array([uhat[i][k] for i in range(n_ge[k + 1])]) for k in range(1, d)}

    free_thetas = []
    fixed = [None] * len(fams_all)
    total_nfev = 0
    all_converged = True
    pos = 0
    for l in range(1, d):
        fitted_edges = {}
        for k in range(1, d - l + 1):
            m_edge = n_ge[k + l]
            x_arg, y_arg = xs[k][:m_edge], ys[k][:m_edge]
            delta = (sizes[:m_edge] > k + l) | (~cens[:m_edge])
            fam = fams_all[pos]
            if fam is CopulaFamily.INDEPENDENCE:
                cop = bicop.INDEPENDENCE
            else:
                def neg(xv):
                    c = BivariateCopula(fam, _theta_of_x(fam, xv[0]))
                    return -_bivariate_censored_loglik(c, x_arg, y_arg, delta)

                xv, _, converged, nfev = _maximize(neg, np.array([_x_init(fam)]))
                theta = _theta_of_x(fam, xv[0])
                free_thetas.append(theta)
                fixed[pos] = theta
                total_nfev += nfev
                all_converged = all_converged and converged
                cop = BivariateCopula(fam, theta)
            fitted_edges[k] = cop
            pos += 1
        # h-transform to the next tree's arguments
        if l < d - 1:
            new_xs, new_ys = {}, {}
            for k in range(1, d - l):
                m_next = n_ge[k + l + 1]
                ck = fitted_edges[k]
                ck1 = fitted_edges[k + 1]
                with np.errstate(all="ignore"):
                    new_xs[k] = bicop.hfun(ck, xs[k][:m_next], ys[k][:m_next])
                    new_ys[k] = bicop.hfun(ck1, ys[k + 1][:m_next], xs[k + 1][:m_next])
            xs, ys = new_xs, new_ys
    return free_thetas, all_converged, total_nfev


def _bivariate_censored_loglik(c: BivariateCopula, x, y, delta) -> float:
    """Sum of delta*log c(x,y) + (1-delta)*log C_{2|1}(y|x)."""
    with np.errstate(all="ignore"):
        lp = np.log(np.maximum(bicop.pdf(c, x, y), 1e-300))
        lh = np.log(np.maximum(bicop.hfun(c, y, x), 1e-300))
        ll = np.where(delta, lp, lh)
        ll = np.where(np.isfinite(ll), ll, LOG_FLOOR)
    return float(ll.sum())


# ---------------------------------------------------------------------------
# dispatch, selection, bootstrap


def fit(dataset: GapDataset, spec: FitSpec) -> FitResult:
    if spec.margins == "nonparametric":
        return fit_two_stage(dataset, spec)
    if spec.strategy == "sequential":
        return fit_one_stage_sequential(dataset, spec)
    return fit_one_stage_global(dataset, spec)


def select_by_aic(fits) -> int:
    """Index of the best fit: minimal AIC, ties broken by fewer parameters."""
    fits = list(fits)
    if not fits:
        raise ValueError("no candidate fits")
    strategies = {(f.spec.margins, f.spec.strategy) for f in fits}
    if len(strategies) > 1:
        raise ValueError("candidates mix estimation strategies; AIC not comparable")
    best = 0
    for i, f in enumerate(fits[1:], start=1):
        if (f.aic, f.n_params) < (fits[best].aic, fits[best].n_params):
            best = i
    return best


@dataclass
class BootstrapResult:
    se: dict  # parameter name -> standard error
    tau_se: dict  # edge tau name -> standard error
    n_used: int
    n_dropped: int
    unreliable: bool
    replicate_censoring_rate: float
    replicate_size_hist: dict  # size -> mean count per replicate
    estimates: np.ndarray = field(repr=False, default=None)
    tau_estimates: np.ndarray = field(repr=False, default=None)


def _censoring_sampler(dataset: GapDataset):
    """State for inverse-CDF sampling from the KM estimate of the censoring
    distribution, built from (total time, 1 - delta).  Leftover tail mass is
    placed at the largest observed total time."""
    cens_as_event = np.array([1 if c.censored else 0 for c in dataset.clusters])
    table = total_time_jumps(dataset.total_times, cens_as_event, JumpMethod.KAPLAN_MEIER)
    t_max = float(dataset.total_times.max())
    if table.all_censored:
        return (np.array([]), np.array([]), t_max)
    mask = table.weights > 0
    return (table.times[mask], table.survival[mask], t_max)


def _sample_censoring(state, rng: np.random.Generator, size: int) -> np.ndarray:
    jt, sv, t_max = state  # jump times, descending survival after each jump
    if len(jt) == 0:
        return np.full(size, t_max)
    u = rng.uniform(size=size)
    # first jump time where survival <= u; -sv is ascending for searchsorted
    idx = np.searchsorted(-sv, -u, side="left")
    return np.where(idx < len(jt), jt[np.minimum(idx, len(jt) - 1)], t_max)


def _truncate_to_clusters(gaps: np.ndarray, c_times: np.ndarray):
    """Apply the censoring budget to cumulative event times; returns ragged
    gap lists and censored flags per the data-generating construction."""
    n, d = gaps.shape
    t = np.cumsum(gaps, axis=1)
    gap_lists, flags = [], []
    for i in range(n):
        ci = c_times[i]
        if t[i, -1] <= ci:
            gap_lists.append(gaps[i].copy())
            flags.append(False)
        else:
            j = int(np.searchsorted(t[i], ci, side="right"))  # first index with t > c
            prev = t[i, j - 1] if j > 0 else 0.0
            g = np.concatenate([gaps[i, :j], [ci - prev]])
            if g[-1] <= 0:  # degenerate tie; keep a tiny positive censored gap
                g[-1] = 1e-12
            gap_lists.append(g)
            flags.append(True)
    return gap_lists, flags


def _bootstrap_one(args):
    """One bootstrap replicate; module-level so worker pools can pickle it."""
    seed, spec, model, margs, d, n, sampler_state = args
    sub_rng = np.random.default_rng(seed)
    if isinstance(model, DVineModel):
        U = dvine.vine_sample(model, n, sub_rng)
    else:
        U = arch.asample(model, n, sub_rng)
    gaps = np.column_stack([weibull_quantile(margs[j], U[:, j]) for j in range(d)])
    c_times = _sample_censoring(sampler_state, sub_rng, n)
    gap_lists, flags = _truncate_to_clusters(gaps, c_times)
    boot = make_dataset(gap_lists, flags)
    try:
        refit = fit(boot, spec)
    except Exception:
        return None
    if not refit.converged or not refit.copula_estimable:
        return None
    return refit.param_values(), refit.copula_taus, boot.censoring_rate, boot.size_counts


def bootstrap_se(
    dataset: GapDataset,
    spec: FitSpec,
    fitted: FitResult,
    B: int,
    rng: np.random.Generator,
    jobs: int = 1,
) -> BootstrapResult:
    """Parametric bootstrap for one-stage fits: resample from the fitted
    copula + Weibull margins with censoring drawn from the KM estimate of
    the censoring distribution, refit each replicate, and report the SD of
    the replicate estimates."""
    if spec.margins != "weibull":
        raise ValueError("bootstrap is implemented for one-stage parametric fits")
    if not fitted.copula_estimable or fitted.margin_params is None:
        raise ValueError("fitted result lacks the parameters needed to resample")
    model = fitted.model()
    margs = fitted.margin_params
    d = dataset.d
    n = dataset.n
    sampler_state = _censoring_sampler(dataset)
    names = fitted.param_names()
    seeds = rng.integers(0, 2 ** 63 - 1, size=B)
    tasks = [(int(s), spec, model, margs, d, n, sampler_state) for s in seeds]
    if jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_bootstrap_one, tasks))
    else:
        results = [_bootstrap_one(t) for t in tasks]
    ests, taus, cens_rates, size_hists = [], [], [], []
    n_dropped = 0
    for r in results:
        if r is None:
            n_dropped += 1
            continue
        vals, tau_vals, crate, hist = r
        ests.append(vals)
        taus.append(tau_vals)
        cens_rates.append(crate)
        size_hists.append(hist)
    if not ests:
        raise RuntimeError("all bootstrap replicates failed")
    ests = np.vstack(ests)
    taus = np.array(taus)
    ses = ests.std(axis=0, ddof=1) if len(ests) > 1 else np.full(ests.shape[1], np.nan)
    tau_ses = taus.std(axis=0, ddof=1) if len(taus) > 1 else np.full(taus.shape[1], np.nan)
    tau_names = [n.replace("theta", "tau") for n in names if n.startswith("theta")]
    if isinstance(fitted.spec.model, ArchimedeanSkeleton):
        tau_names = ["tau"]
    else:
        # tree-major names for every edge, independence edges included
        sk = fitted.spec.model
        tau_names = [
            f"tau[{l},{k}]"
            for l in range(1, sk.d)
            for k in range(1, sk.d - l + 1)
        ]
    hist = {}
    for j in range(1, d + 1):
        hist[j] = float(np.mean([h.get(j, 0) for h in size_hists]))
    return BootstrapResult(
        se=dict(zip(names, ses)),
        tau_se=dict(zip(tau_names, tau_ses)),
        n_used=len(ests),
        n_dropped=n_dropped,
        unreliable=n_dropped > 0.2 * B,
        replicate_censoring_rate=float(np.mean(cens_rates)),
        replicate_size_hist=hist,
        estimates=ests,
        tau_estimates=taus,
    )
