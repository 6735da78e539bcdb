"""Command-line surface: fit, simulate, select, bootstrap, check-tail.

Data travel as long-format CSV (cluster_id,gap_index,gap_time,status);
models are given as compact grammar strings; scenarios as key-value
config files.  Exit codes: 0 success, 1 validation error, 2 estimation
non-convergence.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import re
import sys

import numpy as np

from . import bicop, dvine
from .archimedean import ArchimedeanModel
from .bicop import CopulaFamily
from .data import DataError, GapDataset, read_long_csv, write_long_csv
from .estimate import (
    ArchimedeanSkeleton,
    FitResult,
    FitSpec,
    VineSkeleton,
    bootstrap_se,
    fit,
    independence_skeleton,
    select_by_aic,
)
from .margins import JumpMethod, WeibullMargin, total_time_jumps
from .simulate import Scenario, generate

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_NONCONVERGENCE = 2


def _fmt(x) -> str:
    if x is None:
        return "NA"
    if isinstance(x, (bool, np.bool_)):
        return "yes" if x else "no"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    return format(float(x), ".6g")


# ---------------------------------------------------------------------------
# model grammar

_TREE_RE = re.compile(r"tree(\d+)\s*=\s*\[([^\]]*)\]")
_EDGE_RE = re.compile(
    r"^(independence|clayton|gumbel|frank)(?::(tau|theta)=([-+0-9.eE]+))?$"
)


def parse_model(text: str, d_data: int | None = None):
    """Parse a model grammar string into a fit skeleton.

    Forms: "independence" | "archimedean:<family>" |
    "dvine: tree1=[fam,...], tree2=[...], ..." where each edge entry is a
    family name optionally carrying ":tau=x" or ":theta=x" (used by
    simulation configs; plain families leave the parameter free).
    Returns (skeleton, thetas_or_None).
    """
    s = text.strip().lower()
    if s == "independence":
        if d_data is None:
            raise ValueError("independence model needs the data dimension")
        return independence_skeleton(d_data), None
    if s.startswith("archimedean:"):
        fam = CopulaFamily(s.split(":", 1)[1].strip())
        if d_data is None:
            raise ValueError("archimedean model needs the data dimension")
        return ArchimedeanSkeleton(fam, d_data), None
    trees = _TREE_RE.findall(s)
    if not trees:
        raise ValueError(f"cannot parse model: {text!r}")
    trees.sort(key=lambda t: int(t[0]))
    d = len(trees) + 1
    expected = [str(i) for i in range(1, d)]
    if [t[0] for t in trees] != expected:
        raise ValueError(f"model must name trees 1..{d - 1} exactly once")
    families, params = [], []
    for li, (lbl, body) in enumerate(trees, start=1):
        entries = [e.strip() for e in body.split(",") if e.strip()]
        if len(entries) != d - li:
            raise ValueError(f"tree {li} needs {d - li} edges, got {len(entries)}")
        for e in entries:
            m = _EDGE_RE.match(e)
            if not m:
                raise ValueError(f"cannot parse edge {e!r}")
            fam = CopulaFamily(m.group(1))
            families.append(fam)
            if m.group(2) is None:
                params.append(None)
            elif m.group(2) == "theta":
                params.append(float(m.group(3)))
            else:
                params.append(bicop.theta_of_tau(fam, float(m.group(3))))
    skeleton = VineSkeleton(d, tuple(families))
    if all(
        p is None or f is CopulaFamily.INDEPENDENCE for p, f in zip(params, families)
    ):
        return skeleton, None
    if any(
        p is None and f is not CopulaFamily.INDEPENDENCE
        for p, f in zip(params, families)
    ):
        raise ValueError("either all edges or no edges may carry parameters")
    return skeleton, params


# ---------------------------------------------------------------------------
# scenario config

_WEIBULL_RE = re.compile(r"^weibull\s*\(\s*([-+0-9.eE]+)\s*,\s*([-+0-9.eE]+)\s*\)$")


def _parse_weibull(text: str) -> WeibullMargin:
    m = _WEIBULL_RE.match(text.strip().lower())
    if not m:
        raise ValueError(f"expected weibull(scale, shape), got {text!r}")
    return WeibullMargin(float(m.group(1)), float(m.group(2)))


def read_scenario(path) -> Scenario:
    """Scenario from a plain key-value config file.

    Keys: n, seed, copula (dvine | archimedean), treeK = edge list (dvine) or
    family/theta-or-tau/d (archimedean), marginK = weibull(scale, shape),
    censoring = weibull(scale, shape).  '#' starts a comment.
    """
    kv = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if "=" not in line:
                raise ValueError(f"{path}:{lineno}: expected key = value")
            key, val = line.split("=", 1)
            kv[key.strip().lower()] = val.strip()
    if "n" not in kv:
        raise ValueError(f"{path}: missing n")
    n = int(kv.pop("n"))
    seed = int(kv.pop("seed")) if "seed" in kv else None
    kind = kv.pop("copula", "dvine").lower()
    if kind == "archimedean":
        fam = CopulaFamily(kv.pop("family").lower())
        d = int(kv.pop("d"))
        if "theta" in kv:
            theta = float(kv.pop("theta"))
        elif "tau" in kv:
            theta = bicop.theta_of_tau(fam, float(kv.pop("tau")))
        else:
            raise ValueError(f"{path}: archimedean copula needs theta or tau")
        copula = ArchimedeanModel(fam, theta, d)
    elif kind == "dvine":
        tree_keys = sorted(
            (k for k in kv if re.fullmatch(r"tree\d+", k)), key=lambda k: int(k[4:])
        )
        if not tree_keys:
            raise ValueError(f"{path}: dvine scenario needs treeK lines")
        def bare(v):
            v = v.strip()
            return v[1:-1] if v.startswith("[") and v.endswith("]") else v

        text = "dvine:" + ",".join(f"{k}=[{bare(kv.pop(k))}]" for k in tree_keys)
        skeleton, thetas = parse_model(text)
        if thetas is None:
            raise ValueError(f"{path}: scenario edges need tau= or theta= values")
        copula = skeleton.with_thetas(thetas)
    else:
        raise ValueError(f"{path}: copula must be dvine or archimedean")
    d = copula.d
    margins = []
    for j in range(1, d + 1):
        key = f"margin{j}"
        if key not in kv:
            raise ValueError(f"{path}: missing {key}")
        margins.append(_parse_weibull(kv.pop(key)))
    if "censoring" not in kv:
        raise ValueError(f"{path}: missing censoring")
    censoring = _parse_weibull(kv.pop("censoring"))
    if kv:
        raise ValueError(f"{path}: unknown keys {sorted(kv)}")
    return Scenario(copula=copula, gap_margins=tuple(margins), censoring=censoring, n=n, seed=seed)


# ---------------------------------------------------------------------------
# reports


def _skeleton_edge_rows(skeleton):
    if isinstance(skeleton, ArchimedeanSkeleton):
        return [("copula", skeleton.family.value)]
    rows = []
    i = 0
    for l in range(1, skeleton.d):
        for k in range(1, skeleton.d - l + 1):
            rows.append((f"edge[{l},{k}]", CopulaFamily(skeleton.families[i]).value))
            i += 1
    return rows


def format_fit_report(res: FitResult, dataset: GapDataset, model_text: str) -> str:
    lines = []
    out = lines.append
    out(f"model = {model_text}")
    out(f"margins = {res.spec.margins}")
    out(f"strategy = {res.spec.strategy}")
    out(f"n = {dataset.n}")
    out(f"d = {dataset.d}")
    for j, cnt in dataset.size_counts.items():
        out(f"n_clusters[size={j}] = {cnt}")
    out(f"censoring_rate = {_fmt(dataset.censoring_rate)}")
    rows = _skeleton_edge_rows(res.spec.model)
    for (label, fam), theta, tau in zip(rows, res.copula_thetas, res.copula_taus):
        out(f"{label}.family = {fam}")
        out(f"{label}.theta = {_fmt(theta)}")
        out(f"{label}.tau = {_fmt(tau)}")
    if res.margin_params is not None:
        for j, mg in enumerate(res.margin_params, start=1):
            out(f"margin[{j}].lambda = {_fmt(mg.lam)}")
            out(f"margin[{j}].rho = {_fmt(mg.rho)}")
    out(f"loglik = {_fmt(res.loglik)}")
    out(f"aic = {_fmt(res.aic)}")
    out(f"n_params = {res.n_params}")
    out(f"converged = {_fmt(res.converged)}")
    out(f"iterations = {res.iterations}")
    out(f"copula_estimable = {_fmt(res.copula_estimable)}")
    if res.tail_survival is not None:
        out(f"tail_survival = {_fmt(res.tail_survival)}")
        out(f"heavy_tail = {_fmt(res.heavy_tail)}")
    if res.message:
        out(f"message = {res.message}")
    return "\n".join(lines)


def _check_tail_report(dataset: GapDataset) -> str:
    table = total_time_jumps(dataset.total_times, dataset.last_status, JumpMethod.NELSON_AALEN)
    tail = table.tail_survival
    verdict = "heavily censored" if tail > 0.3 else "not heavily censored"
    return (
        f"nelson_aalen_tail_survival = {_fmt(tail)}\n"
        f"verdict = {verdict}\n"
        f"guideline = {'two-stage estimation not recommended; use one-stage parametric' if tail > 0.3 else 'two-stage semiparametric estimation admissible'}"
    )


# ---------------------------------------------------------------------------
# commands


def _load_data(path) -> GapDataset:
    return read_long_csv(path)


def cmd_fit(args) -> int:
    ds = _load_data(args.data)
    skeleton, _ = parse_model(args.model, d_data=ds.d)
    if isinstance(skeleton, VineSkeleton) and skeleton.d != ds.d:
        raise DataError(f"model dimension {skeleton.d} does not match data dimension {ds.d}")
    spec = FitSpec(skeleton, margins=args.margins, strategy=args.strategy)
    res = fit(ds, spec)
    report = format_fit_report(res, ds, args.model)
    if args.check_tail:
        report += "\n" + _check_tail_report(ds)
    _emit(report, args.out)
    return EXIT_OK if res.converged else EXIT_NONCONVERGENCE


def cmd_simulate(args) -> int:
    scenario = read_scenario(args.config)
    seed = args.seed if args.seed is not None else scenario.seed
    if seed is None:
        raise ValueError("give a seed via --seed or in the config")
    rng = np.random.default_rng(np.random.SeedSequence([int(seed), 0]))
    ds = generate(scenario, rng)
    write_long_csv(ds, args.out)
    lines = [
        f"out = {args.out}",
        f"n = {ds.n}",
        f"d = {ds.d}",
        f"censoring_rate = {_fmt(ds.censoring_rate)}",
        f"cluster_censoring_rate = {_fmt(ds.cluster_censoring_rate)}",
    ]
    for j, cnt in ds.size_counts.items():
        lines.append(f"n_clusters[size={j}] = {cnt}")
    print("\n".join(lines))
    return EXIT_OK


def _candidate_texts(args, d: int) -> list:
    texts = []
    if args.candidates:
        texts.extend(c.strip() for c in args.candidates.split(";") if c.strip())
    if args.tree1_permutations:
        fams = [f.strip() for f in args.tree1_permutations.split(",") if f.strip()]
        for combo in itertools.product(fams, repeat=d - 1):
            tree1 = ",".join(combo)
            parts = [f"tree1=[{tree1}]"]
            for l in range(2, d):
                parts.append(f"tree{l}=[{','.join(['frank'] * (d - l))}]")
            texts.append("dvine:" + ",".join(parts))
    return texts


def _fit_candidate(task):
    ds, spec = task
    return fit(ds, spec)


def cmd_select(args) -> int:
    ds = _load_data(args.data)
    texts = _candidate_texts(args, ds.d)
    if len(texts) < 1:
        raise ValueError("no candidate models given")
    specs, failures = [], []
    for t in texts:
        try:
            sk, _ = parse_model(t, d_data=ds.d)
            if isinstance(sk, VineSkeleton) and sk.d != ds.d:
                raise ValueError(f"dimension {sk.d} != data dimension {ds.d}")
            specs.append((t, FitSpec(sk, margins=args.margins, strategy=args.strategy)))
        except ValueError as exc:
            failures.append((t, str(exc)))
    tasks = [(ds, spec) for _, spec in specs]
    if args.jobs > 1:
        from concurrent.futures import ProcessPoolExecutor

        with ProcessPoolExecutor(max_workers=args.jobs) as pool:
            raw = list(pool.map(_fit_candidate, tasks))
        results = list(zip([t for t, _ in specs], raw))
    else:
        results = []
        for (t, spec), task in zip(specs, tasks):
            try:
                results.append((t, _fit_candidate(task)))
            except Exception as exc:
                failures.append((t, str(exc)))
    ranked = [(t, r) for t, r in results if r is not None]
    if not ranked:
        raise ValueError("no candidate could be fit")
    fits = [r for _, r in ranked]
    best = select_by_aic(fits)
    best_aic = fits[best].aic
    order = sorted(range(len(fits)), key=lambda i: (fits[i].aic, fits[i].n_params, i))
    lines = ["rank,model,aic,delta_aic,loglik,n_params,converged"]
    for rank, i in enumerate(order, start=1):
        t, r = ranked[i]
        lines.append(
            f"{rank},{t},{_fmt(r.aic)},{_fmt(r.aic - best_aic)},{_fmt(r.loglik)},{r.n_params},{_fmt(r.converged)}"
        )
    for t, reason in failures:
        lines.append(f"failed,{t},,,{reason},,")
    _emit("\n".join(lines), args.out)
    return EXIT_OK


def cmd_bootstrap(args) -> int:
    ds = _load_data(args.data)
    skeleton, _ = parse_model(args.model, d_data=ds.d)
    spec = FitSpec(skeleton, margins="weibull", strategy=args.strategy)
    res = fit(ds, spec)
    rng = np.random.default_rng(np.random.SeedSequence([int(args.seed), 1]))
    boot = bootstrap_se(ds, spec, res, args.B, rng, jobs=args.jobs)
    lines = [f"B = {args.B}", f"seed = {args.seed}"]
    values = dict(zip(res.param_names(), res.param_values()))
    for name, se in boot.se.items():
        lines.append(f"{name}.estimate = {_fmt(values[name])}")
        lines.append(f"{name}.se = {_fmt(se)}")
    tau_values = dict(zip(boot.tau_se.keys(), res.copula_taus))
    for name, se in boot.tau_se.items():
        lines.append(f"{name}.estimate = {_fmt(tau_values[name])}")
        lines.append(f"{name}.se = {_fmt(se)}")
    lines.append(f"replicates_used = {boot.n_used}")
    lines.append(f"replicates_dropped = {boot.n_dropped}")
    lines.append(f"se_unreliable = {_fmt(boot.unreliable)}")
    lines.append(f"replicate_censoring_rate = {_fmt(boot.replicate_censoring_rate)}")
    lines.append(f"data_censoring_rate = {_fmt(ds.censoring_rate)}")
    for j, cnt in boot.replicate_size_hist.items():
        lines.append(f"replicate_n_clusters[size={j}] = {_fmt(cnt)}")
    _emit("\n".join(lines), args.out)
    return EXIT_OK if res.converged else EXIT_NONCONVERGENCE


def cmd_check_tail(args) -> int:
    ds = _load_data(args.data)
    print(_check_tail_report(ds))
    if args.out:
        table = total_time_jumps(ds.total_times, ds.last_status, JumpMethod.NELSON_AALEN)
        with open(args.out, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["time", "survival", "jump"])
            for t, s, w in zip(table.times, table.survival, table.weights):
                writer.writerow([_fmt(t), _fmt(s), _fmt(w)])
    return EXIT_OK


def _emit(text: str, out_path) -> None:
    print(text)
    if out_path:
        with open(out_path, "w") as fh:
            fh.write(text + "\n")


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(
        prog="gapvine",
        description="D-vine and Archimedean copula modeling of recurrent event gap times",
    )
    sub = p.add_subparsers(dest="command", required=True)

    f = sub.add_parser("fit", help="fit a copula model to gap-time data")
    f.add_argument("--data", required=True)
    f.add_argument("--model", required=True, help="model grammar string")
    f.add_argument("--margins", choices=["weibull", "nonparametric"], default="weibull")
    f.add_argument("--strategy", choices=["global", "sequential"], default="global")
    f.add_argument("--check-tail", action="store_true")
    f.add_argument("--out")
    f.set_defaults(func=cmd_fit)

    s = sub.add_parser("simulate", help="generate censored gap-time data from a scenario")
    s.add_argument("--config", required=True)
    s.add_argument("--out", required=True)
    s.add_argument("--seed", type=int)
    s.set_defaults(func=cmd_simulate)

    m = sub.add_parser("select", help="rank candidate models by AIC")
    m.add_argument("--data", required=True)
    m.add_argument("--candidates", help="semicolon-separated model strings")
    m.add_argument("--tree1-permutations", help="comma-separated families; expands to all tree-1 layouts with Frank above")
    m.add_argument("--margins", choices=["weibull", "nonparametric"], default="weibull")
    m.add_argument("--strategy", choices=["global", "sequential"], default="global")
    m.add_argument("--jobs", type=int, default=1)
    m.add_argument("--out")
    m.set_defaults(func=cmd_select)

    b = sub.add_parser("bootstrap", help="bootstrap standard errors for a one-stage fit")
    b.add_argument("--data", required=True)
    b.add_argument("--model", required=True)
    b.add_argument("--strategy", choices=["global", "sequential"], default="global")
    b.add_argument("-B", type=int, default=100)
    b.add_argument("--seed", type=int, required=True)
    b.add_argument("--jobs", type=int, default=1)
    b.add_argument("--out")
    b.set_defaults(func=cmd_bootstrap)

    t = sub.add_parser("check-tail", help="Nelson-Aalen total-time tail diagnostic")
    t.add_argument("--data", required=True)
    t.add_argument("--out", help="export the jump table as CSV")
    t.set_defaults(func=cmd_check_tail)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DataError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except RuntimeError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_NONCONVERGENCE


if __name__ == "__main__":
    sys.exit(main())
