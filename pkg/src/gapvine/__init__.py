"""Copula dependence modeling for recurrent event gap times under
induced dependent right-censoring."""

from .bicop import (
    BivariateCopula,
    CopulaFamily,
    cdf,
    hfun,
    hinv,
    pdf,
    tau_of_theta,
    theta_of_tau,
)
from .archimedean import ArchimedeanModel, acdf, acens_deriv, apdf, asample
from .dvine import (
    DVineModel,
    clayton_vine_of,
    dvine_from_families,
    vine_cluster_loglik,
    vine_cond_cdf,
    vine_logpdf,
    vine_sample,
)
from .margins import (
    JumpMethod,
    SurvivalJumpTable,
    WeibullMargin,
    pseudo_copula_data,
    total_time_jumps,
    weibull_dens,
    weibull_quantile,
    weibull_surv,
)
from .data import Cluster, DataError, GapDataset, make_dataset, read_long_csv, write_long_csv
from .estimate import (
    ArchimedeanSkeleton,
    BootstrapResult,
    FitResult,
    FitSpec,
    VineSkeleton,
    aic_of,
    bootstrap_se,
    fit,
    fit_one_stage_global,
    fit_one_stage_sequential,
    fit_two_stage,
    independence_skeleton,
    loglik_one_stage,
    select_by_aic,
)
from .simulate import Scenario, StudySummary, generate, replication_rng, run_replication_study

__version__ = "0.1.0"
