"""Reference estimators: residual-on-residual, higher-moment orthogonal
scores, and plain joint least squares.

The first two follow the standard two-stage recipe: cross-fitted lasso
regressions of T on X and Y on X produce out-of-fold residuals, then a
method-of-moments step on the residuals yields the effect. They target a
single treatment. ols_joint regresses Y on (T, X, 1) jointly and works for
any number of treatments.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dgp import Dataset
from .ica import Diagnostics, EffectEstimate, get_contrast
from .kernels import lasso_fit

HOML_DENOMINATOR_FLOOR = 1e-6


class BaselineError(ValueError):
    """Invalid baseline request."""


@dataclass(eq=False)
class NuisanceFit:
    """Cross-fitted conditional-mean predictions.

    predictions_t[i, j] and predictions_y[i] were produced by the model
    trained on the folds NOT containing row i (fold_assignment[i]).
    """

    predictions_t: np.ndarray
    predictions_y: np.ndarray
    fold_assignment: np.ndarray
    lam: float


@dataclass(frozen=True)
class MomentDiagnostics:
    """Health of the orthogonal-moment denominator.

    degenerate is True when |denominator| falls below condition_value =
    max(floor, 3 standard errors of the denominator), i.e. the data cannot
    tell the denominator from zero.
    """

    denominator: float
    condition_value: float
    degenerate: bool


def fit_nuisance(dataset: Dataset, lambda_scale: float = 1.0, folds: int = 2,
                 tol: float = 1e-4, max_iter: int = 1000) -> NuisanceFit:
    """Cross-fitted lasso regressions of each treatment and the outcome on X.

    Fold k is the rows with index % folds == k. The penalty is
    lambda_scale * sqrt(log(p + m + 1) / n_train) for each training split.
    """
    if folds < 2:
        raise BaselineError("need at least 2 folds for cross-fitting")
    n = dataset.n
    if n < 2 * folds:
        raise BaselineError(f"need at least {2 * folds} rows for {folds} folds")
    if lambda_scale <= 0:
        raise BaselineError("lambda_scale must be positive")
    x, t, y = dataset.x, dataset.t, dataset.y
    fold_assignment = np.arange(n) % folds
    predictions_t = np.empty_like(t)
    predictions_y = np.empty(n)
    lam_used = math.nan
    for k in range(folds):
        test = fold_assignment == k
        train = ~test
        lam = lambda_scale * math.sqrt(math.log(dataset.p + dataset.m + 1) / int(train.sum()))
        lam_used = lam
        x_tr, x_te = x[train], x[test]
        for j in range(dataset.m):
            fit = lasso_fit(x_tr, t[train, j], lam, tol=tol, max_iter=max_iter)
            predictions_t[test, j] = fit.predict(x_te)
        fit = lasso_fit(x_tr, y[train], lam, tol=tol, max_iter=max_iter)
        predictions_y[test] = fit.predict(x_te)
    return NuisanceFit(
        predictions_t=predictions_t,
        predictions_y=predictions_y,
        fold_assignment=fold_assignment,
        lam=lam_used,
    )


def oml_estimate(resid_y, resid_t) -> EffectEstimate:
    """Residual-on-residual slope sum(ry*rt) / sum(rt^2)."""
    ry = np.asarray(resid_y, dtype=float)
    rt = np.asarray(resid_t, dtype=float)
    if ry.shape != rt.shape or ry.ndim != 1 or ry.size < 2:
        raise BaselineError("residual vectors must be equal-length 1-d with >= 2 entries")
    denom = float(rt @ rt)
    if denom <= 0.0:
        raise BaselineError("treatment residuals are identically zero")
    theta = float(ry @ rt) / denom
    return EffectEstimate(
        theta_hat=np.array([theta]),
        method="oml",
        diagnostics=Diagnostics(converged=True, condition_value=denom / ry.size),
    )


def homl_estimate(resid_y, resid_t, t_fn="cube") -> tuple[EffectEstimate, MomentDiagnostics]:
    """Higher-moment orthogonal score on the residuals.

    With psi = t(rt) - mean(t(rt)) - rt * mean(t'(rt)), the estimate is
    mean(ry * psi) / mean(rt * psi). The denominator targets
    E[eta t(eta)] - E[t'(eta)] Var(eta), which vanishes for Gaussian
    treatment noise; the returned MomentDiagnostics flags that regime by
    comparing |denominator| against max(1e-6, 3 standard errors).
    """
    con = get_contrast(t_fn)
    ry = np.asarray(resid_y, dtype=float)
    rt = np.asarray(resid_t, dtype=float)
    if ry.shape != rt.shape or ry.ndim != 1 or ry.size < 2:
        raise BaselineError("residual vectors must be equal-length 1-d with >= 2 entries")
    n = ry.size
    ts = con.t(rt)
    psi = ts - ts.mean() - rt * con.tprime(rt).mean()
    prods = rt * psi
    denominator = float(prods.mean())
    se = float(prods.std(ddof=1) / math.sqrt(n))
    condition_value = max(HOML_DENOMINATOR_FLOOR, 3.0 * se)
    degenerate = abs(denominator) < condition_value
    if denominator == 0.0:
        raise BaselineError("orthogonal-moment denominator is exactly zero")
    theta = float((ry * psi).mean()) / denominator
    moment = MomentDiagnostics(
        denominator=denominator,
        condition_value=condition_value,
        degenerate=degenerate,
    )
    estimate = EffectEstimate(
        theta_hat=np.array([theta]),
        method="homl",
        diagnostics=Diagnostics(
            converged=True,
            condition_value=denominator,
            notes="degenerate orthogonal moment" if degenerate else "",
        ),
    )
    return estimate, moment


def _single_treatment_residuals(dataset, lambda_scale, folds, tol, max_iter):
    if dataset.m != 1:
        raise BaselineError("residual-based baselines handle one treatment; use ols_joint")
    fit = fit_nuisance(dataset, lambda_scale=lambda_scale, folds=folds, tol=tol, max_iter=max_iter)
    ry = dataset.y - fit.predictions_y
    rt = dataset.t[:, 0] - fit.predictions_t[:, 0]
    return ry, rt


def estimate_oml(dataset: Dataset, lambda_scale: float = 1.0, folds: int = 2,
                 tol: float = 1e-4, max_iter: int = 1000) -> EffectEstimate:
    """Cross-fitted residual-on-residual estimate for one treatment."""
    ry, rt = _single_treatment_residuals(dataset, lambda_scale, folds, tol, max_iter)
    return oml_estimate(ry, rt)


def estimate_homl(dataset: Dataset, lambda_scale: float = 1.0, folds: int = 2,
                  tol: float = 1e-4, max_iter: int = 1000,
                  t_fn="cube") -> tuple[EffectEstimate, MomentDiagnostics]:
    """Cross-fitted higher-moment orthogonal estimate for one treatment.

    Returns the estimate together with the moment-denominator health report;
    callers that only need the point estimate can discard the second element.
    """
    ry, rt = _single_treatment_residuals(dataset, lambda_scale, folds, tol, max_iter)
    return homl_estimate(ry, rt, t_fn=t_fn)


def ols_joint(dataset: Dataset, include_covariates: bool = True) -> EffectEstimate:
    """Least squares of Y on treatments (plus covariates and an intercept).

    With include_covariates=False the covariates are omitted, which biases
    the treatment coefficients whenever X drives both T and Y.
    """
    n = dataset.n
    blocks = [dataset.t]
    if include_covariates:
        blocks.append(dataset.x)
    blocks.append(np.ones((n, 1)))
    design = np.column_stack(blocks)
    if n <= design.shape[1]:
        raise BaselineError(f"need more than {design.shape[1]} rows, got {n}")
    coef, _, rank, _ = np.linalg.lstsq(design, dataset.y, rcond=None)
    return EffectEstimate(
        theta_hat=coef[: dataset.m].copy(),
        method="ols",
        diagnostics=Diagnostics(
            converged=True,
            condition_value=float(rank),
            notes="" if rank == design.shape[1] else "rank-deficient design",
        ),
    )
