"""Asymptotic variance formulas and the score cross-derivative identity.

All variance expressions are stated for the cubic contrast t(z) = z^3 on
standardized noise and describe the limit of n * Var(theta_hat). The
moment inputs are MomentReport values, so the same code paths serve exact
analytic moments and (via a hand-built report) empirical ones.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .dgp import PlrSpec, nuisance_t, nuisance_y, resolve
from .distributions import MomentReport

DEGENERACY_TOL = 1e-12

REGIME_ICA = "ica_better"
REGIME_HOML = "homl_better"
REGIME_TIE = "tie"


class AsymptoticsError(ValueError):
    """Degenerate or invalid variance request."""


@dataclass(frozen=True)
class VarianceReport:
    """Asymptotic variances for one process plus the regime comparison.

    numerator_gap is the difference of the higher-moment and
    source-separation variance numerators over their common denominator;
    it is only defined when the standardized treatment and outcome noises
    coincide, and is nan otherwise. regime compares var_ica_hyvarinen
    against var_homl.
    """

    var_homl: float
    var_ica_auddy: float
    var_ica_hyvarinen: float
    numerator_gap: float
    regime: str


def _check_denominator(moments: MomentReport, what: str) -> float:
    den = moments.e_eta_t - moments.e_tprime
    if abs(den) < DEGENERACY_TOL:
        raise AsymptoticsError(
            f"{what} is degenerate: E[z t(z)] - E[t'(z)] = {den:.3e} vanishes "
            "(Gaussian-like fourth moment)"
        )
    return den


def var_homl(moments: MomentReport, eps_variance: float = 1.0) -> float:
    """Large-sample variance of the higher-moment orthogonal estimator.

    moments describe the standardized treatment noise; eps_variance is the
    variance of the outcome noise (1 under standardization). The value is
    eps_variance * Var(psi) / (E[z t(z)] - E[t'(z)])^2 with
    psi = t(z) - E[t(z)] - z E[t'(z)].
    """
    if eps_variance <= 0:
        raise AsymptoticsError("eps_variance must be positive")
    den = _check_denominator(moments, "higher-moment score")
    numerator = (
        moments.var_t
        + moments.e_tprime**2
        - 2.0 * moments.e_eta_t * moments.e_tprime
    )
    return eps_variance * numerator / den**2


def var_ica_auddy(a_block, b_block, theta, moments: MomentReport) -> float:
    """Mixing-coefficient variance bound for the source-separation estimate.

    moments describe the standardized treatment noise. The prefactor
    ||b + a^T theta||^2 + 1 is the squared norm of the outcome row of the
    mixing matrix restricted to the covariate and outcome coordinates; the
    rest is Var(t(z)) / (E[z^4] - 3)^2.
    """
    a = np.atleast_2d(np.asarray(a_block, dtype=float))
    b = np.atleast_1d(np.asarray(b_block, dtype=float))
    th = np.atleast_1d(np.asarray(theta, dtype=float))
    if a.shape != (th.size, b.size):
        raise AsymptoticsError(
            f"a_block shape {a.shape} does not match {th.size} treatments x {b.size} covariates"
        )
    kurt = moments.fourth_moment - 3.0
    if abs(kurt) < DEGENERACY_TOL:
        raise AsymptoticsError("excess kurtosis vanishes; fourth-order separation is degenerate")
    multiplier = float(np.sum((b + a.T @ th) ** 2)) + 1.0
    return multiplier * moments.var_t / kurt**2


def var_ica_hyvarinen(moments: MomentReport) -> float:
    """Fixed-point-iteration variance of the source-separation estimate.

    moments describe the standardized outcome noise. The value is
    (E[t(z)^2] - E[z t(z)]^2) / (E[z t(z)] - E[t'(z)])^2.
    """
    den = _check_denominator(moments, "contrast fixed point")
    e_t_sq = moments.var_t + moments.e_t**2
    return (e_t_sq - moments.e_eta_t**2) / den**2


def compare_numerators(moments: MomentReport) -> float:
    """Variance-numerator gap over the shared denominator.

    Both estimators' variances share the denominator
    (E[z t(z)] - E[t'(z)])^2 when treatment and outcome noise coincide.
    The gap (E[t'(z)] - E[z t(z)])^2 - E[t(z)]^2 is the higher-moment
    numerator minus the source-separation numerator: positive means the
    source-separation route is strictly more efficient, zero (as in the
    Gaussian limit) a tie.
    """
    return (moments.e_tprime - moments.e_eta_t) ** 2 - moments.e_t**2


def _classify(v_homl: float, v_ica: float) -> str:
    if v_ica < v_homl:
        return REGIME_ICA
    if v_ica > v_homl:
        return REGIME_HOML
    return REGIME_TIE


def variance_report(spec: PlrSpec, seed=0) -> VarianceReport:
    """All variance quantities for one process specification.

    Unresolved coefficient blocks are drawn with the given seed, mirroring
    what simulate() would use. Noise moments are the effective
    (standardized, unless disabled) ones.
    """
    resolved = resolve(spec, np.random.default_rng(seed))
    _, noise_t_eff, noise_y_eff = resolved.effective_noises()
    moments_t = noise_t_eff.moments()
    moments_y = noise_y_eff.moments()
    v_homl = var_homl(moments_t, eps_variance=moments_y.variance)
    v_auddy = var_ica_auddy(resolved.a_block, resolved.b_block, resolved.theta, moments_t)
    v_hyv = var_ica_hyvarinen(moments_y)
    same_noise = noise_t_eff.standardized() == noise_y_eff.standardized()
    gap = compare_numerators(moments_t) if same_noise else math.nan
    return VarianceReport(
        var_homl=v_homl,
        var_ica_auddy=v_auddy,
        var_ica_hyvarinen=v_hyv,
        numerator_gap=gap,
        regime=_classify(v_homl, v_hyv),
    )


def score_cross_derivative(spec: PlrSpec, x, t, y, h: float = 1e-3) -> np.ndarray:
    """Numeric cross-derivative of the joint log density at one point.

    Returns the length-m vector of central second differences
    d^2/(dt_j dy) log p(x, t, y). The covariate and treatment log-density
    terms cancel exactly in each cross difference, so the value only
    probes the outcome-noise term; for standard Gaussian outcome noise
    the quadratic log density makes the difference quotient equal to
    theta_j up to float rounding, whatever the evaluation point.

    Requires continuous noise families (densities must exist). h is
    restricted to [1e-4, 1e-2]: large steps leave the local regime,
    smaller ones lose all precision to cancellation.
    """
    if not 1e-4 <= h <= 1e-2:
        raise AsymptoticsError(f"h must lie in [1e-4, 1e-2], got {h}")
    if not spec.is_resolved:
        raise AsymptoticsError("spec has unresolved coefficient blocks; call resolve() first")
    xv = np.asarray(x, dtype=float)
    tv = np.asarray(t, dtype=float)
    if xv.shape != (spec.p,) or tv.shape != (spec.m,):
        raise AsymptoticsError(
            f"expected x of shape {(spec.p,)} and t of shape {(spec.m,)}, "
            f"got {xv.shape} and {tv.shape}"
        )
    yv = float(y)
    _, noise_t_eff, noise_y_eff = spec.effective_noises()
    f_x = nuisance_t(spec, xv[None, :])[0]
    g_x = float(nuisance_y(spec, xv[None, :])[0])

    def log_joint(t_point, y_point):
        # the x term is constant across corners and cancels; skip it
        eta = t_point - f_x
        eps = y_point - g_x - float(spec.theta @ t_point)
        return float(np.sum(noise_t_eff.log_density(eta))) + float(noise_y_eff.log_density(eps))

    out = np.empty(spec.m)
    for j in range(spec.m):
        step = np.zeros(spec.m)
        step[j] = h
        out[j] = (
            log_joint(tv + step, yv + h)
            - log_joint(tv + step, yv - h)
            - log_joint(tv - step, yv + h)
            + log_joint(tv - step, yv - h)
        ) / (4.0 * h * h)
    return out
