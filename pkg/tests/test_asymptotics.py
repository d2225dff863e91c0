import math

import numpy as np
import pytest

from plrica import (
    REGIME_HOML,
    REGIME_ICA,
    AsymptoticsError,
    NoiseSpec,
    PlrSpec,
    compare_numerators,
    homl_condition_value,
    ica_condition_value,
    moments,
    resolve,
    score_cross_derivative,
    var_homl,
    var_ica_auddy,
    var_ica_hyvarinen,
    variance_report,
)

LAPLACE = NoiseSpec.laplace().standardized()
UNIFORM = NoiseSpec.uniform()
THREE_POINT = NoiseSpec.three_point()


class TestVarianceFormulas:
    def test_homl_frozen_values(self):
        assert var_homl(moments(LAPLACE)) == pytest.approx(7.0, abs=1e-9)
        assert var_homl(moments(UNIFORM)) == pytest.approx(10.0 / 7.0, abs=1e-9)

    def test_homl_scales_with_outcome_variance(self):
        base = var_homl(moments(LAPLACE), eps_variance=1.0)
        assert var_homl(moments(LAPLACE), eps_variance=0.25) == pytest.approx(0.25 * base)

    def test_hyvarinen_frozen_values(self):
        assert var_ica_hyvarinen(moments(LAPLACE)) == pytest.approx(6.0, abs=1e-9)
        assert var_ica_hyvarinen(moments(UNIFORM)) == pytest.approx(3.0 / 7.0, abs=1e-9)
        assert var_ica_hyvarinen(moments(THREE_POINT)) == pytest.approx(0.0, abs=1e-12)

    def test_auddy_frozen_base_values(self):
        # multiplier is 1 when b + a^T theta = 0
        for spec, want in ((LAPLACE, 10.0), (UNIFORM, 75.0 / 28.0), (THREE_POINT, 4.0)):
            got = var_ica_auddy([[0.0]], [0.0], [1.0], moments(spec))
            assert got == pytest.approx(want, abs=1e-9)

    def test_auddy_multiplier_growth(self):
        rep = moments(LAPLACE)
        base = var_ica_auddy([[0.0]], [0.0], [1.0], rep)
        one = var_ica_auddy([[0.5]], [0.5], [1.0], rep)
        four = var_ica_auddy([[1.0]], [1.0], [1.0], rep)
        assert one == pytest.approx(2.0 * base)
        assert four == pytest.approx(5.0 * base)

    def test_auddy_multi_treatment_prefactor(self):
        rep = moments(LAPLACE)
        a = [[1.0, 0.0], [0.0, 1.0]]
        b = [1.0, -1.0]
        th = [2.0, 0.5]
        want = (np.sum((np.array(b) + np.array(a).T @ np.array(th)) ** 2) + 1.0) * 10.0
        assert var_ica_auddy(a, b, th, rep) == pytest.approx(want)

    def test_gaussian_degenerate_everywhere(self):
        rep = moments(NoiseSpec.gaussian())
        with pytest.raises(AsymptoticsError):
            var_homl(rep)
        with pytest.raises(AsymptoticsError):
            var_ica_hyvarinen(rep)
        with pytest.raises(AsymptoticsError):
            var_ica_auddy([[0.0]], [0.0], [1.0], rep)

    def test_shape_mismatch(self):
        with pytest.raises(AsymptoticsError):
            var_ica_auddy([[1.0, 0.0]], [1.0], [1.0], moments(LAPLACE))


class TestNumeratorGap:
    @pytest.mark.parametrize("spec,want", [
        (LAPLACE, 9.0),
        (UNIFORM, 36.0 / 25.0),
        (THREE_POINT, 1.0),
        (NoiseSpec.gaussian(), 0.0),
    ])
    def test_frozen_values(self, spec, want):
        assert compare_numerators(moments(spec)) == pytest.approx(want, abs=1e-9)

    def test_gap_equals_variance_difference_over_denominator(self):
        # identity: var_homl - var_hyvarinen = gap / denominator^2 when the
        # same standardized noise drives both
        for spec in (LAPLACE, UNIFORM):
            rep = moments(spec)
            den = rep.e_eta_t - rep.e_tprime
            diff = var_homl(rep) - var_ica_hyvarinen(rep)
            assert diff == pytest.approx(compare_numerators(rep) / den**2, abs=1e-9)

    def test_shares_condition_denominator(self):
        for spec in (LAPLACE, UNIFORM, THREE_POINT):
            assert homl_condition_value(spec) == ica_condition_value(spec)

    def test_monte_carlo_agreement(self):
        rng = np.random.default_rng(0)
        for spec in (LAPLACE, UNIFORM, THREE_POINT):
            rep = moments(spec)
            draws = spec.sample(400_000, rng)
            t = draws**3
            tprime = 3.0 * draws**2
            zt = draws * t
            a = tprime - zt
            mu_a, mu_t = a.mean(), t.mean()
            gap_mc = mu_a**2 - mu_t**2
            # delta-method standard error of the plug-in gap
            n = draws.size
            grad_var = 4 * mu_a**2 * a.var(ddof=1) + 4 * mu_t**2 * t.var(ddof=1)
            cov_at = np.cov(a, t, ddof=1)[0, 1]
            grad_var -= 8 * mu_a * mu_t * cov_at
            se = math.sqrt(max(grad_var, 1e-30) / n)
            assert abs(gap_mc - compare_numerators(rep)) <= 4 * se


class TestVarianceReport:
    def test_all_laplace(self):
        lap = NoiseSpec.laplace()
        spec = PlrSpec(p=1, m=1, theta=[1.0], a_block=[[0.0]], b_block=[0.0],
                       noise_x=lap, noise_t=lap, noise_y=lap)
        rep = variance_report(spec)
        assert rep.var_homl == pytest.approx(7.0)
        assert rep.var_ica_hyvarinen == pytest.approx(6.0)
        assert rep.var_ica_auddy == pytest.approx(10.0)
        assert rep.numerator_gap == pytest.approx(9.0)
        assert rep.regime == REGIME_ICA

    def test_gap_nan_for_mixed_noises(self):
        spec = PlrSpec(p=1, m=1, theta=[1.0], a_block=[[0.0]], b_block=[0.0],
                       noise_x=NoiseSpec.laplace(), noise_t=NoiseSpec.uniform(),
                       noise_y=NoiseSpec.laplace())
        rep = variance_report(spec)
        assert math.isnan(rep.numerator_gap)

    def test_homl_better_when_outcome_noise_is_small(self):
        # tiny outcome noise shrinks the cross-fitted variance while the
        # fixed-point variance tracks the outcome family shape only
        spec = PlrSpec(p=1, m=1, theta=[1.0], a_block=[[0.0]], b_block=[0.0],
                       noise_x=NoiseSpec.laplace(), noise_t=NoiseSpec.laplace(),
                       noise_y=NoiseSpec.laplace(scale=0.1), standardize_noise=False)
        rep = variance_report(spec)
        assert rep.regime == REGIME_HOML

    def test_unresolved_spec_resolved_with_seed(self):
        lap = NoiseSpec.laplace()
        spec = PlrSpec(p=3, m=1, theta=[1.0], noise_x=lap, noise_t=lap, noise_y=lap)
        a = variance_report(spec, seed=1)
        b = variance_report(spec, seed=1)
        assert a == b

    def test_gaussian_treatment_noise_raises(self):
        spec = PlrSpec(p=1, m=1, theta=[1.0], a_block=[[0.0]], b_block=[0.0],
                       noise_x=NoiseSpec.laplace(), noise_t=NoiseSpec.gaussian(),
                       noise_y=NoiseSpec.laplace())
        with pytest.raises(AsymptoticsError):
            variance_report(spec)


class TestScoreCrossDerivative:
    def test_linear_gaussian_outcome_returns_theta(self):
        rng = np.random.default_rng(1)
        for _ in range(5):
            p = int(rng.integers(1, 5))
            m = int(rng.integers(1, 3))
            theta = rng.uniform(-2, 2, m)
            spec = resolve(PlrSpec(p=p, m=m, theta=theta,
                                   noise_x=NoiseSpec.laplace(),
                                   noise_t=NoiseSpec.laplace(),
                                   noise_y=NoiseSpec.gaussian()), rng)
            x = rng.uniform(-1, 1, p)
            t = rng.uniform(-1, 1, m)
            y = float(rng.uniform(-1, 1))
            got = score_cross_derivative(spec, x, t, y)
            assert np.max(np.abs(got - theta)) <= 1e-3

    def test_tanh_nuisance_gaussian_outcome(self):
        rng = np.random.default_rng(2)
        spec = resolve(PlrSpec(p=3, m=1, theta=[1.55], nuisance="tanh",
                               noise_x=NoiseSpec.laplace(),
                               noise_t=NoiseSpec.laplace(),
                               noise_y=NoiseSpec.gaussian()), rng)
        got = score_cross_derivative(spec, rng.uniform(-1, 1, 3),
                                     rng.uniform(-1, 1, 1), 0.3)
        assert got[0] == pytest.approx(1.55, abs=1e-3)

    def test_step_size_validated(self):
        spec = resolve(PlrSpec(p=1, m=1, theta=[1.0]), np.random.default_rng(0))
        with pytest.raises(AsymptoticsError):
            score_cross_derivative(spec, [0.0], [0.0], 0.0, h=1e-5)
        with pytest.raises(AsymptoticsError):
            score_cross_derivative(spec, [0.0], [0.0], 0.0, h=0.5)

    def test_unresolved_spec_rejected(self):
        with pytest.raises(AsymptoticsError):
            score_cross_derivative(PlrSpec(p=1, m=1), [0.0], [0.0], 0.0)

    def test_shape_validation(self):
        spec = resolve(PlrSpec(p=2, m=1, theta=[1.0]), np.random.default_rng(0))
        with pytest.raises(AsymptoticsError):
            score_cross_derivative(spec, [0.0], [0.0], 0.0)

    def test_discrete_noise_has_no_density(self):
        spec = resolve(PlrSpec(p=1, m=1, theta=[1.0],
                               noise_t=NoiseSpec.three_point()),
                       np.random.default_rng(0))
        with pytest.raises(Exception):
            score_cross_derivative(spec, [0.0], [0.5], 0.0)
