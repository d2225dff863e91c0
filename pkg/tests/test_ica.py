import numpy as np
import pytest

from plrica import (
    CONTRASTS,
    CanonicalizationError,
    IcaError,
    NoiseSpec,
    PlrSpec,
    RankDeficientError,
    assemble_unmixing,
    build_linear_mixing,
    canonicalize,
    estimate_ica,
    extract_effects,
    extract_effects_from_mixing,
    fastica,
    get_contrast,
    resolve,
    simulate,
    stationarity_residual,
    whiten,
)


def laplace_spec(p=2, m=1, theta=(3.0,)):
    lap = NoiseSpec.laplace()
    return PlrSpec(p=p, m=m, theta=list(theta), noise_x=lap, noise_t=lap, noise_y=lap)


class TestWhiten:
    def test_output_identity_covariance(self):
        rng = np.random.default_rng(0)
        data = rng.standard_normal((500, 4)) @ rng.standard_normal((4, 4))
        z, k, means = whiten(data)
        cov = z.T @ z / 500
        assert np.max(np.abs(cov - np.eye(4))) <= 1e-10
        assert np.max(np.abs(z.mean(axis=0))) <= 1e-12
        assert k.shape == (4, 4)
        assert means == pytest.approx(data.mean(axis=0))

    def test_rank_deficient_raises(self):
        rng = np.random.default_rng(1)
        col = rng.standard_normal(100)
        data = np.column_stack([col, 2 * col, rng.standard_normal(100)])
        with pytest.raises(RankDeficientError):
            whiten(data)


class TestContrasts:
    def test_names(self):
        assert set(CONTRASTS) == {"logcosh", "exp", "cube"}

    def test_logcosh_derivative_pair(self):
        con = get_contrast("logcosh")
        u = np.linspace(-3, 3, 11)
        assert np.allclose(con.t(u), np.tanh(u))
        assert np.allclose(con.tprime(u), 1 - np.tanh(u) ** 2)

    def test_cube(self):
        con = get_contrast("cube")
        u = np.array([2.0])
        assert con.t(u)[0] == 8.0
        assert con.tprime(u)[0] == 12.0

    def test_exp_at_zero(self):
        con = get_contrast("exp")
        assert con.t(np.zeros(1))[0] == 0.0
        assert con.tprime(np.zeros(1))[0] == 1.0

    def test_unknown(self):
        with pytest.raises(IcaError):
            get_contrast("quartic")


class TestFastIca:
    def test_rotation_orthonormal(self):
        ds = simulate(laplace_spec(), 3000, seed=0)
        z, _, _ = whiten(ds.columns)
        for mode in ("parallel", "deflation"):
            res = fastica(z, mode=mode, seed=0)
            w = res.w_rotation
            assert np.max(np.abs(w @ w.T - np.eye(w.shape[0]))) <= 1e-8
            assert res.converged

    def test_seed_determinism(self):
        ds = simulate(laplace_spec(), 2000, seed=1)
        z, _, _ = whiten(ds.columns)
        a = fastica(z, seed=5)
        b = fastica(z, seed=5)
        assert np.array_equal(a.w_rotation, b.w_rotation)

    def test_unknown_mode(self):
        ds = simulate(laplace_spec(), 500, seed=2)
        z, _, _ = whiten(ds.columns)
        with pytest.raises(IcaError):
            fastica(z, mode="sequential")

    def test_stationarity_at_fixed_point(self):
        ds = simulate(laplace_spec(), 5000, seed=3)
        z, k, means = whiten(ds.columns)
        res = fastica(z, contrast="logcosh", tol=1e-6, seed=3)
        fitted = stationarity_residual(z, res.w_rotation[0], "logcosh")
        rng = np.random.default_rng(0)
        w_rand = rng.standard_normal(z.shape[1])
        w_rand /= np.linalg.norm(w_rand)
        random_row = stationarity_residual(z, w_rand, "logcosh")
        assert fitted < 0.02
        assert fitted < random_row / 5


class TestCanonicalize:
    def test_exact_unmixing_recovered_under_scaling_and_permutation(self):
        rng = np.random.default_rng(4)
        for _ in range(20):
            p = int(rng.integers(1, 6))
            m = int(rng.integers(1, 3))
            spec = resolve(PlrSpec(p=p, m=m, theta=rng.uniform(-2, 2, m)), rng)
            _, unmix = build_linear_mixing(spec)
            d = p + m + 1
            perm = rng.permutation(d)
            scales = rng.uniform(0.5, 2.0, d) * rng.choice([-1.0, 1.0], d)
            scrambled = (unmix * scales[:, None])[perm]
            canon = canonicalize(scrambled)
            assert np.max(np.abs(canon - unmix)) <= 1e-12

    def test_tiny_pivot_raises(self):
        bad = np.array([[1.0, 0.0, 0.0], [1.0, 1e-12, 0.0], [0.0, 0.0, 1.0]])
        with pytest.raises(CanonicalizationError):
            canonicalize(bad)

    def test_accepts_unmixing_estimate_object(self):
        ds = simulate(laplace_spec(), 4000, seed=5)
        z, k, means = whiten(ds.columns)
        res = fastica(z, seed=5)
        est = assemble_unmixing(res, k, means, "logcosh")
        canon = canonicalize(est)
        assert np.allclose(np.diag(canon), 1.0)
        # w_total must compose rotation and whitening
        assert np.max(np.abs(est.w_total - res.w_rotation @ k)) <= 1e-12


class TestEffectExtraction:
    def test_read_off_negated_entries(self):
        canon = np.array([
            [1.0, 0.0, 0.0],
            [-0.7, 1.0, 0.0],
            [-0.3, -2.5, 1.0],
        ])
        est = extract_effects(canon, p=1, m=1)
        assert est.theta_hat == pytest.approx([2.5])
        assert est.method == "ica"

    def test_mixing_read_matches_on_exact_input(self):
        rng = np.random.default_rng(6)
        for _ in range(10):
            p = int(rng.integers(1, 5))
            m = int(rng.integers(1, 3))
            spec = resolve(PlrSpec(p=p, m=m, theta=rng.uniform(-2, 2, m)), rng)
            _, unmix = build_linear_mixing(spec)
            canon = canonicalize(unmix)
            a = extract_effects(canon, p, m).theta_hat
            b = extract_effects_from_mixing(canon, p, m).theta_hat
            assert np.max(np.abs(a - b)) <= 1e-12
            assert np.max(np.abs(a - spec.theta)) <= 1e-12

    def test_mixing_read_method_label(self):
        canon = np.eye(3)
        est = extract_effects_from_mixing(canon, 1, 1)
        assert est.method == "ica_mixing"

    def test_shape_and_diagonal_validation(self):
        with pytest.raises(IcaError):
            extract_effects(np.eye(4), p=1, m=1)
        bad = np.eye(3)
        bad[1, 1] = 2.0
        with pytest.raises(IcaError):
            extract_effects(bad, p=1, m=1)
            extract_effects_from_mixing(bad, p=1, m=1)


class TestEndToEnd:
    def test_scalar_recovery(self):
        ds = simulate(laplace_spec(p=2, theta=(3.0,)), 20_000, seed=7)
        est = estimate_ica(ds, seed=7)
        assert est.theta_hat[0] == pytest.approx(3.0, abs=0.05)
        assert est.diagnostics.converged
        assert est.diagnostics.condition_value > 0

    def test_multi_treatment_recovery_up_to_order(self):
        ds = simulate(laplace_spec(p=2, m=2, theta=(1.5, -0.5)), 20_000, seed=8)
        est = estimate_ica(ds, seed=8)
        got = np.sort(est.theta_hat)
        assert np.allclose(got, [-0.5, 1.5], atol=0.06)

    @pytest.mark.parametrize("contrast", ["logcosh", "exp", "cube"])
    def test_all_contrasts_recover(self, contrast):
        ds = simulate(laplace_spec(p=1, theta=(2.0,)), 10_000, seed=9)
        est = estimate_ica(ds, contrast=contrast, seed=9)
        assert est.theta_hat[0] == pytest.approx(2.0, abs=0.1)

    def test_deflation_mode_recovers(self):
        ds = simulate(laplace_spec(p=1, theta=(2.0,)), 10_000, seed=10)
        est = estimate_ica(ds, mode="deflation", seed=10)
        assert est.theta_hat[0] == pytest.approx(2.0, abs=0.1)

    def test_gaussian_covariate_still_works(self):
        # only the covariate may be gaussian; treatment and outcome noise carry
        # the non-gaussian signal the rotation needs
        lap = NoiseSpec.laplace()
        spec = PlrSpec(p=1, m=1, theta=[1.0], noise_x=NoiseSpec.gaussian(),
                       noise_t=lap, noise_y=lap)
        ds = simulate(spec, 10_000, seed=11)
        est = estimate_ica(ds, seed=11)
        assert est.theta_hat[0] == pytest.approx(1.0, abs=0.1)
