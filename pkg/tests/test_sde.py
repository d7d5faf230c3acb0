import numpy as np
import pytest

from hrecon.sde import (
    GaussianScore,
    SamplerParams,
    SigmaSchedule,
    corrector_step,
    gaussian_score,
    geometric_schedule,
    noise_like,
    pc_sample,
    predictor_step,
)


def log_gaussian(x, mu, var):
    return -0.5 * np.sum((x - mu) ** 2) / var


def fd_score_oracle(x, mu, var, h=1e-6):
    """Central-difference gradient of the log density."""
    g = np.zeros_like(x)
    for i in np.ndindex(*x.shape):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        g[i] = (log_gaussian(xp, mu, var) - log_gaussian(xm, mu, var)) / (2 * h)
    return g


class TestSchedule:
    def test_two_point_endpoints(self):
        s = geometric_schedule(2, 0.01, 1.0)
        assert np.allclose(s.sigmas, [0.01, 1.0])

    def test_geometric_midpoint(self):
        s = geometric_schedule(3, 0.01, 1.0)
        assert np.allclose(s.sigmas, [0.01, 0.1, 1.0])

    def test_constant_ratio_at_standard_settings(self):
        s = geometric_schedule(1000, 0.01, 1.0)
        ratios = s.sigmas[1:] / s.sigmas[:-1]
        assert np.allclose(ratios, 100.0 ** (1.0 / 999.0))
        assert s.sigma_min == pytest.approx(0.01)
        assert s.sigma_max == pytest.approx(1.0)

    def test_invalid_bounds(self):
        with pytest.raises(ValueError):
            geometric_schedule(10, 1.0, 0.01)
        with pytest.raises(ValueError):
            geometric_schedule(1, 0.01, 1.0)
        with pytest.raises(ValueError):
            geometric_schedule(10, 0.0, 1.0)

    def test_sigma_zero_implicit(self):
        s = geometric_schedule(5, 0.1, 1.0)
        assert s.sigma(0) == 0.0
        assert s.sigma(1) == pytest.approx(0.1)
        assert s.sigma(5) == pytest.approx(1.0)
        with pytest.raises(IndexError):
            s.sigma(6)

    def test_monotonic_required(self):
        with pytest.raises(ValueError, match="strictly increasing"):
            SigmaSchedule(np.array([0.1, 0.1, 1.0]))
        with pytest.raises(ValueError, match="positive"):
            SigmaSchedule(np.array([0.0, 1.0]))

    def test_squared_increments_positive(self):
        s = geometric_schedule(50, 0.01, 1.0)
        sig = np.array([s.sigma(i) for i in range(51)])
        assert np.all(np.diff(sig**2) > 0)


class TestPredictor:
    def test_no_score_no_noise(self):
        s = geometric_schedule(10, 0.01, 1.0)
        x = np.arange(4.0)
        out = predictor_step(x, lambda t, sig: np.zeros_like(t), s, 3, np.zeros(4))
        assert np.array_equal(out, x)

    def test_pure_diffusion_variance(self):
        s = geometric_schedule(10, 0.01, 1.0)
        i = 4
        diff = s.sigma(i + 1) ** 2 - s.sigma(i) ** 2
        rng = np.random.default_rng(0)
        n = 10_000
        z = rng.standard_normal((n,))
        out = predictor_step(np.zeros(n), lambda t, sig: np.zeros_like(t), s, i, z)
        var = out.var()
        se = diff * np.sqrt(2.0 / (n - 1))
        assert abs(var - diff) <= 3 * se

    def test_deterministic(self):
        s = geometric_schedule(10, 0.01, 1.0)
        rng = np.random.default_rng(1)
        x = rng.standard_normal(6)
        z = rng.standard_normal(6)
        score = GaussianScore(np.zeros(6), 1.0)
        a = predictor_step(x, score, s, 2, z)
        b = predictor_step(x, score, s, 2, z)
        assert np.array_equal(a, b)

    def test_nonfinite_score_surfaced_with_sigma(self):
        s = geometric_schedule(10, 0.01, 1.0)
        with pytest.raises(FloatingPointError, match="sigma="):
            predictor_step(np.zeros(3), lambda t, sig: np.full_like(t, np.nan), s, 9, np.zeros(3))

    def test_index_range(self):
        s = geometric_schedule(10, 0.01, 1.0)
        with pytest.raises(IndexError):
            predictor_step(np.zeros(2), lambda t, sig: t, s, 10, np.zeros(2))


class TestCorrector:
    def test_zero_score_skips_with_warning(self):
        x = np.arange(3.0)
        with pytest.warns(RuntimeWarning, match="skipped"):
            out = corrector_step(x, lambda t, sig: np.zeros_like(t), 0.5, 0.075, np.ones(3))
        assert np.array_equal(out, x)

    def test_step_size_formula_and_r_squared_scaling(self):
        # constant score field: eps = 2 (r ||z|| / ||g||)^2, out = x + eps g + sqrt(2 eps) z
        x = np.zeros(4)
        g = np.full(4, 2.0)
        z = np.full(4, 0.5)
        score = lambda t, sig: g

        def expected(r):
            eps = 2.0 * (r * np.linalg.norm(z) / np.linalg.norm(g)) ** 2
            return x + eps * g + np.sqrt(2 * eps) * z, eps

        for r in (0.075, 0.15):
            want, _ = expected(r)
            assert np.allclose(corrector_step(x, score, 0.3, r, z), want, atol=1e-15)
        _, eps1 = expected(0.075)
        _, eps2 = expected(0.15)
        assert eps2 == pytest.approx(4 * eps1)

    def test_stationarity_of_target(self):
        # starting at the perturbed target, 500 Langevin steps drift < 2%
        mu = np.array([2.0, -2.5, 3.0, 1.5])
        sigma_d, sigma_t = 1.0, 0.3
        var = sigma_d**2 + sigma_t**2
        rng = np.random.default_rng(42)
        n = 4000
        x = mu + np.sqrt(var) * rng.standard_normal((n, 4))
        score = GaussianScore(mu, sigma_d)
        for _ in range(500):
            x = corrector_step(x, score, sigma_t, 0.075, rng.standard_normal(x.shape))
        mean_drift = np.linalg.norm(x.mean(axis=0) - mu) / np.linalg.norm(mu)
        var_drift = abs(x.var(axis=0).mean() - var) / var
        assert mean_drift < 0.02
        assert var_drift < 0.02


class TestGaussianScore:
    def test_zero_at_mean(self):
        mu = np.ones((3, 3))
        assert np.all(gaussian_score(mu, mu, 1.0, 0.5) == 0)

    def test_scalar_closed_form(self):
        # -x / sigma_data^2 at sigma_t = 0
        assert gaussian_score(np.array(2.0), np.array(0.0), 1.0, 0.0) == pytest.approx(-2.0)

    def test_matches_finite_differences(self):
        rng = np.random.default_rng(3)
        mu = rng.standard_normal((2, 3))
        x = rng.standard_normal((2, 3))
        sigma_d, sigma_t = 0.8, 0.4
        var = sigma_d**2 + sigma_t**2
        got = gaussian_score(x, mu, sigma_d, sigma_t)
        want = fd_score_oracle(x, mu, var)
        assert np.linalg.norm(got - want) / np.linalg.norm(want) <= 1e-6


class TestPCSampling:
    def test_moments_converge_full_sweep(self):
        # the Langevin mean bias decays like exp(-2 r^2 N); N=1000 leaves ~1e-5
        mu = np.array([2.0, -2.5, 3.0, 1.5])
        params = SamplerParams(n_outer=1000, rng_seed=0)
        rng = np.random.default_rng(params.rng_seed)
        x = pc_sample((2000, 4), GaussianScore(mu, 1.0), params, rng)
        assert np.all(np.abs(x.mean(axis=0) - mu) / np.abs(mu) < 0.05)
        assert abs(x.var(axis=0).mean() - 1.0) < 0.05

    def test_complex_noise_unit_variance_per_component(self):
        rng = np.random.default_rng(4)
        z = noise_like(rng, np.zeros((50_000,), dtype=complex))
        assert abs(z.real.var() - 1.0) < 0.03
        assert abs(z.imag.var() - 1.0) < 0.03

    def test_params_validation(self):
        with pytest.raises(ValueError):
            SamplerParams(snr_r=0.0)
        with pytest.raises(ValueError):
            SamplerParams(sigma_min=2.0, sigma_max=1.0)
