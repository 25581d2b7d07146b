"""Forward-process tests: endpoint identities, closed forms, and marginals."""

import math

import numpy as np
import numpy.testing as npt
import pytest

from ddk.config import ProcessConfig, ProcessKind
from ddk.dctblur import blur, dct2_forward
from ddk.processes import (
    BetaSchedule,
    blurring_path,
    corrupt,
    grad_tts_dt,
    mixture_noise,
    mixture_path,
    noising,
    rfag,
    rfmg,
    schedule_of,
)
from ddk.rng import EMPTY_DRAW, NoiseDraw, draw_noise, seeded_rng

ALL_KINDS = list(ProcessKind)
STOCHASTIC_KINDS = [k for k in ALL_KINDS if k is not ProcessKind.BLURRING]
X0_FREE_AT_END = [
    ProcessKind.RFAG,
    ProcessKind.RFMG,
    ProcessKind.BLURRING,
    ProcessKind.MIXTURE,
]


def make_draw(kind, shape, seed=0):
    return draw_noise(ProcessConfig(kind), shape, seeded_rng(seed))


class TestBetaSchedule:
    def test_integral_closed_form(self):
        # high-precision scalar oracle: beta0*t + (beta1-beta0)*t^2/2
        sched = BetaSchedule(0.05, 20.0, 10)
        assert sched.integral(0) == 0.0
        assert sched.integral(10) == pytest.approx(10.025, rel=1e-12)
        assert sched.integral(2) == pytest.approx(0.409, rel=1e-12)
        assert sched.integral(5) == pytest.approx(2.51875, rel=1e-12)

    def test_strictly_increasing(self):
        sched = BetaSchedule(0.05, 20.0, 10)
        values = [sched.integral(n) for n in range(11)]
        assert all(b > a for a, b in zip(values, values[1:]))


class TestEndpoints:
    @pytest.mark.parametrize("kind", ALL_KINDS)
    def test_step_zero_returns_clean_data(self, kind):
        rng = seeded_rng(5)
        x0 = rng.standard_normal((6, 4))
        u = rng.standard_normal((6, 4))
        out = noising(ProcessConfig(kind), x0, u, 0, make_draw(kind, x0.shape))
        npt.assert_array_equal(out, x0)
        assert out is not x0

    @pytest.mark.parametrize("kind", X0_FREE_AT_END)
    def test_step_n_ignores_clean_data(self, kind):
        rng = seeded_rng(6)
        config = ProcessConfig(kind, n_steps=10)
        u = rng.standard_normal((5, 5))
        draw = make_draw(kind, u.shape)
        a = noising(config, rng.standard_normal((5, 5)), u, 10, draw)
        b = noising(config, rng.standard_normal((5, 5)) * 100.0, u, 10, draw)
        npt.assert_array_equal(a, b)

    @pytest.mark.parametrize("kind", X0_FREE_AT_END)
    def test_corrupt_equals_noising_at_step_n(self, kind):
        config = ProcessConfig(kind, n_steps=10)
        rng = seeded_rng(7)
        u = rng.standard_normal((4, 6))
        x0 = rng.standard_normal((4, 6))
        state, draw = corrupt(config, u, seeded_rng(123))
        npt.assert_array_equal(state, noising(config, x0, u, 10, draw))

    def test_corrupt_blurring_is_prior_with_empty_draw(self):
        u = seeded_rng(8).standard_normal((3, 3))
        state, draw = corrupt(ProcessConfig(ProcessKind.BLURRING), u, seeded_rng(0))
        npt.assert_array_equal(state, u)
        assert draw == EMPTY_DRAW

    def test_corrupt_rfag_sigma_zero_is_prior(self):
        u = seeded_rng(9).standard_normal((3, 5))
        config = ProcessConfig(ProcessKind.RFAG, sigma=0.0)
        state, draw = corrupt(config, u, seeded_rng(0))
        npt.assert_array_equal(state, u)
        assert draw.eps1 is not None

    def test_corrupt_grad_tts_gap_bound(self):
        # dropped-term coefficient e^{-r(N)/2} = 6.65424687720117e-3 at defaults
        config = ProcessConfig(ProcessKind.GRAD_TTS_DT)
        rng = seeded_rng(10)
        u = rng.standard_normal((8, 8))
        x0 = rng.standard_normal((8, 8)) * 3.0
        state, draw = corrupt(config, u, seeded_rng(77))
        gap = np.abs(state - noising(config, x0, u, 10, draw)).max()
        assert gap <= 6.7e-3 * np.abs(x0).max() + 1e-12
        keep = math.exp(-schedule_of(config).integral(10) / 2.0)
        npt.assert_allclose(
            noising(config, x0, u, 10, draw) - state, keep * x0, rtol=1e-9, atol=1e-12
        )


class TestGradTtsDt:
    def test_scalar_closed_form_at_final_step(self):
        # frozen from a 40-digit scalar evaluation of e^{-rho(10)/2}
        sched = BetaSchedule(0.05, 20.0, 10)
        draw = NoiseDraw(z_signal=np.zeros((1, 1)))
        out = grad_tts_dt(np.array([[1.0]]), np.array([[0.0]]), 10, sched, draw)
        assert out[0, 0] == pytest.approx(6.65424687720117e-3, rel=1e-12)

    def test_step_zero_identity(self):
        rng = seeded_rng(11)
        x0, u = rng.standard_normal((2, 4, 4))
        sched = BetaSchedule(0.05, 20.0, 10)
        npt.assert_array_equal(
            grad_tts_dt(x0, u, 0, sched, NoiseDraw(z_signal=np.zeros((4, 4)))), x0
        )

    @pytest.mark.parametrize("n", [2, 5, 10])
    def test_monte_carlo_marginal(self, n):
        # scalar mean/variance oracle over 1e4 trials
        config = ProcessConfig(ProcessKind.GRAD_TTS_DT, n_steps=10)
        sched = schedule_of(config)
        x0 = np.array([[1.3]])
        u = np.array([[-0.7]])
        rng = seeded_rng(2024)
        values = np.array(
            [
                grad_tts_dt(x0, u, n, sched, draw_noise(config, (1, 1), rng))[0, 0]
                for _ in range(10_000)
            ]
        )
        rho = sched.integral(n)
        keep = math.exp(-rho / 2.0)
        expected_mean = (1.0 - keep) * u[0, 0] + keep * x0[0, 0]
        expected_var = 1.0 - math.exp(-rho)
        se = values.std(ddof=1) / math.sqrt(values.size)
        assert abs(values.mean() - expected_mean) < 3.0 * se
        assert abs(values.var(ddof=1) - expected_var) < 0.05 * expected_var


class TestRfag:
    def test_midpoint_arithmetic(self):
        draw = NoiseDraw(eps1=np.array([[0.5]]))
        out = rfag(np.array([[2.0]]), np.array([[0.0]]), 5, 0.6, 10, draw)
        assert out[0, 0] == pytest.approx(1.15, rel=1e-12)

    def test_sigma_zero_is_deterministic_interpolation(self):
        rng = seeded_rng(12)
        x0, u = rng.standard_normal((2, 5, 5))
        draw = NoiseDraw(eps1=rng.standard_normal((5, 5)))
        for n in range(11):
            expected = (1 - n / 10) * x0 + (n / 10) * u
            npt.assert_allclose(rfag(x0, u, n, 0.0, 10, draw), expected, atol=1e-12)

    def test_final_step(self):
        rng = seeded_rng(13)
        x0, u = rng.standard_normal((2, 3, 3))
        eps = rng.standard_normal((3, 3))
        out = rfag(x0, u, 10, 0.6, 10, NoiseDraw(eps1=eps))
        npt.assert_array_equal(out, 0.6 * eps + u)

    @pytest.mark.parametrize("kind", [ProcessKind.RFAG, ProcessKind.RFMG])
    def test_straight_path_affine_in_n(self, kind):
        config = ProcessConfig(kind, n_steps=10, sigma=0.6)
        rng = seeded_rng(14)
        x0 = rng.standard_normal((6, 6))
        u = rng.standard_normal((6, 6))
        draw = make_draw(kind, x0.shape, seed=3)
        start = noising(config, x0, u, 0, draw)
        end = noising(config, x0, u, 10, draw)
        for n in range(11):
            expected = start + (n / 10) * (end - start)
            err = np.abs(noising(config, x0, u, n, draw) - expected).max()
            assert err < 1e-12


class TestRfmg:
    def test_all_ones_prior_final_step(self):
        u = np.ones((3, 3))
        x0 = seeded_rng(15).standard_normal((3, 3))
        draw = NoiseDraw(eps2=np.full((3, 3), 0.5))
        out = rfmg(x0, u, 10, 0.6, 10, draw)
        npt.assert_allclose(out, 1.3, rtol=1e-12)

    def test_zero_prior_annihilates_noise(self):
        rng = seeded_rng(16)
        x0 = rng.standard_normal((4, 4))
        u = np.zeros((4, 4))
        for seed in range(3):
            draw = NoiseDraw(eps2=seeded_rng(seed).standard_normal((4, 4)))
            out = rfmg(x0, u, 7, 0.6, 10, draw)
            npt.assert_allclose(out, (1 - 0.7) * x0, atol=1e-15)

    def test_step_zero_identity(self):
        rng = seeded_rng(17)
        x0, u = rng.standard_normal((2, 4, 4))
        out = rfmg(x0, u, 0, 0.6, 10, NoiseDraw(eps2=np.ones((4, 4))))
        npt.assert_array_equal(out, x0)


class TestBlurringPath:
    def test_endpoints(self):
        rng = seeded_rng(18)
        x0, u = rng.standard_normal((2, 5, 7))
        npt.assert_array_equal(blurring_path(x0, u, 0, 10), x0)
        npt.assert_array_equal(blurring_path(x0, u, 10, 10), u)

    def test_constant_inputs_interpolate(self):
        x0 = np.full((4, 4), 2.0)
        u = np.full((4, 4), -1.0)
        for n in range(11):
            expected = (1 - n / 10) * 2.0 + (n / 10) * (-1.0)
            npt.assert_allclose(blurring_path(x0, u, n, 10), expected, atol=1e-12)

    def test_interior_matches_blur(self):
        rng = seeded_rng(19)
        x0, u = rng.standard_normal((2, 6, 6))
        n = 4
        expected = 0.6 * blur(x0, 4.0) + 0.4 * u
        npt.assert_allclose(blurring_path(x0, u, n, 10), expected, atol=1e-12)


class TestMixture:
    def test_degenerate_draw_is_blur(self):
        x0 = seeded_rng(20).standard_normal((5, 5))
        draw = NoiseDraw(z_freq=np.zeros((5, 5)))
        for n in (0, 1, 3, 8):
            npt.assert_allclose(mixture_noise(x0, n, 0.5, draw), blur(x0, n), atol=1e-12)

    def test_spatial_mean_preserved_for_any_draw(self):
        x0 = seeded_rng(21).standard_normal((4, 6))
        for seed in range(5):
            draw = NoiseDraw(z_freq=seeded_rng(seed).standard_normal((4, 6)))
            out = mixture_noise(x0, 3, 0.5, draw)
            assert abs(out.mean() - x0.mean()) < 1e-12

    def test_monte_carlo_frequency_variance(self):
        # per-coefficient variance scale*(-lambda_11) = pi^2/4 at W=H=2, scale 1/2
        x0 = seeded_rng(22).standard_normal((2, 2))
        config = ProcessConfig(ProcessKind.MIXTURE, n_steps=10, mixture_scale=0.5)
        rng = seeded_rng(808)
        coeffs = np.array(
            [
                dct2_forward(
                    mixture_noise(x0, 1, 0.5, draw_noise(config, (2, 2), rng))
                )[1, 1]
                for _ in range(10_000)
            ]
        )
        expected = np.pi**2 / 4.0
        assert abs(coeffs.var(ddof=1) - expected) < 0.05 * expected

    def test_path_endpoints(self):
        rng = seeded_rng(23)
        x0, u = rng.standard_normal((2, 4, 4))
        draw = NoiseDraw(z_freq=rng.standard_normal((4, 4)))
        npt.assert_array_equal(mixture_path(x0, u, 10, 10, 0.5, draw), u)
        # the trajectory's clean endpoint, by contract
        npt.assert_array_equal(mixture_path(x0, u, 0, 10, 0.5, draw), x0)

    def test_path_with_zero_draw_matches_blurring_path(self):
        rng = seeded_rng(24)
        x0, u = rng.standard_normal((2, 5, 5))
        draw = NoiseDraw(z_freq=np.zeros((5, 5)))
        for n in range(11):
            npt.assert_allclose(
                mixture_path(x0, u, n, 10, 0.5, draw),
                blurring_path(x0, u, n, 10),
                atol=1e-12,
            )

    def test_tiny_scale_approaches_blurring_path(self):
        rng = seeded_rng(25)
        x0, u = rng.standard_normal((2, 5, 5))
        draw = NoiseDraw(z_freq=rng.standard_normal((5, 5)))
        for n in (1, 5, 9):
            err = np.abs(
                mixture_path(x0, u, n, 10, 1e-20, draw) - blurring_path(x0, u, n, 10)
            ).max()
            assert err < 1e-9

    def test_constant_inputs_keep_interpolated_mean(self):
        # the spatial mean is noiseless (zero variance at the mean mode), so
        # it interpolates the two constants exactly for every draw
        x0 = np.full((4, 4), 1.5)
        u = np.full((4, 4), -0.5)
        for seed in range(4):
            draw = NoiseDraw(z_freq=seeded_rng(seed).standard_normal((4, 4)))
            for n in (1, 4, 9):
                out = mixture_path(x0, u, n, 10, 0.5, draw)
                expected = (1 - n / 10) * 1.5 + (n / 10) * (-0.5)
                assert abs(out.mean() - expected) < 1e-12

    def test_frequency_mean_at_clean_endpoint(self):
        # raw mixture noise at step 0: mean spectrum is the clean spectrum and
        # the mean mode itself carries no noise
        x0 = seeded_rng(26).standard_normal((4, 4))
        spectra = []
        rng = seeded_rng(99)
        config = ProcessConfig(ProcessKind.MIXTURE)
        for _ in range(2000):
            draw = draw_noise(config, (4, 4), rng)
            spectra.append(dct2_forward(mixture_noise(x0, 0, 0.5, draw)))
        spectra = np.array(spectra)
        clean = dct2_forward(x0)
        npt.assert_allclose(spectra[:, 0, 0], clean[0, 0], atol=1e-12)
        se = spectra.std(axis=0, ddof=1) / np.sqrt(len(spectra))
        assert np.all(np.abs(spectra.mean(axis=0) - clean) < 4.0 * se + 1e-9)


class TestNoisingDispatch:
    def test_shape_mismatch_rejected(self):
        config = ProcessConfig(ProcessKind.RFAG)
        with pytest.raises(ValueError, match="shape"):
            noising(config, np.zeros((2, 2)), np.zeros((3, 3)), 1, NoiseDraw(eps1=np.zeros((2, 2))))

    def test_step_out_of_range_rejected(self):
        config = ProcessConfig(ProcessKind.BLURRING, n_steps=5)
        x = np.zeros((2, 2))
        for bad in (-1, 6):
            with pytest.raises(ValueError, match="step index"):
                noising(config, x, x, bad)

    def test_missing_draw_tensor_rejected(self):
        config = ProcessConfig(ProcessKind.RFAG)
        x = np.ones((2, 2))
        with pytest.raises(ValueError, match="eps1"):
            noising(config, x, x, 3, EMPTY_DRAW)

    def test_deterministic_given_draw(self):
        rng = seeded_rng(27)
        x0, u = rng.standard_normal((2, 4, 4))
        for kind in ALL_KINDS:
            config = ProcessConfig(kind)
            draw = make_draw(kind, x0.shape, seed=5)
            npt.assert_array_equal(
                noising(config, x0, u, 6, draw), noising(config, x0, u, 6, draw)
            )
