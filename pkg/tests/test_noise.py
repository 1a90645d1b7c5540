"""Noise model: closed-form bit probabilities vs stochastic trajectories.

Cross-validation runs in both directions.  The trajectory path is checked
against a per-draw closed form derived here from explicit matrices, and
its Monte-Carlo average is checked against the damping formula; a
Gauss-Hermite quadrature of the explicit-matrix round pins the e^{-dx^2}
factor without any sampling at all.
"""

import math

import numpy as np
import pytest
from scipy.linalg import expm

from ipea import noise, pea
from ipea.noise import NoiseParams
from ipea.qcore import RngStream

I2 = np.eye(2)
X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
Z = np.diag([1.0, -1.0]).astype(complex)


def matrix_round_p0(alpha: float, k: int, omega: float, d1: float, xi: float, d2: float) -> float:
    """The noisy round from scratch with explicit draws: RX(pi/2 + d1),
    ZZ(alpha 2^{k-1}), RZ(xi - omega) on the ancilla, RX(-pi/2 + d2)."""
    rx = lambda t: expm(-0.5j * t * X)
    rz = lambda t: expm(-0.5j * t * Z)
    zz = lambda a: expm(-1.0j * a * np.kron(Z, Z))
    u = (
        np.kron(rx(-math.pi / 2.0 + d2), I2)
        @ np.kron(rz(xi - omega), I2)
        @ zz(alpha * 2.0 ** (k - 1))
        @ np.kron(rx(math.pi / 2.0 + d1), I2)
    )
    psi = u @ np.array([1.0, 0.0, 0.0, 0.0], dtype=complex)
    return float(np.abs(psi[0]) ** 2 + np.abs(psi[1]) ** 2)


def closed_form_p0(alpha: float, k: int, omega: float, d1: float, xi: float, d2: float) -> float:
    """Hand-derived per-draw probability used as the quadrature integrand:
    P0 = 1/2 [1 - sin d1 sin d2 + cos d1 cos d2 cos(2 beta + xi - omega)]."""
    phi_rel = 2.0 * alpha * 2.0 ** (k - 1) + xi - omega
    return 0.5 * (1.0 - math.sin(d1) * math.sin(d2) + math.cos(d1) * math.cos(d2) * math.cos(phi_rel))


class ScriptedRng:
    """Stands in for RngStream.normal with a fixed sequence of draws."""

    def __init__(self, values):
        self.values = list(values)
        self.scales = []

    def normal(self, scale):
        self.scales.append(scale)
        return self.values.pop(0)


class TestNoiseParams:
    def test_defaults_off(self):
        p = NoiseParams()
        assert p.is_off
        assert not NoiseParams(delta_x=0.1).is_off
        assert not NoiseParams(gamma_ratio=0.01).is_off

    @pytest.mark.parametrize("bad", [{"delta_x": -0.1}, {"gamma_ratio": -1.0},
                                     {"delta_x": math.nan}, {"gamma_ratio": math.inf}])
    def test_validation(self, bad):
        with pytest.raises(ValueError):
            NoiseParams(**bad)


class TestNoisyBitProb:
    def test_zero_noise_exact_phase(self):
        assert noise.noisy_bit_prob(0.7, 3, 0.0, NoiseParams()) == 1.0

    def test_worked_example(self):
        # exponent 0.1^2 + (pi/2) * 2^3 * 0.05 = 0.01 + 0.2 pi
        p = noise.noisy_bit_prob(
            math.pi / 2.0, 3, 0.0, NoiseParams(delta_x=0.1, gamma_ratio=0.05)
        )
        assert p == pytest.approx(0.5 * (1.0 + math.exp(-(0.01 + 0.2 * math.pi))), abs=1e-15)
        assert p == pytest.approx(0.7640898979459538, abs=1e-14)

    def test_damping_doubles_in_exponent_per_iteration(self):
        params = NoiseParams(gamma_ratio=0.03)
        alpha = 1.1
        for k in range(1, 8):
            ratio = noise.damping_factor(alpha, k + 1, params) / noise.damping_factor(
                alpha, k, params
            )
            assert ratio == pytest.approx(math.exp(-alpha * 2.0**k * 0.03), rel=1e-12)

    def test_interference_angle_scaling(self):
        # at iteration k the remainder enters as pi * 2^(k-m) * delta
        m, delta, alpha = 5, 0.4, 0.9
        params = NoiseParams(delta_x=0.2, gamma_ratio=0.02)
        for k in (1, 3, 5):
            expected = 0.5 * (
                1.0
                + noise.damping_factor(alpha, k, params)
                * math.cos(math.pi * 2.0 ** (k - m) * delta)
            )
            got = noise.noisy_bit_prob(alpha, k, delta / 2.0**m, params)
            assert got == pytest.approx(expected, abs=1e-15)


class TestSamplers:
    def test_rx_error_off_is_exactly_zero(self):
        rng = RngStream(0, "off", 0)
        assert noise.sample_rx_error(NoiseParams(), rng) == 0.0
        assert noise.sample_dephasing_kick(0.9, 3, NoiseParams(), rng) == 0.0
        # stream untouched by the fast path
        assert rng.uniform() == RngStream(0, "off", 0).uniform()

    def test_rx_error_statistics(self):
        params = NoiseParams(delta_x=0.25)
        rng = RngStream(1, "rx-stats", 0)
        n = 100_000
        draws = np.array([noise.sample_rx_error(params, rng) for _ in range(n)])
        assert abs(float(np.mean(draws))) < 4.0 * 0.25 / math.sqrt(n)
        assert abs(float(np.var(draws)) - 0.0625) < 4.0 * math.sqrt(2.0) * 0.0625 / math.sqrt(n)

    def test_kick_variance_formula(self):
        # sigma^2 = 2 |alpha| 2^k gamma
        alpha, k, gamma = math.pi / 2.0, 3, 0.05
        sigma2 = 2.0 * (math.pi / 2.0) * 8.0 * 0.05
        assert sigma2 == pytest.approx(1.2566370614359172, abs=1e-14)
        params = NoiseParams(gamma_ratio=gamma)
        rng = RngStream(2, "kick-stats", 0)
        n = 100_000
        draws = np.array([noise.sample_dephasing_kick(alpha, k, params, rng) for _ in range(n)])
        assert abs(float(np.var(draws)) - sigma2) < 4.0 * math.sqrt(2.0) * sigma2 / math.sqrt(n)

    def test_kick_characteristic_function(self):
        # E[cos xi] = e^{-sigma^2/2}, the damping the formula assumes
        alpha, k, gamma = 0.8, 4, 0.02
        params = NoiseParams(gamma_ratio=gamma)
        sigma2 = 2.0 * 0.8 * 16.0 * 0.02
        rng = RngStream(3, "kick-cf", 0)
        n = 100_000
        draws = np.array([noise.sample_dephasing_kick(alpha, k, params, rng) for _ in range(n)])
        expected = math.exp(-sigma2 / 2.0)
        assert abs(float(np.mean(np.cos(draws))) - expected) < 4.0 / math.sqrt(n)


class TestAnalyticSuccess:
    def test_zero_noise_matches_noiseless_formula(self):
        for m in (1, 4, 9):
            for delta in (0.0, 0.2, 0.5, 0.9):
                assert noise.analytic_success_with_noise(
                    0.7, m, delta, NoiseParams()
                ) == pytest.approx(pea.success_probability(delta, m), abs=1e-12)

    def test_heavy_dephasing_hits_coin_flip_floor(self):
        for m in (2, 4):
            value = noise.analytic_success_with_noise(
                math.pi / 2.0, m, 0.0, NoiseParams(gamma_ratio=50.0)
            )
            assert value == pytest.approx(2.0**-m, rel=1e-9)

    def test_monotone_in_each_channel(self):
        alpha, m, delta = math.pi / 2.0, 4, 0.3
        base = noise.analytic_success_with_noise(alpha, m, delta, NoiseParams())
        worse_x = noise.analytic_success_with_noise(alpha, m, delta, NoiseParams(delta_x=0.3))
        worse_g = noise.analytic_success_with_noise(alpha, m, delta, NoiseParams(gamma_ratio=0.05))
        assert worse_x < base
        assert worse_g < worse_x or worse_g < base


class TestTrajectoryOracle:
    def test_closed_form_matches_explicit_matrices(self):
        # the per-draw formula used for quadrature is itself verified first
        cases = [
            (0.7, 2, -0.8, 0.3, 0.5, -0.2),
            (-1.2, 1, 0.0, -0.4, 0.0, 0.1),
            (math.pi / 2.0, 4, -2.0, 0.0, 1.3, 0.0),
            (0.0, 3, -0.5, 0.2, -0.7, 0.6),
        ]
        for alpha, k, omega, d1, xi, d2 in cases:
            assert closed_form_p0(alpha, k, omega, d1, xi, d2) == pytest.approx(
                matrix_round_p0(alpha, k, omega, d1, xi, d2), abs=1e-12
            )

    def test_scalar_path_matches_closed_form_on_scripted_draws(self):
        alpha, k, omega = 0.9, 3, -1.1
        params = NoiseParams(delta_x=0.2, gamma_ratio=0.04)
        d1, xi, d2 = 0.17, -0.6, -0.31
        rng = ScriptedRng([d1, xi, d2])
        got = pea._circuit_round_p0(alpha, k, omega, params, rng)
        assert got == pytest.approx(closed_form_p0(alpha, k, omega, d1, xi, d2), abs=1e-12)
        # draw order is RX error, kick, RX error with the right scales
        sigma = math.sqrt(2.0 * 0.9 * 8.0 * 0.04)
        assert rng.scales == pytest.approx([0.2, sigma, 0.2])

    def test_batched_matches_scalar_statistics(self):
        alpha, k, omega = 1.3, 2, -0.7
        params = NoiseParams(delta_x=0.25, gamma_ratio=0.03)
        n = 50_000
        batched = noise.run_step_trajectories(
            alpha, k, omega, params, n, RngStream(5, "batch", 0), rz_sign=-1.0
        )
        scalar = np.array(
            [
                pea._circuit_round_p0(alpha, k, omega, params, RngStream(5, "scalar", i))
                for i in range(2000)
            ]
        )
        se = math.sqrt(
            float(np.var(batched)) / n + float(np.var(scalar)) / len(scalar)
        )
        assert abs(float(np.mean(batched)) - float(np.mean(scalar))) < 4.0 * se

    def test_batched_zero_noise_reduces_exactly(self):
        alpha, k, omega = -0.9, 3, -0.4
        p0 = noise.run_step_trajectories(
            alpha, k, omega, NoiseParams(), 16, RngStream(6, "zero", 0)
        )
        expected = pea.step_prob_circuit(alpha, k, omega)
        assert np.all(p0 == p0[0])
        assert float(p0[0]) == pytest.approx(expected, abs=1e-14)

    def test_gauss_hermite_quadrature_pins_rx_damping(self):
        # integrate the explicit-matrix round over both RX draws: the
        # result must equal 1/2 (1 + e^{-dx^2} cos(2 beta - omega))
        alpha, k, omega, dx = 0.7, 2, -0.8, 0.3
        nodes, weights = np.polynomial.hermite.hermgauss(48)
        total = 0.0
        for x1, w1 in zip(nodes, weights):
            d1 = math.sqrt(2.0) * dx * float(x1)
            for x2, w2 in zip(nodes, weights):
                d2 = math.sqrt(2.0) * dx * float(x2)
                total += w1 * w2 * matrix_round_p0(alpha, k, omega, d1, 0.0, d2)
        total /= math.pi
        expected = 0.5 * (
            1.0 + math.exp(-(dx**2)) * math.cos(2.0 * alpha * 2.0 ** (k - 1) - omega)
        )
        assert total == pytest.approx(expected, abs=1e-10)

    def test_trajectory_mean_matches_formula_dephasing(self):
        # Monte-Carlo over kicks only, against the analytic damping
        alpha, k = math.pi / 2.0, 4
        params = NoiseParams(gamma_ratio=0.05)
        n = 100_000
        p0 = noise.run_step_trajectories(alpha, k, 0.0, params, n, RngStream(7, "mc-g", 0))
        expected = 0.5 * (
            1.0 + noise.damping_factor(alpha, k, params) * math.cos(2.0 * alpha * 2.0 ** (k - 1))
        )
        se = math.sqrt(float(np.var(p0)) / n)
        assert abs(float(np.mean(p0)) - expected) < 4.0 * se

    def test_trajectory_mean_matches_formula_both_channels(self):
        alpha, k, omega = math.pi / 8.0, 3, -0.9
        params = NoiseParams(delta_x=0.3, gamma_ratio=0.02)
        n = 100_000
        p0 = noise.run_step_trajectories(alpha, k, omega, params, n, RngStream(8, "mc-b", 0))
        expected = 0.5 * (
            1.0
            + noise.damping_factor(alpha, k, params)
            * math.cos(2.0 * alpha * 2.0 ** (k - 1) - omega)
        )
        se = math.sqrt(float(np.var(p0)) / n)
        assert abs(float(np.mean(p0)) - expected) < 4.0 * se

    def test_sampled_bits_match_noisy_bit_prob(self):
        # end to end: draw actual bits from trajectory probabilities and
        # compare the correct-bit frequency with Eq.-style P'_k
        alpha, k = -math.pi / 2.0, 4  # effective phase 0.5, bit 0 correct at k=4
        params = NoiseParams(gamma_ratio=0.1)
        n = 100_000
        rng = RngStream(9, "bits", 0)
        p0 = noise.run_step_trajectories(alpha, k, 0.0, params, n, rng)
        bits = (rng.uniforms(n) >= p0).astype(int)
        freq_correct = float(np.mean(bits == 0))
        expected = noise.noisy_bit_prob(alpha, k, 0.0, params)
        assert abs(freq_correct - expected) < 4.0 * math.sqrt(expected * (1 - expected) / n)
