"""Modulus handling, series generators, and their independent oracles."""
import cmath
import math

import numpy as np
import pytest

from ising_lab import (
    CouplingK,
    DomainError,
    PhaseError,
    binomial_half_series,
    k_from_temperature,
    lambda_series,
    magnetization,
    phi_m,
    suggest_length,
)
from ising_lab.params import (
    decay_constant,
    geometric_tail,
    phi_minus_series,
    phi_plus_series,
)


class TestCouplingK:
    def test_physical_roundtrip(self):
        k = CouplingK.physical(0.3)
        assert k.mode == "physical"
        assert k.k == 0.3
        assert k.kappa == 0.3 * 0.3

    def test_physical_rejects_negative(self):
        with pytest.raises(DomainError):
            CouplingK.physical(-0.1)

    def test_physical_rejects_unit(self):
        with pytest.raises(DomainError):
            CouplingK.physical(1.0)

    def test_analytic_accepts_complex(self):
        k = CouplingK.analytic(0.2 + 0.4j)
        assert k.mode == "analytic"
        assert k.kappa == (0.2 + 0.4j) ** 2

    def test_analytic_rejects_outside_disk(self):
        with pytest.raises(DomainError):
            CouplingK.analytic(0.8 + 0.7j)


class TestKFromTemperature:
    def test_matches_sinh_formula(self):
        betaJ = 1.0
        s = math.sinh(2.0)
        got = k_from_temperature(betaJ)
        assert abs(got.k - 1.0 / (s * s)) < 1e-16

    def test_half_asinh_two_gives_quarter(self):
        # sinh(2 betaJ) = 2 puts the modulus at exactly 1/4
        betaJ = 0.5 * math.asinh(2.0)
        got = k_from_temperature(betaJ)
        assert abs(got.k - 0.25) < 1e-15

    def test_critical_point_rejected(self):
        betaJ_c = 0.5 * math.asinh(1.0)
        with pytest.raises(PhaseError):
            k_from_temperature(betaJ_c)

    def test_high_temperature_rejected(self):
        with pytest.raises(PhaseError):
            k_from_temperature(0.2)

    def test_zero_temperature_limit(self):
        assert abs(k_from_temperature(8.0).k) < 1e-13

    def test_nonpositive_rejected(self):
        with pytest.raises(DomainError):
            k_from_temperature(0.0)


class TestMagnetization:
    def test_known_value(self):
        m = magnetization(CouplingK.physical(0.6))
        assert abs(m - (1.0 - 0.36) ** 0.125) < 1e-16

    def test_free_limit(self):
        assert magnetization(CouplingK.physical(0.0)) == 1.0

    def test_eighth_power_identity_complex(self):
        k = CouplingK.analytic(0.3j)
        m = magnetization(k)
        assert abs(m ** 8 - (1.0 - k.kappa)) < 1e-14


class TestBinomialHalfSeries:
    """Coefficients checked against hand-reduced rationals."""

    def test_inverse_sqrt_constants(self):
        k = 0.5
        s = binomial_half_series(-0.5, k, 6)
        expected = [1.0, k / 2, 3 * k ** 2 / 8, 5 * k ** 3 / 16, 35 * k ** 4 / 128]
        for m, want in enumerate(expected):
            assert abs(s.coeff(m) - want) < 1e-15

    def test_plus_sqrt_constants(self):
        k = 0.5
        s = binomial_half_series(0.5, k, 6)
        expected = [1.0, -k / 2, -k ** 2 / 8, -k ** 3 / 16, -5 * k ** 4 / 128]
        for m, want in enumerate(expected):
            assert abs(s.coeff(m) - want) < 1e-15

    def test_product_is_identity(self):
        # (1-u)^(1/2) (1-u)^(-1/2) = 1 order by order
        plus = binomial_half_series(0.5, 0.4, 30)
        minus = binomial_half_series(-0.5, 0.4, 30)
        prod = np.convolve(np.asarray(plus.coeffs), np.asarray(minus.coeffs))[:30]
        assert abs(prod[0] - 1.0) < 1e-15
        assert np.max(np.abs(prod[1:])) < 1e-15

    def test_window_and_degree_bookkeeping(self):
        s = binomial_half_series(-0.5, 0.3, 8)
        assert s.min_degree == 0
        assert s.max_degree == 7
        w = s.window(2, 4)
        assert w.shape == (3,)
        assert w[0] == s.coeff(2)
        assert s.coeff(50) == 0.0


def _contour_coefficient(k: float, m: int, nodes: int = 2048) -> complex:
    """Trapezoidal contour oracle for the Fourier coefficient of phi."""
    theta = 2.0 * np.pi * np.arange(nodes) / nodes
    xi = np.exp(1j * theta)
    phi = np.sqrt(1.0 - k / xi) / np.sqrt(1.0 - k * xi)
    return np.mean(phi * np.exp(-1j * m * theta))


class TestPhiSeries:
    def test_against_contour_integral(self):
        k = CouplingK.physical(0.4)
        for m in range(-6, 7):
            oracle = _contour_coefficient(0.4, m)
            assert abs(phi_m(k, m) - oracle) < 1e-12

    def test_leading_coefficient(self):
        k = CouplingK.physical(0.2)
        # phi_0 = 1 - k^2/4 + O(k^4)
        assert abs(phi_m(k, 0) - 1.0 + 0.25 * 0.04) < 1e-3

    def test_plus_side_truncates_cleanly(self):
        plus = phi_plus_series(CouplingK.physical(0.5), 40)
        assert plus.min_degree == 0
        assert abs(plus.coeff(39)) < abs(plus.coeff(5))

    def test_minus_side_degrees(self):
        minus = phi_minus_series(CouplingK.physical(0.5), 40)
        assert minus.min_degree == -39
        assert minus.coeff(1) == 0.0


class TestLambdaSeries:
    def test_symmetry_exact(self):
        lam, lam_inv = lambda_series(CouplingK.physical(0.5), 48)
        for m in range(1, 20):
            assert lam.coeff(m) == lam.coeff(-m)
            assert lam_inv.coeff(m) == lam_inv.coeff(-m)

    def test_pointwise_on_circle(self):
        k = 0.5
        lam, lam_inv = lambda_series(CouplingK.physical(k), 160)
        for theta in (0.3, 1.1):
            xi = cmath.exp(1j * theta)
            direct = cmath.sqrt((1.0 - k * xi) * (1.0 - k / xi))
            total = sum(
                lam.coeff(m) * xi ** m for m in range(lam.min_degree, lam.max_degree + 1)
            )
            assert abs(total - direct) < 1e-12
            total_inv = sum(
                lam_inv.coeff(m) * xi ** m
                for m in range(lam_inv.min_degree, lam_inv.max_degree + 1)
            )
            assert abs(total_inv - 1.0 / direct) < 1e-12

    def test_convolution_is_identity(self):
        lam, lam_inv = lambda_series(CouplingK.physical(0.4), 80)
        a = np.asarray(lam.coeffs)
        b = np.asarray(lam_inv.coeffs)
        prod = np.convolve(a, b)
        mid = len(prod) // 2
        assert abs(prod[mid] - 1.0) < 1e-13
        window = np.delete(prod[mid - 20 : mid + 21], 20)
        assert np.max(np.abs(window)) < 1e-13

    def test_real_for_physical_modulus(self):
        lam, lam_inv = lambda_series(CouplingK.physical(0.6), 64)
        assert np.max(np.abs(np.imag(np.asarray(lam.coeffs)))) < 1e-15
        assert np.max(np.abs(np.imag(np.asarray(lam_inv.coeffs)))) < 1e-15

    def test_coefficient_decay_rate(self):
        lam, _ = lambda_series(CouplingK.physical(0.5), 80)
        rate = decay_constant(lam, 0.5)
        assert 0.1 < rate < 3.0


class TestTruncationControl:
    def test_suggest_length_meets_target(self):
        for k in (0.1, 0.5, 0.8):
            n = suggest_length(k)
            assert k ** n / (1.0 - k) < 1e-16

    def test_suggest_length_monotone(self):
        assert suggest_length(0.7) > suggest_length(0.3)

    def test_geometric_tail_bounds_actual(self):
        lam, _ = lambda_series(CouplingK.physical(0.5), 200)
        cut = 30
        actual = sum(abs(lam.coeff(m)) for m in range(cut + 1, 200))
        bound = geometric_tail(lam, 0.5, cut)
        assert bound >= actual

    def test_truncation_error_recorded(self):
        short = phi_plus_series(CouplingK.physical(0.5), 12)
        assert short.truncation_error > 1e-8
