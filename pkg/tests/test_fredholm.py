"""Hankel-product determinants det(I - K_N) and the correlation-sum S."""
import numpy as np
import pytest

from ising_lab import (
    CouplingK,
    diagonal_correlation,
    fredholm_det,
    hankel_matrix,
    lambda_series,
    magnetization,
    s_via_fredholm,
    suggest_length,
)

# frozen from an early tight-tolerance run; guards the whole summation chain
_S_AT_03 = 0.00043373685662451145


def _series_pair(kv: float, N: int, cutoff: int):
    k = CouplingK.physical(kv)
    length = suggest_length(kv) + N + 2 * cutoff + 4
    return k, lambda_series(k, length)


class TestHankelStructure:
    def test_antidiagonal_constancy(self):
        _, (lam, _) = _series_pair(0.5, 2, 8)
        h = hankel_matrix(lam, 2, 8)
        assert h.entries[2, 3] == h.entries[1, 4] == h.entries[0, 5]
        assert h.entries[0, 1] == h.entries[1, 0]

    def test_corner_is_first_omitted_degree(self):
        _, (lam, _) = _series_pair(0.5, 1, 8)
        h = hankel_matrix(lam, 1, 8)
        # degrees start one past the window: entry (0,0) sits at degree N+1
        assert h.entries[0, 0] == lam.coeff(2)
        assert h.entries[0, 1] == lam.coeff(3)

    def test_zero_modulus_gives_zero_matrix(self):
        _, (lam, _) = _series_pair(0.0, 1, 6)
        h = hankel_matrix(lam, 1, 6)
        assert np.all(h.entries == 0.0)

    def test_short_series_is_loud(self):
        k = CouplingK.physical(0.5)
        lam, _ = lambda_series(k, 10)
        with pytest.raises(Exception, match="degree"):
            hankel_matrix(lam, 2, 16)

    def test_tail_bound_covers_omitted_entries(self):
        _, (lam, _) = _series_pair(0.5, 1, 6)
        h = hankel_matrix(lam, 1, 6)
        omitted = sum(abs(lam.coeff(m)) for m in range(14, 40))
        assert h.tail_bound >= omitted


class TestDeterminant:
    def test_free_modulus_exact(self):
        res = fredholm_det(CouplingK.physical(0.0), 3, 1e-10)
        assert res.det_value == 1.0

    def test_trace_identity_leading_order(self):
        # det(I-K) = 1 - tr K + O(k^8); tr K_N = sum (m-N) lam_m laminv_m
        kv, N = 0.2, 1
        k, (lam, lam_inv) = _series_pair(kv, N, 40)
        tr = sum(
            (m - N) * lam.coeff(m) * lam_inv.coeff(m)
            for m in range(N + 1, lam.max_degree)
        )
        det = fredholm_det(k, N, 1e-14).det_value
        assert abs(tr) > 1e-7
        assert abs(det - 1.0 + tr) < kv ** 8

    def test_second_order_expansion(self):
        for kv, N in ((0.25, 1), (0.25, 2)):
            k, (lam, lam_inv) = _series_pair(kv, N, 40)
            A = hankel_matrix(lam, N, 40).entries
            B = hankel_matrix(lam_inv, N, 40).entries
            K = A @ B
            first = np.trace(K)
            second = 0.0
            for p in range(40):
                for q in range(p + 1, 40):
                    second += K[p, p] * K[q, q] - K[p, q] * K[q, p]
            det = fredholm_det(k, N, 1e-14).det_value
            assert abs(det - (1.0 - first + second)) < 1e-12

    def test_cutoff_refinement_converges(self):
        k, (lam, lam_inv) = _series_pair(0.6, 1, 64)
        gaps = []
        ref = None
        for cut in (8, 16, 32):
            A = hankel_matrix(lam, 1, cut).entries
            B = hankel_matrix(lam_inv, 1, cut).entries
            sign, logdet = np.linalg.slogdet(np.eye(cut) - A @ B)
            val = sign * np.exp(logdet)
            if ref is not None:
                gaps.append(abs(val - ref))
            ref = val
        assert gaps[1] < gaps[0]
        assert abs(ref - fredholm_det(k, 1, 1e-13).det_value) < 1e-10

    def test_deficit_shrinks_with_separation(self):
        k = CouplingK.physical(0.5)
        prev = None
        for N in range(1, 8):
            deficit = abs(fredholm_det(k, N, 1e-12).det_value - 1.0)
            if prev is not None:
                assert deficit < 0.5 * prev
            prev = deficit

    def test_conjugation_symmetry(self):
        up = fredholm_det(CouplingK.analytic(0.3 + 0.2j), 2, 1e-11).det_value
        dn = fredholm_det(CouplingK.analytic(0.3 - 0.2j), 2, 1e-11).det_value
        assert abs(up - np.conj(dn)) < 1e-12

    def test_error_estimate_reported(self):
        res = fredholm_det(CouplingK.physical(0.5), 2, 1e-10)
        assert res.est_error <= 1e-10
        assert res.cutoff_used >= 4


class TestFactorizationIdentity:
    """Toeplitz value equals M^2 det(I - K_N) for every separation."""

    def test_identity_on_grid(self):
        for kv in (0.2, 0.5):
            k = CouplingK.physical(kv)
            m2 = magnetization(k) ** 2
            for N in (1, 2, 4):
                t = diagonal_correlation(k, N).value
                f = m2 * fredholm_det(k, N, 1e-12).det_value.real
                assert abs(t - f) / abs(t) < 1e-9


class TestCorrelationSum:
    def test_free_modulus_is_zero(self):
        assert s_via_fredholm(CouplingK.physical(0.0), 1e-10) == 0.0

    def test_frozen_tight_value(self):
        s = s_via_fredholm(CouplingK.physical(0.3), 1e-13)
        assert abs(s - _S_AT_03) < 1e-12

    def test_loose_tolerance_contract(self):
        s = s_via_fredholm(CouplingK.physical(0.3), 1e-9)
        assert abs(s - _S_AT_03) < 2e-9

    def test_scaling_with_modulus(self):
        # leading behavior ~ k^4, so halving k cuts S by roughly 16
        hi = s_via_fredholm(CouplingK.physical(0.2), 1e-12)
        lo = s_via_fredholm(CouplingK.physical(0.1), 1e-12)
        ratio = abs(hi) / abs(lo)
        assert 10.0 < ratio < 22.0
