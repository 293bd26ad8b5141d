"""Diagonal susceptibility assembly and the route cross-checks."""
import math

import pytest

from ising_lab import CouplingK, DomainError, chi_d, sweep

# frozen regression value for the Fredholm route at tol 1e-8
_CHI_03 = 0.024149147835178963


class TestFreeLimit:
    def test_all_routes_exactly_zero(self):
        k = CouplingK.physical(0.0)
        for route in ("fredholm", "toeplitz_direct", "integral"):
            res = chi_d(k, 1e-8, route)
            assert res.beta_inv_chi_d == 0.0
            assert not res.flagged


class TestRouteAgreement:
    def test_determinant_routes(self):
        k = CouplingK.physical(0.3)
        a = chi_d(k, 1e-8, "fredholm").beta_inv_chi_d
        b = chi_d(k, 1e-8, "toeplitz_direct").beta_inv_chi_d
        assert abs(a - b) < 1e-8 * abs(a)

    def test_integral_route(self):
        k = CouplingK.physical(0.3)
        a = chi_d(k, 1e-8, "fredholm").beta_inv_chi_d
        c = chi_d(k, 1e-8, "integral").beta_inv_chi_d
        assert abs(a - c) < 1e-6 * abs(a)

    def test_frozen_regression(self):
        got = chi_d(CouplingK.physical(0.3), 1e-8, "fredholm").beta_inv_chi_d
        assert abs(got - _CHI_03) < 1e-9

    def test_unknown_route_rejected(self):
        with pytest.raises(DomainError):
            chi_d(CouplingK.physical(0.3), 1e-8, "bogus")


class TestResultContract:
    def test_metadata_populated(self):
        res = chi_d(CouplingK.physical(0.4), 1e-8, "fredholm")
        assert res.route == "fredholm"
        assert res.terms_used > 0
        assert res.est_error >= 0.0
        assert isinstance(res.beta_inv_chi_d, float)

    def test_growth_with_modulus(self):
        vals = [
            chi_d(CouplingK.physical(kv), 1e-8, "toeplitz_direct").beta_inv_chi_d
            for kv in (0.1, 0.3, 0.5)
        ]
        assert vals[0] < vals[1] < vals[2]
        assert all(v > 0.0 for v in vals)

    def test_tightening_tolerance_stabilizes(self):
        k = CouplingK.physical(0.5)
        loose = chi_d(k, 1e-6, "fredholm")
        tight = chi_d(k, 1e-11, "fredholm")
        assert abs(loose.beta_inv_chi_d - tight.beta_inv_chi_d) < 2e-6
        assert tight.est_error < loose.est_error


class TestSweep:
    def test_grid_values_finite_and_real(self):
        grid = [0.0, 0.1, 0.3, 0.5]
        rows = sweep(grid, "fredholm", 1e-8)
        assert len(rows) == 4
        assert rows[0].beta_inv_chi_d == 0.0
        for row in rows[1:]:
            assert math.isfinite(row.beta_inv_chi_d)
            assert row.beta_inv_chi_d > 0.0
            assert not row.flagged

    def test_empty_grid(self):
        assert sweep([], "fredholm", 1e-8) == []

    def test_bad_point_flagged_not_fatal(self):
        rows = sweep([0.3, 1.5], "toeplitz_direct", 1e-8)
        assert len(rows) == 2
        assert not rows[0].flagged
        assert rows[1].flagged
        assert math.isnan(complex(rows[1].beta_inv_chi_d).real)

    def test_routes_agree_across_grid(self):
        grid = [0.2, 0.4]
        a = sweep(grid, "fredholm", 1e-9)
        b = sweep(grid, "toeplitz_direct", 1e-9)
        for ra, rb in zip(a, b):
            assert abs(ra.beta_inv_chi_d - rb.beta_inv_chi_d) < 1e-7 * abs(
                ra.beta_inv_chi_d
            )
