import math

import numpy as np
import pytest

from trilayer.errors import CapExceeded, NonMonotoneTarget, OutOfRange
from trilayer.radial import (
    closed_form_linear_annulus,
    closed_form_linear_annulus_slope,
    closed_form_linear_center,
    closed_form_linear_center_slope,
    flux_at,
    integrate_radial,
    until_radius,
    until_value,
)

from conftest import central_diff


class TestClosedForms:
    def test_center_values(self):
        assert closed_form_linear_center(1.0, 0.2, 0.0) == 0.2
        assert closed_form_linear_center(1.0, 0.2, 1.0) == pytest.approx(
            0.2 * math.sinh(1.0), rel=1e-15
        )
        assert closed_form_linear_center(4.0, 1.0, 0.5) == pytest.approx(
            math.sinh(1.0), rel=1e-15
        )

    def test_center_series_matches_direct(self):
        # continuity across the small-argument series switch
        lam, u0 = 1.0, 0.7
        below, above = 0.99e-4, 1.01e-4
        assert closed_form_linear_center(lam, u0, below) == pytest.approx(
            u0 * math.sinh(below) / below, rel=1e-14
        )
        assert closed_form_linear_center(lam, u0, above) == pytest.approx(
            u0 * math.sinh(above) / above, rel=1e-14
        )

    def test_annulus_values(self):
        assert closed_form_linear_annulus(0.5, 2.0, 0.3, 2.0) == 0.3
        assert closed_form_linear_annulus(1.0, 1.0, 1.0, 2.0) == pytest.approx(
            math.e / 2.0, rel=1e-15
        )

    def test_annulus_slope_zero_at_start(self):
        assert closed_form_linear_annulus_slope(1.0, 1.0, 1.0, 1.0) == 0.0
        # no-flux start: forward difference vanishes linearly in the step
        fd = (closed_form_linear_annulus(1.0, 1.0, 1.0, 1.0 + 1e-6) - 1.0) / 1e-6
        assert abs(fd) < 1e-5

    def test_slopes_match_finite_differences(self):
        for lam, u0, r in [(0.5, 0.2, 1.3), (2.0, 1.0, 0.7)]:
            fd = central_diff(lambda x: closed_form_linear_center(lam, u0, x), r, 1e-6)
            assert closed_form_linear_center_slope(lam, u0, r) == pytest.approx(fd, rel=1e-8)


LAMBDAS = (0.5, 1.0, 2.0)
STARTS = (0.1, 0.2, 1.0)


class TestOracleEquivalence:
    @pytest.mark.parametrize("lam", LAMBDAS)
    @pytest.mark.parametrize("u0", STARTS)
    def test_center_arc(self, lam, u0):
        sol = integrate_radial(lambda u: lam * u, 0.0, u0, 0.0, until_value(4.0 * u0))
        for r in np.linspace(sol.start_r, sol.end_r, 57):
            r = float(r)
            exact = closed_form_linear_center(lam, u0, r)
            slope = closed_form_linear_center_slope(lam, u0, r)
            assert abs(sol.value(r) - exact) <= 1e-8 * exact
            assert abs(sol.slope(r) - slope) <= 1e-8 * max(slope, 1e-3)

    @pytest.mark.parametrize("lam", LAMBDAS)
    @pytest.mark.parametrize("u0", STARTS)
    def test_annulus_arc(self, lam, u0):
        rho = 0.8
        sol = integrate_radial(lambda u: lam * u, rho, u0, 0.0, until_value(4.0 * u0))
        for r in np.linspace(rho, sol.end_r, 57):
            r = float(r)
            exact = closed_form_linear_annulus(lam, rho, u0, r)
            slope = closed_form_linear_annulus_slope(lam, rho, u0, r)
            assert abs(sol.value(r) - exact) <= 1e-8 * exact
            assert abs(sol.slope(r) - slope) <= 1e-8 * max(slope, 1e-3)


class TestIntegrate:
    def test_zero_length_arc(self):
        sol = integrate_radial(lambda u: 0.5 * u, 2.0, 0.2, 0.0, until_radius(2.0))
        assert sol.end_r == 2.0
        assert sol.end_u == 0.2
        assert sol.end_du == 0.0
        assert sol.growth_integral == 0.0

    def test_threshold_residual(self):
        sol = integrate_radial(lambda u: 0.5 * u, 0.0, 0.2, 0.0, until_value(0.5))
        assert sol.stop_reason.kind == "hit_threshold"
        assert abs(sol.end_u - 0.5) <= 1e-12 * 0.5

    def test_until_radius_lands_exactly(self):
        sol = integrate_radial(lambda u: u, 0.0, 1.0, 0.0, until_radius(3.0))
        assert sol.stop_reason.kind == "reached_radius"
        assert sol.end_r == 3.0

    def test_non_monotone_target(self):
        with pytest.raises(NonMonotoneTarget):
            integrate_radial(lambda u: u, 0.0, 1.0, 0.0, until_value(1.0))

    def test_cap_exceeded(self):
        with pytest.raises(CapExceeded):
            integrate_radial(lambda u: u, 1.0, 1.0, 0.0, until_value(100.0, cap=1.5))

    def test_precondition_checks(self):
        with pytest.raises(ValueError):
            integrate_radial(lambda u: u, 0.0, 1.0, 0.5, until_radius(1.0))
        with pytest.raises(ValueError):
            integrate_radial(lambda u: u, 1.0, -0.1, 0.0, until_radius(2.0))

    def test_grid_strictly_increasing(self):
        sol = integrate_radial(lambda u: u, 0.0, 0.5, 0.0, until_value(5.0))
        assert np.all(np.diff(sol.r_grid) > 0.0)
        assert np.all(sol.du >= 0.0)

    def test_dense_output_consistent_at_grid(self):
        # interpolant must reproduce the stored step endpoints
        sol = integrate_radial(lambda u: 0.7 * u, 0.5, 0.3, 0.0, until_value(2.0))
        for i in range(len(sol.r_grid)):
            r = float(sol.r_grid[i])
            assert sol.value(r) == pytest.approx(float(sol.u[i]), rel=1e-13, abs=1e-15)
            assert sol.slope(r) == pytest.approx(float(sol.du[i]), rel=1e-12, abs=1e-13)

    def test_divergence_terminates(self):
        # solutions blow up, so any higher target is eventually reached
        for mult in (2.0, 10.0, 100.0):
            sol = integrate_radial(
                lambda u: 0.5 * u, 0.0, 0.2, 0.0, until_value(0.2 * mult, cap=1e6)
            )
            assert sol.stop_reason.kind == "hit_threshold"


class TestFlux:
    def test_zero_at_start(self):
        sol = integrate_radial(lambda u: u, 1.0, 0.2, 0.0, until_value(0.6))
        assert flux_at(sol, 1.0) == 0.0

    def test_monotone_when_h_positive(self):
        sol = integrate_radial(lambda u: u, 0.0, 0.2, 0.0, until_value(1.5))
        rs = np.linspace(sol.start_r, sol.end_r, 23)
        fluxes = [flux_at(sol, float(r)) for r in rs]
        assert all(b > a for a, b in zip(fluxes[1:], fluxes[2:]))

    def test_against_analytic_derivative(self):
        lam, u0 = 1.0, 0.2
        sol = integrate_radial(lambda u: lam * u, 0.0, u0, 0.0, until_value(1.0))
        for r in (0.3, 0.9, 1.7):
            assert flux_at(sol, r) == pytest.approx(
                closed_form_linear_center_slope(lam, u0, r), rel=1e-8
            )

    def test_out_of_range(self):
        sol = integrate_radial(lambda u: u, 1.0, 0.2, 0.0, until_value(0.6))
        with pytest.raises(OutOfRange):
            flux_at(sol, 0.5)
        with pytest.raises(OutOfRange):
            flux_at(sol, sol.end_r * 1.1)


class TestInvariants:
    def test_convexity_surrogate(self):
        # u'' - u'/r = h(u) - 3u'/r stays positive on arcs with h > 0
        h = lambda u: 0.5 * u
        for r0 in (0.0, 1.0):
            sol = integrate_radial(h, r0, 0.2, 0.0, until_value(1.0))
            for i in range(1, len(sol.r_grid) - 1):
                r, u, v = float(sol.r_grid[i]), float(sol.u[i]), float(sol.du[i])
                upp = h(u) - 2.0 * v / r
                assert upp - v / r > -1e-9 * abs(h(u))

    def test_growth_integral_vs_quadrature(self):
        from scipy.integrate import quad

        S = lambda u: 1.0 * (u - 1.0)
        sol = integrate_radial(
            lambda u: u, 1.0, 0.5, 0.3, until_value(3.0), growth=S
        )
        ref, err = quad(
            lambda r: S(sol.value(r)) * r * r, sol.start_r, sol.end_r,
            limit=200, epsabs=1e-13, epsrel=1e-12,
        )
        assert sol.growth_integral == pytest.approx(ref, rel=1e-8)

    def test_growth_running_values(self):
        sol = integrate_radial(
            lambda u: u, 0.0, 0.5, 0.0, until_value(2.0), growth=lambda u: u
        )
        # running integral is nondecreasing for a positive integrand
        assert np.all(np.diff(sol.growth) > 0.0)
        assert sol.growth_at(sol.end_r) == pytest.approx(sol.growth_integral, rel=1e-13)
