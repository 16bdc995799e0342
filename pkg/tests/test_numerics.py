"""Normal-distribution kernel and quadrature/root-finding wrappers."""
import math

import pytest

from tte3 import (
    ConvergenceError,
    BracketingError,
    InvalidParameterError,
    QuadratureSettings,
    find_root,
    integrate,
    normal_cdf,
    normal_pdf,
    normal_quantile,
)
from tte3.numerics import DEFAULT_QUADRATURE, require_probability

import golden


def erf_cdf(x: float) -> float:
    return 0.5 * (1.0 + math.erf(x / math.sqrt(2.0)))


class TestNormalPdf:
    def test_standard_at_one(self):
        golden.assert_close(
            normal_pdf(1.0), golden.NPDF_AT_1, 1e-15, "pdf(1)"
        )

    def test_peak_value(self):
        assert normal_pdf(0.0) == pytest.approx(1.0 / math.sqrt(2.0 * math.pi), abs=1e-16)

    def test_location_scale(self):
        # f(x; m, s) = f((x-m)/s; 0, 1) / s
        x, m, s = 0.7, -1.3, 2.5
        expected = normal_pdf((x - m) / s) / s
        assert normal_pdf(x, mean=m, sd=s) == pytest.approx(expected, rel=1e-15)

    def test_symmetry(self):
        assert normal_pdf(1.7) == normal_pdf(-1.7)

    def test_rejects_bad_sd(self):
        with pytest.raises(InvalidParameterError):
            normal_pdf(0.0, sd=0.0)
        with pytest.raises(InvalidParameterError):
            normal_pdf(0.0, sd=-1.0)


class TestNormalCdf:
    def test_matches_erf_route(self):
        # cross-check against math.erf, a separate implementation
        for x in [-6.0, -3.0, -1.0, -0.1, 0.0, 0.25, 1.0, 2.5, 6.0]:
            assert normal_cdf(x) == pytest.approx(erf_cdf(x), abs=1e-15)

    def test_median(self):
        assert normal_cdf(0.0) == 0.5

    def test_location_scale(self):
        assert normal_cdf(3.0, mean=3.0, sd=10.0) == 0.5
        assert normal_cdf(5.0, mean=3.0, sd=2.0) == pytest.approx(
            normal_cdf(1.0), rel=1e-15
        )

    def test_rejects_bad_sd(self):
        with pytest.raises(InvalidParameterError):
            normal_cdf(0.0, sd=0.0)


class TestNormalQuantile:
    def test_frozen_points(self):
        golden.assert_close(
            normal_quantile(0.05), golden.Z_OF_005, 1e-12, "quantile(0.05)"
        )
        golden.assert_close(
            normal_quantile(0.15), golden.Z_OF_015, 1e-12, "quantile(0.15)"
        )
        golden.assert_close(
            normal_quantile(0.75), golden.Z_OF_075, 1e-12, "quantile(0.75)"
        )

    def test_median(self):
        assert normal_quantile(0.5) == 0.0

    def test_round_trip_z_side(self):
        # the upper tail is the hard direction: a bare float near 1 is
        # quantized at ~1.1e-16, which alone would limit recovery of z
        # to ~1e-8 at z=6; the carried complement removes that floor
        for z in [x / 8.0 for x in range(-48, 49)]:
            assert normal_quantile(normal_cdf(z)) == pytest.approx(z, abs=1e-9)

    def test_round_trip_p_side(self):
        for p in [1e-6, 0.01, 0.15, 0.5, 0.85, 0.99, 1.0 - 1e-6]:
            assert normal_cdf(normal_quantile(p)) == pytest.approx(p, abs=1e-10)

    def test_rejects_boundary_and_out_of_range(self):
        for bad in [0.0, 1.0, -0.2, 1.2, math.nan]:
            with pytest.raises(InvalidParameterError):
                normal_quantile(bad)


class TestRequireProbability:
    def test_open_interval_default(self):
        require_probability(0.5, "p")
        with pytest.raises(InvalidParameterError, match="p"):
            require_probability(0.0, "p")

    def test_zero_allowed_when_requested(self):
        require_probability(0.0, "p", allow_zero=True)
        with pytest.raises(InvalidParameterError):
            require_probability(1.0, "p", allow_zero=True)

    def test_rejects_nan(self):
        with pytest.raises(InvalidParameterError):
            require_probability(math.nan, "p", allow_zero=True)


class TestQuadratureSettings:
    def test_defaults(self):
        assert DEFAULT_QUADRATURE.absolute_tolerance == 1e-9
        assert DEFAULT_QUADRATURE.truncation_sigmas >= 6.0

    def test_validation(self):
        with pytest.raises(InvalidParameterError):
            QuadratureSettings(absolute_tolerance=0.0)
        with pytest.raises(InvalidParameterError):
            QuadratureSettings(max_subdivisions=0)
        with pytest.raises(InvalidParameterError):
            QuadratureSettings(truncation_sigmas=2.0)


class TestIntegrate:
    def test_gaussian_total_mass(self):
        mass = integrate(normal_pdf, -math.inf, math.inf, proxy_mean=0.0, proxy_sd=1.0)
        assert mass == pytest.approx(1.0, abs=1e-9)

    def test_gaussian_second_moment(self):
        second = integrate(
            lambda x: x * x * normal_pdf(x),
            -math.inf,
            math.inf,
            proxy_mean=0.0,
            proxy_sd=1.0,
        )
        assert second == pytest.approx(1.0, abs=1e-8)

    def test_finite_interval(self):
        assert integrate(lambda x: x, 0.0, 1.0) == pytest.approx(0.5, abs=1e-12)

    def test_truncation_when_range_is_far_away(self):
        # proxy window [mean - k*sd, mean + k*sd] misses [50, 60] entirely
        value = integrate(
            normal_pdf, 50.0, 60.0, proxy_mean=0.0, proxy_sd=1.0
        )
        assert value == 0.0

    def test_rejects_reversed_bounds(self):
        with pytest.raises(InvalidParameterError):
            integrate(lambda x: x, 1.0, 0.0)

    def test_nonconvergence_raises_with_estimate(self):
        settings = QuadratureSettings(absolute_tolerance=1e-12, max_subdivisions=1)
        with pytest.raises(ConvergenceError) as excinfo:
            integrate(
                lambda x: math.sin(50.0 * x) ** 2,
                0.0,
                100.0,
                settings=settings,
            )
        # the true value is 50 - sin(10000)/200, roughly 50.5
        assert excinfo.value.best_estimate == pytest.approx(50.5, abs=2.0)


class TestFindRoot:
    def test_cosine_root(self):
        root = find_root(math.cos, 0.0, 3.0, tolerance=1e-12)
        assert root == pytest.approx(math.pi / 2.0, abs=1e-10)

    def test_cubic_root_through_zero_slope(self):
        root = find_root(lambda x: x ** 3, -1.0, 2.0, tolerance=1e-10)
        assert abs(root) <= 1e-10

    def test_quantile_by_root_finding(self):
        # independent route to the 0.15 quantile used across the suite
        root = find_root(lambda x: normal_cdf(x) - 0.15, -10.0, 10.0, tolerance=1e-12)
        golden.assert_close(root, golden.Z_OF_015, 1e-8, "root-found quantile")

    def test_endpoint_root_short_circuit(self):
        assert find_root(lambda x: x, 0.0, 1.0, tolerance=1e-9) == 0.0
        assert find_root(lambda x: x - 1.0, 0.0, 1.0, tolerance=1e-9) == 1.0

    def test_no_sign_change(self):
        with pytest.raises(BracketingError):
            find_root(lambda x: 1.0 + x * x, -1.0, 1.0, tolerance=1e-9)

    def test_argument_validation(self):
        with pytest.raises(InvalidParameterError):
            find_root(math.cos, 2.0, 1.0, tolerance=1e-9)
        with pytest.raises(InvalidParameterError):
            find_root(math.cos, 0.0, 3.0, tolerance=0.0)
