"""Tests for the Jacobi-Pineiro system.

This module tests:
    - Parameter validation (integrability and the AT condition)
    - Step-line indices and Beta-integral moments
    - Closed-form families against Gauss-Borel
    - Endpoint values and Cauchy transforms at 1
    - Both case-study perturbations through the Uvarov pipeline
"""

from __future__ import annotations

from fractions import Fraction

import pytest

from mopkit.exceptions import ATViolation, BackendUnsupported, IntegrabilityViolation
from mopkit.fields import BigFloatField, RationalField
from mopkit.jacobi_pineiro import (
    JPParams,
    beta_integral,
    jp_boundary_values,
    jp_bundle,
    jp_case_study,
    jp_closed_forms,
    jp_family_check,
    jp_moment,
    jp_stepline,
)


class TestParams:
    """Tests for JPParams."""

    def test_fractions(self) -> None:
        """Verify strings, ints and floats become exact fractions."""
        params = JPParams("1/4", 0, 0.5, 2)
        assert params.alphas == (Fraction(1, 4), Fraction(0), Fraction(1, 2))
        assert params.beta == 2
        assert params.to_json() == {"alpha1": "1/4", "alpha2": "0", "alpha3": "1/2", "beta": "2"}

    def test_integer_gap(self) -> None:
        """Verify alphas differing by an integer break the AT condition."""
        with pytest.raises(ATViolation, match="alpha1 - alpha3"):
            JPParams("1/3", "1/2", "-2/3", 1)

    @pytest.mark.parametrize("values", [(-1, "1/2", "1/3", 1), ("1/4", "1/2", "3/4", "-3/2")])
    def test_not_integrable(self, values: tuple[object, ...]) -> None:
        """Verify exponents at or below -1 are rejected."""
        with pytest.raises(IntegrabilityViolation):
            JPParams(*values)

    def test_not_rational(self) -> None:
        """Verify exponents must be rational."""
        with pytest.raises(TypeError):
            JPParams(None, "1/2", "1/3", 1)

    def test_shifted(self, jp_params: JPParams) -> None:
        """Verify the first perturbation rotates the alphas and lowers beta."""
        shifted = jp_params.shifted()
        assert shifted.alphas == (Fraction(3, 4), Fraction(5, 4), Fraction(3, 2))
        assert shifted.beta == 1


class TestStepLine:
    """Tests for step-line indices."""

    @pytest.mark.parametrize(
        ("n", "counts"),
        [(0, (0, 0, 0)), (1, (1, 0, 0)), (2, (1, 1, 0)), (3, (1, 1, 1)), (4, (2, 1, 1)), (5, (2, 2, 1))],
    )
    def test_counts(self, n: int, counts: tuple[int, int, int]) -> None:
        """Verify the multi-index of each total degree."""
        assert jp_stepline(n).counts == counts

    def test_negative(self) -> None:
        """Verify negative indices are rejected."""
        with pytest.raises(ValueError, match="nonnegative"):
            jp_stepline(-1)


class TestMoments:
    """Tests for Beta-integral moments."""

    def test_first_moment(self, rational: RationalField) -> None:
        """Verify integral x dx = 1/2 for alpha = beta = 0."""
        params = JPParams(0, "1/2", "1/3", 0)
        assert jp_moment(rational, params, 0, 1) == Fraction(1, 2)

    def test_integer_beta(self, rational: RationalField, jp_params: JPParams) -> None:
        """Verify integral x^(1/4) (1-x)^2 = 128/585 exactly."""
        assert jp_moment(rational, jp_params, 0, 0) == Fraction(128, 585)

    def test_exact_needs_integer(self, rational: RationalField) -> None:
        """Verify Gamma quotients with no integer exponent need the float backend."""
        with pytest.raises(BackendUnsupported):
            beta_integral(rational, Fraction(1, 4), Fraction(1, 2))

    def test_float_gamma(self, bigfloat: BigFloatField) -> None:
        """Verify integral (1-x)^(-1/2) = 2."""
        assert bigfloat.close(beta_integral(bigfloat, Fraction(0), Fraction(-1, 2)), 2)


class TestClosedForms:
    """Tests for the explicit families."""

    def test_first_type_II(self, rational: RationalField, jp_params: JPParams) -> None:
        """Verify B_1 is x minus the ratio of the first two moments."""
        poly = jp_closed_forms(rational, jp_params, 1).type_II_poly
        ratio = jp_moment(rational, jp_params, 0, 1) / jp_moment(rational, jp_params, 0, 0)
        assert poly.coeffs == (-ratio, 1)

    def test_empty_type_I(self, rational: RationalField, jp_params: JPParams) -> None:
        """Verify the type I column at n = 0 is zero."""
        assert all(p.is_zero() for p in jp_closed_forms(rational, jp_params, 0).type_I_polys)

    def test_family_check_exact(self, rational: RationalField, jp_params: JPParams) -> None:
        """Verify both closed forms match Gauss-Borel exactly for integer beta."""
        report = jp_family_check(jp_params, 6, rational)
        assert report.ok, report.to_json()
        assert set(report.type_II) == set(range(6))
        assert set(report.type_I) == set(range(1, 6))

    def test_family_check_float(self, bigfloat: BigFloatField) -> None:
        """Verify the closed forms for a half-integer beta at 256 bits."""
        assert jp_family_check(JPParams(0, "1/2", "1/3", "1/2"), 5, bigfloat).ok


class TestBoundaryValues:
    """Tests for endpoint values."""

    def test_value_at_one(self, rational: RationalField, jp_params: JPParams) -> None:
        """Verify P(1) = (beta + 1) / (alpha_1 + beta + 2) for n = 1."""
        report = jp_boundary_values(rational, jp_params, 1)
        assert report.values["P(1)"] == Fraction(12, 17)
        assert report.ok

    def test_beta_zero(self, rational: RationalField) -> None:
        """Verify Cauchy transforms at 1 need beta > 0."""
        with pytest.raises(IntegrabilityViolation, match="beta > 0"):
            jp_boundary_values(rational, JPParams("1/4", "1/2", "3/4", 0), 2)

    def test_float_resolution(self, bigfloat: BigFloatField) -> None:
        """Verify quadrature agrees with the Beta-integral shift."""
        report = jp_boundary_values(bigfloat, JPParams("1/4", "1/2", "3/4", "3/2"), 4)
        assert report.ok, report.to_json()
        assert report.resolution["D0(1)"] == "beta_integral"
        assert "C(1)" in report.checks


class TestBundles:
    """Tests for the case-study bundles."""

    def test_first_is_dual(self, rational: RationalField, jp_params: JPParams) -> None:
        """Verify (c - x) on the left and the cyclic matrix on the right."""
        bundle = jp_bundle(rational, jp_params, "perturbation_1", 1, 0)
        assert bundle.orientation == "dual"
        assert (bundle.M_L, bundle.M_R) == (1, 2)
        bundle.validate()

    def test_second_with_masses(self, rational: RationalField, jp_params: JPParams) -> None:
        """Verify the two masses land on the two chains at c."""
        bundle = jp_bundle(rational, jp_params, "perturbation_2", 1, 0, mass=[[1], [0, 2]])
        assert bundle.orientation == "standard"
        assert sorted(bundle.mass.vectors) == [(0, 0, 0), (0, 1, 0)]
        bundle.validate()

    @pytest.mark.parametrize(
        ("kwargs", "match"),
        [
            ({"which": "perturbation_1", "c": Fraction(1, 2), "d": 0}, "outside"),
            ({"which": "perturbation_2", "c": 1, "d": 0, "mass": [[1]]}, "xi"),
            ({"which": "perturbation_3", "c": 1, "d": 0}, "unknown perturbation"),
        ],
    )
    def test_rejected(self, rational: RationalField, jp_params: JPParams, kwargs: dict, match: str) -> None:
        """Verify bad parameters are refused."""
        with pytest.raises(ValueError, match=match):
            jp_bundle(rational, jp_params, **kwargs)


@pytest.mark.slow
class TestCaseStudy:
    """Both perturbations through the whole pipeline."""

    def test_first_exact(self, rational: RationalField, jp_params: JPParams) -> None:
        """Verify the first perturbation and its parameter shift on the exact backend."""
        report = jp_case_study(jp_params, "perturbation_1", N=5, field=rational)
        assert report.ok, report.to_json()
        assert set(report.shift_gap) == set(range(5))

    def test_second_exact(self, rational: RationalField, jp_params: JPParams) -> None:
        """Verify the second perturbation is not a shifted Jacobi-Pineiro system."""
        report = jp_case_study(jp_params, "perturbation_2", N=5, field=rational)
        assert report.ok, report.to_json()
        assert report.candidate_gap

    def test_first_wide_floats(self) -> None:
        """Verify the first perturbation away from the endpoints at 512 bits."""
        params = JPParams(0, "1/2", "1/3", "1/2")
        report = jp_case_study(params, "perturbation_1", c=2, d=-1, mass=[[1], [0], ["1/2"]], N=6)
        assert report.oracle is not None
        assert report.oracle.ok, report.to_json()
        assert "shift" in report.skipped

    def test_shift_needs_beta_above_one(self, rational: RationalField) -> None:
        """Verify the parameter shift is skipped for beta = 1."""
        report = jp_case_study(JPParams("1/4", "1/2", "3/4", 1), "perturbation_1", N=4, field=rational)
        assert "shift" in report.skipped
