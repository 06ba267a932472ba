"""Tests for perturbation bundles.

This module tests:
    - Band widths and outer constants of L(Lambda) and R(Lambda^T)
    - Leading-form violations and the side they report
    - Mass validation against the spectral data
    - The standard view of a dual bundle
"""

from __future__ import annotations

from fractions import Fraction

import pytest

from mopkit.exceptions import LeadingFormViolation, MissingSpectralData
from mopkit.fields import RationalField
from mopkit.matrix_poly import MatrixPolynomial
from mopkit.measures import MassData, MatrixOfMeasures
from mopkit.numerics import UniPoly
from mopkit.uvarov import PerturbationBundle


class TestBandData:
    """Tests for derived band data."""

    def test_christoffel(self, christoffel: PerturbationBundle) -> None:
        """Verify x - 2 gives one superdiagonal with unit outer constant."""
        assert (christoffel.M_L, christoffel.M_R, christoffel.M) == (1, 0, 1)
        assert christoffel.c(0) == 1
        assert christoffel.c(5) == 1
        assert christoffel.d(3) == 1

    def test_geronimus(self, geronimus: PerturbationBundle) -> None:
        """Verify x + 1 on the right gives one subdiagonal."""
        assert (geronimus.M_L, geronimus.M_R) == (0, 1)
        assert geronimus.d(0) == 1

    def test_scaled_leading_coefficient(self, rational: RationalField, lebesgue: MatrixOfMeasures) -> None:
        """Verify the outer constant is the leading coefficient of L."""
        L = MatrixPolynomial.from_coefficients(rational, [[[1]], [[0]], [[3]]])
        bundle = PerturbationBundle(lebesgue, L, MatrixPolynomial.identity(rational, 1))
        assert bundle.M_L == 2
        assert bundle.c(0) == 3

    def test_swap_outer_constants(self, mixed_christoffel: PerturbationBundle) -> None:
        """Verify the swap's outer superdiagonal alternates between its two unit entries."""
        assert mixed_christoffel.M_L == 1
        assert mixed_christoffel.outer_left == {0: 1, 1: 1}

    def test_leading_forms(self, christoffel: PerturbationBundle) -> None:
        """Verify scalar monic polynomials satisfy the identity template."""
        left, right = christoffel.leading_forms
        assert left.defect == 0
        assert right.defect == 0

    def test_perturbed(self, christoffel: PerturbationBundle) -> None:
        """Verify the perturbed measure has moments of (x - 2) dx."""
        assert christoffel.perturbed.moment(0, 0, 0) == Fraction(-3, 2)
        assert christoffel.perturbed.moment(0, 0, 1) == Fraction(-2, 3)


class TestValidation:
    """Tests for structural validation."""

    def test_size_mismatch(self, rational: RationalField, lebesgue: MatrixOfMeasures) -> None:
        """Verify L must match the measure's row count."""
        with pytest.raises(ValueError, match="measure is 1x1"):
            PerturbationBundle(lebesgue, MatrixPolynomial.identity(rational, 2), MatrixPolynomial.identity(rational, 1))

    def test_wide_left_band(self, rational: RationalField, square_discrete: MatrixOfMeasures) -> None:
        """Verify a unimodular L with a high-degree corner is rejected on the left."""
        L = MatrixPolynomial.from_entries(rational, [[[1], [0, 0, 1]], [[0], [1]]])
        bundle = PerturbationBundle(square_discrete, L, MatrixPolynomial.identity(rational, 2))
        with pytest.raises(LeadingFormViolation) as excinfo:
            bundle.validate()
        assert excinfo.value.side == "L"

    def test_wide_right_band(self, rational: RationalField, square_discrete: MatrixOfMeasures) -> None:
        """Verify the same defect in R is reported on the right."""
        R = MatrixPolynomial.from_entries(rational, [[[1], [0]], [[0, 0, 1], [1]]])
        bundle = PerturbationBundle(square_discrete, MatrixPolynomial.identity(rational, 2), R)
        with pytest.raises(LeadingFormViolation) as excinfo:
            bundle.validate()
        assert excinfo.value.side == "R"

    def test_zero_polynomial(self, rational: RationalField, lebesgue: MatrixOfMeasures) -> None:
        """Verify an identically zero L is rejected."""
        L = MatrixPolynomial.from_coefficients(rational, [[[0]]])
        bundle = PerturbationBundle(lebesgue, L, MatrixPolynomial.identity(rational, 1))
        with pytest.raises(LeadingFormViolation, match="identically zero"):
            bundle.validate()

    def test_mass_on_missing_chain(self, rational: RationalField, lebesgue: MatrixOfMeasures) -> None:
        """Verify a mass keyed to a second chain of a simple eigenvalue is rejected."""
        mass = MassData(1, {(0, 1, 0): (UniPoly.constant(rational, 1),)})
        R = MatrixPolynomial.from_coefficients(rational, [[[1]], [[1]]])
        bundle = PerturbationBundle(lebesgue, MatrixPolynomial.identity(rational, 1), R, mass=mass)
        with pytest.raises(MissingSpectralData):
            bundle.validate()

    def test_valid(self, geronimus: PerturbationBundle) -> None:
        """Verify a well-formed Geronimus bundle passes."""
        geronimus.validate()


class TestOrientation:
    """Tests for the dual orientation."""

    def test_standard_is_identity(self, christoffel: PerturbationBundle) -> None:
        """Verify a standard bundle is its own standard view."""
        assert christoffel.standard() is christoffel

    def test_dual_transposes(self, dual_christoffel_bundle: PerturbationBundle) -> None:
        """Verify the dual view swaps block sizes and moves R to the left."""
        std = dual_christoffel_bundle.standard()
        assert (std.q, std.p) == (1, 2)
        assert std.orientation == "standard"
        assert (std.M_L, std.M_R) == (1, 0)
        assert dual_christoffel_bundle.standard() is std

    def test_repr(self, dual_christoffel_bundle: PerturbationBundle) -> None:
        """Verify the repr names the orientation."""
        assert "orientation='dual'" in repr(dual_christoffel_bundle)
