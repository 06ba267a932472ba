"""Tests for matrices of measures and the perturbed functional.

This module tests:
    - Moments of atoms, deltas and closed-form weights
    - Cauchy pairings and their failure modes
    - Discrete and continuous perturbations, with and without masses
    - Eigenvalues of R on atoms, cancelled by L or refused
"""

from __future__ import annotations

from fractions import Fraction

import pytest

from mopkit.exceptions import BackendUnsupported, IntegrabilityViolation, MissingSpectralData, PoleOnSupport
from mopkit.fields import BigFloatField, RationalField
from mopkit.matrix_poly import MatrixPolynomial
from mopkit.measures import (
    DeltaTerm,
    MassData,
    MatrixOfMeasures,
    cauchy_pairing,
    discrete_measure,
    lebesgue_measure,
    moment_of_entry,
    pair_integrate,
    perturb_measure,
)
from mopkit.numerics import UniPoly

from .conftest import scalar_poly


def two_atoms(field: RationalField) -> MatrixOfMeasures:
    """Unit atoms at 0 and 1."""
    return discrete_measure(field, [[[(0, 1), (1, 1)]]])


class TestMoments:
    """Tests for moments of the entry kinds."""

    def test_lebesgue(self, lebesgue: MatrixOfMeasures) -> None:
        """Verify integral of x^k on [0, 1] is 1/(k+1)."""
        assert [lebesgue.moment(0, 0, k) for k in range(4)] == [1, Fraction(1, 2), Fraction(1, 3), Fraction(1, 4)]

    def test_interval(self, rational: RationalField) -> None:
        """Verify a shifted interval."""
        mu = lebesgue_measure(rational, -1, 1)
        assert mu.moment(0, 0, 0) == 2
        assert mu.moment(0, 0, 1) == 0

    def test_atoms(self, two_by_one: MatrixOfMeasures) -> None:
        """Verify discrete moments and the grid shape."""
        assert (two_by_one.q, two_by_one.p) == (2, 1)
        assert two_by_one.moment(0, 0, 0) == 6
        assert two_by_one.moment(1, 0, 1) == Fraction(11, 2)
        assert two_by_one.is_discrete

    def test_delta_derivative(self, rational: RationalField) -> None:
        """Verify integral f delta'(x - 2) = -f'(2)."""
        delta = DeltaTerm(rational, 2, 1, 1)
        mu = MatrixOfMeasures.from_grid(rational, [[delta]])
        assert mu.moment(0, 0, 3) == -12

    def test_moment_of_single_entry(self, rational: RationalField) -> None:
        """Verify one entry is integrated on its own, outside any grid."""
        assert moment_of_entry(DeltaTerm(rational, 2, 1, 1), 3) == -12
        (atoms,) = two_atoms(rational).cell(0, 0)
        assert moment_of_entry(atoms, 5) == 1

    def test_pair_integrate_shapes(self, two_by_one: MatrixOfMeasures, rational: RationalField) -> None:
        """Verify pairings reject vectors of the wrong length."""
        one = UniPoly.constant(rational, 1)
        with pytest.raises(ValueError, match="do not match"):
            pair_integrate((one,), two_by_one, (one,))


class TestCauchy:
    """Tests for Cauchy pairings."""

    def test_lebesgue_second_order(self, lebesgue: MatrixOfMeasures, rational: RationalField) -> None:
        """Verify integral dx / (2 - x)^2 on [0, 1] is 1/2."""
        one = (UniPoly.constant(rational, 1),)
        assert cauchy_pairing(one, lebesgue, 2, "left", order=1) == (Fraction(1, 2),)

    def test_logarithm_needs_floats(self, lebesgue: MatrixOfMeasures, rational: RationalField) -> None:
        """Verify the exact backend refuses a logarithmic Cauchy value."""
        with pytest.raises(BackendUnsupported):
            cauchy_pairing((UniPoly.constant(rational, 1),), lebesgue, 2, "left")

    def test_logarithm_on_floats(self, bigfloat: BigFloatField) -> None:
        """Verify integral dx / (2 - x) on [0, 1] is log 2."""
        mu = lebesgue_measure(bigfloat)
        (value,) = cauchy_pairing((UniPoly.constant(bigfloat, 1),), mu, 2, "left")
        assert bigfloat.close(value, bigfloat.ctx.log(2))

    def test_pole_on_support(self, lebesgue: MatrixOfMeasures, rational: RationalField) -> None:
        """Verify a probe inside the support raises PoleOnSupport."""
        with pytest.raises(PoleOnSupport):
            cauchy_pairing((UniPoly.constant(rational, 1),), lebesgue, Fraction(1, 2), "left", order=1)

    def test_atoms(self, rational: RationalField) -> None:
        """Verify the discrete Cauchy sum 1/(3 - 0) + 1/(3 - 1)."""
        (value,) = cauchy_pairing((UniPoly.constant(rational, 1),), two_atoms(rational), 3, "right")
        assert value == Fraction(5, 6)


class TestPerturbMeasure:
    """Tests for the perturbed functional."""

    def test_discrete_geronimus(self, rational: RationalField) -> None:
        """Verify atoms are divided by R and the mass lands at the eigenvalue."""
        mass = MassData(1, {(0, 0, 0): (UniPoly.constant(rational, Fraction(1, 2)),)})
        one = MatrixPolynomial.identity(rational, 1)
        mu = perturb_measure(two_atoms(rational), one, scalar_poly(rational, [1, 1]), mass)
        assert mu.moment(0, 0, 0) == 2
        assert mu.moment(0, 0, 1) == 0

    def test_discrete_christoffel(self, rational: RationalField) -> None:
        """Verify (x - 2) multiplies every atom weight."""
        one = MatrixPolynomial.identity(rational, 1)
        mu = perturb_measure(two_atoms(rational), scalar_poly(rational, [-2, 1]), one)
        assert mu.moment(0, 0, 0) == -3
        assert mu.moment(0, 0, 1) == -1

    def test_eigenvalue_on_atom(self, rational: RationalField) -> None:
        """Verify R vanishing at a weighted atom is not integrable."""
        with pytest.raises(IntegrabilityViolation):
            perturb_measure(two_atoms(rational), MatrixPolynomial.identity(rational, 1), scalar_poly(rational, [0, 1]))

    def test_cancelled_eigenvalue_on_atom(self, rational: RationalField) -> None:
        """Verify L = R = x - 2 leaves the atom at 2 untouched."""
        mu = discrete_measure(rational, [[[(0, 1), (1, 1), (2, 1)]]])
        shift = scalar_poly(rational, [-2, 1])
        tilde = perturb_measure(mu, shift, shift)
        assert [tilde.moment(0, 0, k) for k in range(3)] == [3, 3, 5]

    def test_double_root_cancelled(self, rational: RationalField) -> None:
        """Verify (x - 1)^2 / (x - 1)^2 keeps weight 3 at the double root."""
        mu = discrete_measure(rational, [[[(1, 3), (4, 1)]]])
        square = scalar_poly(rational, [1, -2, 1])
        tilde = perturb_measure(mu, square, square)
        assert tilde.moment(0, 0, 0) == 4
        assert tilde.moment(0, 0, 1) == 7

    def test_partial_cancellation_by_limit(self, rational: RationalField) -> None:
        """Verify (x - 2)^2 / (x - 2) at the atom 2 is the limit zero."""
        mu = discrete_measure(rational, [[[(0, 1), (2, 5)]]])
        tilde = perturb_measure(mu, scalar_poly(rational, [4, -4, 1]), scalar_poly(rational, [-2, 1]))
        assert tilde.moment(0, 0, 0) == -2
        assert tilde.moment(0, 0, 1) == 0

    def test_matrix_cancellation(self, rational: RationalField) -> None:
        """Verify a diagonal L cancels the matching block of a singular R."""
        atoms = [[[(0, 1), (1, 1)], []], [[], [(0, 2)]]]
        mu = discrete_measure(rational, atoms)
        x_first = MatrixPolynomial.from_coefficients(rational, [[[0, 0], [0, 1]], [[1, 0], [0, 0]]])
        tilde = perturb_measure(mu, x_first, x_first)
        assert tilde.moment(0, 0, 0) == 2
        assert tilde.moment(1, 1, 0) == 2
        assert tilde.moment(0, 1, 0) == 0

    def test_uncancelled_matrix_pole(self, rational: RationalField) -> None:
        """Verify cancellation in one diagonal block does not excuse the other."""
        mu = discrete_measure(rational, [[[(0, 1)], []], [[], [(0, 1)]]])
        x_first = MatrixPolynomial.from_coefficients(rational, [[[0, 0], [0, 1]], [[1, 0], [0, 0]]])
        x_second = MatrixPolynomial.from_coefficients(rational, [[[1, 0], [0, 0]], [[0, 0], [0, 1]]])
        with pytest.raises(IntegrabilityViolation, match="does not cancel"):
            perturb_measure(mu, x_second, x_first)

    def test_continuous_geronimus(self, lebesgue: MatrixOfMeasures, bigfloat: BigFloatField) -> None:
        """Verify integral dx / (x + 1) on [0, 1] is log 2."""
        mu = lebesgue_measure(bigfloat)
        tilde = perturb_measure(mu, MatrixPolynomial.identity(bigfloat, 1), scalar_poly(bigfloat, [1, 1]))
        assert bigfloat.close(tilde.moment(0, 0, 0), bigfloat.ctx.log(2))

    def test_pole_inside_interval(self, lebesgue: MatrixOfMeasures, rational: RationalField) -> None:
        """Verify dx / (x - 1/2) is rejected on [0, 1]."""
        with pytest.raises(IntegrabilityViolation):
            perturb_measure(lebesgue, MatrixPolynomial.identity(rational, 1), scalar_poly(rational, ["-1/2", 1]))

    def test_unknown_chain(self, rational: RationalField) -> None:
        """Verify a mass at a missing chain position is rejected."""
        mass = MassData(1, {(0, 1, 0): (UniPoly.constant(rational, 1),)})
        with pytest.raises(MissingSpectralData):
            one = MatrixPolynomial.identity(rational, 1)
            perturb_measure(two_atoms(rational), one, scalar_poly(rational, [3, 1]), mass)
