"""Discrete perturbation bundles with exact Cauchy transforms."""

from __future__ import annotations

from fractions import Fraction

import pytest

from mopkit.fields import RationalField
from mopkit.matrix_poly import MatrixPolynomial
from mopkit.measures import MassData, MatrixOfMeasures, discrete_measure
from mopkit.numerics import UniPoly
from mopkit.uvarov import PerturbationBundle


def swap_times(field: RationalField, rho: object) -> MatrixPolynomial:
    """``[[0, 1], [x - rho, 0]]``: ``L(Lambda)`` has a single superdiagonal."""
    rr = field.coerce(rho)
    return MatrixPolynomial.from_entries(field, [[[0], [1]], [[-rr, 1], [0]]])


@pytest.fixture
def scalar_atoms(rational: RationalField) -> MatrixOfMeasures:
    """Unit weights at ``0, 1, 2, 3, 4, 5``."""
    return discrete_measure(rational, [[[(k, 1) for k in range(6)]]])


@pytest.fixture
def discrete_geronimus(rational: RationalField, scalar_atoms: MatrixOfMeasures) -> PerturbationBundle:
    """``d(mu~) (x + 1) = dmu`` plus a mass ``1/2`` at ``-1``."""
    mass = MassData(1, {(0, 0, 0): (UniPoly.constant(rational, Fraction(1, 2)),)})
    R = MatrixPolynomial.from_coefficients(rational, [[[1]], [[1]]])
    return PerturbationBundle(scalar_atoms, MatrixPolynomial.identity(rational, 1), R, mass=mass)


@pytest.fixture
def mixed_christoffel(rational: RationalField, two_by_one: MatrixOfMeasures) -> PerturbationBundle:
    """``2 x 1`` measure multiplied on the left by a swap with one eigenvalue at 3."""
    return PerturbationBundle(two_by_one, swap_times(rational, 3), MatrixPolynomial.identity(rational, 1))


@pytest.fixture
def mixed_uvarov(rational: RationalField, two_by_one: MatrixOfMeasures) -> PerturbationBundle:
    """Left swap at 3, right division by ``x + 1`` and a constant mass vector at ``-1``."""
    mass = MassData(
        2, {(0, 0, 0): (UniPoly.constant(rational, Fraction(1, 2)), UniPoly.constant(rational, Fraction(1, 3)))}
    )
    R = MatrixPolynomial.from_coefficients(rational, [[[1]], [[1]]])
    return PerturbationBundle(two_by_one, swap_times(rational, 3), R, mass=mass)


@pytest.fixture
def dual_christoffel_bundle(rational: RationalField, two_by_one: MatrixOfMeasures) -> PerturbationBundle:
    """``L d(mu~) = dmu (x - 2)`` with ``L = I``."""
    R = MatrixPolynomial.from_coefficients(rational, [[[-2]], [[1]]])
    return PerturbationBundle(two_by_one, MatrixPolynomial.identity(rational, 2), R, orientation="dual")
