"""Pytest configuration and shared fixtures for mopkit tests.

This module provides:
    - pytest configuration and markers
    - Backend fixtures (exact rationals, wide floats)
    - Small measures and perturbation bundles with hand-checked values
    - Paths to the JSON configurations in ``tests/fixtures``

Markers:
    slow: Tests that take more than a few seconds (512-bit case study, sweeps)
    integration: Tests that drive the command-line runner end to end

Example:
    Run only the fast unit tests::

        pytest -m "not slow and not integration"

"""

from __future__ import annotations

from fractions import Fraction
from pathlib import Path

import pytest

from mopkit.fields import BigFloatField, RationalField
from mopkit.jacobi_pineiro import JPParams
from mopkit.matrix_poly import MatrixPolynomial
from mopkit.measures import MassData, MatrixOfMeasures, discrete_measure, lebesgue_measure
from mopkit.numerics import UniPoly
from mopkit.uvarov import PerturbationBundle

FIXTURES = Path(__file__).parent / "fixtures"

# =============================================================================
# Pytest Configuration
# =============================================================================


def pytest_configure(config: pytest.Config) -> None:
    """Register custom markers for test categorization."""
    config.addinivalue_line("markers", "slow: marks tests as slow (deselect with '-m \"not slow\"')")
    config.addinivalue_line("markers", "integration: marks tests that run the mopkit command line")


# =============================================================================
# Backends
# =============================================================================


@pytest.fixture
def rational() -> RationalField:
    """Exact backend."""
    return RationalField()


@pytest.fixture
def bigfloat() -> BigFloatField:
    """256-bit float backend."""
    return BigFloatField(256)


# =============================================================================
# Measures
# =============================================================================


@pytest.fixture
def lebesgue(rational: RationalField) -> MatrixOfMeasures:
    """Scalar Lebesgue measure on ``[0, 1]``.

    Monic orthogonal polynomials are the shifted Legendre ones:
    ``B_1 = x - 1/2``, ``B_2 = x^2 - x + 1/6``, with ``H = (1, 1/12, 1/180)``.

    """
    return lebesgue_measure(rational)


@pytest.fixture
def two_by_one(rational: RationalField) -> MatrixOfMeasures:
    """A ``2 x 1`` discrete measure on six atoms (type II multiple orthogonality)."""
    nodes = [Fraction(k, 4) for k in (-3, -2, -1, 1, 2, 3)]
    first = [(x, Fraction(1)) for x in nodes]
    second = [(x, Fraction(k + 2)) for k, x in enumerate(nodes)]
    return discrete_measure(rational, [[first], [second]])


@pytest.fixture
def square_discrete(rational: RationalField) -> MatrixOfMeasures:
    """A ``2 x 2`` discrete measure with distinct weights in every cell."""
    nodes = [Fraction(k, 6) for k in range(-5, 6, 2)]

    def cell(shift: int) -> list[tuple[Fraction, Fraction]]:
        return [(x, Fraction(k + shift, 3)) for k, x in enumerate(nodes)]

    return discrete_measure(rational, [[cell(1), cell(7)], [cell(3), cell(2)]])


# =============================================================================
# Perturbations
# =============================================================================


def scalar_poly(field: RationalField, coeffs: list[object]) -> MatrixPolynomial:
    """``1 x 1`` matrix polynomial from coefficients, lowest power first."""
    return MatrixPolynomial.from_polys(field, [[UniPoly.from_coeffs(field, coeffs)]])


@pytest.fixture
def christoffel(rational: RationalField, lebesgue: MatrixOfMeasures) -> PerturbationBundle:
    """``d(mu~) = (x - 2) dx`` on ``[0, 1]``: tau_1 = 3/2, tau_2 = 13/6."""
    return PerturbationBundle(lebesgue, scalar_poly(rational, [-2, 1]), MatrixPolynomial.identity(rational, 1))


@pytest.fixture
def geronimus(rational: RationalField, lebesgue: MatrixOfMeasures) -> PerturbationBundle:
    """``d(mu~) (x + 1) = dx`` plus a mass ``1/2`` at ``-1``."""
    mass = MassData(1, {(0, 0, 0): (UniPoly.constant(rational, Fraction(1, 2)),)})
    identity = MatrixPolynomial.identity(rational, 1)
    return PerturbationBundle(lebesgue, identity, scalar_poly(rational, [1, 1]), mass=mass)


@pytest.fixture
def jp_params() -> JPParams:
    """Jacobi-Pineiro exponents with an integer ``beta`` (exact type I tables)."""
    return JPParams("1/4", "1/2", "3/4", 2)


@pytest.fixture
def fixtures_dir() -> Path:
    """Directory of the JSON configuration fixtures."""
    return FIXTURES
