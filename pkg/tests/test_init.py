"""Tests for the package surface.

This module tests:
    - The version string
    - Names re-exported at the top level
    - The example in the package docstring
"""

from __future__ import annotations

import mopkit
from mopkit import (
    MatrixOfMeasures,
    MopkitError,
    PerturbationBundle,
    RationalField,
    __version__,
    lebesgue_measure,
    oracle_comparison,
)
from mopkit.exceptions import ConfigInvalid, OutsideWindow
from mopkit.matrix_poly import MatrixPolynomial


class TestModuleExports:
    """Tests for module-level exports."""

    def test_version_is_string(self) -> None:
        """Verify __version__ is a string."""
        assert isinstance(__version__, str)

    def test_version_format(self) -> None:
        """Verify __version__ follows semver format."""
        parts = __version__.split(".")
        assert len(parts) >= 2
        assert all(part.isdigit() for part in parts[:2])

    def test_all_names_resolve(self) -> None:
        """Verify every name in __all__ is an attribute of the package."""
        for name in mopkit.__all__:
            assert hasattr(mopkit, name), name

    def test_errors_share_a_base(self) -> None:
        """Verify package errors can be caught as MopkitError."""
        assert issubclass(ConfigInvalid, MopkitError)
        assert issubclass(OutsideWindow, MopkitError)


class TestDocstringExample:
    """Tests for the example in the package docstring."""

    def test_scalar_christoffel(self) -> None:
        """Verify the documented Christoffel comparison passes."""
        field = RationalField()
        mu = lebesgue_measure(field)
        assert isinstance(mu, MatrixOfMeasures)
        L = MatrixPolynomial.from_coefficients(field, [[[-2]], [[1]]])
        bundle = PerturbationBundle(mu, L, MatrixPolynomial.identity(field, 1))
        assert oracle_comparison(bundle, 6).ok
