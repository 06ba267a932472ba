"""Exact rational backend built on :class:`fractions.Fraction`."""

from __future__ import annotations

import logging
from fractions import Fraction

from mopkit.exceptions import BackendMismatch
from mopkit.fields.base import Scalar, ScalarField

logger = logging.getLogger(__name__)


class RationalField(ScalarField):
    """Exact arithmetic over the rationals.

    Floats (Python or mpmath) are rejected rather than converted, so a stray
    inexact value can never leak into an exact computation.

    Example:
        >>> field = RationalField()
        >>> field.coerce("3/4") + field.coerce(1)
        Fraction(7, 4)

    """

    name = "rational"
    exact = True

    @property
    def precision_bits(self) -> None:
        """Exact backends have no working precision."""
        return None

    @property
    def tol(self) -> Fraction:
        """Exact comparisons use no tolerance."""
        return Fraction(0)

    def coerce(self, value: object) -> Fraction:
        """Convert ints, ``Fraction`` values and ``"num/den"`` strings."""
        if isinstance(value, bool):
            msg = f"booleans are not field elements: {value!r}"
            raise BackendMismatch(msg)
        if isinstance(value, Fraction):
            return value
        if isinstance(value, int):
            return Fraction(value)
        if isinstance(value, str):
            try:
                return Fraction(value.strip())
            except (ValueError, ZeroDivisionError) as e:
                msg = f"cannot parse rational {value!r}"
                raise BackendMismatch(msg) from e
        msg = f"rational backend refuses {type(value).__name__} value {value!r}"
        raise BackendMismatch(msg)

    def to_json(self, value: Scalar) -> str:
        """Serialize as ``"num/den"``."""
        v = self.coerce(value)
        return f"{v.numerator}/{v.denominator}"

    def abs(self, value: Scalar) -> Fraction:
        """Absolute value."""
        return abs(Fraction(value))
