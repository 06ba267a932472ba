"""Arbitrary-precision float backend built on an isolated mpmath context."""

from __future__ import annotations

import logging
from fractions import Fraction
from typing import Any

import mpmath

from mopkit.exceptions import BackendMismatch
from mopkit.fields.base import Scalar, ScalarField

logger = logging.getLogger(__name__)

DEFAULT_PRECISION_BITS = 256


class BigFloatField(ScalarField):
    """Binary floating point at a fixed precision.

    Each instance owns its own :class:`mpmath.MPContext`, so two fields with
    different precisions never share global state. Comparisons use the
    relative tolerance ``2 ** (-precision_bits / 2)``.

    Attributes:
        ctx: The private mpmath context. Special functions (``beta``, ``rf``,
            ``quad``, ``eig``) are called through it.

    """

    name = "float"
    exact = False

    def __init__(self, precision_bits: int = DEFAULT_PRECISION_BITS) -> None:
        """Create a context working at ``precision_bits``.

        Args:
            precision_bits: Mantissa bits, must be positive.

        """
        if precision_bits <= 0:
            msg = f"precision_bits must be positive, got {precision_bits}"
            raise ValueError(msg)
        self._bits = precision_bits
        self.ctx: Any = mpmath.MPContext()
        self.ctx.prec = precision_bits
        self._tol = self.ctx.ldexp(self.ctx.mpf(1), -(precision_bits // 2))
        logger.debug("mopkit: float backend at %d bits", precision_bits)

    @property
    def precision_bits(self) -> int:
        """Working precision in bits."""
        return self._bits

    @property
    def tol(self) -> Scalar:
        """Relative comparison tolerance ``2**(-bits/2)``."""
        return self._tol

    def coerce(self, value: object) -> Scalar:
        """Convert ints, floats, ``Fraction`` values, strings and own-context mpf."""
        if isinstance(value, bool):
            msg = f"booleans are not field elements: {value!r}"
            raise BackendMismatch(msg)
        if isinstance(value, self.ctx.mpf):
            return value
        if isinstance(value, (int, float)):
            return self.ctx.mpf(value)
        if isinstance(value, Fraction):
            return self.ctx.mpf(value.numerator) / value.denominator
        if isinstance(value, str):
            text = value.strip()
            if "/" in text:
                return self.coerce(Fraction(text))
            return self.ctx.mpf(text)
        if hasattr(value, "_mpf_"):
            msg = "mpf from a different mpmath context; rebuild it in this field"
            raise BackendMismatch(msg)
        msg = f"float backend refuses {type(value).__name__} value {value!r}"
        raise BackendMismatch(msg)

    def to_json(self, value: Scalar) -> str:
        """Serialize as a decimal string carrying every significant digit."""
        digits = int(self._bits * 0.30103) + 1
        return str(self.ctx.nstr(self.coerce(value), digits))

    def abs(self, value: Scalar) -> Scalar:
        """Absolute value."""
        return self.ctx.fabs(value)
