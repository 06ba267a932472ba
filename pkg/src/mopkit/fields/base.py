"""Abstract base class for scalar fields.

This module defines the ScalarField ABC that every arithmetic backend
implements. Values themselves are plain Python objects (``Fraction`` or an
mpmath ``mpf``); the field object owns coercion, tolerance-aware comparison
and serialization so that the rest of the package stays generic.

"""

from __future__ import annotations

import logging
from abc import ABC, abstractmethod
from typing import Any, TypeAlias

logger = logging.getLogger(__name__)

Scalar: TypeAlias = Any
"""A field element. ``Fraction`` on the rational backend, ``mpf`` on the float one."""


class ScalarField(ABC):
    """Abstract base class for scalar backends.

    All backends must implement:
        - coerce(): Convert user input into a field element
        - is_zero(): Zero test (literal or tolerance based)
        - to_json() / from_json(): Lossless-as-possible text form

    Attributes:
        name: Short backend identifier used in configs and reports.
        exact: Whether arithmetic is exact.

    """

    name: str = "base"
    exact: bool = False

    @property
    @abstractmethod
    def precision_bits(self) -> int | None:
        """Working precision in bits, or None for exact backends."""
        ...

    @property
    @abstractmethod
    def tol(self) -> Scalar:
        """Comparison tolerance. Zero for exact backends."""
        ...

    @abstractmethod
    def coerce(self, value: object) -> Scalar:
        """Convert ``value`` into an element of this field.

        Args:
            value: An int, a ``Fraction``, a ``"num/den"`` string, or a native element.

        Returns:
            The corresponding field element.

        Raises:
            BackendMismatch: If ``value`` belongs to a different backend.

        """
        ...

    @abstractmethod
    def to_json(self, value: Scalar) -> str:
        """Serialize a field element as a string."""
        ...

    @abstractmethod
    def abs(self, value: Scalar) -> Scalar:
        """Absolute value."""
        ...

    @property
    def zero(self) -> Scalar:
        """Additive identity."""
        return self.coerce(0)

    @property
    def one(self) -> Scalar:
        """Multiplicative identity."""
        return self.coerce(1)

    def from_json(self, text: str) -> Scalar:
        """Parse a serialized element."""
        return self.coerce(text)

    def is_zero(self, value: Scalar) -> bool:
        """Return True if ``value`` is zero (within :attr:`tol` on inexact backends)."""
        if self.exact:
            return bool(value == 0)
        return bool(self.abs(value) <= self.tol)

    def close(self, a: Scalar, b: Scalar) -> bool:
        """Compare two elements with relative tolerance.

        Exact backends use literal equality. Inexact ones accept
        ``|a - b| <= tol * max(1, |a|, |b|)``.

        """
        if self.exact:
            return bool(a == b)
        scale = max(self.one, self.abs(a), self.abs(b))
        return bool(self.abs(a - b) <= self.tol * scale)

    def factorial(self, n: int) -> Scalar:
        """Return ``n!`` as a field element."""
        out = self.one
        for k in range(2, n + 1):
            out *= k
        return out

    def binomial(self, n: int, k: int) -> Scalar:
        """Return the binomial coefficient as a field element."""
        if k < 0 or k > n:
            return self.zero
        out = self.one
        for i in range(k):
            out = out * (n - i) / (i + 1)
        return out

    @property
    def key(self) -> tuple[str, int | None]:
        """Identity of the backend used for mismatch checks."""
        return (self.name, self.precision_bits)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, ScalarField):
            return NotImplemented
        return self.key == other.key

    def __hash__(self) -> int:
        return hash(self.key)

    def __repr__(self) -> str:
        bits = f", precision_bits={self.precision_bits}" if self.precision_bits else ""
        return f"{type(self).__name__}(name={self.name!r}{bits})"
