"""Error hierarchy for mopkit.

Every failure raised by the library derives from :class:`MopkitError`, so
callers (and the CLI) can catch the whole family at once while tests match
the specific subclass. Errors that are tied to a row or pivot index carry it
as an attribute so reports can name the exact place where orthogonality or a
linear solve broke down.

"""

from __future__ import annotations


class MopkitError(Exception):
    """Base class for all mopkit errors."""


# =============================================================================
# Linear algebra
# =============================================================================


class SingularLeadingMinor(MopkitError):  # noqa: N818
    """A leading principal minor vanishes, so pivot-free LU stops at ``index``.

    Attributes:
        index: Zero-based position of the vanishing pivot.

    """

    def __init__(self, index: int, message: str | None = None) -> None:
        self.index = index
        super().__init__(message or f"leading principal minor {index} vanishes")


class SingularSystem(MopkitError):  # noqa: N818
    """A square linear system has zero (or sub-tolerance) determinant."""


class InexactDivision(MopkitError):  # noqa: N818
    """A polynomial division that must be exact left a nonzero remainder."""


class BackendMismatch(MopkitError):  # noqa: N818
    """Scalars from two different backends met in one operation."""


class BackendUnsupported(MopkitError):  # noqa: N818
    """The requested quantity cannot be produced on the active backend."""


# =============================================================================
# Matrix polynomials
# =============================================================================


class NonRationalSpectrum(MopkitError):  # noqa: N818
    """The determinant has an irreducible non-linear factor over the rationals."""


class InconsistentMultiplicity(MopkitError):  # noqa: N818
    """The null-space rank profile disagrees with the algebraic multiplicity."""


class FloatSmithUnsupported(MopkitError):  # noqa: N818
    """Smith form was requested for a matrix polynomial on the float backend."""


class LeadingFormViolation(MopkitError):  # noqa: N818
    """A perturbation polynomial does not have the banded leading structure required.

    Attributes:
        side: ``"L"`` or ``"R"`` when the offending polynomial is known.

    """

    def __init__(self, message: str, side: str | None = None) -> None:
        self.side = side
        super().__init__(message)


# =============================================================================
# Measures
# =============================================================================


class OracleMissing(MopkitError):  # noqa: N818
    """A measure entry cannot produce the requested integral."""


class PoleOnSupport(MopkitError):  # noqa: N818
    """A Cauchy-type integrand has its pole on an atom or at a delta point."""


class SeriesDivergent(MopkitError):  # noqa: N818
    """Series evaluation requested inside the support radius without an oracle."""


class IntegrabilityViolation(MopkitError):  # noqa: N818
    """A rational modification is not locally integrable at a spectral point."""


class MissingSpectralData(MopkitError):  # noqa: N818
    """Mass data references an eigenvalue or chain that the polynomial does not have."""


class UnsupportedMeasure(MopkitError):  # noqa: N818
    """The measure variant cannot be combined with the requested operation."""


class EvaluationAtPole(MopkitError):  # noqa: N818
    """A rational expression was evaluated at one of its poles."""


class OutsideWindow(MopkitError):  # noqa: N818
    """The requested index is not determined by the available truncation."""


# =============================================================================
# Case study and configuration
# =============================================================================


class ATViolation(MopkitError):  # noqa: N818
    """Jacobi-Pineiro exponents differ by an integer, breaking the AT property."""


class ConfigInvalid(MopkitError):  # noqa: N818
    """An experiment configuration failed schema or semantic validation.

    Attributes:
        field_path: Dotted path to the offending field, when known.

    """

    def __init__(self, message: str, field_path: str | None = None) -> None:
        self.field_path = field_path
        prefix = f"{field_path}: " if field_path else ""
        super().__init__(f"{prefix}{message}")


__all__ = [
    "ATViolation",
    "BackendMismatch",
    "BackendUnsupported",
    "ConfigInvalid",
    "EvaluationAtPole",
    "FloatSmithUnsupported",
    "InconsistentMultiplicity",
    "InexactDivision",
    "IntegrabilityViolation",
    "LeadingFormViolation",
    "MissingSpectralData",
    "MopkitError",
    "NonRationalSpectrum",
    "OracleMissing",
    "OutsideWindow",
    "PoleOnSupport",
    "SeriesDivergent",
    "SingularLeadingMinor",
    "SingularSystem",
    "UnsupportedMeasure",
]
