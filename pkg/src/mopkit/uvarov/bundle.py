"""Perturbation bundles.

A :class:`PerturbationBundle` packages everything that defines one Uvarov
perturbation: the base measure, the two matrix polynomials, the orientation
and the mass vectors. It also derives the band data the rest of the engine
needs (``M_L``, ``M_R``, the outer constants of ``L(Lambda)`` and
``R(Lambda^T)``) and checks that the band shape is the one the connection
theory assumes.

The dual orientation ``L dmu~ = dmu R`` is handled by transposition:
:meth:`PerturbationBundle.standard` returns the equivalent standard bundle on
the transposed measure, with ``L`` and ``R`` swapped and transposed.

"""

from __future__ import annotations

import logging
from functools import cached_property
from typing import TYPE_CHECKING, Literal

from mopkit.exceptions import LeadingFormViolation
from mopkit.matrix_poly import LeadingForm, SpectralDatum, classify_leading_form, mp_determinant, spectral_data
from mopkit.measures import MassData, perturb_measure

if TYPE_CHECKING:
    from collections.abc import Sequence

    from mopkit.fields.base import Scalar, ScalarField
    from mopkit.matrix_poly import MatrixPolynomial
    from mopkit.measures import MatrixOfMeasures

logger = logging.getLogger(__name__)

Orientation = Literal["standard", "dual"]


def _swap_sides(spectra: Sequence[SpectralDatum]) -> list[SpectralDatum]:
    """Spectral data of the transposed polynomial."""
    return [
        SpectralDatum(s.eigenvalue, s.multiplicity, s.left_chains, s.right_chains, s.partial_multiplicities)
        for s in spectra
    ]


class PerturbationBundle:
    """One Uvarov perturbation of a matrix of measures.

    Standard orientation: ``d(mu~) R = L dmu``. Dual orientation:
    ``L d(mu~) = dmu R``.

    Args:
        mu: Base ``q x p`` matrix of measures.
        L: Left polynomial, ``q x q``.
        R: Right polynomial, ``p x p``.
        orientation: ``standard`` or ``dual``.
        mass: Mass vectors on the chains of ``R`` (standard) or ``L`` (dual).
        spectra_L: Optional precomputed spectral data of ``L``.
        spectra_R: Optional precomputed spectral data of ``R``.

    Raises:
        ValueError: If the sizes do not match the measure.

    """

    def __init__(
        self,
        mu: MatrixOfMeasures,
        L: MatrixPolynomial,
        R: MatrixPolynomial,
        orientation: Orientation = "standard",
        mass: MassData | None = None,
        spectra_L: Sequence[SpectralDatum] | None = None,
        spectra_R: Sequence[SpectralDatum] | None = None,
    ) -> None:
        if (L.size, R.size) != (mu.q, mu.p):
            msg = f"L is {L.size}x{L.size} and R is {R.size}x{R.size}, measure is {mu.q}x{mu.p}"
            raise ValueError(msg)
        self.mu = mu
        self.L = L
        self.R = R
        self.orientation: Orientation = orientation
        default_size = mu.q if orientation == "standard" else mu.p
        self.mass = mass if mass is not None else MassData(default_size)
        self._spectra_L = list(spectra_L) if spectra_L is not None else None
        self._spectra_R = list(spectra_R) if spectra_R is not None else None
        self._standard: PerturbationBundle | None = None

    # -- basic data -----------------------------------------------------------

    @property
    def field(self) -> ScalarField:
        """Backend of the measure."""
        return self.mu.field

    @property
    def q(self) -> int:
        """Left block size."""
        return self.mu.q

    @property
    def p(self) -> int:
        """Right block size."""
        return self.mu.p

    @cached_property
    def spectra_L(self) -> list[SpectralDatum]:
        """Eigenvalues and Jordan chains of ``L``."""
        return self._spectra_L if self._spectra_L is not None else spectral_data(self.L)

    @cached_property
    def spectra_R(self) -> list[SpectralDatum]:
        """Eigenvalues and Jordan chains of ``R``."""
        return self._spectra_R if self._spectra_R is not None else spectral_data(self.R)

    @cached_property
    def M_L(self) -> int:
        """``deg det L``."""
        return max(mp_determinant(self.L).chop().degree, 0)

    @cached_property
    def M_R(self) -> int:
        """``deg det R``."""
        return max(mp_determinant(self.R).chop().degree, 0)

    @property
    def M(self) -> int:
        """Total band width ``M_L + M_R``."""
        return self.M_L + self.M_R

    @cached_property
    def leading_forms(self) -> tuple[LeadingForm, LeadingForm]:
        """Detected leading templates of ``(L, R)``."""
        return classify_leading_form(self.L, side="left"), classify_leading_form(self.R, side="right")

    @cached_property
    def perturbed(self) -> MatrixOfMeasures:
        """The perturbed functional ``mu~``."""
        spectra = self.spectra_R if self.orientation == "standard" else self.spectra_L
        return perturb_measure(self.mu, self.L, self.R, self.mass, self.orientation, spectra)

    # -- orientation ----------------------------------------------------------

    def standard(self) -> PerturbationBundle:
        """The equivalent standard-orientation bundle.

        For a dual bundle this is the perturbation of ``mu^T`` by
        ``(R^T, L^T)``, whose perturbed measure is ``mu~^T``.

        """
        if self.orientation == "standard":
            return self
        if self._standard is not None:
            return self._standard
        std = PerturbationBundle(
            self.mu.transpose(),
            self.R.transpose(),
            self.L.transpose(),
            "standard",
            self.mass.transpose(),
            spectra_L=_swap_sides(self.spectra_R),
            spectra_R=_swap_sides(self.spectra_L),
        )
        logger.debug("mopkit: dual bundle mapped to standard %dx%d bundle", std.q, std.p)
        self._standard = std
        return std

    # -- band structure -------------------------------------------------------

    def _left_band(self) -> tuple[int, dict[int, tuple[int, int, int]]]:
        q, field = self.q, self.field
        top = None
        where: dict[int, tuple[int, int, int]] = {}
        for l_pow, coeff in enumerate(self.L.coeffs):
            for a in range(q):
                for b in range(q):
                    if field.is_zero(coeff[a, b]):
                        continue
                    off = l_pow * q + b - a
                    top = off if top is None else max(top, off)
        if top is None:
            msg = "L is identically zero"
            raise LeadingFormViolation(msg, "L")
        for a in range(q):
            l_pow, b = divmod(a + top, q)
            where[a] = (l_pow, a, b)
        return top, where

    def _right_band(self) -> tuple[int, dict[int, tuple[int, int, int]]]:
        p, field = self.p, self.field
        low = None
        where: dict[int, tuple[int, int, int]] = {}
        for r_pow, coeff in enumerate(self.R.coeffs):
            for a in range(p):
                for b in range(p):
                    if field.is_zero(coeff[a, b]):
                        continue
                    off = r_pow * p + a - b
                    low = off if low is None else max(low, off)
        if low is None:
            msg = "R is identically zero"
            raise LeadingFormViolation(msg, "R")
        for a in range(p):
            b = (a - low) % p
            r_pow = (low - a + b) // p
            where[a] = (r_pow, a, b)
        return low, where

    @cached_property
    def outer_left(self) -> dict[int, Scalar]:
        """``c(a)``: the outer superdiagonal of ``L(Lambda)`` on rows ``n % q == a``.

        Raises:
            LeadingFormViolation: If the band of ``L(Lambda)`` is wider than
                ``deg det L`` or an outer entry vanishes.

        """
        top, where = self._left_band()
        if top != self.M_L:
            msg = f"L(Lambda) has {top} superdiagonals but deg det L = {self.M_L}"
            raise LeadingFormViolation(msg, "L")
        consts = {}
        for a, (power, i, j) in where.items():
            consts[a] = self.L.coefficient(power)[i, j]
            if self.field.is_zero(consts[a]):
                msg = f"outer superdiagonal of L(Lambda) vanishes: entry ({i}, {j}) of the x^{power} coefficient of L"
                raise LeadingFormViolation(msg, "L")
        return consts

    @cached_property
    def outer_right(self) -> dict[int, Scalar]:
        """``d(a)``: the outer subdiagonal of ``R(Lambda^T)`` on rows ``n % p == a``.

        Raises:
            LeadingFormViolation: If the band of ``R(Lambda^T)`` is wider than
                ``deg det R`` or an outer entry vanishes.

        """
        low, where = self._right_band()
        if low != self.M_R:
            msg = f"R(Lambda^T) has {low} subdiagonals but deg det R = {self.M_R}"
            raise LeadingFormViolation(msg, "R")
        consts = {}
        for a, (power, i, j) in where.items():
            consts[a] = self.R.coefficient(power)[i, j]
            if self.field.is_zero(consts[a]):
                msg = f"outer subdiagonal of R(Lambda^T) vanishes: entry ({i}, {j}) of the x^{power} coefficient of R"
                raise LeadingFormViolation(msg, "R")
        return consts

    def c(self, n: int) -> Scalar:
        """``Omega_{n, n + M_L}``, fixed by ``L``."""
        return self.outer_left[n % self.q]

    def d(self, n: int) -> Scalar:
        """``R(Lambda^T)_{n, n - M_R}``."""
        return self.outer_right[n % self.p]

    def validate(self) -> None:
        """Run every structural check (band widths, outer constants, mass keys)."""
        _ = self.outer_left, self.outer_right
        self.mass.validate(self.spectra_R if self.orientation == "standard" else self.spectra_L)

    def __repr__(self) -> str:
        return (
            f"PerturbationBundle(orientation={self.orientation!r}, q={self.q}, p={self.p}, "
            f"deg L={self.L.degree}, deg R={self.R.degree}, masses={len(self.mass.vectors)})"
        )


__all__ = ["Orientation", "PerturbationBundle"]
