"""Matrices of measures, Cauchy pairings and perturbed measures.

A :class:`MatrixOfMeasures` is a ``q x p`` grid whose cells are finite sums of
:class:`MeasureEntry` objects. Every entry answers one question,
``integrate_rational(numer, denom)``, the integral of ``numer(x) / denom(x)``
against it. Moments, Cauchy transforms and the rational reweighting produced
by a perturbation all reduce to that call.

Features:
    - DiscreteAtoms: finitely many signed point masses (exact on both backends)
    - ClosedFormWeight: moment oracle plus optional Cauchy, divided-moment
      and density oracles, with a float series fallback outside the support
    - DeltaTerm: ``c * delta^(l)(x - rho)`` weighted by a polynomial
    - RationalWeight: ``numer / denom`` times a base entry, with common
      linear factors cancelled at known eigenvalues
    - perturb_measure: the perturbed functional ``L dmu R^-1 + masses``

Example:
    Lebesgue measure on ``[0, 1]``::

        from mopkit.fields import RationalField
        from mopkit.measures import lebesgue_measure

        mu = lebesgue_measure(RationalField())
        mu.moment(0, 0, 2)  # Fraction(1, 3)

"""

from __future__ import annotations

import logging
import math
from abc import ABC, abstractmethod
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import TYPE_CHECKING, Literal

from mopkit.exceptions import (
    BackendUnsupported,
    IntegrabilityViolation,
    MissingSpectralData,
    NonRationalSpectrum,
    OracleMissing,
    PoleOnSupport,
    SeriesDivergent,
    UnsupportedMeasure,
)
from mopkit.matrix_poly import MatrixPolynomial, mp_adjugate, mp_determinant, poly_roots, spectral_data
from mopkit.numerics import DenseMatrix, UniPoly, _check_same_field

if TYPE_CHECKING:
    from collections.abc import Callable, Iterator, Mapping, Sequence

    from mopkit.fields.base import Scalar, ScalarField
    from mopkit.matrix_poly import SpectralDatum
    from mopkit.numerics import VectorPoly

logger = logging.getLogger(__name__)

Orientation = Literal["standard", "dual"]
Side = Literal["left", "right"]

SERIES_EXTRA_TERMS = 16
"""Terms added on top of the geometric estimate in float series mode."""


def _series_div(num: list[Scalar], den: list[Scalar], terms: int, field: ScalarField) -> list[Scalar]:
    """Power-series quotient ``num / den`` truncated to ``terms`` coefficients."""
    if field.is_zero(den[0]):
        msg = "series quotient with vanishing constant term"
        raise PoleOnSupport(msg)
    out: list[Scalar] = []
    for k in range(terms):
        acc = num[k] if k < len(num) else field.zero
        for j in range(1, min(k, len(den) - 1) + 1):
            acc -= den[j] * out[k - j]
        out.append(acc / den[0])
    return out


def _cancel_common_roots(
    numer: UniPoly, denom: UniPoly, roots: Sequence[tuple[Scalar, int]]
) -> tuple[UniPoly, UniPoly, list[tuple[Scalar, int]]]:
    """Divide out ``(x - rho)`` factors shared by ``numer`` and ``denom``.

    Returns the reduced pair and the remaining pole orders per root.
    """
    field = numer.field
    remaining = []
    for rho, mult in roots:
        lin = UniPoly.linear(field, rho)
        m = mult
        while m > 0 and not numer.is_zero() and field.is_zero(numer(rho)):
            numer = divmod(numer, lin)[0]
            denom = divmod(denom, lin)[0]
            m -= 1
        if numer.is_zero():
            m = 0
        remaining.append((rho, m))
    return numer, denom, remaining


def partial_fraction_terms(
    rem: UniPoly, denom: UniPoly, roots: Sequence[tuple[Scalar, int]]
) -> list[tuple[Scalar, int, Scalar]]:
    """Split a proper fraction ``rem / denom`` over its linear factors.

    Returns:
        ``(rho, k, c)`` triples with ``rem / denom = sum c / (x - rho)**k``.

    """
    field = rem.field
    out = []
    for rho, mult in roots:
        if mult == 0:
            continue
        cofactor = denom
        lin = UniPoly.linear(field, rho)
        for _ in range(mult):
            cofactor = divmod(cofactor, lin)[0]
        coeffs = _series_div(rem.taylor(rho, mult), cofactor.taylor(rho, mult), mult, field)
        out.extend((rho, mult - j, c) for j, c in enumerate(coeffs) if not field.is_zero(c))
    return out


# =============================================================================
# Measure entries
# =============================================================================


class MeasureEntry(ABC):
    """A scalar measure or generalized functional.

    Attributes:
        field: Backend of the entry.
        kind: Short label used in reports and config files.

    """

    kind: str = "base"

    def __init__(self, field: ScalarField) -> None:
        self.field = field

    @property
    @abstractmethod
    def support(self) -> tuple[Scalar, Scalar]:
        """Smallest closed interval containing the support."""
        ...

    @abstractmethod
    def integrate_rational(self, numer: UniPoly, denom: UniPoly) -> Scalar:
        """Return the integral of ``numer / denom`` against this entry.

        Raises:
            PoleOnSupport: If ``denom`` vanishes where the entry has mass.
            OracleMissing: If the entry cannot produce the value.

        """
        ...

    @property
    def radius(self) -> Scalar:
        """``max |x|`` over the support."""
        lo, hi = self.support
        return max(self.field.abs(lo), self.field.abs(hi))

    @property
    def nodes(self) -> tuple[Scalar, ...]:
        """Atom positions (empty for continuous entries)."""
        return ()

    def moment(self, k: int) -> Scalar:
        """``integral x**k``."""
        return self.integrate_rational(UniPoly.monomial(self.field, k), UniPoly.constant(self.field, 1))

    def integrate(self, poly: UniPoly) -> Scalar:
        """Integral of a polynomial, expanded over moments."""
        total = self.field.zero
        for k, c in enumerate(poly.coeffs):
            if c != 0:
                total += c * self.moment(k)
        return total

    def cauchy(self, f: UniPoly, z: Scalar, order: int = 0) -> Scalar:
        """``integral f(x) / (z - x)**(order + 1)``."""
        z_minus_x = UniPoly.from_coeffs(self.field, [z, -1])
        return self.integrate_rational(f, z_minus_x ** (order + 1))

    def integrable_at(self, rho: Scalar, pole_order: int) -> bool:
        """Whether ``1 / (x - rho)**pole_order`` is integrable against this entry."""
        if pole_order <= 0:
            return True
        lo, hi = self.support
        return bool(rho < lo or rho > hi)

    def __repr__(self) -> str:
        return f"{type(self).__name__}(kind={self.kind!r})"


def moment_of_entry(entry: MeasureEntry, k: int) -> Scalar:
    """``integral x**k d(entry)``."""
    return entry.moment(k)


class DiscreteAtoms(MeasureEntry):
    """Finitely many signed point masses ``sum w_k delta(x - x_k)``."""

    kind = "atoms"

    def __init__(self, field: ScalarField, atoms: Sequence[tuple[object, object]]) -> None:
        super().__init__(field)
        merged: dict[Scalar, Scalar] = {}
        for node, weight in atoms:
            x = field.coerce(node)
            merged[x] = merged.get(x, field.zero) + field.coerce(weight)
        self.atoms: tuple[tuple[Scalar, Scalar], ...] = tuple(sorted(merged.items(), key=lambda t: t[0]))

    @property
    def support(self) -> tuple[Scalar, Scalar]:
        if not self.atoms:
            return self.field.zero, self.field.zero
        return self.atoms[0][0], self.atoms[-1][0]

    @property
    def nodes(self) -> tuple[Scalar, ...]:
        return tuple(x for x, _ in self.atoms)

    def integrate_rational(self, numer: UniPoly, denom: UniPoly) -> Scalar:
        total = self.field.zero
        for x, w in self.atoms:
            d = denom(x)
            if self.field.is_zero(d):
                msg = f"denominator vanishes at atom {self.field.to_json(x)}"
                raise PoleOnSupport(msg)
            total += w * numer(x) / d
        return total

    def integrable_at(self, rho: Scalar, pole_order: int) -> bool:
        return pole_order <= 0 or all(not self.field.close(x, rho) for x in self.nodes)


class DeltaTerm(MeasureEntry):
    """``coefficient * w(x) * delta^(order)(x - point)``.

    Integration follows ``integral f delta^(l)(x - rho) = (-1)^l f^(l)(rho)``.

    """

    kind = "delta"

    def __init__(
        self, field: ScalarField, point: object, order: int, coefficient: object, weight: UniPoly | None = None
    ) -> None:
        super().__init__(field)
        self.point = field.coerce(point)
        self.order = order
        self.coefficient = field.coerce(coefficient)
        self.weight = weight if weight is not None else UniPoly.constant(field, 1)

    @property
    def support(self) -> tuple[Scalar, Scalar]:
        return self.point, self.point

    def integrate_rational(self, numer: UniPoly, denom: UniPoly) -> Scalar:
        terms = self.order + 1
        if self.field.is_zero(denom(self.point)):
            msg = f"denominator vanishes at delta point {self.field.to_json(self.point)}"
            raise PoleOnSupport(msg)
        series = _series_div(
            (self.weight * numer).taylor(self.point, terms), denom.taylor(self.point, terms), terms, self.field
        )
        sign = -1 if self.order % 2 else 1
        return self.coefficient * sign * self.field.factorial(self.order) * series[self.order]

    def integrable_at(self, rho: Scalar, pole_order: int) -> bool:
        return pole_order <= 0 or not self.field.close(rho, self.point)


class ClosedFormWeight(MeasureEntry):
    """A weight known through oracles rather than atoms.

    Args:
        field: Backend.
        moment_oracle: ``k -> integral x**k``.
        support: Closed support interval.
        cauchy_oracle: Optional ``(f, z, order) -> integral f / (z - x)**(order + 1)``.
        divided_oracle: Optional ``(numer, denom) -> value or None`` for general
            rational integrands.
        density: Optional pointwise density, used by float quadrature as a last resort.
        integrable: Optional ``(rho, pole_order) -> bool`` local integrability flag.
        label: Name used in reports.

    """

    kind = "closed_form"

    def __init__(
        self,
        field: ScalarField,
        moment_oracle: Callable[[int], object],
        support: tuple[object, object],
        *,
        cauchy_oracle: Callable[[UniPoly, Scalar, int], object] | None = None,
        divided_oracle: Callable[[UniPoly, UniPoly], object | None] | None = None,
        density: Callable[[Scalar], Scalar] | None = None,
        integrable: Callable[[Scalar, int], bool] | None = None,
        label: str = "closed_form",
    ) -> None:
        super().__init__(field)
        self._moment_oracle = moment_oracle
        self._support = (field.coerce(support[0]), field.coerce(support[1]))
        self.cauchy_oracle = cauchy_oracle
        self.divided_oracle = divided_oracle
        self.density = density
        self._integrable = integrable
        self.label = label
        self._moments: dict[int, Scalar] = {}

    @property
    def support(self) -> tuple[Scalar, Scalar]:
        return self._support

    def moment(self, k: int) -> Scalar:
        if k not in self._moments:
            self._moments[k] = self.field.coerce(self._moment_oracle(k))
        return self._moments[k]

    def integrable_at(self, rho: Scalar, pole_order: int) -> bool:
        if self._integrable is not None:
            return self._integrable(rho, pole_order)
        return super().integrable_at(rho, pole_order)

    def cauchy(self, f: UniPoly, z: Scalar, order: int = 0) -> Scalar:
        if self.cauchy_oracle is not None:
            return self.field.coerce(self.cauchy_oracle(f, z, order))
        return super().cauchy(f, z, order)

    def integrate_rational(self, numer: UniPoly, denom: UniPoly) -> Scalar:
        _check_same_field(self.field, numer.field)
        denom = denom.chop()
        if denom.degree <= 0:
            return self.integrate(numer) / denom.lead
        if self.divided_oracle is not None:
            value = self.divided_oracle(numer, denom)
            if value is not None:
                return self.field.coerce(value)
        quot, rem = divmod(numer, denom)
        total = self.integrate(quot)
        if rem.is_zero():
            return total
        try:
            roots = poly_roots(denom)
        except (NonRationalSpectrum, BackendUnsupported):
            return total + self._quadrature(rem, denom)
        rem, denom, roots = _cancel_common_roots(rem, denom, roots)
        if denom.degree <= 0:
            return total + self.integrate(rem) / denom.lead
        live = [(rho, m) for rho, m in roots if m > 0]
        if len(live) == 1 and live[0][1] == denom.degree and self.cauchy_oracle is not None:
            # c (x - z)^m: integral rem / (c (x-z)^m) = (-1)^m / c * integral rem / (z-x)^m
            z, m = live[0]
            sign = -1 if m % 2 else 1
            return total + sign * self.cauchy(rem, z, m - 1) / denom.lead
        for rho, k, c in partial_fraction_terms(rem, denom, live):
            sign = -1 if k % 2 else 1
            total += c * sign * self._unit_cauchy(rho, k - 1)
        return total

    def _unit_cauchy(self, z: Scalar, order: int) -> Scalar:
        """``integral 1 / (z - x)**(order + 1)`` by the first route that applies."""
        one = UniPoly.constant(self.field, 1)
        if self.cauchy_oracle is not None:
            return self.field.coerce(self.cauchy_oracle(one, z, order))
        lo, hi = self.support
        if self.field.abs(z) > self.radius:
            return self._series(z, order)
        if lo < z < hi:
            msg = f"pole {self.field.to_json(z)} lies inside the support of {self.label}"
            raise PoleOnSupport(msg)
        if self.density is not None and not self.field.exact:
            z_minus_x = UniPoly.from_coeffs(self.field, [z, -1])
            return self._quadrature(one, z_minus_x ** (order + 1))
        msg = f"{self.label}: no Cauchy oracle and |z| <= radius for pole {self.field.to_json(z)}"
        raise SeriesDivergent(msg)

    def _series(self, z: Scalar, order: int) -> Scalar:
        """``sum_k binom(k+o, o) z^(-k-o-1) m_k``, float backend only."""
        if self.field.exact:
            msg = "series evaluation of Cauchy transforms needs the float backend"
            raise BackendUnsupported(msg)
        ctx = self.field.ctx  # type: ignore[attr-defined]
        ratio = self.radius / self.field.abs(z)
        bits = self.field.precision_bits or 53
        if ratio == 0:
            n_terms = 1
        else:
            n_terms = int(math.ceil(bits * math.log(2) / -float(ctx.log(ratio)))) + SERIES_EXTRA_TERMS + order
        total = self.field.zero
        for k in range(n_terms):
            total += self.field.binomial(k + order, order) * self.moment(k) / z ** (k + order + 1)
        logger.debug("mopkit: Cauchy series at z=%s used %d terms", self.field.to_json(z), n_terms)
        return total

    def _quadrature(self, numer: UniPoly, denom: UniPoly) -> Scalar:
        if self.density is None or self.field.exact:
            msg = f"{self.label}: no oracle for integrand of denominator degree {denom.degree}"
            raise OracleMissing(msg)
        ctx = self.field.ctx  # type: ignore[attr-defined]
        density = self.density
        lo, hi = self.support
        return ctx.quad(lambda x: density(x) * numer(x) / denom(x), [lo, hi])


class RationalWeight(MeasureEntry):
    """``numer(x) / denom(x)`` times a base entry.

    Shared linear factors at the supplied roots are cancelled on construction,
    so ``pole_orders`` records what is left of ``denom`` at each root.

    """

    kind = "rational"

    def __init__(
        self,
        base: MeasureEntry,
        numer: UniPoly,
        denom: UniPoly,
        roots: Sequence[tuple[Scalar, int]] = (),
    ) -> None:
        super().__init__(base.field)
        if isinstance(base, DeltaTerm):
            msg = "rational reweighting of a delta functional is not supported"
            raise UnsupportedMeasure(msg)
        self.base = base
        self.numer, self.denom, self.pole_orders = _cancel_common_roots(numer, denom, roots)

    @property
    def support(self) -> tuple[Scalar, Scalar]:
        return self.base.support

    @property
    def nodes(self) -> tuple[Scalar, ...]:
        return self.base.nodes

    def integrate_rational(self, numer: UniPoly, denom: UniPoly) -> Scalar:
        return self.base.integrate_rational(numer * self.numer, denom * self.denom)

    def integrable_at(self, rho: Scalar, pole_order: int) -> bool:
        extra = next((m for r, m in self.pole_orders if self.field.close(r, rho)), 0)
        return self.base.integrable_at(rho, pole_order + extra)


# =============================================================================
# Matrices of measures
# =============================================================================


Cell = tuple[MeasureEntry, ...]


@dataclass(frozen=True)
class MatrixOfMeasures:
    """A ``q x p`` grid of sums of measure entries.

    Attributes:
        field: Backend shared by every entry.
        q: Row count (left multiplicity).
        p: Column count (right multiplicity).
        grid: ``grid[b][a]`` is the tuple of entries summed in cell ``(b, a)``.

    """

    field: ScalarField
    q: int
    p: int
    grid: tuple[tuple[Cell, ...], ...]

    def __post_init__(self) -> None:
        if len(self.grid) != self.q or any(len(r) != self.p for r in self.grid):
            msg = f"measure grid is not {self.q}x{self.p}"
            raise ValueError(msg)
        for e in self.entries():
            _check_same_field(self.field, e.field)

    @classmethod
    def from_grid(
        cls, field: ScalarField, grid: Sequence[Sequence[Sequence[MeasureEntry] | MeasureEntry]]
    ) -> MatrixOfMeasures:
        """Build from a nested grid; a bare entry stands for a one-term cell."""
        cells = tuple(
            tuple((c,) if isinstance(c, MeasureEntry) else tuple(c) for c in row) for row in grid
        )
        return cls(field, len(cells), len(cells[0]) if cells else 0, cells)

    def entries(self) -> Iterator[MeasureEntry]:
        """Every entry of every cell."""
        for row in self.grid:
            for cell in row:
                yield from cell

    def cell(self, b: int, a: int) -> Cell:
        """Entries summed in cell ``(b, a)``."""
        return self.grid[b][a]

    def moment(self, b: int, a: int, k: int) -> Scalar:
        """``integral x**k d mu_{b,a}``."""
        total = self.field.zero
        for e in self.grid[b][a]:
            total += e.moment(k)
        return total

    def integrate_cell(self, b: int, a: int, numer: UniPoly, denom: UniPoly | None = None) -> Scalar:
        """``integral numer / denom d mu_{b,a}``."""
        denom = denom if denom is not None else UniPoly.constant(self.field, 1)
        total = self.field.zero
        if numer.is_zero():
            return total
        for e in self.grid[b][a]:
            total += e.integrate_rational(numer, denom)
        return total

    def transpose(self) -> MatrixOfMeasures:
        """The ``p x q`` transposed grid."""
        return MatrixOfMeasures(self.field, self.p, self.q, tuple(zip(*self.grid, strict=True)) if self.q else ())

    def __add__(self, other: MatrixOfMeasures) -> MatrixOfMeasures:
        if (self.q, self.p) != (other.q, other.p):
            msg = f"cannot add {self.q}x{self.p} and {other.q}x{other.p} measures"
            raise ValueError(msg)
        grid = tuple(
            tuple(self.grid[b][a] + other.grid[b][a] for a in range(self.p)) for b in range(self.q)
        )
        return MatrixOfMeasures(self.field, self.q, self.p, grid)

    @property
    def support(self) -> tuple[Scalar, Scalar]:
        """Union interval of every entry's support."""
        supports = [e.support for e in self.entries()]
        if not supports:
            return self.field.zero, self.field.zero
        return min(s[0] for s in supports), max(s[1] for s in supports)

    @property
    def radius(self) -> Scalar:
        """``max |x|`` over the union support."""
        return max((e.radius for e in self.entries()), default=self.field.zero)

    @property
    def is_discrete(self) -> bool:
        """True when every entry is a :class:`DiscreteAtoms`."""
        return all(isinstance(e, DiscreteAtoms) for e in self.entries())

    def nodes(self) -> tuple[Scalar, ...]:
        """Sorted union of atom positions."""
        return tuple(sorted({x for e in self.entries() for x in e.nodes}))

    def weight_at(self, node: Scalar) -> DenseMatrix:
        """``q x p`` matrix of atom weights at ``node`` (discrete grids)."""

        def entry(b: int, a: int) -> Scalar:
            total = self.field.zero
            for e in self.grid[b][a]:
                if isinstance(e, DiscreteAtoms):
                    total += sum((w for x, w in e.atoms if x == node), self.field.zero)
            return total

        return DenseMatrix.build(self.field, self.q, self.p, entry)


def lebesgue_entry(field: ScalarField, lo: object = 0, hi: object = 1) -> ClosedFormWeight:
    """Lebesgue measure on ``[lo, hi]`` with an analytic Cauchy oracle.

    The Cauchy oracle expands ``f`` around ``z``; on the rational backend it is
    exact whenever no logarithmic term appears (``deg f < order``).

    """
    a, b = field.coerce(lo), field.coerce(hi)

    def moments(k: int) -> Scalar:
        return (b ** (k + 1) - a ** (k + 1)) / (k + 1)

    def cauchy(f: UniPoly, z: Scalar, order: int) -> Scalar:
        if a <= z <= b:
            msg = f"Cauchy point {field.to_json(z)} lies in [{field.to_json(a)}, {field.to_json(b)}]"
            raise PoleOnSupport(msg)
        total = field.zero
        for j, t in enumerate(f.taylor(z, f.degree + 1)):
            e = j - order - 1
            if e == -1:
                if field.exact:
                    msg = "logarithmic Cauchy term needs the float backend"
                    raise BackendUnsupported(msg)
                ctx = field.ctx  # type: ignore[attr-defined]
                total += t * (ctx.log(abs(b - z)) - ctx.log(abs(a - z)))
            else:
                total += t * ((b - z) ** (e + 1) - (a - z) ** (e + 1)) / (e + 1)
        return total if order % 2 else -total

    return ClosedFormWeight(
        field, moments, (a, b), cauchy_oracle=cauchy, density=lambda _x: field.one, label="lebesgue"
    )


def lebesgue_measure(field: ScalarField, lo: object = 0, hi: object = 1) -> MatrixOfMeasures:
    """A ``1 x 1`` Lebesgue measure."""
    return MatrixOfMeasures.from_grid(field, [[lebesgue_entry(field, lo, hi)]])


def discrete_measure(field: ScalarField, grid: Sequence[Sequence[Sequence[tuple[object, object]]]]) -> MatrixOfMeasures:
    """Build a grid of :class:`DiscreteAtoms` from ``(node, weight)`` lists."""
    return MatrixOfMeasures.from_grid(field, [[DiscreteAtoms(field, atoms) for atoms in row] for row in grid])


# =============================================================================
# Pairings
# =============================================================================


def pair_integrate(
    b_row: VectorPoly, mu: MatrixOfMeasures, a_col: VectorPoly, denominator: UniPoly | None = None
) -> Scalar:
    """``sum_{b,a} integral B^(b) d mu_{b,a} A^(a)``, optionally divided by ``denominator``."""
    if len(b_row) != mu.q or len(a_col) != mu.p:
        msg = f"pairing shapes {len(b_row)}/{len(a_col)} do not match {mu.q}x{mu.p} measure"
        raise ValueError(msg)
    total = mu.field.zero
    for b, bp in enumerate(b_row):
        if bp.is_zero():
            continue
        for a, ap in enumerate(a_col):
            if ap.is_zero():
                continue
            total += mu.integrate_cell(b, a, bp * ap, denominator)
    return total


def cauchy_pairing(
    poly: VectorPoly, mu: MatrixOfMeasures, z: object, side: Side, order: int = 0
) -> tuple[Scalar, ...]:
    """Cauchy-type pairing of a vector polynomial with the measure.

    ``side="left"`` treats ``poly`` as a row of length ``q`` and returns the
    ``p`` values ``integral poly dmu / (z - x)**(order + 1)``; ``side="right"``
    treats it as a column of length ``p`` and returns ``q`` values.

    Raises:
        PoleOnSupport: If ``z`` is an atom or delta point.
        SeriesDivergent: If ``|z|`` is inside the radius of an oracle-free weight.

    """
    field = mu.field
    zz = field.coerce(z)
    out = []
    if side == "left":
        for a in range(mu.p):
            total = field.zero
            for b in range(mu.q):
                if not poly[b].is_zero():
                    total += sum((e.cauchy(poly[b], zz, order) for e in mu.cell(b, a)), field.zero)
            out.append(total)
    else:
        for b in range(mu.q):
            total = field.zero
            for a in range(mu.p):
                if not poly[a].is_zero():
                    total += sum((e.cauchy(poly[a], zz, order) for e in mu.cell(b, a)), field.zero)
            out.append(total)
    return tuple(out)


# =============================================================================
# Perturbation
# =============================================================================


@dataclass(frozen=True)
class MassData:
    """Polynomial mass vectors attached to Jordan-chain positions.

    Attributes:
        size: Length of every mass vector (``q`` standard, ``p`` dual).
        vectors: ``(i, j, k) -> xi`` where ``i`` indexes the eigenvalue list,
            ``j`` the chain and ``k`` the position in the chain.

    """

    size: int
    vectors: Mapping[tuple[int, int, int], VectorPoly] = dc_field(default_factory=dict)

    def items(self) -> list[tuple[tuple[int, int, int], VectorPoly]]:
        """Entries sorted by key."""
        return sorted(self.vectors.items(), key=lambda t: t[0])

    def get(self, key: tuple[int, int, int]) -> VectorPoly | None:
        """Mass vector at ``key``, if any."""
        return self.vectors.get(key)

    def transpose(self) -> MassData:
        """Same vectors read as rows (used for the dual orientation)."""
        return MassData(self.size, dict(self.vectors))

    def validate(self, spectra: Sequence[SpectralDatum]) -> None:
        """Check every key against the spectral data.

        Raises:
            MissingSpectralData: Unknown eigenvalue, chain or position.

        """
        for (i, j, k), vec in self.vectors.items():
            if len(vec) != self.size:
                msg = f"mass vector {(i, j, k)} has {len(vec)} entries, expected {self.size}"
                raise ValueError(msg)
            if i >= len(spectra):
                msg = f"mass references eigenvalue {i}, only {len(spectra)} known"
                raise MissingSpectralData(msg)
            chains = spectra[i].left_chains
            if j >= len(chains) or k >= len(chains[j]):
                msg = f"mass references chain position {(i, j, k)} that does not exist"
                raise MissingSpectralData(msg)


def _atom_limit(
    x: Scalar, w: DenseMatrix, lgrid: list[list[UniPoly]], adj_r: list[list[UniPoly]], det_r: UniPoly
) -> DenseMatrix:
    """Weight of ``L w R^-1`` at an atom where ``det R`` vanishes.

    ``L(t) w adj R(t) / det R(t)`` is continued to ``t = x`` by dropping the
    common factor ``(t - x)**m``, ``m`` the order of the zero of ``det R``.
    """
    field = w.field
    det_taylor = det_r.taylor(x, det_r.degree + 1)
    m = next(j for j, c in enumerate(det_taylor) if not field.is_zero(c))
    rows, cols = len(lgrid), len(adj_r[0])
    out = [[field.zero] * cols for _ in range(rows)]
    for b in range(rows):
        for a in range(cols):
            numer = UniPoly.zero(field)
            for c in range(w.shape[0]):
                for d in range(w.shape[1]):
                    if not field.is_zero(w[c, d]):
                        numer = numer + (lgrid[b][c] * adj_r[d][a]).scale(w[c, d])
            head = numer.taylor(x, m + 1)
            if any(not field.is_zero(h) for h in head[:m]):
                msg = f"R is singular at atom {field.to_json(x)} and L does not cancel the pole"
                raise IntegrabilityViolation(msg)
            out[b][a] = head[m] / det_taylor[m]
    return DenseMatrix.from_rows(field, out)


def _perturb_discrete(mu: MatrixOfMeasures, L: MatrixPolynomial, R: MatrixPolynomial) -> list[list[list[MeasureEntry]]]:
    field = mu.field
    cells: list[list[list[tuple[Scalar, Scalar]]]] = [[[] for _ in range(R.size)] for _ in range(L.size)]
    singular: tuple[list[list[UniPoly]], list[list[UniPoly]], UniPoly] | None = None
    for x in mu.nodes():
        w = mu.weight_at(x)
        if w.is_zero():
            continue
        r_at = R(x)
        if field.is_zero(r_at.det()):
            if singular is None:
                singular = (L.entries(), mp_adjugate(R).entries(), mp_determinant(R))
            w_new = _atom_limit(x, w, *singular)
        else:
            w_new = L(x) @ w @ r_at.inverse()
        for b in range(L.size):
            for a in range(R.size):
                if not field.is_zero(w_new[b, a]):
                    cells[b][a].append((x, w_new[b, a]))
    return [[[DiscreteAtoms(field, atoms)] if atoms else [] for atoms in row] for row in cells]


def _perturb_continuous(
    mu: MatrixOfMeasures, L: MatrixPolynomial, R: MatrixPolynomial, spectra: Sequence[SpectralDatum]
) -> list[list[list[MeasureEntry]]]:
    field = mu.field
    det_r = mp_determinant(R)
    adj_r = mp_adjugate(R).entries()
    lgrid = L.entries()
    roots = [(d.eigenvalue, d.multiplicity) for d in spectra]
    cells: list[list[list[MeasureEntry]]] = [[[] for _ in range(R.size)] for _ in range(L.size)]
    for b in range(L.size):
        for a in range(R.size):
            for c in range(mu.q):
                for d in range(mu.p):
                    numer = lgrid[b][c] * adj_r[d][a]
                    if numer.is_zero():
                        continue
                    for base in mu.cell(c, d):
                        weight = RationalWeight(base, numer, det_r, roots)
                        for rho, order in weight.pole_orders:
                            if order > 0 and not base.integrable_at(rho, order):
                                msg = (
                                    f"L dmu R^-1 is not integrable at {field.to_json(rho)} "
                                    f"(pole order {order} against {base!r})"
                                )
                                raise IntegrabilityViolation(msg)
                        cells[b][a].append(weight)
    return cells


def perturb_measure(
    mu: MatrixOfMeasures,
    L: MatrixPolynomial,
    R: MatrixPolynomial,
    mass: MassData | None = None,
    orientation: Orientation = "standard",
    spectra: Sequence[SpectralDatum] | None = None,
) -> MatrixOfMeasures:
    """Build the perturbed functional.

    Standard orientation solves ``d(mu~) R = L dmu`` with
    ``d(mu~) = L dmu R^-1 + sum L xi (sum_l (-1)^l / l! r_{k-l} delta^(l))``, the
    row vectors ``r`` taken from the left Jordan chains of ``R``. The dual
    orientation solves ``L d(mu~) = dmu R`` by transposition.

    Args:
        mu: Base matrix of measures (``q x p``).
        L: Left polynomial (``q x q``).
        R: Right polynomial (``p x p``).
        mass: Mass vectors keyed by chain position; None for no masses.
        orientation: ``standard`` or ``dual``.
        spectra: Spectral data of ``R`` (standard) or ``L`` (dual); computed if omitted.

    Raises:
        IntegrabilityViolation: The rational part is not locally integrable.
        MissingSpectralData: Mass data names an unknown chain position.

    """
    if orientation == "dual":
        transposed_spectra = None
        if spectra is not None:
            transposed_spectra = [
                type(s)(s.eigenvalue, s.multiplicity, s.left_chains, s.right_chains, s.partial_multiplicities)
                for s in spectra
            ]
        standard = perturb_measure(
            mu.transpose(),
            R.transpose(),
            L.transpose(),
            mass.transpose() if mass is not None else None,
            "standard",
            transposed_spectra,
        )
        return standard.transpose()

    field = mu.field
    if (L.size, R.size) != (mu.q, mu.p):
        msg = f"perturbation sizes {L.size}/{R.size} do not match {mu.q}x{mu.p} measure"
        raise ValueError(msg)
    if spectra is None:
        spectra = spectral_data(R)
    if mu.is_discrete:
        cells = _perturb_discrete(mu, L, R)
    else:
        cells = _perturb_continuous(mu, L, R, spectra)

    if mass is not None:
        mass.validate(spectra)
        for (i, j, k), xi in mass.items():
            datum = spectra[i]
            weights = L.times_col(xi)
            for lvl in range(k + 1):
                row = datum.left_chains[j][k - lvl]
                scale = Fraction(-1 if lvl % 2 else 1) / math.factorial(lvl)
                for b in range(L.size):
                    if weights[b].is_zero():
                        continue
                    for a in range(R.size):
                        if field.is_zero(row[a]):
                            continue
                        coeff = field.coerce(scale) * row[a]
                        cells[b][a].append(DeltaTerm(field, datum.eigenvalue, lvl, coeff, weights[b]))
        logger.debug("mopkit: attached %d mass vectors", len(mass.vectors))

    return MatrixOfMeasures(field, L.size, R.size, tuple(tuple(tuple(c) for c in row) for row in cells))


__all__ = [
    "ClosedFormWeight",
    "DeltaTerm",
    "DiscreteAtoms",
    "MassData",
    "MatrixOfMeasures",
    "MeasureEntry",
    "RationalWeight",
    "cauchy_pairing",
    "discrete_measure",
    "lebesgue_entry",
    "lebesgue_measure",
    "moment_of_entry",
    "pair_integrate",
    "partial_fraction_terms",
    "perturb_measure",
]
