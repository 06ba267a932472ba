"""Jacobi-Pineiro weights on ``[0, 1]`` and their two explicit perturbations.

The base system is ``q = 1``, ``p = 3`` with ``w_a(x) = x**alpha_a`` and
``dmu = (1 - x)**beta dx``. Type I and type II families are known in closed
form, which makes this system the reference check for the whole Uvarov
pipeline.

Features:
    - JPParams: exponents kept as exact fractions, AT and integrability checks
    - jp_stepline / jp_moment / jp_measure: step-line indices, moments, weights
    - jp_closed_forms: coefficient tables of both families
    - jp_boundary_values: values at 0 and 1 plus Cauchy transforms at 1
    - jp_family_check: closed forms against the Gauss-Borel families
    - jp_case_study: the two perturbations run through the Uvarov pipeline

Index convention:
    ``B_n`` is the type II polynomial of multi-index ``jp_stepline(n)``. The
    type I column of multi-index ``jp_stepline(n)`` is ``A_{n-1}``, normalized
    by ``integral x**(n-1) A_{n-1} dmu = 1``.

Example:
    Compare closed forms with the LU families at 512 bits::

        from mopkit.fields import BigFloatField
        from mopkit.jacobi_pineiro import JPParams, jp_family_check

        report = jp_family_check(JPParams(0, "1/2", "1/3", "1/2"), 8, BigFloatField(512))
        report.ok

"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from dataclasses import field as dc_field
from fractions import Fraction
from functools import cached_property
from itertools import product
from typing import TYPE_CHECKING, Any, Literal

from mopkit.biorth import biorthogonal_family
from mopkit.exceptions import (
    ATViolation,
    BackendUnsupported,
    IntegrabilityViolation,
    PoleOnSupport,
)
from mopkit.fields import BigFloatField
from mopkit.matrix_poly import MatrixPolynomial, SpectralDatum
from mopkit.measures import ClosedFormWeight, MassData, MatrixOfMeasures
from mopkit.numerics import DenseMatrix, UniPoly, determinant, pochhammer
from mopkit.uvarov import PerturbationBundle, oracle_comparison, oracle_direct, spectral_vectors
from mopkit.uvarov.connection import tau_det

if TYPE_CHECKING:
    from collections.abc import Callable, Sequence

    from mopkit.biorth import VectorPolyFamily
    from mopkit.fields.base import Scalar, ScalarField
    from mopkit.numerics import VectorPoly
    from mopkit.uvarov import ResidualReport

logger = logging.getLogger(__name__)

Perturbation = Literal["perturbation_1", "perturbation_2"]
CauchyShift = Literal["beta_integral", "as_displayed"]

VALID_PERTURBATIONS: tuple[Perturbation, ...] = ("perturbation_1", "perturbation_2")
DEFAULT_CASE_STUDY_BITS = 512


# =============================================================================
# Parameters and step line
# =============================================================================


@dataclass(frozen=True)
class JPParams:
    """Exponents ``(alpha_1, alpha_2, alpha_3, beta)``.

    Values are converted with ``Fraction`` so integrality questions are
    decided exactly on both backends.

    Raises:
        IntegrabilityViolation: If an exponent is ``<= -1``.
        ATViolation: If two ``alpha`` differ by an integer.

    """

    alpha1: Fraction
    alpha2: Fraction
    alpha3: Fraction
    beta: Fraction

    def __init__(self, alpha1: object, alpha2: object, alpha3: object, beta: object) -> None:
        for name, value in (("alpha1", alpha1), ("alpha2", alpha2), ("alpha3", alpha3), ("beta", beta)):
            object.__setattr__(self, name, _fraction(value))
        self.validate()

    @property
    def alphas(self) -> tuple[Fraction, Fraction, Fraction]:
        return (self.alpha1, self.alpha2, self.alpha3)

    def validate(self) -> None:
        """Check integrability of every weight and the AT condition."""
        for name, value in (*zip(("alpha1", "alpha2", "alpha3"), self.alphas, strict=True), ("beta", self.beta)):
            if value <= -1:
                msg = f"{name} = {value} must be > -1"
                raise IntegrabilityViolation(msg)
        for i in range(3):
            for j in range(i + 1, 3):
                if (self.alphas[i] - self.alphas[j]).denominator == 1:
                    msg = f"alpha{i + 1} - alpha{j + 1} = {self.alphas[i] - self.alphas[j]} is an integer"
                    raise ATViolation(msg)

    def shifted(self) -> JPParams:
        """Parameters of the first perturbation at ``c = 1``, ``d = 0``, no mass."""
        return JPParams(self.alpha3, self.alpha1 + 1, self.alpha2 + 1, self.beta - 1)

    def to_json(self) -> dict[str, str]:
        names = ("alpha1", "alpha2", "alpha3", "beta")
        return {name: str(getattr(self, name)) for name in names}


def _fraction(value: object) -> Fraction:
    if isinstance(value, Fraction):
        return value
    if isinstance(value, (int, str)):
        return Fraction(value)
    if isinstance(value, float):
        return Fraction(str(value))
    msg = f"Jacobi-Pineiro exponents must be rational, got {value!r}"
    raise TypeError(msg)


@dataclass(frozen=True, slots=True)
class StepIndex:
    """Total degree ``n`` and its step-line multi-index."""

    n: int
    counts: tuple[int, int, int]


def jp_stepline(n: int) -> StepIndex:
    """``3m -> (m, m, m)``, ``3m + 1 -> (m+1, m, m)``, ``3m + 2 -> (m+1, m+1, m)``."""
    if n < 0:
        msg = f"step-line index must be nonnegative, got {n}"
        raise ValueError(msg)
    m, r = divmod(n, 3)
    counts = (m + (r > 0), m + (r > 1), m)
    return StepIndex(n, counts)


# =============================================================================
# Gamma quotients
# =============================================================================


def _gamma_step(field: ScalarField, top: Fraction, bottom: Fraction) -> Scalar:
    """``Gamma(top) / Gamma(bottom)`` for an integer difference."""
    k = int(top - bottom)
    if k >= 0:
        return pochhammer(field.coerce(bottom), k)
    return 1 / pochhammer(field.coerce(top), -k)


def _gamma_quotient(field: ScalarField, tops: Sequence[Fraction], bottoms: Sequence[Fraction]) -> Scalar:
    """``prod Gamma(tops) / prod Gamma(bottoms)``.

    The float backend uses ``gammaprod``; the exact backend pairs arguments at
    integer distance and needs the rest to be positive integers.

    """
    if not field.exact:
        ctx = field.ctx  # type: ignore[attr-defined]
        return ctx.gammaprod([field.coerce(t) for t in tops], [field.coerce(b) for b in bottoms])
    out = field.one
    left = list(bottoms)
    for top in tops:
        match = next((b for b in left if (top - b).denominator == 1), None)
        if match is not None:
            left.remove(match)
            out *= _gamma_step(field, top, match)
        elif top.denominator == 1 and top > 0:
            out *= field.factorial(int(top) - 1)
        else:
            msg = f"Gamma({top}) does not reduce to a rational on the exact backend"
            raise BackendUnsupported(msg)
    for bottom in left:
        if bottom.denominator != 1 or bottom <= 0:
            msg = f"Gamma({bottom}) does not reduce to a rational on the exact backend"
            raise BackendUnsupported(msg)
        out /= field.factorial(int(bottom) - 1)
    return out


def beta_integral(field: ScalarField, a: Fraction, b: Fraction) -> Scalar:
    """``integral_0^1 x**a (1 - x)**b dx``.

    Raises:
        IntegrabilityViolation: If ``a <= -1`` or ``b <= -1``.
        BackendUnsupported: Exact backend with neither exponent an integer.

    """
    if a <= -1 or b <= -1:
        msg = f"x^{a} (1-x)^{b} is not integrable on [0, 1]"
        raise IntegrabilityViolation(msg)
    return _gamma_quotient(field, (a + 1, b + 1), (a + b + 2,))


def jp_moment(field: ScalarField, params: JPParams, a: int, k: int) -> Scalar:
    """``Gamma(beta+1) Gamma(alpha_a+k+1) / Gamma(alpha_a+beta+k+2)``."""
    return beta_integral(field, params.alphas[a] + k, params.beta)


# =============================================================================
# Weights
# =============================================================================


def _peel(poly: UniPoly, factor: UniPoly, at: Scalar, limit: int | None = None) -> tuple[UniPoly, int]:
    """Divide out ``factor`` (vanishing at ``at``) as often as it divides."""
    count = 0
    while poly.degree > 0 and (limit is None or count < limit) and poly.field.is_zero(poly(at)):
        poly = poly.exact_div(factor)
        count += 1
    return poly, count


def jp_entry(field: ScalarField, params: JPParams, a: int) -> ClosedFormWeight:
    """``x**alpha_a (1 - x)**beta dx`` on ``[0, 1]`` with analytic oracles.

    Denominators built from ``x`` and ``1 - x`` are integrated by Beta integrals,
    so perturbations with poles at the endpoints stay exact when ``beta`` is an
    integer. Cauchy transforms off the endpoints use ``hyp2f1`` on the float
    backend.

    """
    alpha, beta = params.alphas[a], params.beta
    x_poly = UniPoly.monomial(field, 1)
    one_minus_x = UniPoly.from_coeffs(field, [1, -1])

    def endpoint_sum(f: UniPoly, shift_a: int, shift_b: int) -> Scalar:
        total = field.zero
        for k, coeff in enumerate(f.coeffs):
            if not field.is_zero(coeff):
                total += coeff * beta_integral(field, alpha + k - shift_a, beta - shift_b)
        return total

    def cauchy(f: UniPoly, z: Scalar, order: int) -> Scalar:
        if z == field.one:
            return endpoint_sum(f, 0, order + 1)
        if z == field.zero:
            value = endpoint_sum(f, order + 1, 0)
            return -value if order % 2 == 0 else value
        if field.zero < z < field.one:
            msg = f"Cauchy point {field.to_json(z)} lies inside (0, 1)"
            raise PoleOnSupport(msg)
        if field.exact:
            msg = "Jacobi-Pineiro Cauchy transforms off the endpoints need the float backend"
            raise BackendUnsupported(msg)
        ctx = field.ctx  # type: ignore[attr-defined]
        total = field.zero
        for k, coeff in enumerate(f.coeffs):
            if field.is_zero(coeff):
                continue
            s = field.coerce(alpha + k)
            hyper = ctx.hyp2f1(order + 1, s + 1, s + field.coerce(beta) + 2, 1 / z)
            total += coeff * beta_integral(field, alpha + k, beta) * hyper
        return total / z ** (order + 1)

    def divided(numer: UniPoly, denom: UniPoly) -> Scalar | None:
        rest, at_zero = _peel(denom, x_poly, field.zero)
        rest, at_one = _peel(rest, one_minus_x, field.one)
        if rest.degree > 0:
            return None
        if numer.is_zero():
            return field.zero
        numer, cancelled = _peel(numer, x_poly, field.zero, at_zero)
        at_zero -= cancelled
        numer, cancelled = _peel(numer, one_minus_x, field.one, at_one)
        at_one -= cancelled
        return endpoint_sum(numer, at_zero, at_one) / rest.lead

    def integrable(rho: Scalar, pole_order: int) -> bool:
        if pole_order <= 0:
            return True
        if rho == field.zero:
            return alpha - pole_order > -1
        if rho == field.one:
            return beta - pole_order > -1
        return bool(rho < field.zero or rho > field.one)

    density: Callable[[Scalar], Scalar] | None = None
    if not field.exact:
        ctx = field.ctx  # type: ignore[attr-defined]
        fa, fb = field.coerce(alpha), field.coerce(beta)

        def pointwise(x: Scalar) -> Scalar:
            return ctx.power(x, fa) * ctx.power(1 - x, fb)

        density = pointwise

    return ClosedFormWeight(
        field,
        lambda k: jp_moment(field, params, a, k),
        (0, 1),
        cauchy_oracle=cauchy,
        divided_oracle=divided,
        density=density,
        integrable=integrable,
        label=f"jacobi_pineiro[{a}]",
    )


def jp_measure(field: ScalarField, params: JPParams) -> MatrixOfMeasures:
    """The ``1 x 3`` Jacobi-Pineiro measure."""
    return MatrixOfMeasures.from_grid(field, [[jp_entry(field, params, a) for a in range(3)]])


# =============================================================================
# Closed forms
# =============================================================================


@dataclass(frozen=True)
class JPClosedForms:
    """Coefficient tables for one step-line index.

    Attributes:
        step: The multi-index.
        type_I: ``a -> (C^{(a),0}, ..., C^{(a),n_a-1})``.
        type_II: ``(l1, l2, l3) -> C^{l1,l2,l3}``, the coefficient of ``x**(l1+l2+l3)``.

    """

    field: ScalarField
    step: StepIndex
    type_I: dict[int, tuple[Scalar, ...]]
    type_II: dict[tuple[int, int, int], Scalar]

    @cached_property
    def type_II_poly(self) -> UniPoly:
        """The monic type II polynomial ``B_n``."""
        coeffs = [self.field.zero] * (self.step.n + 1)
        for ls, c in self.type_II.items():
            coeffs[sum(ls)] += c
        return UniPoly.from_coeffs(self.field, coeffs)

    @cached_property
    def type_I_polys(self) -> VectorPoly:
        """The type I column ``A_{n-1}`` (all zero when ``n = 0``)."""
        return tuple(UniPoly.from_coeffs(self.field, self.type_I.get(a, ())) for a in range(3))

    def to_json(self) -> dict[str, Any]:
        to = self.field.to_json
        return {
            "n": self.step.n,
            "multi_index": list(self.step.counts),
            "type_I": {str(a): [to(c) for c in cs] for a, cs in sorted(self.type_I.items())},
            "type_II": {",".join(map(str, ls)): to(c) for ls, c in sorted(self.type_II.items())},
        }


def _type_I_table(field: ScalarField, params: JPParams, step: StepIndex) -> dict[int, tuple[Scalar, ...]]:
    al, be, n, ns = params.alphas, params.beta, step.n, step.counts
    co = field.coerce
    out: dict[int, tuple[Scalar, ...]] = {}
    for a in range(3):
        if ns[a] == 0:
            continue
        others = [q for q in range(3) if q != a]
        head = field.one if (n - 1) % 2 == 0 else -field.one
        for q in range(3):
            head *= pochhammer(co(al[q] + be + n), ns[q])
        head /= field.factorial(ns[a] - 1)
        for q in others:
            head /= pochhammer(co(al[q] - al[a]), ns[q])
        head *= _gamma_quotient(field, (al[a] + be + n,), (be + n, al[a] + 1))
        row = []
        for l in range(ns[a]):
            term = pochhammer(co(1 - ns[a]), l) * pochhammer(co(al[a] + be + n), l)
            term /= field.factorial(l) * pochhammer(co(al[a] + 1), l)
            for q in others:
                term *= pochhammer(co(al[a] - al[q] - ns[q] + 1), l) / pochhammer(co(al[a] - al[q] + 1), l)
            row.append(head * term)
        out[a] = tuple(row)
    return out


def _type_II_table(field: ScalarField, params: JPParams, step: StepIndex) -> dict[tuple[int, int, int], Scalar]:
    (a1, a2, a3), be, n = params.alphas, params.beta, step.n
    n1, n2, n3 = step.counts
    co = field.coerce
    head = field.one if n % 2 == 0 else -field.one
    for al, nq in zip(params.alphas, step.counts, strict=True):
        head *= pochhammer(co(al + 1), nq) / pochhammer(co(al + be + n + 1), nq)
    out = {}
    for l1, l2, l3 in product(range(n1 + 1), range(n2 + 1), range(n3 + 1)):
        total, tail = l1 + l2 + l3, l2 + l3
        term = field.one
        for nq, lq in zip(step.counts, (l1, l2, l3), strict=True):
            term *= pochhammer(co(-nq), lq) / field.factorial(lq)
        term *= pochhammer(co(a1 + be + n1 + 1), total) / pochhammer(co(a1 + 1), total)
        term *= pochhammer(co(a1 + n1 + 1), tail) * pochhammer(co(a2 + n2 + 1), l3)
        term /= pochhammer(co(a1 + be + n1 + 1), tail) * pochhammer(co(a2 + be + n1 + n2 + 1), l3)
        term *= pochhammer(co(a2 + be + n1 + n2 + 1), tail) * pochhammer(co(a3 + be + n + 1), l3)
        term /= pochhammer(co(a2 + 1), tail) * pochhammer(co(a3 + 1), l3)
        out[l1, l2, l3] = head * term
    return out


def jp_closed_forms(field: ScalarField, params: JPParams, n: int) -> JPClosedForms:
    """Type I and type II coefficient tables at step-line index ``n``.

    Raises:
        ATViolation: If the parameters break the AT condition.
        BackendUnsupported: Exact backend with a non-integer ``beta`` (type I only).

    """
    params.validate()
    step = jp_stepline(n)
    type_I = _type_I_table(field, params, step) if n > 0 else {}
    return JPClosedForms(field, step, type_I, _type_II_table(field, params, step))


def type_I_pairing(field: ScalarField, params: JPParams, forms: JPClosedForms) -> Scalar:
    """``integral x**(n-1) A_{n-1} dmu``; 1 under the family normalization."""
    total = field.zero
    for a, cs in forms.type_I.items():
        for l, c in enumerate(cs):
            total += c * jp_moment(field, params, a, l + forms.step.n - 1)
    return total


# =============================================================================
# Endpoint values and Cauchy transforms at 1
# =============================================================================


@dataclass
class JPBoundary:
    """Closed-form endpoint data for one index and the gaps to independent oracles.

    Attributes:
        values: ``name -> value`` (type I entries suffixed with the weight index).
        checks: ``name -> |closed form - oracle|``.
        variants: ``name -> value`` of the alternative displayed expressions.
        resolution: ``name -> variant`` the quadrature oracle agreed with.

    """

    field: ScalarField
    n: int
    values: dict[str, Scalar] = dc_field(default_factory=dict)
    checks: dict[str, Scalar] = dc_field(default_factory=dict)
    variants: dict[str, Scalar | None] = dc_field(default_factory=dict)
    resolution: dict[str, str] = dc_field(default_factory=dict)

    @property
    def ok(self) -> bool:
        return all(self.field.is_zero(v) for v in self.checks.values())

    def to_json(self) -> dict[str, Any]:
        to = self.field.to_json
        return {
            "n": self.n,
            "values": {k: to(v) for k, v in sorted(self.values.items())},
            "checks": {k: to(v) for k, v in sorted(self.checks.items())},
            "variants": {k: None if v is None else to(v) for k, v in sorted(self.variants.items())},
            "resolution": dict(sorted(self.resolution.items())),
            "ok": self.ok,
        }


def _typeII_cauchy_at_one(
    field: ScalarField, params: JPParams, forms: JPClosedForms, a: int, shift: CauchyShift
) -> Scalar | None:
    """``integral P_n x**alpha_a (1-x)**(beta-1) dx`` from the coefficient table."""
    lag = 0 if shift == "beta_integral" else 1
    total = field.zero
    for ls, c in forms.type_II.items():
        try:
            total += c * beta_integral(field, params.alphas[a] + sum(ls) - lag, params.beta - 1)
        except IntegrabilityViolation:
            return None
    return total


def _quadrature(field: ScalarField, params: JPParams, poly: UniPoly, a: int) -> Scalar:
    """``integral poly x**alpha_a (1-x)**(beta-1)`` by tanh-sinh quadrature."""
    ctx = field.ctx  # type: ignore[attr-defined]
    fa, fb = field.coerce(params.alphas[a]), field.coerce(params.beta - 1)
    return ctx.quad(lambda x: poly(x) * ctx.power(x, fa) * ctx.power(1 - x, fb), [0, 1])


def jp_boundary_values(
    field: ScalarField, params: JPParams, n: int, shift: CauchyShift = "beta_integral"
) -> JPBoundary:
    """Values at the endpoints and Cauchy transforms at 1 for index ``n``.

    ``P_n(0)`` is taken from the constant coefficient of the closed form; the
    alternative product with ``(alpha_a + beta + 1)_{n_a}`` is kept under
    ``variants``. ``D^{(a)}_n(1)`` uses the Beta integral selected by ``shift``;
    both shifts are recorded and the quadrature oracle picks one on the float
    backend.

    Raises:
        IntegrabilityViolation: If ``beta <= 0`` (Cauchy transforms at 1 diverge).

    """
    if params.beta <= 0:
        msg = f"Cauchy transforms at 1 need beta > 0, got {params.beta}"
        raise IntegrabilityViolation(msg)
    forms = jp_closed_forms(field, params, n)
    report = JPBoundary(field, n)
    co = field.coerce
    al, be = params.alphas, params.beta
    ns = forms.step.counts
    p_n = forms.type_II_poly

    p0 = forms.type_II[0, 0, 0]
    p1 = pochhammer(co(be + 1), n)
    displayed_p0 = field.one if n % 2 == 0 else -field.one
    for q in range(3):
        p1 /= pochhammer(co(al[q] + be + n + 1), ns[q])
        displayed_p0 *= pochhammer(co(al[q] + 1), ns[q]) / pochhammer(co(al[q] + be + 1), ns[q])
    report.values["P(0)"], report.values["P(1)"] = p0, p1
    report.checks["P(0)"] = field.abs(p0 - p_n(field.zero))
    report.checks["P(1)"] = field.abs(p1 - p_n(field.one))
    report.variants["P(0)"] = displayed_p0
    report.resolution["P(0)"] = "both" if field.close(displayed_p0, p_n(field.zero)) else "constant_coefficient"

    if n > 0:
        cauchy_c = field.zero
        for a, cs in forms.type_I.items():
            report.values[f"A{a}(0)"] = cs[0]
            report.values[f"A{a}(1)"] = sum(cs, field.zero)
            for l, c in enumerate(cs):
                cauchy_c += c * beta_integral(field, al[a] + l, be - 1)
        report.values["C(1)"] = cauchy_c
        if not field.exact:
            quad = field.zero
            for a in forms.type_I:
                quad += _quadrature(field, params, forms.type_I_polys[a], a)
            report.checks["C(1)"] = field.abs(cauchy_c - quad)

    for a in range(3):
        key = f"D{a}(1)"
        chosen = _typeII_cauchy_at_one(field, params, forms, a, shift)
        other: CauchyShift = "as_displayed" if shift == "beta_integral" else "beta_integral"
        alternative = _typeII_cauchy_at_one(field, params, forms, a, other)
        if chosen is None:
            msg = f"{key} with shift {shift!r} needs alpha_{a + 1} > 0"
            raise IntegrabilityViolation(msg)
        report.values[key] = chosen
        report.variants[key] = alternative
        if field.exact:
            continue
        quad_value = _quadrature(field, params, p_n, a)
        report.checks[key] = field.abs(chosen - quad_value)
        if field.close(chosen, quad_value):
            report.resolution[key] = shift
        elif alternative is not None and field.close(alternative, quad_value):
            report.resolution[key] = other
        else:
            report.resolution[key] = "unresolved"
    logger.debug("mopkit: Jacobi-Pineiro boundary values at n=%d", n)
    return report


# =============================================================================
# Closed forms against Gauss-Borel
# =============================================================================


def _coeff_gap(field: ScalarField, left: Sequence[UniPoly], right: Sequence[UniPoly]) -> Scalar:
    gap = field.zero
    for p, q in zip(left, right, strict=True):
        diff = p - q
        for c in diff.coeffs:
            gap = max(gap, field.abs(c))
    return gap


@dataclass
class JPFamilyReport:
    """Gaps between the closed forms and the Gauss-Borel families.

    Attributes:
        type_II: ``n -> max coefficient gap`` for ``B_n``.
        type_I: ``n -> max coefficient gap`` for ``A_{n-1}``.
        type_I_scale: ``n -> 1 / integral x**(n-1) A_{n-1}`` of the closed form.

    """

    field: ScalarField
    params: JPParams
    type_II: dict[int, Scalar] = dc_field(default_factory=dict)
    type_I: dict[int, Scalar] = dc_field(default_factory=dict)
    type_I_scale: dict[int, Scalar] = dc_field(default_factory=dict)

    @property
    def ok(self) -> bool:
        gaps = [*self.type_II.values(), *self.type_I.values()]
        scales = [s - 1 for s in self.type_I_scale.values()]
        return all(self.field.is_zero(v) for v in (*gaps, *scales))

    def to_json(self) -> dict[str, Any]:
        to = self.field.to_json
        return {
            "params": self.params.to_json(),
            "type_II": {str(k): to(v) for k, v in sorted(self.type_II.items())},
            "type_I": {str(k): to(v) for k, v in sorted(self.type_I.items())},
            "type_I_scale": {str(k): to(v) for k, v in sorted(self.type_I_scale.items())},
            "ok": self.ok,
        }


def jp_family_check(params: JPParams, N: int, field: ScalarField) -> JPFamilyReport:
    """Closed forms against ``families_from_gb`` of the moment matrix, ``n < N``."""
    _, _, fam = biorthogonal_family(jp_measure(field, params), N)
    report = JPFamilyReport(field, params)
    for n in range(N):
        forms = jp_closed_forms(field, params, n)
        report.type_II[n] = _coeff_gap(field, fam.B[n], (forms.type_II_poly,))
        if n == 0:
            continue
        report.type_I_scale[n] = 1 / type_I_pairing(field, params, forms)
        report.type_I[n] = _coeff_gap(field, fam.A[n - 1], forms.type_I_polys)
    logger.info("mopkit: Jacobi-Pineiro closed forms checked for n < %d", N)
    return report


# =============================================================================
# Case study
# =============================================================================


def _unit(field: ScalarField, i: int) -> tuple[Scalar, ...]:
    return tuple(field.one if k == i else field.zero for k in range(3))


def _cyclic(field: ScalarField, corner: UniPoly) -> MatrixPolynomial:
    """``[[0, corner, 0], [0, 0, corner], [1, 0, 0]]``."""
    zero, one = UniPoly.zero(field), UniPoly.constant(field, 1)
    grid = [[zero, corner, zero], [zero, zero, corner], [one, zero, zero]]
    return MatrixPolynomial.from_polys(field, grid)


def _cyclic_spectrum(field: ScalarField, root: Scalar) -> SpectralDatum:
    """Right eigenvectors ``e2, e3`` and left ``e1^T, e2^T`` at ``root``."""
    return SpectralDatum(
        root,
        2,
        right_chains=((_unit(field, 1),), (_unit(field, 2),)),
        left_chains=((_unit(field, 0),), (_unit(field, 1),)),
        partial_multiplicities=(1, 1),
    )


def jp_bundle(
    field: ScalarField,
    params: JPParams,
    which: Perturbation,
    c: object,
    d: object,
    mass: Sequence[Sequence[object]] | None = None,
) -> PerturbationBundle:
    """The perturbation bundle of either case-study measure.

    ``perturbation_1`` is the dual ``(c - x) dmu~ = dmu P_1`` with ``mass`` one
    row of three coefficient lists; ``perturbation_2`` is the standard
    ``dmu~ P_2 = (x - d) dmu`` with ``mass`` two coefficient lists ``xi^1, xi^2``.

    Raises:
        ValueError: If ``c`` or ``d`` lies inside ``(0, 1)`` or the mass shape is wrong.

    """
    cc, dd = field.coerce(c), field.coerce(d)
    for name, value in (("c", cc), ("d", dd)):
        if field.zero < value < field.one:
            msg = f"{name} = {field.to_json(value)} must lie outside (0, 1)"
            raise ValueError(msg)
    mu = jp_measure(field, params)
    if which == "perturbation_1":
        L = MatrixPolynomial.from_polys(field, [[UniPoly.from_coeffs(field, [cc, -1])]])
        R = _cyclic(field, UniPoly.linear(field, dd))
        vectors = {}
        if mass is not None:
            if len(mass) != 3:
                msg = f"perturbation_1 takes one mass row of 3 polynomials, got {len(mass)}"
                raise ValueError(msg)
            vectors[0, 0, 0] = tuple(UniPoly.from_coeffs(field, xs) for xs in mass)
        return PerturbationBundle(mu, L, R, "dual", MassData(3, vectors), spectra_R=[_cyclic_spectrum(field, dd)])
    if which == "perturbation_2":
        L = MatrixPolynomial.from_polys(field, [[UniPoly.linear(field, dd)]])
        R = _cyclic(field, UniPoly.from_coeffs(field, [cc, -1]))
        vectors = {}
        if mass is not None:
            if len(mass) != 2:
                msg = f"perturbation_2 takes masses xi^1, xi^2, got {len(mass)}"
                raise ValueError(msg)
            vectors = {(0, j, 0): (UniPoly.from_coeffs(field, xs),) for j, xs in enumerate(mass)}
        return PerturbationBundle(mu, L, R, "standard", MassData(1, vectors), spectra_R=[_cyclic_spectrum(field, cc)])
    msg = f"unknown perturbation {which!r}, expected one of {VALID_PERTURBATIONS}"
    raise ValueError(msg)


def _case_rows(
    field: ScalarField,
    params: JPParams,
    which: Perturbation,
    cc: Scalar,
    dd: Scalar,
    mass: Sequence[Sequence[object]] | None,
    m: int,
) -> tuple[Scalar, ...]:
    """One determinant row of the case-study formulas, from closed forms only.

    ``perturbation_1``: ``(P^{(1)}_m(d), P^{(2)}_m(d), W_m(c))`` with
    ``W_m(c) = C_m(c) + sum_j xi_j(c) P^{(j)}_m(c)`` for the type I column
    ``A_m``. ``perturbation_2``: ``(P_m(d), D^{(2)}_m(c) + xi^1(c) P_m(c),
    D^{(3)}_m(c) + xi^2(c) P_m(c))``.

    """
    entries = [jp_entry(field, params, a) for a in range(3)]
    xis = [UniPoly.from_coeffs(field, xs)(cc) for xs in mass] if mass is not None else None
    if which == "perturbation_1":
        col = jp_closed_forms(field, params, m + 1).type_I_polys
        w = sum((entries[a].cauchy(col[a], cc, 0) for a in range(3) if not col[a].is_zero()), field.zero)
        if xis is not None:
            w += sum((x * poly(cc) for x, poly in zip(xis, col, strict=True)), field.zero)
        return (col[0](dd), col[1](dd), w)
    poly = jp_closed_forms(field, params, m).type_II_poly
    d1 = entries[1].cauchy(poly, cc, 0)
    d2 = entries[2].cauchy(poly, cc, 0)
    if xis is not None:
        d1 += xis[0] * poly(cc)
        d2 += xis[1] * poly(cc)
    return (poly(dd), d1, d2)


@dataclass
class JPCaseReport:
    """Outcome of one case-study run.

    Attributes:
        oracle: Christoffel formulas against the brute-force perturbed families.
        row_gap: ``m -> max |ledger row - closed-form row|`` after the
            family normalization is applied.
        taus: Ledger ``tau_n``.
        case_taus: ``n -> det`` of closed-form rows ``n .. n + M - 1``.
        shift_gap: ``n -> gap`` to the parameter-shifted closed forms.
        candidate_gap: ``n -> gap`` to the nearest shifted Jacobi-Pineiro family
            (expected nonzero).
        skipped: ``check -> reason``.

    """

    field: ScalarField
    which: Perturbation
    params: JPParams
    N: int
    oracle: ResidualReport | None = None
    row_gap: dict[int, Scalar] = dc_field(default_factory=dict)
    taus: dict[int, Scalar] = dc_field(default_factory=dict)
    case_taus: dict[int, Scalar] = dc_field(default_factory=dict)
    shift_gap: dict[int, Scalar] = dc_field(default_factory=dict)
    candidate_gap: dict[int, Scalar] = dc_field(default_factory=dict)
    skipped: dict[str, str] = dc_field(default_factory=dict)

    @property
    def ok(self) -> bool:
        """Every asserted gap vanishes and the non-Jacobi-Pineiro gap does not."""
        if self.oracle is not None and not self.oracle.ok:
            return False
        gaps = [*self.row_gap.values(), *self.shift_gap.values()]
        if not all(self.field.is_zero(g) for g in gaps):
            return False
        return not any(self.field.is_zero(g) for g in self.candidate_gap.values())

    def to_json(self) -> dict[str, Any]:
        to = self.field.to_json

        def dump(d: dict[int, Scalar]) -> dict[str, str]:
            return {str(k): to(v) for k, v in sorted(d.items())}

        return {
            "which": self.which,
            "params": self.params.to_json(),
            "N": self.N,
            "oracle": None if self.oracle is None else self.oracle.to_json(),
            "row_gap": dump(self.row_gap),
            "taus": dump(self.taus),
            "case_taus": dump(self.case_taus),
            "shift_gap": dump(self.shift_gap),
            "candidate_gap": dump(self.candidate_gap),
            "skipped": dict(sorted(self.skipped.items())),
            "ok": self.ok,
        }


def _monic(poly: UniPoly) -> UniPoly:
    poly = poly.chop()
    return poly.scale(1 / poly.lead)


def _ledger_rows(
    report: JPCaseReport, bundle: PerturbationBundle, fam: VectorPolyFamily, rows: dict[int, tuple[Scalar, ...]]
) -> None:
    """Compare ledger rows with closed-form rows and collect both tau sequences."""
    field = report.field
    ledger = spectral_vectors(bundle, fam)
    std = ledger.bundle
    for m, closed in rows.items():
        if bundle.orientation == "dual":
            # ledger rows use the A_monic base family: rescale the closed-form column
            col = jp_closed_forms(field, report.params, m + 1).type_I_polys
            top = max(range(3), key=lambda a: (col[a].degree * 3 + a) if not col[a].is_zero() else -1)
            ratio = fam.A[m][top].coefficient(col[top].degree) / col[top].lead
            closed = tuple(v * ratio for v in closed)
        report.row_gap[m] = max(field.abs(x - y) for x, y in zip(ledger.row(m), closed, strict=True))
    width = std.M
    for n in range(min(rows), max(rows) - width + 2):
        block = [rows[m] for m in range(n, n + width)]
        report.case_taus[n] = determinant(DenseMatrix.from_rows(field, block))
        report.taus[n + std.M_R] = tau_det(bundle, ledger, n + std.M_R)


def jp_case_study(
    params: JPParams,
    which: Perturbation,
    c: object = 1,
    d: object = 0,
    mass: Sequence[Sequence[object]] | None = None,
    N: int = 10,
    field: ScalarField | None = None,
) -> JPCaseReport:
    """Run one perturbation of the Jacobi-Pineiro system through the pipeline.

    Checks, in order: Christoffel formulas against ``oracle_direct``; ledger
    rows against the closed-form determinant rows; for ``c = 1``, ``d = 0`` and
    no mass, the parameter shift of the first perturbation (``beta > 1``) and
    the absence of a shifted Jacobi-Pineiro family for the second.

    Raises:
        IntegrabilityViolation: If the perturbed measure is not locally integrable.

    """
    if field is None:
        field = BigFloatField(DEFAULT_CASE_STUDY_BITS)
    bundle = jp_bundle(field, params, which, c, d, mass)
    normalization = "A_monic" if bundle.orientation == "dual" else "B_monic"
    _, _, fam = biorthogonal_family(bundle.mu, N, normalization)
    report = JPCaseReport(field, which, params, N)
    report.oracle = oracle_comparison(bundle, N)

    cc, dd = field.coerce(c), field.coerce(d)
    try:
        rows = {m: _case_rows(field, params, which, cc, dd, mass, m) for m in range(N)}
        _ledger_rows(report, bundle, fam, rows)
    except (BackendUnsupported, PoleOnSupport) as exc:
        report.skipped["rows"] = str(exc)

    plain = cc == field.one and field.is_zero(dd) and mass is None
    if not plain:
        report.skipped["shift"] = "only defined for c = 1, d = 0 without masses"
    elif which == "perturbation_1":
        if params.beta <= 1:
            report.skipped["shift"] = f"parameter shift needs beta > 1, got {params.beta}"
        else:
            oracle = oracle_direct(bundle.perturbed, N, "A_monic").renormalized("B_monic")
            shifted = params.shifted()
            for n in range(N):
                closed = jp_closed_forms(field, shifted, n).type_II_poly
                report.shift_gap[n] = _coeff_gap(field, (_monic(oracle.B[n][0]),), (closed,))
    else:
        oracle = oracle_direct(bundle.perturbed, N)
        al, be = params.alphas, params.beta
        for candidate_beta in (be - 1, be):
            if candidate_beta <= -1:
                continue
            candidate = JPParams(al[1] + 1, al[2] + 1, al[0] + 1, candidate_beta)
            closed = jp_closed_forms(field, candidate, 2).type_II_poly
            gap = _coeff_gap(field, oracle.B[2], (closed,))
            report.candidate_gap[2] = gap if 2 not in report.candidate_gap else min(gap, report.candidate_gap[2])
    logger.info("mopkit: Jacobi-Pineiro %s at N=%d, ok=%s", which, N, report.ok)
    return report


__all__ = [
    "DEFAULT_CASE_STUDY_BITS",
    "VALID_PERTURBATIONS",
    "CauchyShift",
    "JPBoundary",
    "JPCaseReport",
    "JPClosedForms",
    "JPFamilyReport",
    "JPParams",
    "Perturbation",
    "StepIndex",
    "beta_integral",
    "jp_boundary_values",
    "jp_bundle",
    "jp_case_study",
    "jp_closed_forms",
    "jp_entry",
    "jp_family_check",
    "jp_measure",
    "jp_moment",
    "jp_stepline",
    "type_I_pairing",
]
