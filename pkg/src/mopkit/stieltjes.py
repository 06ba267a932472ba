"""Markov-Stieltjes matrix functions.

``F(z) = integral dmu(x) / (z - x)`` is the ``q x p`` matrix of Cauchy
integrals of a matrix of measures. Under a Uvarov perturbation
``d(mu~) R = L dmu`` the two functions are linked by a rational spectral
transformation with polynomial corrections::

    F~(z) R(z) - integral d(mu~)(x) Q_R(z, x) = L(z) F(z) - integral Q_L(z, x) dmu(x)

where ``Q_P(z, x) = (P(z) - P(x)) / (z - x)``. The corrections only need
moments: ``integral d(mu~) Q_R(z, .) = sum_a z^a sum_b m~_b R_{a+b+1}`` has
degree ``deg R - 1`` and the ``L`` side has degree ``deg L - 1``.

"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from dataclasses import field as dc_field
from typing import TYPE_CHECKING, Any

from mopkit.exceptions import BackendUnsupported, PoleOnSupport, SeriesDivergent
from mopkit.matrix_poly import MatrixPolynomial, mp_difference_quotient
from mopkit.measures import pair_integrate
from mopkit.numerics import DenseMatrix, UniPoly

if TYPE_CHECKING:
    from collections.abc import Sequence

    from mopkit.fields.base import Scalar, ScalarField
    from mopkit.measures import MatrixOfMeasures
    from mopkit.uvarov.bundle import PerturbationBundle

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class StieltjesEval:
    """``F(z)`` at one point."""

    z: Scalar
    F: DenseMatrix


def stieltjes_eval(mu: MatrixOfMeasures, z: object) -> StieltjesEval:
    """Entrywise ``integral dmu_{b,a}(x) / (z - x)``.

    Raises:
        PoleOnSupport: If ``z`` is an atom or delta point.
        SeriesDivergent: If no oracle covers ``z`` inside the support radius.

    """
    field = mu.field
    zz = field.coerce(z)
    one = UniPoly.constant(field, 1)

    def entry(b: int, a: int) -> Scalar:
        return sum((e.cauchy(one, zz, 0) for e in mu.cell(b, a)), field.zero)

    return StieltjesEval(zz, DenseMatrix.build(field, mu.q, mu.p, entry))


def _moment_block(mu: MatrixOfMeasures, k: int) -> DenseMatrix:
    return DenseMatrix.build(mu.field, mu.q, mu.p, lambda b, a: mu.moment(b, a, k))


def right_correction(mu: MatrixOfMeasures, P: MatrixPolynomial) -> MatrixPolynomial:
    """``integral dmu(x) Q_P(z, x)`` as a ``q x p`` polynomial in ``z`` (``P`` is ``p x p``)."""
    field = mu.field
    top = P.degree - 1
    if top < 0:
        return MatrixPolynomial(field, (DenseMatrix.zeros(field, mu.q, mu.p),))
    moments = [_moment_block(mu, k) for k in range(top + 1)]
    coeffs = []
    for a in range(top + 1):
        acc = DenseMatrix.zeros(field, mu.q, mu.p)
        for b in range(top + 1 - a):
            acc = acc + moments[b] @ P.coefficient(a + b + 1)
        coeffs.append(acc)
    return MatrixPolynomial(field, tuple(coeffs))


def left_correction(mu: MatrixOfMeasures, P: MatrixPolynomial) -> MatrixPolynomial:
    """``integral Q_P(z, x) dmu(x)`` as a ``q x p`` polynomial in ``z`` (``P`` is ``q x q``)."""
    field = mu.field
    top = P.degree - 1
    if top < 0:
        return MatrixPolynomial(field, (DenseMatrix.zeros(field, mu.q, mu.p),))
    moments = [_moment_block(mu, k) for k in range(top + 1)]
    coeffs = []
    for a in range(top + 1):
        acc = DenseMatrix.zeros(field, mu.q, mu.p)
        for b in range(top + 1 - a):
            acc = acc + P.coefficient(a + b + 1) @ moments[b]
        coeffs.append(acc)
    return MatrixPolynomial(field, tuple(coeffs))


def _direct_right(mu: MatrixOfMeasures, P: MatrixPolynomial, z: Scalar) -> DenseMatrix:
    """``integral dmu(x) Q_P(z, x)`` by pairing, one entry at a time."""
    field = mu.field
    q_grid = mp_difference_quotient(P).fix_first(z).entries()
    zero = UniPoly.zero(field)

    def entry(b: int, a: int) -> Scalar:
        row = tuple(UniPoly.constant(field, 1) if i == b else zero for i in range(mu.q))
        col = tuple(q_grid[r][a] for r in range(mu.p))
        return pair_integrate(row, mu, col)

    return DenseMatrix.build(field, mu.q, mu.p, entry)


@dataclass
class StieltjesReport:
    """Outcome of the spectral-transformation identity at a list of probes.

    Attributes:
        corrections: ``name -> MatrixPolynomial`` of the two correction terms.
        residuals: ``z -> max |lhs - rhs|`` (string keys).
        correction_residual: Largest gap between the moment-built corrections
            and the same integrals computed by pairing.
        skipped: ``z -> reason`` for probes the backend could not evaluate.

    """

    field: ScalarField
    corrections: dict[str, MatrixPolynomial]
    residuals: dict[str, Scalar] = dc_field(default_factory=dict)
    correction_residual: Scalar = None
    skipped: dict[str, str] = dc_field(default_factory=dict)

    @property
    def ok(self) -> bool:
        """True if every evaluated residual vanishes."""
        values = list(self.residuals.values())
        if self.correction_residual is not None:
            values.append(self.correction_residual)
        return all(self.field.is_zero(v) for v in values)

    def to_json(self) -> dict[str, Any]:
        """Coefficient lists and residuals as strings."""
        res = self.correction_residual
        return {
            "corrections": {k: v.to_json() for k, v in sorted(self.corrections.items())},
            "residuals": {k: self.field.to_json(v) for k, v in sorted(self.residuals.items())},
            "correction_residual": None if res is None else self.field.to_json(res),
            "skipped": dict(sorted(self.skipped.items())),
            "ok": self.ok,
        }


def stieltjes_transform_check(bundle: PerturbationBundle, zs: Sequence[object]) -> StieltjesReport:
    """Evaluate both sides of the transformation identity at every probe.

    Standard bundles check ``F~ R - int dmu~ Q_R = L F - int Q_L dmu``; dual
    bundles check the mirrored ``L F~ - int Q_L dmu~ = F R - int dmu Q_R``.

    """
    field = bundle.field
    mu, mu_t = bundle.mu, bundle.perturbed
    L, R = bundle.L, bundle.R
    if bundle.orientation == "standard":
        corr_t, corr = right_correction(mu_t, R), left_correction(mu, L)
    else:
        corr_t, corr = left_correction(mu_t, L), right_correction(mu, R)
    report = StieltjesReport(field, {"perturbed": corr_t, "base": corr})
    gap = field.zero
    for z in zs:
        zz = field.coerce(z)
        key = field.to_json(zz)
        try:
            f = stieltjes_eval(mu, zz).F
            f_t = stieltjes_eval(mu_t, zz).F
            if bundle.orientation == "standard":
                lhs = f_t @ R(zz) - corr_t(zz)
                rhs = L(zz) @ f - corr(zz)
                direct = _direct_right(mu_t, R, zz)
                gap = max(gap, (direct - corr_t(zz)).max_abs())
            else:
                lhs = L(zz) @ f_t - corr_t(zz)
                rhs = f @ R(zz) - corr(zz)
                direct = _direct_right(mu, R, zz)
                gap = max(gap, (direct - corr(zz)).max_abs())
        except (BackendUnsupported, PoleOnSupport, SeriesDivergent) as exc:
            report.skipped[key] = str(exc)
            continue
        report.residuals[key] = (lhs - rhs).max_abs()
    report.correction_residual = gap
    logger.info("mopkit: stieltjes identity at %d probes, %d skipped", len(report.residuals), len(report.skipped))
    return report


__all__ = [
    "StieltjesEval",
    "StieltjesReport",
    "left_correction",
    "right_correction",
    "stieltjes_eval",
    "stieltjes_transform_check",
]
