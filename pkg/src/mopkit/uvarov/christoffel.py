"""Determinantal Christoffel formulas.

Both formulas read only the base families and the spectral ledger:

* type II: ``B~_n L = (c_n / tau_n) sum_r C_r B_{n-M_R+r}`` with the bordered
  cofactors ``C_r`` of the ledger rows, followed by an exact right division
  by ``L`` (``adj L / det L``);
* type I: ``A~_{n-1} = -det J / (c_{n-1} tau_n)``, where ``J`` stacks
  ``T_{n-M_R} .. T_{n+M_L-2}`` over the polynomial bordering row ``G``.

Dual bundles are mapped to the transposed standard problem, whose type II
family is the dual ``A~`` and whose type I family is the dual ``B~``.

"""

from __future__ import annotations

import logging
from typing import TYPE_CHECKING, Literal

from mopkit.biorth import biorthogonal_family
from mopkit.exceptions import OutsideWindow, SingularSystem
from mopkit.matrix_poly import mp_adjugate, mp_determinant
from mopkit.numerics import DenseMatrix, determinant, vector_poly_eval, vector_poly_zero
from mopkit.uvarov.connection import bordered_cofactors, omega_below_window, tau_det

if TYPE_CHECKING:
    from mopkit.biorth import Normalization, VectorPolyFamily
    from mopkit.fields.base import Scalar
    from mopkit.measures import MatrixOfMeasures
    from mopkit.numerics import VectorPoly
    from mopkit.uvarov.bundle import PerturbationBundle
    from mopkit.uvarov.ledger import SpectralLedger

logger = logging.getLogger(__name__)


def _combine(ledger: SpectralLedger, weights: dict[int, Scalar]) -> VectorPoly:
    """``sum_j weights[j] B_j`` as a row of polynomials."""
    acc = vector_poly_zero(ledger.field, ledger.bundle.q)
    for j, w in sorted(weights.items()):
        if ledger.field.is_zero(w):
            continue
        acc = tuple(a + b.scale(w) for a, b in zip(acc, ledger.fam.B[j], strict=True))
    return acc


def _typeII_times_L(bundle: PerturbationBundle, ledger: SpectralLedger, n: int) -> VectorPoly:
    """``B~_n(x) L(x)`` as a row of polynomials."""
    std = ledger.bundle
    if n < std.M_R:
        return _combine(ledger, omega_below_window(bundle, ledger, n))
    cof = bordered_cofactors(bundle, ledger, n)
    tau = cof[std.M]
    if ledger.field.is_zero(tau):
        msg = f"tau_{n} = 0, B~_{n} is not determined"
        raise SingularSystem(msg)
    scale = std.c(n) / tau
    return _combine(ledger, {n - std.M_R + r: scale * c for r, c in enumerate(cof)})


def typeII_polynomial(bundle: PerturbationBundle, ledger: SpectralLedger, n: int) -> VectorPoly:
    """``B~_n`` of the standard view as a row of polynomials.

    Raises:
        SingularSystem: If ``tau_n = 0``.
        OutsideWindow: If ``n + M_L`` exceeds the base truncation.
        InexactDivision: If ``B~_n L`` is not right-divisible by ``L``.

    """
    std = ledger.bundle
    if n + std.M_L >= ledger.size:
        msg = f"B~_{n} needs B_{n + std.M_L}, base families stop at {ledger.size - 1}"
        raise OutsideWindow(msg)
    product = _typeII_times_L(bundle, ledger, n)
    det_l = mp_determinant(std.L).chop()
    return tuple(entry.exact_div(det_l) for entry in mp_adjugate(std.L).row_times(product))


def christoffel_typeII(
    bundle: PerturbationBundle, ledger: SpectralLedger, n: int, x: object | None = None
) -> VectorPoly | tuple[Scalar, ...]:
    """Perturbed type II polynomial ``B~_n`` (a ``1 x q`` row).

    Returns the polynomials when ``x`` is None, otherwise their values at ``x``.

    """
    if bundle.orientation != "standard":
        msg = "christoffel_typeII works on standard bundles; use dual_christoffel for the dual orientation"
        raise ValueError(msg)
    poly = typeII_polynomial(bundle, ledger, n)
    return poly if x is None else vector_poly_eval(poly, ledger.field.coerce(x))


def typeI_window(bundle: PerturbationBundle, ledger: SpectralLedger) -> range:
    """Indices ``n`` for which :func:`typeI_polynomial` yields ``A~_{n-1}``."""
    std = ledger.bundle
    lo = max(1, std.M_R)
    if std.M_L == 0:
        lo = max(lo, std.M_R + 1)
    if std.M_R > 0:
        lo = max(lo, ledger.pole_index + 2 - std.M_L)
    hi = ledger.size - std.M_L + 1
    return range(lo, max(lo, hi))


def typeI_polynomial(bundle: PerturbationBundle, ledger: SpectralLedger, n: int) -> VectorPoly:
    """``A~_{n-1}`` of the standard view as a column of polynomials.

    Raises:
        OutsideWindow: If ``n`` is outside :func:`typeI_window`.
        SingularSystem: If ``tau_n = 0``.

    """
    std = ledger.bundle
    field = ledger.field
    if n not in typeI_window(bundle, ledger):
        window = typeI_window(bundle, ledger)
        msg = f"A~_{n - 1} is not given by the bordered formula (valid n: {window.start}..{window.stop - 1})"
        raise OutsideWindow(msg)
    c_prev = std.c(n - 1)
    if std.M == 0:
        return tuple(entry.scale(1 / c_prev) for entry in std.R.times_col(ledger.fam.A[n - 1]))
    tau = tau_det(bundle, ledger, n)
    if field.is_zero(tau):
        msg = f"tau_{n} = 0, A~_{n - 1} is not determined"
        raise SingularSystem(msg)
    M = std.M
    top = [ledger.row(m) for m in range(n - std.M_R, n + std.M_L - 1)]
    border = ledger.bordering_row(n + std.M_L - 2)
    acc = vector_poly_zero(field, std.p)
    for c in range(M):
        keep = [k for k in range(M) if k != c]
        minor = determinant(DenseMatrix.from_rows(field, [[r[k] for k in keep] for r in top])) if top else field.one
        cof = minor if (M - 1 + c) % 2 == 0 else -minor
        if field.is_zero(cof):
            continue
        acc = tuple(a + g.scale(cof) for a, g in zip(acc, border[c], strict=True))
    scale = -1 / (c_prev * tau)
    return tuple(a.scale(scale).chop() for a in acc)


def christoffel_typeI(
    bundle: PerturbationBundle, ledger: SpectralLedger, n: int, x: object | None = None
) -> VectorPoly | tuple[Scalar, ...]:
    """Perturbed type I polynomial ``A~_{n-1}`` (a ``p x 1`` column)."""
    if bundle.orientation != "standard":
        msg = "christoffel_typeI works on standard bundles; use dual_christoffel for the dual orientation"
        raise ValueError(msg)
    poly = typeI_polynomial(bundle, ledger, n)
    return poly if x is None else vector_poly_eval(poly, ledger.field.coerce(x))


def dual_christoffel(
    bundle: PerturbationBundle, ledger: SpectralLedger, n: int, which: Literal["A", "B"], x: object | None = None
) -> VectorPoly | tuple[Scalar, ...]:
    """Member ``n`` of the dual perturbed family ``A~`` (column) or ``B~`` (row).

    The families are ``A_monic`` normalized, as for the base families the
    ledger was built from.

    """
    if bundle.orientation != "dual":
        msg = "dual_christoffel needs a dual bundle"
        raise ValueError(msg)
    poly = typeII_polynomial(bundle, ledger, n) if which == "A" else typeI_polynomial(bundle, ledger, n + 1)
    return poly if x is None else vector_poly_eval(poly, ledger.field.coerce(x))


def oracle_direct(mu_tilde: MatrixOfMeasures, n: int, normalization: Normalization = "B_monic") -> VectorPolyFamily:
    """Perturbed families by brute force: moments of ``mu~``, then Gauss-Borel.

    Raises:
        SingularLeadingMinor: If the perturbed moment matrix has no LU factorization.

    """
    _, _, fam = biorthogonal_family(mu_tilde, n, normalization)
    logger.debug("mopkit: oracle families built to N=%d", n)
    return fam


__all__ = [
    "christoffel_typeI",
    "christoffel_typeII",
    "dual_christoffel",
    "oracle_direct",
    "typeII_polynomial",
    "typeI_polynomial",
    "typeI_window",
]
