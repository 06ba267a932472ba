"""Gauss-Borel factorization and biorthogonal families.

The moment matrix factors as ``M = S^-1 H S_bar^-T`` with ``S`` and ``S_bar``
lower unitriangular and ``H`` diagonal. Reading the rows of ``S`` and ``S_bar``
against stacked monomials gives the two families

* ``B_n`` (``1 x q`` rows) from ``S X_[q]``,
* ``A_n`` (``p x 1`` columns) from ``X_[p]^T S_bar^T H^-1``,

which satisfy ``<B_n, A_m> = delta_{nm}``. The ``A_monic`` normalization moves
``H`` to the other side.

Features:
    - gauss_borel / families_from_gb
    - Christoffel-Darboux kernels and their mixed (Cauchy) variants
    - Cauchy transforms, direct and through the truncated Gauss-Borel series
    - projection and pairing diagnostics
    - JSON export

"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Literal

from mopkit.exceptions import BackendUnsupported
from mopkit.measures import cauchy_pairing, pair_integrate
from mopkit.moments import build_moment_matrix
from mopkit.numerics import DenseMatrix, UniPoly, lu_nopivot

if TYPE_CHECKING:
    from pathlib import Path

    from mopkit.fields.base import Scalar, ScalarField
    from mopkit.matrix_poly import MatrixPolynomial
    from mopkit.measures import MatrixOfMeasures
    from mopkit.moments import MomentMatrix
    from mopkit.numerics import VectorPoly

logger = logging.getLogger(__name__)

Normalization = Literal["B_monic", "A_monic"]
KernelKind = Literal["K_C", "K_D"]

VALID_NORMALIZATIONS: frozenset[str] = frozenset({"B_monic", "A_monic"})


@dataclass(frozen=True, slots=True)
class GaussBorelData:
    """Factors of ``M = S^-1 H S_bar^-T``.

    Attributes:
        S: Lower unitriangular, ``S^-1`` is the ``L`` of the LDU factorization.
        H: Diagonal pivots.
        S_bar: Lower unitriangular, ``S_bar^-T`` is the ``U`` factor.
        S_inv: The ``L`` factor itself (kept for the Cauchy series).
        U: The ``U`` factor itself.
        q: Left block size.
        p: Right block size.
        normalization: Which family is monic.

    """

    S: DenseMatrix
    H: DenseMatrix
    S_bar: DenseMatrix
    S_inv: DenseMatrix
    U: DenseMatrix
    q: int
    p: int
    normalization: Normalization = "B_monic"

    @property
    def size(self) -> int:
        """Truncation ``N``."""
        return self.H.rows

    @property
    def field(self) -> ScalarField:
        """Backend of the factors."""
        return self.H.field

    def h(self, n: int) -> Scalar:
        """``H_n``."""
        return self.H[n, n]


def gauss_borel(M: MomentMatrix, normalization: Normalization = "B_monic") -> GaussBorelData:
    """Factor a square moment matrix without pivoting.

    Raises:
        SingularLeadingMinor: Orthogonality fails at the reported index.

    """
    if normalization not in VALID_NORMALIZATIONS:
        msg = f"unknown normalization {normalization!r}"
        raise ValueError(msg)
    lower, diag, upper = lu_nopivot(M.matrix)
    s = lower.inverse()
    s_bar = upper.transpose().inverse()
    return GaussBorelData(s, diag, s_bar, lower, upper, M.q, M.p, normalization)


# =============================================================================
# Families
# =============================================================================


@dataclass(frozen=True, slots=True)
class VectorPolyFamily:
    """Biorthogonal families truncated at ``N``.

    Attributes:
        B: ``B[n]`` is a row of ``q`` polynomials.
        A: ``A[n]`` is a column of ``p`` polynomials.
        H: Diagonal of the Gauss-Borel ``H``.
        q: Left block size.
        p: Right block size.
        normalization: Which family is monic.

    """

    B: tuple[VectorPoly, ...]
    A: tuple[VectorPoly, ...]
    H: tuple[Scalar, ...]
    q: int
    p: int
    normalization: Normalization = "B_monic"

    @property
    def size(self) -> int:
        """Number of members in each family."""
        return len(self.B)

    @property
    def field(self) -> ScalarField:
        """Backend of the coefficients."""
        return self.B[0][0].field

    def renormalized(self, target: Normalization = "B_monic") -> VectorPolyFamily:
        """The same families with ``H`` moved to the other side."""
        if target == self.normalization:
            return self
        if target == "B_monic":
            b = tuple(tuple(p.scale(h) for p in row) for row, h in zip(self.B, self.H, strict=True))
            a = tuple(tuple(p.scale(1 / h) for p in col) for col, h in zip(self.A, self.H, strict=True))
        else:
            b = tuple(tuple(p.scale(1 / h) for p in row) for row, h in zip(self.B, self.H, strict=True))
            a = tuple(tuple(p.scale(h) for p in col) for col, h in zip(self.A, self.H, strict=True))
        return VectorPolyFamily(b, a, self.H, self.q, self.p, target)

    def eval_B(self, n: int, x: Scalar) -> tuple[Scalar, ...]:
        """``B_n(x)`` as a row."""
        return tuple(poly(x) for poly in self.B[n])

    def eval_A(self, n: int, x: Scalar) -> tuple[Scalar, ...]:
        """``A_n(x)`` as a column."""
        return tuple(poly(x) for poly in self.A[n])

    def to_json(self) -> dict[str, Any]:
        """Coefficient lists with exact rationals as strings."""
        field = self.field
        return {
            "q": self.q,
            "p": self.p,
            "normalization": self.normalization,
            "H": [field.to_json(h) for h in self.H],
            "B": [[poly.to_json() for poly in row] for row in self.B],
            "A": [[poly.to_json() for poly in col] for col in self.A],
        }

    def write_json(self, path: Path) -> None:
        """Write :meth:`to_json` with sorted keys."""
        path.write_text(json.dumps(self.to_json(), indent=2, sort_keys=True), encoding="utf-8")


def _stacked_poly(field: ScalarField, coeffs: tuple[Scalar, ...], block: int) -> VectorPoly:
    """``sum_i coeffs[i] x**(i//block) e_{i%block}``."""
    per_component: list[list[Scalar]] = [[] for _ in range(block)]
    for i, c in enumerate(coeffs):
        deg, comp = divmod(i, block)
        bucket = per_component[comp]
        bucket.extend([field.zero] * (deg + 1 - len(bucket)))
        bucket[deg] = c
    return tuple(UniPoly(field, tuple(b)) for b in per_component)


def families_from_gb(gb: GaussBorelData) -> VectorPolyFamily:
    """Read the families off the Gauss-Borel factors."""
    field, n = gb.field, gb.size
    hs = tuple(gb.h(k) for k in range(n))
    b_rows = []
    a_cols = []
    for k in range(n):
        s_row = gb.S.row(k)[: k + 1]
        sb_row = gb.S_bar.row(k)[: k + 1]
        if gb.normalization == "B_monic":
            a_coeffs = tuple(c / hs[k] for c in sb_row)
            b_coeffs = s_row
        else:
            a_coeffs = sb_row
            b_coeffs = tuple(c / hs[k] for c in s_row)
        b_rows.append(_stacked_poly(field, b_coeffs, gb.q))
        a_cols.append(_stacked_poly(field, a_coeffs, gb.p))
    return VectorPolyFamily(tuple(b_rows), tuple(a_cols), hs, gb.q, gb.p, gb.normalization)


def biorthogonal_family(
    mu: MatrixOfMeasures, n: int, normalization: Normalization = "B_monic"
) -> tuple[MomentMatrix, GaussBorelData, VectorPolyFamily]:
    """Moment matrix, factors and families of ``mu`` at truncation ``n``."""
    M = build_moment_matrix(mu, n)
    gb = gauss_borel(M, normalization)
    return M, gb, families_from_gb(gb)


# =============================================================================
# Diagnostics and kernels
# =============================================================================


def pairing_matrix(fam: VectorPolyFamily, mu: MatrixOfMeasures) -> DenseMatrix:
    """``<B_n, A_m>`` for every ``n, m < N``."""
    return DenseMatrix.build(mu.field, fam.size, fam.size, lambda n, m: pair_integrate(fam.B[n], mu, fam.A[m]))


def pairing_check(fam: VectorPolyFamily, mu: MatrixOfMeasures) -> Scalar:
    """Largest deviation of ``<B_n, A_m>`` from ``delta_{nm}``."""
    field = mu.field
    gram = pairing_matrix(fam, mu)
    return (gram - DenseMatrix.identity(field, fam.size)).max_abs()


def cd_kernel(fam: VectorPolyFamily, n: int, x: object, y: object) -> DenseMatrix:
    """``K^[n](x, y) = sum_{i<=n} A_i(x) B_i(y)``, a ``p x q`` matrix."""
    field = fam.field
    xx, yy = field.coerce(x), field.coerce(y)
    out = DenseMatrix.zeros(field, fam.p, fam.q)
    for i in range(n + 1):
        out = out + DenseMatrix.column(field, fam.eval_A(i, xx)) @ DenseMatrix.row_vector(field, fam.eval_B(i, yy))
    return out


def cauchy_transforms(
    fam: VectorPolyFamily, mu: MatrixOfMeasures, z: object
) -> tuple[list[tuple[Scalar, ...]], list[tuple[Scalar, ...]]]:
    """``C_n(z)`` (``q`` values each) and ``D_n(z)`` (``p`` values each) for ``n < N``.

    ``C_n(z) = integral dmu(x) A_n(x) / (z - x)`` and
    ``D_n(z) = integral B_n(x) dmu(x) / (z - x)``.

    """
    c = [cauchy_pairing(fam.A[n], mu, z, "right") for n in range(fam.size)]
    d = [cauchy_pairing(fam.B[n], mu, z, "left") for n in range(fam.size)]
    return c, d


def cauchy_series(gb: GaussBorelData, z: object) -> tuple[list[tuple[Scalar, ...]], list[tuple[Scalar, ...]]]:
    """Gauss-Borel series for ``C`` and ``D``, cut after the ``N`` known rows.

    ``C(z) = z^-1 X_[q]^T(1/z) S^-1`` and ``D(z) = z^-1 H S_bar^-T X_[p](1/z)``.
    Member ``m`` keeps the terms of index ``m <= i < N``; what is dropped is of
    relative size ``(radius / |z|) ** (N // block - m // block)``, ``block`` being
    ``q`` for ``C`` and ``p`` for ``D``, so the result approximates :func:`cauchy_transforms`
    for ``|z|`` well beyond the support and is never exact.

    Raises:
        BackendUnsupported: On the exact backend.

    """
    field = gb.field
    if field.exact:
        msg = "truncated Cauchy series needs the float backend"
        raise BackendUnsupported(msg)
    zz = field.coerce(z)
    n = gb.size
    c_out = []
    d_out = []
    for m in range(n):
        c_vals = [field.zero] * gb.q
        for i in range(m, n):
            deg, comp = divmod(i, gb.q)
            c_vals[comp] += gb.S_inv[i, m] / zz ** (deg + 1)
        d_vals = [field.zero] * gb.p
        for j in range(m, n):
            deg, comp = divmod(j, gb.p)
            d_vals[comp] += gb.h(m) * gb.U[m, j] / zz ** (deg + 1)
        if gb.normalization == "A_monic":
            c_vals = [v * gb.h(m) for v in c_vals]
            d_vals = [v / gb.h(m) for v in d_vals]
        c_out.append(tuple(c_vals))
        d_out.append(tuple(d_vals))
    return c_out, d_out


def mixed_cd_kernel(
    fam: VectorPolyFamily, mu: MatrixOfMeasures, n: int, kind: KernelKind, x: object, y: object
) -> DenseMatrix:
    """Mixed kernels from partial sums.

    ``K_C^[n](x, y) = sum_{i<=n} C_i(x) B_i(y)`` (``q x q``) and
    ``K_D^[n](x, y) = sum_{i<=n} A_i(x) D_i(y)`` (``p x p``).

    """
    field = mu.field
    xx, yy = field.coerce(x), field.coerce(y)
    if kind == "K_C":
        out = DenseMatrix.zeros(field, fam.q, fam.q)
        for i in range(n + 1):
            c = cauchy_pairing(fam.A[i], mu, xx, "right")
            out = out + DenseMatrix.column(field, c) @ DenseMatrix.row_vector(field, fam.eval_B(i, yy))
        return out
    out = DenseMatrix.zeros(field, fam.p, fam.p)
    for i in range(n + 1):
        d = cauchy_pairing(fam.B[i], mu, yy, "left")
        out = out + DenseMatrix.column(field, fam.eval_A(i, xx)) @ DenseMatrix.row_vector(field, d)
    return out


def mixed_cd_kernel_integral(
    fam: VectorPolyFamily, mu: MatrixOfMeasures, n: int, kind: KernelKind, x: object, y: object
) -> DenseMatrix:
    """Mixed kernels from their integral forms.

    ``K_C(x, y) = integral dmu(t) K(t, y) / (x - t)`` and
    ``K_D(x, y) = integral K(x, t) dmu(t) / (y - t)``.

    """
    field = mu.field
    xx, yy = field.coerce(x), field.coerce(y)
    zero = UniPoly.zero(field)
    if kind == "K_C":
        cols = []
        for b in range(fam.q):
            # column b of K(t, y) as a p-vector of polynomials in t
            vec = [zero] * fam.p
            for i in range(n + 1):
                by = fam.B[i][b](yy)
                vec = [v + a.scale(by) for v, a in zip(vec, fam.A[i], strict=True)]
            cols.append(cauchy_pairing(tuple(vec), mu, xx, "right"))
        return DenseMatrix.from_rows(field, [[cols[b][r] for b in range(fam.q)] for r in range(fam.q)])
    rows = []
    for a in range(fam.p):
        vec = [zero] * fam.q
        for i in range(n + 1):
            ax = fam.A[i][a](xx)
            vec = [v + bp.scale(ax) for v, bp in zip(vec, fam.B[i], strict=True)]
        rows.append(list(cauchy_pairing(tuple(vec), mu, yy, "left")))
    return DenseMatrix.from_rows(field, rows)


def projection_residual(
    fam: VectorPolyFamily, mu: MatrixOfMeasures, n: int, P: MatrixPolynomial, x: object
) -> DenseMatrix:
    """``integral K^[n](x, t) dmu(t) P(t) - P(x)`` for a ``p x p`` polynomial ``P``."""
    field = mu.field
    xx = field.coerce(x)
    grid = P.entries()
    out = []
    for a in range(fam.p):
        row = []
        for c in range(P.cols):
            col = tuple(grid[d][c] for d in range(P.rows))
            total = field.zero
            for i in range(n + 1):
                total += fam.A[i][a](xx) * pair_integrate(fam.B[i], mu, col)
            row.append(total)
        out.append(row)
    return DenseMatrix.from_rows(field, out) - P(xx)


__all__ = [
    "VALID_NORMALIZATIONS",
    "GaussBorelData",
    "VectorPolyFamily",
    "biorthogonal_family",
    "cauchy_series",
    "cauchy_transforms",
    "cd_kernel",
    "families_from_gb",
    "gauss_borel",
    "mixed_cd_kernel",
    "mixed_cd_kernel_integral",
    "pairing_check",
    "pairing_matrix",
    "projection_residual",
]
