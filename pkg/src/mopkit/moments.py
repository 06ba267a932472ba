"""Truncated moment matrices and the shift-matrix algebra.

Row ``i`` of a moment matrix belongs to degree ``i // q`` and left component
``i % q``; column ``j`` to degree ``j // p`` and right component ``j % p``. The
entry is ``integral x**(i//q + j//p) d mu_{i%q, j%p}``.

Banded products such as ``M~ R(Lambda^T)`` only use finitely many entries per
output position, but near the truncation edge they would need moments that
were never built. :func:`trusted_window` reports the rows and columns where a
product is fully determined; comparisons outside it are skipped.

"""

from __future__ import annotations

import csv
import io
import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

from mopkit.matrix_poly import mp_band_embed
from mopkit.numerics import DenseMatrix

if TYPE_CHECKING:
    from pathlib import Path

    from mopkit.fields.base import Scalar, ScalarField
    from mopkit.matrix_poly import MatrixPolynomial
    from mopkit.measures import MatrixOfMeasures

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class MomentMatrix:
    """A scalar-indexed truncated moment matrix.

    Attributes:
        q: Left block size.
        p: Right block size.
        matrix: The ``n_rows x n_cols`` entries.

    """

    q: int
    p: int
    matrix: DenseMatrix

    @property
    def field(self) -> ScalarField:
        """Backend of the entries."""
        return self.matrix.field

    @property
    def n_rows(self) -> int:
        """Scalar row count."""
        return self.matrix.rows

    @property
    def n_cols(self) -> int:
        """Scalar column count."""
        return self.matrix.cols

    def __getitem__(self, index: tuple[int, int]) -> Scalar:
        return self.matrix[index]

    def row_index(self, i: int) -> tuple[int, int]:
        """``(degree, component)`` of row ``i``."""
        return divmod(i, self.q)

    def col_index(self, j: int) -> tuple[int, int]:
        """``(degree, component)`` of column ``j``."""
        return divmod(j, self.p)

    def leading(self, n: int) -> MomentMatrix:
        """Leading ``n x n`` truncation."""
        return MomentMatrix(self.q, self.p, self.matrix.leading(n))

    def to_csv(self, path: Path | None = None) -> str:
        """Serialize as CSV (rationals written ``num/den``); optionally write to ``path``."""
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        for row in self.matrix.to_json():
            writer.writerow(row)
        text = buf.getvalue()
        if path is not None:
            path.write_text(text, encoding="utf-8")
        return text


def build_moment_matrix(mu: MatrixOfMeasures, n_rows: int, n_cols: int | None = None) -> MomentMatrix:
    """Tabulate the moment matrix of ``mu``.

    Args:
        mu: Matrix of measures (``q x p``).
        n_rows: Scalar row count.
        n_cols: Scalar column count (defaults to ``n_rows``).

    Raises:
        OracleMissing: A moment the entries cannot produce.

    """
    n_cols = n_rows if n_cols is None else n_cols
    q, p = mu.q, mu.p
    cache: dict[tuple[int, int, int], Scalar] = {}

    def entry(i: int, j: int) -> Scalar:
        key = (i % q, j % p, i // q + j // p)
        if key not in cache:
            cache[key] = mu.moment(*key)
        return cache[key]

    matrix = DenseMatrix.build(mu.field, n_rows, n_cols, entry)
    logger.debug("mopkit: built %dx%d moment matrix from %d distinct moments", n_rows, n_cols, len(cache))
    return MomentMatrix(q, p, matrix)


@dataclass(frozen=True, slots=True)
class ShiftMatrix:
    """Truncation of ``Lambda_[r]``: ones on the ``r``-th superdiagonal."""

    block: int
    size: int

    def dense(self, field: ScalarField) -> DenseMatrix:
        """Materialize over ``field``."""
        r = self.block
        return DenseMatrix.build(field, self.size, self.size, lambda i, j: field.one if j == i + r else field.zero)


def shift_matrix(r: int, n: int) -> ShiftMatrix:
    """``Lambda_[r]`` truncated to ``n x n``."""
    if r < 1 or n < 0:
        msg = f"shift matrix needs r >= 1 and n >= 0, got r={r}, n={n}"
        raise ValueError(msg)
    return ShiftMatrix(r, n)


def stacked_monomials(field: ScalarField, r: int, n: int, x: object) -> DenseMatrix:
    """``X_[r](x)`` truncated to ``n`` rows: row ``i`` is ``x**(i//r) e_{i%r}``."""
    xx = field.coerce(x)
    return DenseMatrix.build(field, n, r, lambda i, j: xx ** (i // r) if i % r == j else field.zero)


def trusted_window(n_rows: int, n_cols: int, q: int, p: int, deg_l: int, deg_r: int) -> tuple[list[int], list[int]]:
    """Rows and columns where ``M~ R(Lambda^T)`` and ``L(Lambda) M`` are fully determined.

    Column ``j`` needs moment columns up to ``p (j//p + deg_r) + p - 1``; row ``i``
    needs moment rows up to ``q (i//q + deg_l) + q - 1``.

    """
    rows = [i for i in range(n_rows) if q * (i // q + deg_l) + q - 1 < n_rows]
    cols = [j for j in range(n_cols) if p * (j // p + deg_r) + p - 1 < n_cols]
    return rows, cols


def moment_relation_residual(
    perturbed: MomentMatrix, original: MomentMatrix, L: MatrixPolynomial, R: MatrixPolynomial
) -> tuple[DenseMatrix, list[int], list[int]]:
    """``M~ R(Lambda_[p]^T) - L(Lambda_[q]) M`` restricted to the trusted window.

    Returns:
        The residual submatrix and the row and column indices it covers.

    """
    n_rows, n_cols = original.n_rows, original.n_cols
    q, p = original.q, original.p
    lhs = perturbed.matrix @ mp_band_embed(R, "right_on_lambda_t", p, n_cols)
    rhs = mp_band_embed(L, "left_on_lambda", q, n_rows) @ original.matrix
    rows, cols = trusted_window(n_rows, n_cols, q, p, L.degree, R.degree)
    residual = (lhs - rhs).submatrix(rows, cols)
    return residual, rows, cols


__all__ = [
    "MomentMatrix",
    "ShiftMatrix",
    "build_moment_matrix",
    "moment_relation_residual",
    "shift_matrix",
    "stacked_monomials",
    "trusted_window",
]
