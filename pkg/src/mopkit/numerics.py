"""Univariate polynomials, dense matrices and pivot-free elimination.

This module is the arithmetic floor of mopkit. Every object is immutable and
carries the :class:`~mopkit.fields.ScalarField` it was built over; combining
objects from two different fields raises :class:`~mopkit.exceptions.BackendMismatch`.

Features:
    - UniPoly: coefficient tuples low-to-high, trailing zeros stripped
    - DenseMatrix: rectangular grids with checked indexing
    - lu_nopivot: the L·D·U factorization used for Gauss-Borel (no pivoting)
    - solve_linear / determinant: small square solves (row exchanges allowed)
    - pochhammer and derivative evaluation helpers

Example:
    Factor a Hilbert block::

        from mopkit.fields import RationalField
        from mopkit.numerics import DenseMatrix, lu_nopivot

        field = RationalField()
        m = DenseMatrix.from_rows(field, [["1", "1/2"], ["1/2", "1/3"]])
        lower, diag, upper = lu_nopivot(m)

"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import TYPE_CHECKING

from mopkit.exceptions import BackendMismatch, InexactDivision, SingularLeadingMinor, SingularSystem

if TYPE_CHECKING:
    from collections.abc import Callable, Iterable, Sequence

    from mopkit.fields.base import Scalar, ScalarField

logger = logging.getLogger(__name__)

ZERO_DEGREE = -1
"""Degree reported for the zero polynomial."""


def _check_same_field(a: ScalarField, b: ScalarField) -> None:
    if a != b:
        msg = f"cannot combine {a!r} with {b!r}"
        raise BackendMismatch(msg)


# =============================================================================
# Univariate polynomials
# =============================================================================


@dataclass(frozen=True, slots=True)
class UniPoly:
    """A univariate polynomial over a scalar field.

    Attributes:
        field: The backend every coefficient lives in.
        coeffs: Coefficients from degree 0 upward, with no trailing zero.

    """

    field: ScalarField
    coeffs: tuple[Scalar, ...]

    def __post_init__(self) -> None:
        coeffs = list(self.coeffs)
        while coeffs and coeffs[-1] == 0:
            coeffs.pop()
        object.__setattr__(self, "coeffs", tuple(coeffs))

    # -- constructors ---------------------------------------------------------

    @classmethod
    def from_coeffs(cls, field: ScalarField, coeffs: Iterable[object]) -> UniPoly:
        """Build a polynomial, coercing each coefficient into ``field``."""
        return cls(field, tuple(field.coerce(c) for c in coeffs))

    @classmethod
    def zero(cls, field: ScalarField) -> UniPoly:
        """The zero polynomial."""
        return cls(field, ())

    @classmethod
    def constant(cls, field: ScalarField, value: object) -> UniPoly:
        """A constant polynomial."""
        return cls(field, (field.coerce(value),))

    @classmethod
    def monomial(cls, field: ScalarField, degree: int, coefficient: object = 1) -> UniPoly:
        """``coefficient * x**degree``."""
        return cls(field, (field.zero,) * degree + (field.coerce(coefficient),))

    @classmethod
    def linear(cls, field: ScalarField, root: object) -> UniPoly:
        """The monic linear polynomial ``x - root``."""
        return cls(field, (-field.coerce(root), field.one))

    # -- structure ------------------------------------------------------------

    @property
    def degree(self) -> int:
        """Degree, or :data:`ZERO_DEGREE` for the zero polynomial."""
        return len(self.coeffs) - 1

    @property
    def lead(self) -> Scalar:
        """Leading coefficient (zero for the zero polynomial)."""
        return self.coeffs[-1] if self.coeffs else self.field.zero

    def is_zero(self) -> bool:
        """True if every coefficient is zero within the field tolerance."""
        return all(self.field.is_zero(c) for c in self.coeffs)

    def coefficient(self, k: int) -> Scalar:
        """Coefficient of ``x**k`` (zero beyond the degree)."""
        return self.coeffs[k] if 0 <= k < len(self.coeffs) else self.field.zero

    def chop(self) -> UniPoly:
        """Drop trailing coefficients that are zero within tolerance."""
        coeffs = list(self.coeffs)
        while coeffs and self.field.is_zero(coeffs[-1]):
            coeffs.pop()
        return UniPoly(self.field, tuple(coeffs))

    # -- arithmetic -----------------------------------------------------------

    def _lift(self, other: object) -> UniPoly:
        if isinstance(other, UniPoly):
            _check_same_field(self.field, other.field)
            return other
        return UniPoly.constant(self.field, other)

    def __add__(self, other: object) -> UniPoly:
        o = self._lift(other)
        n = max(len(self.coeffs), len(o.coeffs))
        return UniPoly(self.field, tuple(self.coefficient(k) + o.coefficient(k) for k in range(n)))

    __radd__ = __add__

    def __neg__(self) -> UniPoly:
        return UniPoly(self.field, tuple(-c for c in self.coeffs))

    def __sub__(self, other: object) -> UniPoly:
        return self + (-self._lift(other))

    def __rsub__(self, other: object) -> UniPoly:
        return self._lift(other) - self

    def __mul__(self, other: object) -> UniPoly:
        o = self._lift(other)
        if not self.coeffs or not o.coeffs:
            return UniPoly.zero(self.field)
        out = [self.field.zero] * (len(self.coeffs) + len(o.coeffs) - 1)
        for i, a in enumerate(self.coeffs):
            if a == 0:
                continue
            for j, b in enumerate(o.coeffs):
                out[i + j] += a * b
        return UniPoly(self.field, tuple(out))

    __rmul__ = __mul__

    def __pow__(self, exponent: int) -> UniPoly:
        out = UniPoly.constant(self.field, 1)
        for _ in range(exponent):
            out = out * self
        return out

    def scale(self, factor: Scalar) -> UniPoly:
        """Multiply every coefficient by ``factor``."""
        return UniPoly(self.field, tuple(c * factor for c in self.coeffs))

    def __divmod__(self, other: UniPoly) -> tuple[UniPoly, UniPoly]:
        _check_same_field(self.field, other.field)
        divisor = other.chop()
        if not divisor.coeffs:
            msg = "division by the zero polynomial"
            raise SingularSystem(msg)
        rem = list(self.coeffs)
        dd = divisor.degree
        quot = [self.field.zero] * max(len(rem) - dd, 0)
        for k in range(len(rem) - dd - 1, -1, -1):
            c = rem[k + dd] / divisor.lead
            quot[k] = c
            for j, b in enumerate(divisor.coeffs):
                rem[k + j] -= c * b
        return UniPoly(self.field, tuple(quot)), UniPoly(self.field, tuple(rem[:dd])).chop()

    def exact_div(self, other: UniPoly) -> UniPoly:
        """Divide, requiring a zero remainder.

        Raises:
            InexactDivision: If ``other`` does not divide ``self``.

        """
        quot, rem = divmod(self, other)
        if not rem.is_zero():
            msg = f"remainder of degree {rem.degree} in exact polynomial division"
            raise InexactDivision(msg)
        return quot

    # -- evaluation -----------------------------------------------------------

    def __call__(self, x: Scalar) -> Scalar:
        acc = self.field.zero
        for c in reversed(self.coeffs):
            acc = acc * x + c
        return acc

    def derivative(self, order: int = 1) -> UniPoly:
        """The ``order``-th derivative (no factorial normalization)."""
        coeffs = list(self.coeffs)
        for _ in range(order):
            coeffs = [k * coeffs[k] for k in range(1, len(coeffs))]
        return UniPoly(self.field, tuple(coeffs))

    def taylor(self, at: Scalar, terms: int) -> list[Scalar]:
        """First ``terms`` Taylor coefficients ``p^(j)(at) / j!`` around ``at``."""
        coeffs = list(self.coeffs)
        out: list[Scalar] = []
        for _ in range(terms):
            # one synthetic division by (x - at) peels one coefficient
            acc = self.field.zero
            quotient: list[Scalar] = []
            for c in reversed(coeffs):
                acc = acc * at + c
                quotient.append(acc)
            out.append(acc if coeffs else self.field.zero)
            coeffs = list(reversed(quotient[:-1]))
        return out

    def close(self, other: UniPoly) -> bool:
        """Coefficient-wise comparison with the field tolerance."""
        _check_same_field(self.field, other.field)
        n = max(len(self.coeffs), len(other.coeffs))
        return all(self.field.close(self.coefficient(k), other.coefficient(k)) for k in range(n))

    def to_json(self) -> list[str]:
        """Coefficient list as strings."""
        return [self.field.to_json(c) for c in self.coeffs]


VectorPoly = tuple[UniPoly, ...]
"""A row or column of polynomials (the orientation is implied by context)."""


def vector_poly_zero(field: ScalarField, size: int) -> VectorPoly:
    """A vector of ``size`` zero polynomials."""
    return tuple(UniPoly.zero(field) for _ in range(size))


def vector_poly_eval(vec: VectorPoly, x: Scalar) -> tuple[Scalar, ...]:
    """Evaluate each entry of a vector polynomial at ``x``."""
    return tuple(p(x) for p in vec)


# =============================================================================
# Dense matrices
# =============================================================================


@dataclass(frozen=True, slots=True)
class DenseMatrix:
    """A rectangular matrix of field elements.

    Attributes:
        field: Backend of all entries.
        rows: Number of rows.
        cols: Number of columns.
        data: Row-major entries.

    """

    field: ScalarField
    rows: int
    cols: int
    data: tuple[tuple[Scalar, ...], ...]

    def __post_init__(self) -> None:
        if len(self.data) != self.rows or any(len(r) != self.cols for r in self.data):
            msg = f"data does not match declared shape {self.rows}x{self.cols}"
            raise ValueError(msg)

    # -- constructors ---------------------------------------------------------

    @classmethod
    def from_rows(cls, field: ScalarField, rows: Sequence[Sequence[object]]) -> DenseMatrix:
        """Build from nested sequences, coercing each entry."""
        data = tuple(tuple(field.coerce(v) for v in row) for row in rows)
        ncols = len(data[0]) if data else 0
        return cls(field, len(data), ncols, data)

    @classmethod
    def zeros(cls, field: ScalarField, rows: int, cols: int) -> DenseMatrix:
        """All-zero matrix."""
        return cls(field, rows, cols, tuple((field.zero,) * cols for _ in range(rows)))

    @classmethod
    def identity(cls, field: ScalarField, n: int) -> DenseMatrix:
        """Identity matrix of size ``n``."""
        return cls.diagonal(field, [field.one] * n)

    @classmethod
    def diagonal(cls, field: ScalarField, values: Sequence[object]) -> DenseMatrix:
        """Square diagonal matrix."""
        n = len(values)
        vals = [field.coerce(v) for v in values]
        return cls(field, n, n, tuple(tuple(vals[i] if i == j else field.zero for j in range(n)) for i in range(n)))

    @classmethod
    def column(cls, field: ScalarField, values: Sequence[object]) -> DenseMatrix:
        """Column vector."""
        return cls.from_rows(field, [[v] for v in values])

    @classmethod
    def row_vector(cls, field: ScalarField, values: Sequence[object]) -> DenseMatrix:
        """Row vector."""
        return cls.from_rows(field, [list(values)])

    @classmethod
    def build(cls, field: ScalarField, rows: int, cols: int, entry: Callable[[int, int], object]) -> DenseMatrix:
        """Build from a callable ``entry(i, j)``."""
        data = tuple(tuple(field.coerce(entry(i, j)) for j in range(cols)) for i in range(rows))
        return cls(field, rows, cols, data)

    # -- access ---------------------------------------------------------------

    @property
    def shape(self) -> tuple[int, int]:
        """``(rows, cols)``."""
        return (self.rows, self.cols)

    def __getitem__(self, index: tuple[int, int]) -> Scalar:
        i, j = index
        if not (0 <= i < self.rows and 0 <= j < self.cols):
            msg = f"index ({i}, {j}) outside {self.rows}x{self.cols}"
            raise IndexError(msg)
        return self.data[i][j]

    def row(self, i: int) -> tuple[Scalar, ...]:
        """Row ``i`` as a tuple."""
        return self.data[i]

    def col(self, j: int) -> tuple[Scalar, ...]:
        """Column ``j`` as a tuple."""
        return tuple(r[j] for r in self.data)

    def to_lists(self) -> list[list[Scalar]]:
        """Mutable nested-list copy."""
        return [list(r) for r in self.data]

    def to_json(self) -> list[list[str]]:
        """Entries serialized by the field."""
        return [[self.field.to_json(v) for v in r] for r in self.data]

    # -- algebra --------------------------------------------------------------

    @property
    def T(self) -> DenseMatrix:  # noqa: N802
        """Transpose."""
        return self.transpose()

    def transpose(self) -> DenseMatrix:
        """Transpose."""
        data = tuple(tuple(self.data[i][j] for i in range(self.rows)) for j in range(self.cols))
        return DenseMatrix(self.field, self.cols, self.rows, data)

    def _check_shape(self, other: DenseMatrix) -> None:
        _check_same_field(self.field, other.field)
        if self.shape != other.shape:
            msg = f"shape mismatch {self.shape} vs {other.shape}"
            raise ValueError(msg)

    def __add__(self, other: DenseMatrix) -> DenseMatrix:
        self._check_shape(other)
        rows = zip(self.data, other.data, strict=True)
        data = tuple(tuple(a + b for a, b in zip(r, s, strict=True)) for r, s in rows)
        return DenseMatrix(self.field, self.rows, self.cols, data)

    def __neg__(self) -> DenseMatrix:
        return self.scale(-self.field.one)

    def __sub__(self, other: DenseMatrix) -> DenseMatrix:
        return self + (-other)

    def scale(self, factor: Scalar) -> DenseMatrix:
        """Multiply every entry by ``factor``."""
        return DenseMatrix(self.field, self.rows, self.cols, tuple(tuple(v * factor for v in r) for r in self.data))

    def __matmul__(self, other: DenseMatrix) -> DenseMatrix:
        _check_same_field(self.field, other.field)
        if self.cols != other.rows:
            msg = f"cannot multiply {self.shape} by {other.shape}"
            raise ValueError(msg)
        zero = self.field.zero
        out = []
        for r in self.data:
            acc = [zero] * other.cols
            for k, a in enumerate(r):
                if a == 0:
                    continue
                orow = other.data[k]
                for j in range(other.cols):
                    acc[j] += a * orow[j]
            out.append(tuple(acc))
        return DenseMatrix(self.field, self.rows, other.cols, tuple(out))

    def submatrix(self, row_idx: Sequence[int], col_idx: Sequence[int]) -> DenseMatrix:
        """Select rows and columns by index."""
        data = tuple(tuple(self.data[i][j] for j in col_idx) for i in row_idx)
        return DenseMatrix(self.field, len(row_idx), len(col_idx), data)

    def leading(self, k: int) -> DenseMatrix:
        """The leading ``k x k`` block."""
        return self.submatrix(range(k), range(k))

    def hstack(self, other: DenseMatrix) -> DenseMatrix:
        """Concatenate columns."""
        _check_same_field(self.field, other.field)
        if self.rows != other.rows:
            msg = "hstack needs equal row counts"
            raise ValueError(msg)
        data = tuple(r + s for r, s in zip(self.data, other.data, strict=True))
        return DenseMatrix(self.field, self.rows, self.cols + other.cols, data)

    def vstack(self, other: DenseMatrix) -> DenseMatrix:
        """Concatenate rows."""
        _check_same_field(self.field, other.field)
        if self.cols != other.cols:
            msg = "vstack needs equal column counts"
            raise ValueError(msg)
        return DenseMatrix(self.field, self.rows + other.rows, self.cols, self.data + other.data)

    def is_zero(self) -> bool:
        """True if every entry is zero within tolerance."""
        return all(self.field.is_zero(v) for r in self.data for v in r)

    def max_abs(self) -> Scalar:
        """Largest absolute entry (zero for an empty matrix)."""
        best = self.field.zero
        for r in self.data:
            for v in r:
                a = self.field.abs(v)
                best = max(best, a)
        return best

    def close(self, other: DenseMatrix) -> bool:
        """Entrywise comparison with the field tolerance."""
        self._check_shape(other)
        return all(
            self.field.close(a, b)
            for r, s in zip(self.data, other.data, strict=True)
            for a, b in zip(r, s, strict=True)
        )

    # -- elimination ----------------------------------------------------------

    def _pivot_row(self, work: list[list[Scalar]], col: int, start: int) -> int | None:
        best, best_abs = None, self.field.zero
        for i in range(start, len(work)):
            v = work[i][col]
            if self.field.is_zero(v):
                continue
            if self.field.exact:
                return i
            a = self.field.abs(v)
            if best is None or a > best_abs:
                best, best_abs = i, a
        return best

    def rref(self) -> tuple[DenseMatrix, tuple[int, ...]]:
        """Reduced row echelon form and pivot columns."""
        work = self.to_lists()
        pivots: list[int] = []
        r = 0
        for c in range(self.cols):
            if r >= self.rows:
                break
            p = self._pivot_row(work, c, r)
            if p is None:
                continue
            work[r], work[p] = work[p], work[r]
            inv = self.field.one / work[r][c]
            work[r] = [v * inv for v in work[r]]
            for i in range(self.rows):
                if i != r and work[i][c] != 0:
                    f = work[i][c]
                    work[i] = [a - f * b for a, b in zip(work[i], work[r], strict=True)]
            pivots.append(c)
            r += 1
        return DenseMatrix(self.field, self.rows, self.cols, tuple(tuple(r) for r in work)), tuple(pivots)

    def rank(self) -> int:
        """Numerical (or exact) rank."""
        return len(self.rref()[1])

    def nullspace(self) -> list[tuple[Scalar, ...]]:
        """A basis of the right null space, one vector per free column."""
        reduced, pivots = self.rref()
        free = [c for c in range(self.cols) if c not in pivots]
        basis = []
        for f in free:
            vec = [self.field.zero] * self.cols
            vec[f] = self.field.one
            for r, pc in enumerate(pivots):
                vec[pc] = -reduced[r, f]
            basis.append(tuple(vec))
        return basis

    def det(self) -> Scalar:
        """Determinant."""
        return determinant(self)

    def inverse(self) -> DenseMatrix:
        """Inverse via :func:`solve_linear` against the identity."""
        return solve_linear(self, DenseMatrix.identity(self.field, self.rows))


# =============================================================================
# Free functions
# =============================================================================


def pochhammer(x: Scalar, n: int) -> Scalar:
    """Rising factorial ``x (x+1) ... (x+n-1)``; equals 1 when ``n == 0``.

    Args:
        x: Base value (any field element or int).
        n: Nonnegative number of factors.

    Returns:
        The product, in the type of ``x``.

    """
    if n < 0:
        msg = f"pochhammer needs n >= 0, got {n}"
        raise ValueError(msg)
    out = x - x + 1
    for k in range(n):
        out *= x + k
    return out


def lu_nopivot(m: DenseMatrix) -> tuple[DenseMatrix, DenseMatrix, DenseMatrix]:
    """Factor ``m = L @ D @ U`` without any row or column exchange.

    Args:
        m: Square matrix.

    Returns:
        ``(L, D, U)`` with L lower unitriangular, D diagonal, U upper unitriangular.

    Raises:
        SingularLeadingMinor: At the first vanishing (or sub-tolerance) pivot.

    """
    if m.rows != m.cols:
        msg = f"lu_nopivot needs a square matrix, got {m.shape}"
        raise ValueError(msg)
    n, field = m.rows, m.field
    work = m.to_lists()
    lower = [[field.one if i == j else field.zero for j in range(n)] for i in range(n)]
    upper = [[field.one if i == j else field.zero for j in range(n)] for i in range(n)]
    diag = []
    for k in range(n):
        pivot = work[k][k]
        if field.is_zero(pivot):
            logger.debug("mopkit: zero pivot at %d", k)
            raise SingularLeadingMinor(k)
        diag.append(pivot)
        for j in range(k + 1, n):
            upper[k][j] = work[k][j] / pivot
        for i in range(k + 1, n):
            f = work[i][k] / pivot
            lower[i][k] = f
            if f == 0:
                continue
            row_k = work[k]
            row_i = work[i]
            for j in range(k + 1, n):
                row_i[j] -= f * row_k[j]
    return (
        DenseMatrix.from_rows(field, lower),
        DenseMatrix.diagonal(field, diag),
        DenseMatrix.from_rows(field, upper),
    )


def solve_linear(a: DenseMatrix, b: DenseMatrix) -> DenseMatrix:
    """Solve ``a @ x = b`` by Gaussian elimination with row exchanges.

    Raises:
        SingularSystem: If ``a`` is singular (or numerically so).

    """
    _check_same_field(a.field, b.field)
    if a.rows != a.cols or b.rows != a.rows:
        msg = f"solve_linear shape mismatch {a.shape} / {b.shape}"
        raise ValueError(msg)
    reduced, pivots = a.hstack(b).rref()
    if pivots[: a.cols] != tuple(range(a.cols)):
        msg = f"singular {a.rows}x{a.cols} system"
        raise SingularSystem(msg)
    return reduced.submatrix(range(a.rows), range(a.cols, a.cols + b.cols))


def determinant(m: DenseMatrix) -> Scalar:
    """Determinant by elimination; the empty matrix has determinant 1."""
    if m.rows != m.cols:
        msg = f"determinant needs a square matrix, got {m.shape}"
        raise ValueError(msg)
    field = m.field
    work = m.to_lists()
    det = field.one
    for c in range(m.rows):
        p = m._pivot_row(work, c, c)  # noqa: SLF001
        if p is None:
            return field.zero
        if p != c:
            work[c], work[p] = work[p], work[c]
            det = -det
        pivot = work[c][c]
        det *= pivot
        for i in range(c + 1, m.rows):
            f = work[i][c] / pivot
            if f != 0:
                work[i] = [x - f * y for x, y in zip(work[i], work[c], strict=True)]
    return det


def poly_eval_derive(p: UniPoly, x: Scalar, order: int) -> Scalar:
    """Return ``p^(order)(x)``, the true derivative without factorial scaling."""
    return p.derivative(order)(x)


__all__ = [
    "ZERO_DEGREE",
    "DenseMatrix",
    "UniPoly",
    "VectorPoly",
    "determinant",
    "lu_nopivot",
    "pochhammer",
    "poly_eval_derive",
    "solve_linear",
    "vector_poly_eval",
    "vector_poly_zero",
]
