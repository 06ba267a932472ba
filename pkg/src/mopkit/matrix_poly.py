"""Matrix polynomials and their spectral structure.

A :class:`MatrixPolynomial` is a finite list of coefficient matrices
``P(x) = sum_l P_l x**l``. This module computes what the perturbation engine
needs from such a polynomial:

Features:
    - determinant and adjugate over the polynomial ring (fraction-free)
    - eigenvalues with algebraic multiplicities (exact or float)
    - canonical left and right Jordan chains from block-Toeplitz null spaces
    - Smith normal form via exact row and column reduction (sympy, exact only)
    - leading-coefficient templates for the banded perturbation theory
    - bivariate difference quotients ``(P(x) - P(y)) / (x - y)``
    - block-Toeplitz embeddings ``P(Lambda^T)`` and ``P(Lambda)``

"""

from __future__ import annotations

import logging
from dataclasses import dataclass, field as dc_field
from fractions import Fraction
from typing import TYPE_CHECKING, Literal

import sympy

from mopkit.exceptions import (
    BackendUnsupported,
    FloatSmithUnsupported,
    InconsistentMultiplicity,
    NonRationalSpectrum,
    SingularSystem,
)
from mopkit.numerics import DenseMatrix, UniPoly, _check_same_field

if TYPE_CHECKING:
    from collections.abc import Sequence

    from mopkit.fields.base import Scalar, ScalarField

logger = logging.getLogger(__name__)

LeadingCondition = Literal["C1", "C2_1", "C2_2"]
"""Leading-coefficient templates. C1: triangular blocks; C2_1: identity blocks for
right polynomials; C2_2: the mirrored identity template for left polynomials."""

VALID_CONDITIONS: frozenset[str] = frozenset({"C1", "C2_1", "C2_2"})

EmbedSide = Literal["right_on_lambda_t", "left_on_lambda"]

Vector = tuple["Scalar", ...]


# =============================================================================
# Matrix polynomial type
# =============================================================================


@dataclass(frozen=True, slots=True)
class MatrixPolynomial:
    """A matrix polynomial with dense coefficient matrices.

    Attributes:
        field: Backend of every coefficient.
        coeffs: ``coeffs[l]`` multiplies ``x**l``. The top entry is nonzero
            unless the polynomial is identically zero (then one zero matrix).

    """

    field: ScalarField
    coeffs: tuple[DenseMatrix, ...]

    def __post_init__(self) -> None:
        if not self.coeffs:
            msg = "a matrix polynomial needs at least one coefficient"
            raise ValueError(msg)
        shape = self.coeffs[0].shape
        for c in self.coeffs:
            _check_same_field(self.field, c.field)
            if c.shape != shape:
                msg = f"coefficient shapes differ: {shape} vs {c.shape}"
                raise ValueError(msg)
        coeffs = list(self.coeffs)
        while len(coeffs) > 1 and all(v == 0 for r in coeffs[-1].data for v in r):
            coeffs.pop()
        object.__setattr__(self, "coeffs", tuple(coeffs))

    # -- constructors ---------------------------------------------------------

    @classmethod
    def from_coefficients(
        cls, field: ScalarField, coeffs: Sequence[Sequence[Sequence[object]]], *, require_regular: bool = False
    ) -> MatrixPolynomial:
        """Build from a list of nested-list coefficient matrices, lowest power first."""
        mp = cls(field, tuple(DenseMatrix.from_rows(field, c) for c in coeffs))
        if require_regular:
            mp.check_regular()
        return mp

    @classmethod
    def from_polys(
        cls, field: ScalarField, grid: Sequence[Sequence[UniPoly]], *, require_regular: bool = False
    ) -> MatrixPolynomial:
        """Build from a grid of scalar polynomials."""
        rows = len(grid)
        cols = len(grid[0]) if rows else 0
        top = max((p.degree for r in grid for p in r), default=0)
        top = max(top, 0)
        coeffs = tuple(
            DenseMatrix(
                field, rows, cols, tuple(tuple(grid[i][j].coefficient(k) for j in range(cols)) for i in range(rows))
            )
            for k in range(top + 1)
        )
        mp = cls(field, coeffs)
        if require_regular:
            mp.check_regular()
        return mp

    @classmethod
    def from_entries(
        cls, field: ScalarField, grid: Sequence[Sequence[Sequence[object]]], *, require_regular: bool = False
    ) -> MatrixPolynomial:
        """Build from a grid whose entries are coefficient lists (lowest power first)."""
        polys = [[UniPoly.from_coeffs(field, e) for e in row] for row in grid]
        return cls.from_polys(field, polys, require_regular=require_regular)

    @classmethod
    def identity(cls, field: ScalarField, size: int) -> MatrixPolynomial:
        """The constant identity polynomial."""
        return cls(field, (DenseMatrix.identity(field, size),))

    @classmethod
    def scalar(cls, field: ScalarField, poly: UniPoly, size: int = 1) -> MatrixPolynomial:
        """``poly(x) * I_size``."""
        zero = UniPoly.zero(field)
        return cls.from_polys(field, [[poly if i == j else zero for j in range(size)] for i in range(size)])

    # -- structure ------------------------------------------------------------

    @property
    def degree(self) -> int:
        """Degree ``N`` (index of the top coefficient)."""
        return len(self.coeffs) - 1

    @property
    def rows(self) -> int:
        """Row count."""
        return self.coeffs[0].rows

    @property
    def cols(self) -> int:
        """Column count."""
        return self.coeffs[0].cols

    @property
    def size(self) -> int:
        """Side length of a square polynomial."""
        if self.rows != self.cols:
            msg = f"matrix polynomial is {self.rows}x{self.cols}, not square"
            raise ValueError(msg)
        return self.rows

    @property
    def leading(self) -> DenseMatrix:
        """Top coefficient ``P_N``."""
        return self.coeffs[-1]

    def coefficient(self, k: int) -> DenseMatrix:
        """``P_k``, zero outside ``0..N``."""
        if 0 <= k < len(self.coeffs):
            return self.coeffs[k]
        return DenseMatrix.zeros(self.field, self.rows, self.cols)

    def entry(self, i: int, j: int) -> UniPoly:
        """The scalar polynomial in position ``(i, j)``."""
        return UniPoly(self.field, tuple(c[i, j] for c in self.coeffs))

    def entries(self) -> list[list[UniPoly]]:
        """All entries as a grid of scalar polynomials."""
        return [[self.entry(i, j) for j in range(self.cols)] for i in range(self.rows)]

    def check_regular(self) -> None:
        """Raise if the determinant vanishes identically."""
        if mp_determinant(self).is_zero():
            msg = "matrix polynomial is not regular (det is identically zero)"
            raise SingularSystem(msg)

    # -- algebra --------------------------------------------------------------

    def __call__(self, x: Scalar) -> DenseMatrix:
        return mp_eval_derive(self, x, 0)

    def transpose(self) -> MatrixPolynomial:
        """Coefficient-wise transpose."""
        return MatrixPolynomial(self.field, tuple(c.transpose() for c in self.coeffs))

    def derivative(self, order: int = 1) -> MatrixPolynomial:
        """Coefficient-wise derivative."""
        return MatrixPolynomial.from_polys(self.field, [[p.derivative(order) for p in r] for r in self.entries()])

    def __add__(self, other: MatrixPolynomial) -> MatrixPolynomial:
        n = max(len(self.coeffs), len(other.coeffs))
        return MatrixPolynomial(self.field, tuple(self.coefficient(k) + other.coefficient(k) for k in range(n)))

    def __matmul__(self, other: MatrixPolynomial) -> MatrixPolynomial:
        _check_same_field(self.field, other.field)
        out = [DenseMatrix.zeros(self.field, self.rows, other.cols) for _ in range(self.degree + other.degree + 1)]
        for i, a in enumerate(self.coeffs):
            for j, b in enumerate(other.coeffs):
                out[i + j] = out[i + j] + (a @ b)
        return MatrixPolynomial(self.field, tuple(out))

    def scale_poly(self, poly: UniPoly) -> MatrixPolynomial:
        """Multiply every entry by a scalar polynomial."""
        return MatrixPolynomial.from_polys(self.field, [[poly * p for p in r] for r in self.entries()])

    def row_times(self, row: Sequence[UniPoly]) -> tuple[UniPoly, ...]:
        """``row @ P(x)`` for a row vector of polynomials."""
        grid = self.entries()
        return tuple(
            sum((row[i] * grid[i][j] for i in range(self.rows)), UniPoly.zero(self.field)) for j in range(self.cols)
        )

    def times_col(self, col: Sequence[UniPoly]) -> tuple[UniPoly, ...]:
        """``P(x) @ col`` for a column vector of polynomials."""
        grid = self.entries()
        return tuple(
            sum((grid[i][j] * col[j] for j in range(self.cols)), UniPoly.zero(self.field)) for i in range(self.rows)
        )

    def to_json(self) -> list[list[list[str]]]:
        """Coefficient matrices serialized by the field."""
        return [c.to_json() for c in self.coeffs]


# =============================================================================
# Evaluation, determinant, adjugate
# =============================================================================


def mp_eval_derive(P: MatrixPolynomial, x: Scalar, order: int) -> DenseMatrix:
    """Return ``P^(order)(x)``, the true derivative without factorial scaling."""
    field = P.field
    out = DenseMatrix.zeros(field, P.rows, P.cols)
    for k in range(order, len(P.coeffs)):
        # d^order/dx^order x^k = k!/(k-order)! x^(k-order)
        factor = field.one
        for m in range(k - order + 1, k + 1):
            factor *= m
        out = out + P.coeffs[k].scale(factor * x ** (k - order))
    return out


def poly_grid_determinant(grid: Sequence[Sequence[UniPoly]], field: ScalarField) -> UniPoly:
    """Fraction-free (Bareiss) determinant of a square grid of polynomials."""
    n = len(grid)
    if n == 0:
        return UniPoly.constant(field, 1)
    work = [list(r) for r in grid]
    sign = 1
    prev = UniPoly.constant(field, 1)
    for k in range(n - 1):
        if work[k][k].is_zero():
            swap = next((i for i in range(k + 1, n) if not work[i][k].is_zero()), None)
            if swap is None:
                return UniPoly.zero(field)
            work[k], work[swap] = work[swap], work[k]
            sign = -sign
        for i in range(k + 1, n):
            for j in range(k + 1, n):
                work[i][j] = (work[i][j] * work[k][k] - work[i][k] * work[k][j]).exact_div(prev)
        prev = work[k][k]
    det = work[n - 1][n - 1]
    return det if sign > 0 else -det


def mp_determinant(P: MatrixPolynomial) -> UniPoly:
    """``det P(x)`` as a scalar polynomial."""
    return poly_grid_determinant(P.entries(), P.field)


def mp_adjugate(P: MatrixPolynomial) -> MatrixPolynomial:
    """Classical adjugate, so that ``P @ adj(P) = det(P) I``."""
    n = P.size
    grid = P.entries()
    if n == 1:
        return MatrixPolynomial.identity(P.field, 1)
    adj = [[UniPoly.zero(P.field)] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            minor = [[grid[r][c] for c in range(n) if c != j] for r in range(n) if r != i]
            cof = poly_grid_determinant(minor, P.field)
            adj[j][i] = cof if (i + j) % 2 == 0 else -cof
    return MatrixPolynomial.from_polys(P.field, adj)


# =============================================================================
# Leading-coefficient templates
# =============================================================================


@dataclass(frozen=True, slots=True)
class LeadingForm:
    """Detected leading structure of a perturbation polynomial.

    Attributes:
        defect: ``r`` for a right polynomial, ``l`` for a left one.
        condition: Template matched, or None when no template applies.

    """

    defect: int
    condition: LeadingCondition | None


def _block_is(m: DenseMatrix, rows: range, cols: range, *, kind: str) -> bool:
    """Check a block against ``zero``, ``identity`` or ``upper`` (invertible upper triangular)."""
    field = m.field
    for a, i in enumerate(rows):
        for b, j in enumerate(cols):
            v = m[i, j]
            if kind == "zero" or (kind in ("identity", "upper") and a > b):
                ok = field.is_zero(v)
            elif kind == "identity":
                ok = field.close(v, field.one) if a == b else field.is_zero(v)
            else:
                ok = (not field.is_zero(v)) if a == b else True
            if not ok:
                return False
    return True


def _outside_zero(m: DenseMatrix, rows: range, cols: range) -> bool:
    return all(m.field.is_zero(m[i, j]) for i in range(m.rows) for j in range(m.cols) if not (i in rows and j in cols))


def mp_leading_check(P: MatrixPolynomial, defect: int, which: LeadingCondition) -> bool:
    """Check the leading and sub-leading coefficients against a block template.

    For ``C1`` and ``C2_1`` (right polynomials of size ``p``, defect ``r``) the
    top coefficient holds a ``(p-r)`` square block in its top-right corner and
    nothing else, and the next coefficient holds an ``r`` square block in its
    bottom-left corner. ``C1`` asks for invertible upper triangular blocks,
    ``C2_1`` for identities. ``C2_2`` is the mirrored identity template for left
    polynomials: the top block sits bottom-left and the next one top-right.

    Args:
        P: Square matrix polynomial.
        defect: ``r`` (or ``l``), must be smaller than the size.
        which: Template name.

    Returns:
        True when both coefficients match.

    """
    s = P.size
    if not 0 <= defect < s:
        msg = f"defect {defect} outside 0..{s - 1}"
        raise ValueError(msg)
    if which not in VALID_CONDITIONS:
        msg = f"unknown leading condition {which!r}"
        raise ValueError(msg)
    n = P.degree
    if defect > 0 and n < 1:
        return False
    top = P.leading
    kind = "upper" if which == "C1" else "identity"
    if which in ("C1", "C2_1"):
        top_rows, top_cols = range(s - defect), range(defect, s)
        sub_rows, sub_cols = range(s - defect, s), range(defect)
    else:
        top_rows, top_cols = range(defect, s), range(s - defect)
        sub_rows, sub_cols = range(defect), range(s - defect, s)
    if not (_block_is(top, top_rows, top_cols, kind=kind) and _outside_zero(top, top_rows, top_cols)):
        return False
    if defect == 0:
        return True
    return _block_is(P.coefficient(n - 1), sub_rows, sub_cols, kind=kind)


def classify_leading_form(P: MatrixPolynomial, *, side: Literal["right", "left"]) -> LeadingForm:
    """Find the smallest defect whose template ``P`` satisfies.

    Identity templates are preferred over the triangular one.

    """
    conditions: tuple[LeadingCondition, ...] = ("C2_1", "C1") if side == "right" else ("C2_2",)
    for defect in range(P.size):
        for cond in conditions:
            if mp_leading_check(P, defect, cond):
                return LeadingForm(defect, cond)
    return LeadingForm(0, None)


# =============================================================================
# Spectrum and Jordan chains
# =============================================================================


@dataclass(frozen=True)
class SpectralDatum:
    """One eigenvalue of a regular matrix polynomial with its Jordan structure.

    Attributes:
        eigenvalue: The root ``rho`` of ``det P``.
        multiplicity: Algebraic multiplicity ``K``.
        right_chains: Canonical right Jordan chains, each a list of column vectors.
        left_chains: Canonical left Jordan chains (row vectors stored as tuples).
        partial_multiplicities: Chain lengths, longest first.

    """

    eigenvalue: Scalar
    multiplicity: int
    right_chains: tuple[tuple[Vector, ...], ...] = ()
    left_chains: tuple[tuple[Vector, ...], ...] = ()
    partial_multiplicities: tuple[int, ...] = dc_field(default=())

    @property
    def has_chains(self) -> bool:
        """True once chains were computed."""
        return bool(self.right_chains)


def _to_sympy(poly: UniPoly, x: sympy.Symbol) -> sympy.Poly:
    coeffs = [sympy.Rational(Fraction(c).numerator, Fraction(c).denominator) for c in reversed(poly.coeffs)] or [0]
    return sympy.Poly(coeffs, x, domain=sympy.QQ)


def _from_sympy(poly: sympy.Poly, field: ScalarField) -> UniPoly:
    coeffs = [Fraction(int(c.p), int(c.q)) for c in reversed(poly.all_coeffs())]
    return UniPoly.from_coeffs(field, coeffs)


def _exact_roots(det: UniPoly) -> list[tuple[Scalar, int]]:
    x = sympy.Symbol("x")
    _, factors = _to_sympy(det, x).factor_list()
    roots: list[tuple[Scalar, int]] = []
    for fac, mult in factors:
        if fac.degree() == 1:
            c1, c0 = fac.all_coeffs()
            r = -sympy.Rational(c0) / sympy.Rational(c1)
            roots.append((Fraction(int(r.p), int(r.q)), int(mult)))
        elif fac.degree() > 1:
            msg = f"irreducible factor {fac.as_expr()} of degree {fac.degree()} has no rational roots"
            raise NonRationalSpectrum(msg)
    return sorted(roots, key=lambda t: t[0])


def _float_roots(det: UniPoly) -> list[tuple[Scalar, int]]:
    field = det.field
    ctx = field.ctx  # type: ignore[attr-defined]
    d = det.degree
    if d <= 0:
        return []
    monic = [c / det.lead for c in det.coeffs]
    comp = ctx.zeros(d, d)
    for i in range(1, d):
        comp[i, i - 1] = 1
    for i in range(d):
        comp[i, d - 1] = -monic[i]
    eigs = ctx.eig(comp, left=False, right=False)
    radius = ctx.sqrt(field.tol)
    reals = []
    for z in eigs:
        scale = max(ctx.mpf(1), abs(z))
        if abs(ctx.im(z)) > radius * scale:
            msg = f"eigenvalue {z} is not real; complex spectra are not supported"
            raise BackendUnsupported(msg)
        reals.append(ctx.re(z))
    reals.sort()
    clusters: list[list[Scalar]] = []
    for r in reals:
        if clusters and abs(r - clusters[-1][0]) <= radius * max(ctx.mpf(1), abs(r)):
            clusters[-1].append(r)
        else:
            clusters.append([r])
    return [(sum(c) / len(c), len(c)) for c in clusters]


def poly_roots(poly: UniPoly) -> list[tuple[Scalar, int]]:
    """Distinct roots of a scalar polynomial with multiplicities, sorted ascending.

    Raises:
        NonRationalSpectrum: Exact backend with an irreducible non-linear factor.
        BackendUnsupported: Float backend with a non-real root.

    """
    poly = poly.chop()
    return _exact_roots(poly) if poly.field.exact else _float_roots(poly)


def mp_spectrum(P: MatrixPolynomial) -> list[SpectralDatum]:
    """Eigenvalues of ``P`` with algebraic multiplicities (no chains).

    Exact backend: square-free factorization and rational roots. Float backend:
    companion-matrix eigenvalues of ``det P`` clustered with a tolerance.

    Raises:
        NonRationalSpectrum: Exact backend with an irreducible non-linear factor.

    """
    det = mp_determinant(P).chop()
    roots = poly_roots(det)
    logger.debug("mopkit: spectrum of degree-%d determinant has %d distinct roots", det.degree, len(roots))
    return [SpectralDatum(eigenvalue=r, multiplicity=m) for r, m in roots]


def _toeplitz(blocks: list[DenseMatrix], k: int) -> DenseMatrix:
    s = blocks[0].rows
    field = blocks[0].field
    data = [[field.zero] * (k * s) for _ in range(k * s)]
    for bi in range(k):
        for bj in range(bi + 1):
            blk = blocks[bi - bj]
            for a in range(s):
                for b in range(s):
                    data[bi * s + a][bj * s + b] = blk[a, b]
    return DenseMatrix(field, k * s, k * s, tuple(tuple(r) for r in data))


def _normalize_chain(chain: list[Vector], field: ScalarField) -> tuple[Vector, ...]:
    lead = chain[0]
    pivot = next(v for v in lead if not field.is_zero(v))
    return tuple(tuple(v / pivot for v in vec) for vec in chain)


def _chains(P: MatrixPolynomial, rho: Scalar, K: int) -> tuple[tuple[tuple[Vector, ...], ...], tuple[int, ...]]:
    field, s = P.field, P.size
    blocks = [mp_eval_derive(P, rho, m).scale(field.one / field.factorial(m)) for m in range(K)]
    nullity = [0]
    for k in range(1, K + 1):
        t = _toeplitz(blocks, k)
        nullity.append(t.cols - t.rank())
        if nullity[-1] == nullity[-2]:
            break
    total = nullity[-1]
    if total != K:
        msg = f"rank profile gives {total} chain vectors at {rho}, expected multiplicity {K}"
        raise InconsistentMultiplicity(msg)
    at_least = [nullity[k] - nullity[k - 1] for k in range(1, len(nullity))] + [0]
    longest = max((k + 1 for k, g in enumerate(at_least) if g > 0), default=0)
    chosen_leads: list[Vector] = []
    chains: list[tuple[Vector, ...]] = []
    lengths: list[int] = []
    for length in range(longest, 0, -1):
        wanted = at_least[length - 1] - at_least[length]
        if wanted <= 0:
            continue
        found = 0
        for vec in _toeplitz(blocks, length).nullspace():
            if found == wanted:
                break
            lead = vec[:s]
            if all(field.is_zero(v) for v in lead):
                continue
            trial = DenseMatrix(field, len(chosen_leads) + 1, s, (*chosen_leads, lead))
            if trial.rank() <= len(chosen_leads):
                continue
            chosen_leads.append(lead)
            chain = [vec[i * s : (i + 1) * s] for i in range(length)]
            chains.append(_normalize_chain(chain, field))
            lengths.append(length)
            found += 1
        if found != wanted:
            msg = f"could not extract {wanted} independent chains of length {length} at {rho}"
            raise InconsistentMultiplicity(msg)
    return tuple(chains), tuple(lengths)


def mp_jordan_chains(P: MatrixPolynomial, rho: Scalar, K: int) -> SpectralDatum:
    """Canonical left and right Jordan chains of ``P`` at ``rho``.

    The right chains satisfy ``sum_{m<=i} P^(m)(rho)/m! v_{i-m} = 0`` for every
    ``i``; the left chains are the right chains of the transposed polynomial.
    Each lead vector is scaled so its first nonzero entry is 1.

    Raises:
        InconsistentMultiplicity: If the rank profile does not add up to ``K``.

    """
    rho = P.field.coerce(rho)
    right, kappa = _chains(P, rho, K)
    left, kappa_left = _chains(P.transpose(), rho, K)
    if sorted(kappa) != sorted(kappa_left):
        msg = f"left and right partial multiplicities differ at {rho}: {kappa} vs {kappa_left}"
        raise InconsistentMultiplicity(msg)
    return SpectralDatum(
        eigenvalue=rho,
        multiplicity=K,
        right_chains=right,
        left_chains=left,
        partial_multiplicities=kappa,
    )


def spectral_data(P: MatrixPolynomial, eigenvalues: Sequence[object] | None = None) -> list[SpectralDatum]:
    """Spectrum plus chains for every eigenvalue.

    Args:
        P: Regular square matrix polynomial.
        eigenvalues: Optional explicit roots, bypassing :func:`mp_spectrum`.
            Multiplicities are then read from the rank profile.

    """
    if eigenvalues is None:
        return [mp_jordan_chains(P, d.eigenvalue, d.multiplicity) for d in mp_spectrum(P)]
    det = mp_determinant(P).chop()
    out = []
    for rho in eigenvalues:
        r = P.field.coerce(rho)
        mult = 0
        poly = det
        lin = UniPoly.linear(P.field, r)
        while poly.degree > 0 and P.field.is_zero(poly(r)):
            poly = divmod(poly, lin)[0]
            mult += 1
        out.append(mp_jordan_chains(P, r, mult))
    return out


# =============================================================================
# Smith normal form
# =============================================================================


def mp_smith_form(P: MatrixPolynomial) -> tuple[MatrixPolynomial, MatrixPolynomial, MatrixPolynomial]:
    """Smith normal form ``P = E @ D @ F`` over the rational polynomial ring.

    ``E`` and ``F`` are unimodular (constant nonzero determinant) and ``D`` is
    diagonal with monic invariant factors, each dividing the next.

    Raises:
        FloatSmithUnsupported: On the float backend.

    """
    if not P.field.exact:
        msg = "Smith form needs exact arithmetic"
        raise FloatSmithUnsupported(msg)
    field, n = P.field, P.size
    x = sympy.Symbol("x")
    zero = sympy.Poly(0, x, domain=sympy.QQ)
    one = sympy.Poly(1, x, domain=sympy.QQ)
    a = [[_to_sympy(p, x) for p in r] for r in P.entries()]
    e = [[one if i == j else zero for j in range(n)] for i in range(n)]
    f = [[one if i == j else zero for j in range(n)] for i in range(n)]

    for t in range(n):
        while True:
            cands = [(a[i][j].degree(), i, j) for i in range(t, n) for j in range(t, n) if not a[i][j].is_zero]
            if not cands:
                break
            _, pi, pj = min(cands)
            if pi != t:
                a[t], a[pi] = a[pi], a[t]
                for row in e:
                    row[t], row[pi] = row[pi], row[t]
            if pj != t:
                for row in a:
                    row[t], row[pj] = row[pj], row[t]
                f[t], f[pj] = f[pj], f[t]
            pivot = a[t][t]
            clean = True
            for i in range(t + 1, n):
                q, r = a[i][t].div(pivot)
                if not q.is_zero:
                    a[i] = [a[i][c] - q * a[t][c] for c in range(n)]
                    for row in e:
                        row[t] = row[t] + q * row[i]
                clean = clean and r.is_zero
            for j in range(t + 1, n):
                q, r = a[t][j].div(pivot)
                if not q.is_zero:
                    for row in a:
                        row[j] = row[j] - q * row[t]
                    f[t] = [f[t][c] + q * f[j][c] for c in range(n)]
                clean = clean and r.is_zero
            if not clean:
                continue
            bad = next(
                (i for i in range(t + 1, n) for j in range(t + 1, n) if not a[i][j].rem(pivot).is_zero),
                None,
            )
            if bad is None:
                break
            a[t] = [a[t][c] + a[bad][c] for c in range(n)]
            for row in e:
                row[bad] = row[bad] - row[t]
        if not a[t][t].is_zero:
            lc = a[t][t].LC()
            a[t] = [v.quo_ground(lc) for v in a[t]]
            for row in e:
                row[t] = row[t].mul_ground(lc)

    def back(grid: list[list[sympy.Poly]]) -> MatrixPolynomial:
        return MatrixPolynomial.from_polys(field, [[_from_sympy(p, field) for p in r] for r in grid])

    return back(e), back(a), back(f)


def smith_partial_multiplicities(D: MatrixPolynomial, rho: Scalar) -> tuple[int, ...]:
    """Exponents of ``(x - rho)`` in the invariant factors, largest first, zeros dropped."""
    lin = UniPoly.linear(D.field, rho)
    out = []
    for i in range(D.size):
        poly = D.entry(i, i)
        k = 0
        while poly.degree > 0 and D.field.is_zero(poly(rho)):
            poly = divmod(poly, lin)[0]
            k += 1
        if k:
            out.append(k)
    return tuple(sorted(out, reverse=True))


# =============================================================================
# Difference quotient and band embedding
# =============================================================================


@dataclass(frozen=True, slots=True)
class DifferenceQuotient:
    """Coefficients of ``(P(x) - P(y)) / (x - y) = sum_{a,b} Q_{a,b} x**a y**b``.

    ``Q_{a,b} = P_{a+b+1}``, so both degrees are at most ``N - 1``.

    """

    poly: MatrixPolynomial

    @property
    def degree(self) -> int:
        """Degree in each variable (``-1`` for a constant ``P``)."""
        return self.poly.degree - 1

    def coefficient(self, a: int, b: int) -> DenseMatrix:
        """``Q_{a,b}``."""
        return self.poly.coefficient(a + b + 1)

    def evaluate(self, x: Scalar, y: Scalar) -> DenseMatrix:
        """Value at the point pair ``(x, y)``."""
        P = self.poly
        out = DenseMatrix.zeros(P.field, P.rows, P.cols)
        for a in range(self.degree + 1):
            for b in range(self.degree + 1 - a):
                out = out + self.coefficient(a, b).scale(x**a * y**b)
        return out

    def fix_first(self, x: Scalar) -> MatrixPolynomial:
        """Polynomial in the second variable for a fixed first argument."""
        P = self.poly
        if self.degree < 0:
            return MatrixPolynomial(P.field, (DenseMatrix.zeros(P.field, P.rows, P.cols),))
        coeffs = []
        for b in range(self.degree + 1):
            acc = DenseMatrix.zeros(P.field, P.rows, P.cols)
            for a in range(self.degree + 1 - b):
                acc = acc + self.coefficient(a, b).scale(x**a)
            coeffs.append(acc)
        return MatrixPolynomial(P.field, tuple(coeffs))

    def fix_second(self, y: Scalar) -> MatrixPolynomial:
        """Polynomial in the first variable for a fixed second argument (the table is symmetric)."""
        return self.fix_first(y)


def mp_difference_quotient(P: MatrixPolynomial) -> DifferenceQuotient:
    """Bivariate difference quotient of ``P``."""
    return DifferenceQuotient(P)


def mp_band_embed(P: MatrixPolynomial, side: EmbedSide, block: int, n_trunc: int) -> DenseMatrix:
    """Truncated ``P(Lambda_[block]^T)`` or ``P(Lambda_[block])``.

    ``right_on_lambda_t`` gives the block lower-triangular matrix whose block
    ``(I, J)`` is ``P_{I-J}``; ``left_on_lambda`` gives the block upper one with
    block ``(I, J)`` equal to ``P_{J-I}``.

    Args:
        P: Square polynomial of size ``block``.
        side: Which substitution.
        block: Block size ``p`` or ``q``.
        n_trunc: Scalar size of the truncation.

    """
    if P.size != block:
        msg = f"polynomial size {P.size} does not match block {block}"
        raise ValueError(msg)
    field = P.field

    def entry(i: int, j: int) -> Scalar:
        bi, a = divmod(i, block)
        bj, b = divmod(j, block)
        offset = bi - bj if side == "right_on_lambda_t" else bj - bi
        if 0 <= offset <= P.degree:
            return P.coeffs[offset][a, b]
        return field.zero

    return DenseMatrix.build(field, n_trunc, n_trunc, entry)


def band_offsets(m: DenseMatrix) -> tuple[int, int]:
    """``(lower, upper)``: farthest nonzero sub- and super-diagonal offsets."""
    lower = upper = 0
    for i in range(m.rows):
        for j in range(m.cols):
            if not m.field.is_zero(m[i, j]):
                lower = max(lower, i - j)
                upper = max(upper, j - i)
    return lower, upper


__all__ = [
    "VALID_CONDITIONS",
    "DifferenceQuotient",
    "LeadingForm",
    "MatrixPolynomial",
    "SpectralDatum",
    "band_offsets",
    "classify_leading_form",
    "mp_adjugate",
    "mp_band_embed",
    "mp_determinant",
    "mp_difference_quotient",
    "mp_eval_derive",
    "mp_jordan_chains",
    "mp_leading_check",
    "mp_smith_form",
    "mp_spectrum",
    "poly_grid_determinant",
    "poly_roots",
    "smith_partial_multiplicities",
    "spectral_data",
]
