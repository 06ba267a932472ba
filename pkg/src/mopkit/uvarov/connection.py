"""Connection matrix and tau-determinants.

The connection matrix ``Omega = S~ L(Lambda_[q]) S^-1`` links the base and
perturbed families through ``Omega B(x) = B~(x) L(x)`` and
``A~(x) Omega = R(x) A(x)``. It is banded with ``M_R`` subdiagonals and
``M_L`` superdiagonals, and the outermost superdiagonal is fixed by the
leading coefficients of ``L``.

Rows are produced from the spectral ledger without touching the perturbed
moments:

* ``n >= M_R``: the ``M x M`` system ``sum_r w_r T_{n-M_R+r} = -c_n T_{n+M_L}``;
* ``n < M_R``: the ``L``-chain equations plus orthogonality against the first
  ``n`` monomials of ``dmu R^-1`` with masses.

"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from dataclasses import field as dc_field
from typing import TYPE_CHECKING, Any, Literal

from mopkit.exceptions import LeadingFormViolation, OutsideWindow, SingularSystem
from mopkit.matrix_poly import mp_band_embed
from mopkit.numerics import DenseMatrix, determinant, solve_linear

if TYPE_CHECKING:
    from mopkit.biorth import GaussBorelData
    from mopkit.fields.base import Scalar, ScalarField
    from mopkit.uvarov.bundle import Orientation, PerturbationBundle
    from mopkit.uvarov.ledger import SpectralLedger

logger = logging.getLogger(__name__)

OmegaRow = dict[int, Any]
"""Nonzero-band entries of one row, keyed by column."""


# =============================================================================
# Storage
# =============================================================================


@dataclass
class ConnectionMatrix:
    """Banded rows of ``Omega`` in the standard view.

    For a dual bundle the rows are those of the transposed (standard) problem;
    :meth:`oriented` returns the matrix in the dual's own orientation.

    Attributes:
        field: Backend of the entries.
        M_L: Superdiagonal count.
        M_R: Subdiagonal count.
        rows: ``n -> {j: Omega_{n,j}}`` for every computed row.
        orientation: Orientation of the bundle the rows came from.

    """

    field: ScalarField
    M_L: int
    M_R: int
    rows: dict[int, OmegaRow] = dc_field(default_factory=dict)
    orientation: Orientation = "standard"

    @property
    def n_rows(self) -> int:
        """Length of the contiguous computed prefix."""
        n = 0
        while n in self.rows:
            n += 1
        return n

    @property
    def unit_diagonal_position(self) -> int:
        """Offset of the outer diagonal carrying the normalization constants."""
        return self.M_L if self.orientation == "standard" else -self.M_L

    def entry(self, n: int, j: int) -> Scalar:
        """``Omega_{n,j}``; zero outside the band.

        Raises:
            OutsideWindow: If row ``n`` was not computed.

        """
        if n not in self.rows:
            msg = f"Omega row {n} is not in the computed window (0..{self.n_rows - 1})"
            raise OutsideWindow(msg)
        return self.rows[n].get(j, self.field.zero)

    def dense(self, n_rows: int | None = None, n_cols: int | None = None) -> DenseMatrix:
        """Materialize the leading ``n_rows x n_cols`` block."""
        n_rows = self.n_rows if n_rows is None else n_rows
        n_cols = n_rows if n_cols is None else n_cols
        return DenseMatrix.build(self.field, n_rows, n_cols, self.entry)

    def oriented(self, n: int | None = None) -> DenseMatrix:
        """Square block in the bundle's own orientation (transposed for dual)."""
        block = self.dense(n)
        return block if self.orientation == "standard" else block.transpose()

    def check_band(self, bundle: PerturbationBundle) -> None:
        """Verify the band shape and the outer diagonal.

        Raises:
            LeadingFormViolation: On an entry outside the band or an outer
                entry that differs from ``c_n``.

        """
        std = bundle.standard()
        for n, row in self.rows.items():
            for j, value in row.items():
                if (j < n - self.M_R or j > n + self.M_L) and not self.field.is_zero(value):
                    msg = f"Omega_{{{n},{j}}} lies outside the ({self.M_R}, {self.M_L}) band"
                    raise LeadingFormViolation(msg)
            if not self.field.close(row.get(n + self.M_L, self.field.zero), std.c(n)):
                msg = f"Omega_{{{n},{n + self.M_L}}} differs from the normalization constant"
                raise LeadingFormViolation(msg)

    def to_json(self) -> dict[str, Any]:
        """Rows as ``{n: {j: value}}`` with string keys."""
        return {
            "M_L": self.M_L,
            "M_R": self.M_R,
            "orientation": self.orientation,
            "rows": {
                str(n): {str(j): self.field.to_json(v) for j, v in sorted(row.items())}
                for n, row in sorted(self.rows.items())
            },
        }


# =============================================================================
# Row systems
# =============================================================================


def _row_block(ledger: SpectralLedger, first: int, last: int) -> DenseMatrix:
    """Ledger rows ``T_first .. T_last`` stacked (``last < first`` gives an empty block)."""
    if last >= ledger.size:
        msg = f"ledger row {last} needed, base families stop at {ledger.size - 1}"
        raise OutsideWindow(msg)
    rows = [ledger.row(m) for m in range(first, last + 1)]
    if not rows:
        return DenseMatrix.zeros(ledger.field, 0, ledger.width)
    return DenseMatrix.from_rows(ledger.field, rows)


def _low_row(ledger: SpectralLedger, m: int, n: int) -> tuple[Scalar, ...]:
    return ledger.bb(m) + tuple(ledger.low(m, j) for j in range(n))


def low_matrix(ledger: SpectralLedger, n: int) -> DenseMatrix:
    """The ``(n + M_L)``-square system used for rows ``n < M_R``."""
    size = n + ledger.bundle.M_L
    if size > ledger.size:
        msg = f"low system for n={n} needs {size} base polynomials, have {ledger.size}"
        raise OutsideWindow(msg)
    if size == 0:
        return DenseMatrix.zeros(ledger.field, 0, 0)
    return DenseMatrix.from_rows(ledger.field, [_low_row(ledger, m, n) for m in range(size)])


def _solve_row(a: DenseMatrix, rhs: tuple[Scalar, ...], n: int) -> tuple[Scalar, ...]:
    field = a.field
    if a.rows == 0:
        return ()
    try:
        sol = solve_linear(a.transpose(), DenseMatrix.column(field, rhs))
    except SingularSystem as exc:
        msg = f"Omega row {n}: the spectral system is singular (tau_{n} = 0)"
        raise SingularSystem(msg) from exc
    return sol.col(0)


def omega_solve(bundle: PerturbationBundle, ledger: SpectralLedger, n: int) -> OmegaRow:
    """Row ``n >= M_R`` of ``Omega`` from the spectral system.

    Raises:
        OutsideWindow: If ``n < M_R`` or ``T_{n+M_L}`` is not available.
        SingularSystem: If ``tau_n = 0``.

    """
    std = bundle.standard()
    M_L, M_R = std.M_L, std.M_R
    if n < M_R:
        msg = f"row {n} is below M_R = {M_R}; use omega_below_window"
        raise OutsideWindow(msg)
    a = _row_block(ledger, n - M_R, n + M_L - 1)
    if n + M_L >= ledger.size:
        msg = f"row {n} needs T_{n + M_L}, base families stop at {ledger.size - 1}"
        raise OutsideWindow(msg)
    c_n = std.c(n)
    rhs = tuple(-c_n * t for t in ledger.row(n + M_L))
    weights = _solve_row(a, rhs, n)
    row: OmegaRow = {n - M_R + r: w for r, w in enumerate(weights)}
    row[n + M_L] = c_n
    return row


def omega_below_window(bundle: PerturbationBundle, ledger: SpectralLedger, n: int) -> OmegaRow:
    """Row ``n < M_R`` of ``Omega`` from the extended system.

    Raises:
        OutsideWindow: If ``n`` is not below ``M_R``.
        SingularSystem: If the extended ``tau_n`` vanishes.

    """
    std = bundle.standard()
    if not 0 <= n < std.M_R:
        msg = f"row {n} is not in the low regime 0..{std.M_R - 1}"
        raise OutsideWindow(msg)
    a = low_matrix(ledger, n)
    c_n = std.c(n)
    if n + std.M_L >= ledger.size:
        msg = f"row {n} needs B_{n + std.M_L}, base families stop at {ledger.size - 1}"
        raise OutsideWindow(msg)
    rhs = tuple(-c_n * t for t in _low_row(ledger, n + std.M_L, n))
    weights = _solve_row(a, rhs, n)
    row: OmegaRow = dict(enumerate(weights))
    row[n + std.M_L] = c_n
    return row


def omega_row(bundle: PerturbationBundle, ledger: SpectralLedger, n: int) -> OmegaRow:
    """Row ``n`` by whichever system applies."""
    if n < bundle.standard().M_R:
        return omega_below_window(bundle, ledger, n)
    return omega_solve(bundle, ledger, n)


def omega_last_row(bundle: PerturbationBundle, ledger: SpectralLedger) -> int:
    """Last row fully determined by the ledger, ``N - 1 - M_L``."""
    return ledger.size - 1 - bundle.standard().M_L


def build_connection(bundle: PerturbationBundle, ledger: SpectralLedger, n_rows: int | None = None) -> ConnectionMatrix:
    """Rows ``0 .. n_rows - 1`` of ``Omega`` (default: the whole determined window).

    Raises:
        OutsideWindow: If ``n_rows`` exceeds the determined window.
        SingularSystem: At the first row whose system is singular.

    """
    std = bundle.standard()
    limit = omega_last_row(bundle, ledger) + 1
    n_rows = limit if n_rows is None else n_rows
    if n_rows > limit:
        msg = f"{n_rows} Omega rows requested, truncation determines {limit}"
        raise OutsideWindow(msg)
    omega = ConnectionMatrix(ledger.field, std.M_L, std.M_R, orientation=bundle.orientation)
    for n in range(max(n_rows, 0)):
        omega.rows[n] = omega_row(bundle, ledger, n)
    logger.debug("mopkit: built %d Omega rows (M_L=%d, M_R=%d)", omega.n_rows, std.M_L, std.M_R)
    return omega


# =============================================================================
# tau-determinants
# =============================================================================


def tau_det(bundle: PerturbationBundle, ledger: SpectralLedger, n: int) -> Scalar:
    """``tau_n``: ``det(T_{n-M_R} .. T_{n+M_L-1})`` for ``n >= M_R``, the extended determinant below.

    The empty determinant is one.

    """
    std = bundle.standard()
    if n < std.M_R:
        return determinant(low_matrix(ledger, n))
    return determinant(_row_block(ledger, n - std.M_R, n + std.M_L - 1))


def bordered_cofactors(bundle: PerturbationBundle, ledger: SpectralLedger, n: int) -> list[Scalar]:
    """Signed maximal minors ``C_0 .. C_M`` of the stacked rows ``T_{n-M_R} .. T_{n+M_L}``.

    ``C_r = (-1)^(r+M) det(stack without row r)``, so ``C_M = tau_n`` and
    ``sum_r C_r T_{n-M_R+r} = 0``. ``Omega_{n, n-M_R+r} = c_n C_r / tau_n``.

    """
    std = bundle.standard()
    M = std.M
    stack = _row_block(ledger, n - std.M_R, n + std.M_L)
    out = []
    for r in range(M + 1):
        keep = [i for i in range(M + 1) if i != r]
        minor = determinant(stack.submatrix(keep, range(M)))
        out.append(minor if (r + M) % 2 == 0 else -minor)
    return out


@dataclass
class TauLedger:
    """``tau_n`` over a window, with the low-regime indices marked.

    Attributes:
        values: ``n -> tau_n``.
        low: Indices computed with the extended (``n < M_R``) determinant.

    """

    field: ScalarField
    values: dict[int, Scalar] = dc_field(default_factory=dict)
    low: frozenset[int] = frozenset()

    def __getitem__(self, n: int) -> Scalar:
        return self.values[n]

    def zeros(self) -> list[int]:
        """Indices where ``tau_n`` vanishes."""
        return [n for n, v in sorted(self.values.items()) if self.field.is_zero(v)]

    def to_json(self) -> dict[str, str]:
        """``{n: tau_n}`` with string keys."""
        return {str(n): self.field.to_json(v) for n, v in sorted(self.values.items())}


def tau_window(bundle: PerturbationBundle, ledger: SpectralLedger) -> range:
    """Indices whose ``tau_n`` the ledger determines."""
    return range(ledger.size - bundle.standard().M_L + 1)


def tau_ledger(bundle: PerturbationBundle, ledger: SpectralLedger) -> TauLedger:
    """Every determined ``tau_n``."""
    std = bundle.standard()
    window = tau_window(bundle, ledger)
    values = {n: tau_det(bundle, ledger, n) for n in window}
    return TauLedger(ledger.field, values, frozenset(n for n in window if n < std.M_R))


def tau_pivot_ratio(bundle: PerturbationBundle, taus: TauLedger, n: int) -> Scalar:
    """Predicted ``Omega_{n, n-M_R} = (-1)^M c_n tau_{n+1} / tau_n`` for ``n >= M_R``."""
    std = bundle.standard()
    if n < std.M_R or n + 1 not in taus.values:
        msg = f"pivot ratio for n={n} needs tau_{n} and tau_{n + 1} in the standard regime"
        raise OutsideWindow(msg)
    if taus.field.is_zero(taus[n]):
        msg = f"tau_{n} vanishes"
        raise SingularSystem(msg)
    sign = -1 if std.M % 2 else 1
    return sign * std.c(n) * taus[n + 1] / taus[n]


# =============================================================================
# Factor products and commutator blocks
# =============================================================================


def omega_from_factors(
    bundle: PerturbationBundle, gb: GaussBorelData, gb_tilde: GaussBorelData, side: Literal["left", "right"] = "left"
) -> DenseMatrix:
    """``Omega`` from the two factorizations.

    ``side="left"`` gives ``S~ L(Lambda_[q]) S^-1``, exact on rows
    ``n <= N - 1 - M_L``. ``side="right"`` gives
    ``H~ S_bar~^T R(Lambda_[p]^T) S_bar^-T H^-1``, exact on columns
    ``j <= N - 1 - M_R``.

    """
    std = bundle.standard()
    n = gb.size
    if side == "left":
        return gb_tilde.S @ mp_band_embed(std.L, "left_on_lambda", std.q, n) @ gb.S_inv
    h_inv = DenseMatrix.diagonal(gb.field, [1 / gb.h(k) for k in range(n)])
    right = mp_band_embed(std.R, "right_on_lambda_t", std.p, n)
    return gb_tilde.H @ gb_tilde.S_bar.transpose() @ right @ gb.U @ h_inv


def omega_commutator_window(omega: ConnectionMatrix, n: int) -> tuple[DenseMatrix, DenseMatrix]:
    """The two nonzero blocks of ``[Omega, Pi_{n-1}]``.

    ``Omega^2 = Omega[0:n, n:n+M_L]`` (above the diagonal) and
    ``Omega^3 = Omega[n:n+M_R, 0:n]`` (below it). ``Pi_{n-1}`` projects on the
    first ``n`` indices; for ``n = 0`` both blocks are empty.

    """
    upper = DenseMatrix.build(omega.field, n, omega.M_L, lambda i, j: omega.entry(i, n + j))
    lower = DenseMatrix.build(omega.field, omega.M_R, n, lambda i, j: omega.entry(n + i, j))
    return upper, lower


__all__ = [
    "ConnectionMatrix",
    "OmegaRow",
    "TauLedger",
    "bordered_cofactors",
    "build_connection",
    "low_matrix",
    "omega_below_window",
    "omega_commutator_window",
    "omega_from_factors",
    "omega_last_row",
    "omega_row",
    "omega_solve",
    "tau_det",
    "tau_ledger",
    "tau_pivot_ratio",
    "tau_window",
]
