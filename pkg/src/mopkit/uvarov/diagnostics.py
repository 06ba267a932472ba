"""Residual checks and existence diagnostics for Uvarov perturbations.

Every check works in the standard view of the bundle and compares
quantities built from the base families and ``Omega`` against the perturbed
families produced by the brute-force oracle. Checks that need a Cauchy
transform the backend cannot produce (an exact logarithm, a probe on the
support) are recorded as skipped instead of failing the whole report.

"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from dataclasses import field as dc_field
from typing import TYPE_CHECKING, Any

from mopkit.biorth import biorthogonal_family
from mopkit.exceptions import (
    BackendUnsupported,
    OutsideWindow,
    PoleOnSupport,
    SeriesDivergent,
    SingularLeadingMinor,
    SingularSystem,
)
from mopkit.matrix_poly import mp_difference_quotient
from mopkit.measures import cauchy_pairing, pair_integrate
from mopkit.moments import build_moment_matrix, moment_relation_residual
from mopkit.numerics import DenseMatrix, determinant, lu_nopivot, vector_poly_zero
from mopkit.uvarov.christoffel import (
    christoffel_typeI,
    christoffel_typeII,
    dual_christoffel,
    oracle_direct,
    typeI_window,
)
from mopkit.uvarov.connection import (
    ConnectionMatrix,
    omega_from_factors,
    omega_row,
    tau_ledger,
    tau_pivot_ratio,
)
from mopkit.uvarov.ledger import SpectralLedger, spectral_vectors

if TYPE_CHECKING:
    from collections.abc import Sequence

    from mopkit.biorth import VectorPolyFamily
    from mopkit.fields.base import Scalar, ScalarField
    from mopkit.numerics import VectorPoly
    from mopkit.uvarov.bundle import PerturbationBundle
    from mopkit.uvarov.connection import TauLedger

logger = logging.getLogger(__name__)

CAUCHY_SKIPS = (BackendUnsupported, PoleOnSupport, SeriesDivergent)
"""Failures that turn a Cauchy-side check into a skip."""


@dataclass
class ResidualReport:
    """Largest residual per check, plus the checks that could not run.

    Attributes:
        residuals: ``name -> max |residual|``.
        skipped: ``name -> reason``.

    """

    field: ScalarField
    residuals: dict[str, Scalar] = dc_field(default_factory=dict)
    skipped: dict[str, str] = dc_field(default_factory=dict)

    def record(self, name: str, value: Scalar) -> None:
        """Keep the largest value seen under ``name``."""
        value = self.field.abs(value)
        current = self.residuals.get(name)
        self.residuals[name] = value if current is None or value > current else current

    def skip(self, name: str, reason: str) -> None:
        """Mark ``name`` as not computable."""
        self.skipped.setdefault(name, reason)

    @property
    def ok(self) -> bool:
        """True if every computed residual is zero within tolerance."""
        return all(self.field.is_zero(v) for v in self.residuals.values())

    def to_json(self) -> dict[str, Any]:
        """Residuals as strings, with the backend and its precision."""
        return {
            "backend": self.field.name,
            "precision_bits": self.field.precision_bits,
            "residuals": {k: self.field.to_json(v) for k, v in sorted(self.residuals.items())},
            "skipped": dict(sorted(self.skipped.items())),
            "ok": self.ok,
        }


# =============================================================================
# Helpers
# =============================================================================


def _poly_max(field: ScalarField, vec: Sequence[Any]) -> Scalar:
    out = field.zero
    for poly in vec:
        for c in poly.coeffs:
            out = max(out, field.abs(c))
    return out


def _vec_sub(a: VectorPoly, b: VectorPoly) -> VectorPoly:
    return tuple(x - y for x, y in zip(a, b, strict=True))


def _outer(field: ScalarField, col: Sequence[Scalar], row: Sequence[Scalar]) -> DenseMatrix:
    return DenseMatrix.column(field, col) @ DenseMatrix.row_vector(field, row)


def _commutator_term(
    field: ScalarField,
    omega: ConnectionMatrix,
    n: int,
    left: Sequence[Sequence[Scalar]],
    right: Sequence[Sequence[Scalar]],
    rows: int,
    cols: int,
) -> DenseMatrix:
    """``A~(x) [Omega, Pi_{n-1}] V(y)`` for evaluated columns ``left`` and rows ``right``."""
    out = DenseMatrix.zeros(field, rows, cols)
    for i in range(n, n + omega.M_R):
        for j in range(max(0, i - omega.M_R), n):
            w = omega.entry(i, j)
            if not field.is_zero(w):
                out = out + _outer(field, left[i], right[j]).scale(w)
    for i in range(max(0, n - omega.M_L), n):
        for j in range(n, i + omega.M_L + 1):
            w = omega.entry(i, j)
            if not field.is_zero(w):
                out = out - _outer(field, left[i], right[j]).scale(w)
    return out


# =============================================================================
# Connection residuals
# =============================================================================


def connection_residuals(
    ledger: SpectralLedger,
    omega: ConnectionMatrix,
    fam_tilde: VectorPolyFamily,
    probes: Sequence[tuple[object, object]] = (),
) -> ResidualReport:
    """Check the connection formulas on every determined index.

    ``ledger`` carries the (standard) bundle, the base families and ``mu``;
    ``fam_tilde`` are the ``B_monic`` perturbed families of the standard view.
    ``probes`` are ``(x, y)`` pairs; ``y`` doubles as the Cauchy probe ``z``.

    """
    std = ledger.bundle
    field = ledger.field
    fam = ledger.fam
    report = ResidualReport(field)
    last = min(omega.n_rows, fam_tilde.size) - 1

    # Omega B = B~ L, row by row
    for n in range(last + 1):
        lhs = _omega_times_B(ledger, omega, n)
        rhs = std.L.row_times(fam_tilde.B[n])
        report.record("omega_B", _poly_max(field, _vec_sub(lhs, rhs)))

    # A~ Omega = R A, column by column
    for j in range(last - std.M_R + 1):
        acc = vector_poly_zero(field, std.p)
        for i in range(max(0, j - std.M_L), j + std.M_R + 1):
            w = omega.entry(i, j)
            acc = tuple(x + a.scale(w) for x, a in zip(acc, fam_tilde.A[i], strict=True))
        report.record("A_omega", _poly_max(field, _vec_sub(acc, std.R.times_col(fam.A[j]))))

    # ledger rows annihilated by Omega
    for n in range(std.M_R, last + 1):
        for c in range(ledger.width):
            total = sum((omega.entry(n, j) * ledger.row(j)[c] for j in omega.rows[n]), field.zero)
            report.record("ledger_annihilation", total)

    # moment matrices
    try:
        m_base = build_moment_matrix(std.mu, ledger.size)
        m_tilde = build_moment_matrix(std.perturbed, ledger.size)
        residual, _, _ = moment_relation_residual(m_tilde, m_base, std.L, std.R)
        report.record("moments", residual.max_abs() if residual.rows and residual.cols else field.zero)
    except CAUCHY_SKIPS as exc:
        report.skip("moments", str(exc))

    for x, y in probes:
        xx, yy = field.coerce(x), field.coerce(y)
        _kernel_checks(ledger, omega, fam_tilde, last, xx, yy, report)
        _cauchy_checks(ledger, omega, fam_tilde, last, yy, report)

    logger.info(
        "mopkit: connection residuals %s",
        ", ".join(f"{k}={field.to_json(v)}" for k, v in sorted(report.residuals.items())),
    )
    return report


def _omega_times_B(ledger: SpectralLedger, omega: ConnectionMatrix, n: int) -> VectorPoly:
    """``sum_j Omega_{n,j} B_j``."""
    acc = vector_poly_zero(ledger.field, ledger.bundle.q)
    for j, w in omega.rows[n].items():
        acc = tuple(x + b.scale(w) for x, b in zip(acc, ledger.fam.B[j], strict=True))
    return acc


def _kernel_checks(
    ledger: SpectralLedger,
    omega: ConnectionMatrix,
    fam_tilde: VectorPolyFamily,
    last: int,
    x: Scalar,
    y: Scalar,
    report: ResidualReport,
) -> None:
    std = ledger.bundle
    field = ledger.field
    fam = ledger.fam
    top = min(last - std.M_R + 1, fam_tilde.size - std.M_R)
    a_tilde = [fam_tilde.eval_A(i, x) for i in range(fam_tilde.size)]
    b_base = [fam.eval_B(j, y) for j in range(fam.size)]
    l_y, r_x = std.L(y), std.R(x)
    for n in range(1, top + 1):
        kt = DenseMatrix.zeros(field, std.p, std.q)
        kb = DenseMatrix.zeros(field, std.p, std.q)
        for i in range(n):
            kt = kt + _outer(field, a_tilde[i], fam_tilde.eval_B(i, y))
            kb = kb + _outer(field, fam.eval_A(i, x), b_base[i])
        comm = _commutator_term(field, omega, n, a_tilde, b_base, std.p, std.q)
        report.record("kernel", (kt @ l_y - r_x @ kb + comm).max_abs())

    # mixed kernel K_D needs y off the spectrum of R and off the support
    if x == y:
        return
    try:
        d_base = [cauchy_pairing(fam.B[j], std.mu, y, "left") for j in range(fam.size)]
        d_tilde = [cauchy_pairing(fam_tilde.B[i], std.perturbed, y, "left") for i in range(fam_tilde.size)]
    except CAUCHY_SKIPS as exc:
        report.skip("mixed_kernel", str(exc))
        return
    r_y = std.R(y)
    quotient = (r_x - r_y).scale(1 / (x - y))
    # the kernel reproduces Q_R(y, t) in t once n covers p deg R step-line indices
    for n in range(max(1, std.M_R, std.p * std.R.degree), top + 1):
        kt = DenseMatrix.zeros(field, std.p, std.p)
        kb = DenseMatrix.zeros(field, std.p, std.p)
        for i in range(n):
            kt = kt + _outer(field, a_tilde[i], d_tilde[i])
            kb = kb + _outer(field, fam.eval_A(i, x), d_base[i])
        comm = _commutator_term(field, omega, n, a_tilde, d_base, std.p, std.p)
        report.record("mixed_kernel", (kt @ r_y - r_x @ kb + comm - quotient).max_abs())


def _cauchy_checks(
    ledger: SpectralLedger,
    omega: ConnectionMatrix,
    fam_tilde: VectorPolyFamily,
    last: int,
    z: Scalar,
    report: ResidualReport,
) -> None:
    """``D~ R = Omega D + int B~ dmu~ Q_R`` and ``L C = C~ Omega + int Q_L dmu A``."""
    std = ledger.bundle
    field = ledger.field
    fam = ledger.fam
    q_r = mp_difference_quotient(std.R).fix_first(z).entries()
    q_l = mp_difference_quotient(std.L).fix_first(z).entries()
    try:
        d_base = [cauchy_pairing(fam.B[j], std.mu, z, "left") for j in range(fam.size)]
        c_base = [cauchy_pairing(fam.A[j], std.mu, z, "right") for j in range(fam.size)]
        d_tilde = [cauchy_pairing(fam_tilde.B[i], std.perturbed, z, "left") for i in range(last + 1)]
        c_tilde = [cauchy_pairing(fam_tilde.A[i], std.perturbed, z, "right") for i in range(last + 1)]
    except CAUCHY_SKIPS as exc:
        report.skip("cauchy", str(exc))
        return
    r_z, l_z = std.R(z), std.L(z)
    for n in range(last + 1):
        lhs = DenseMatrix.row_vector(field, d_tilde[n]) @ r_z
        rhs = [field.zero] * std.p
        for j, w in omega.rows[n].items():
            rhs = [r + w * d for r, d in zip(rhs, d_base[j], strict=True)]
        for c in range(std.p):
            col = tuple(q_r[r][c] for r in range(std.p))
            rhs[c] += pair_integrate(fam_tilde.B[n], std.perturbed, col)
        report.record("cauchy_D", (lhs - DenseMatrix.row_vector(field, rhs)).max_abs())
    for m in range(last - std.M_R + 1):
        lhs = l_z @ DenseMatrix.column(field, c_base[m])
        rhs = [field.zero] * std.q
        for i in range(max(0, m - std.M_L), m + std.M_R + 1):
            w = omega.entry(i, m)
            rhs = [r + w * c for r, c in zip(rhs, c_tilde[i], strict=True)]
        for r in range(std.q):
            rhs[r] += pair_integrate(tuple(q_l[r]), std.mu, fam.A[m])
        report.record("cauchy_C", (lhs - DenseMatrix.column(field, rhs)).max_abs())


# =============================================================================
# Definition cross-checks
# =============================================================================


def omega_factor_residual(
    bundle: PerturbationBundle, ledger: SpectralLedger, omega: ConnectionMatrix
) -> ResidualReport:
    """Compare the ledger rows of ``Omega`` with both factor-product definitions."""
    std = ledger.bundle
    field = ledger.field
    report = ResidualReport(field)
    n = ledger.size
    _, gb, _ = biorthogonal_family(std.mu, n)
    _, gb_tilde, _ = biorthogonal_family(std.perturbed, n)
    left = omega_from_factors(bundle, gb, gb_tilde, "left")
    right = omega_from_factors(bundle, gb, gb_tilde, "right")
    for i in range(omega.n_rows):
        for j in range(n):
            report.record("omega_left_factors", left[i, j] - omega.entry(i, j))
            if j <= n - 1 - std.M_R:
                report.record("omega_right_factors", right[i, j] - omega.entry(i, j))
    return report


def tau_pivot_check(
    bundle: PerturbationBundle, ledger: SpectralLedger, taus: TauLedger, fam_tilde: VectorPolyFamily
) -> ResidualReport:
    """``H~_n = (-1)^M c_n tau_{n+1} H_{n-M_R} / (tau_n d_n)`` for ``n >= M_R``."""
    std = ledger.bundle
    field = ledger.field
    report = ResidualReport(field)
    for n in range(std.M_R, fam_tilde.size):
        try:
            ratio = tau_pivot_ratio(bundle, taus, n)
        except (OutsideWindow, SingularSystem) as exc:
            report.skip(f"tau_pivot[{n}]", str(exc))
            continue
        predicted = ratio * ledger.fam.H[n - std.M_R] / std.d(n)
        report.record("tau_pivot", fam_tilde.H[n] - predicted)
    return report


# =============================================================================
# Existence
# =============================================================================


@dataclass
class ExistenceReport:
    """Existence diagnostics up to truncation ``N``.

    Attributes:
        taus: The tau ledger over its determined window.
        omega_minors: Leading principal minors of the computed square block of ``Omega``.
        omega_lu: Whether every leading minor is nonzero.
        perturbed_lu_index: Pivot index where perturbed LU failed (``N`` on success).
        necessity_violations: Indices ``n < perturbed_lu_index`` with ``tau_n = 0``.
        low_index_shapes: Step-line index of each oracle ``A~_n``, ``n < M_R``.
        sufficiency: Logged, never asserted.

    """

    N: int
    field: ScalarField
    taus: TauLedger
    omega_minors: list[Scalar]
    omega_lu: bool
    perturbed_lu_index: int
    necessity_violations: list[int]
    low_index_shapes: dict[int, int]
    sufficiency: dict[str, bool]

    @property
    def necessity_holds(self) -> bool:
        """No tau vanishes where perturbed orthogonality exists."""
        return not self.necessity_violations

    def to_json(self) -> dict[str, Any]:
        """Serializable form."""
        return {
            "N": self.N,
            "tau": self.taus.to_json(),
            "omega_minors": [self.field.to_json(v) for v in self.omega_minors],
            "omega_lu": self.omega_lu,
            "perturbed_lu_index": self.perturbed_lu_index,
            "necessity_violations": self.necessity_violations,
            "necessity_holds": self.necessity_holds,
            "low_index_shapes": {str(k): v for k, v in sorted(self.low_index_shapes.items())},
            "sufficiency": self.sufficiency,
        }


def _step_index(vec: VectorPoly, block: int) -> int:
    idx = -1
    for a, poly in enumerate(vec):
        poly = poly.chop()
        if not poly.is_zero():
            idx = max(idx, poly.degree * block + a)
    return idx


def existence_report(bundle: PerturbationBundle, N: int) -> ExistenceReport:
    """Collect the tau ledger, the ``Omega`` minors and the perturbed LU outcome.

    Raises:
        SingularLeadingMinor: If the base measure itself has no LU factorization.

    """
    std = bundle.standard()
    field = std.field
    _, _, fam = biorthogonal_family(std.mu, N)
    ledger = SpectralLedger(std, fam)
    taus = tau_ledger(std, ledger)

    omega = ConnectionMatrix(field, std.M_L, std.M_R, orientation=bundle.orientation)
    for n in range(max(N - std.M_L, 0)):
        try:
            omega.rows[n] = omega_row(std, ledger, n)
        except SingularSystem:
            logger.info("mopkit: Omega row %d is singular, stopping", n)
            break
    size = min(omega.n_rows, N)
    block = omega.dense(size, size)
    minors = [determinant(block.leading(k)) for k in range(1, size + 1)]
    omega_lu = all(not field.is_zero(m) for m in minors)

    m_tilde = build_moment_matrix(std.perturbed, N)
    try:
        lu_nopivot(m_tilde.matrix)
        k_fail = N
    except SingularLeadingMinor as exc:
        k_fail = exc.index

    violations = [n for n in taus.values if n <= k_fail - 1 and field.is_zero(taus[n])]
    if violations:
        logger.warning("mopkit: tau vanishes at %s although perturbed LU reaches %d", violations, k_fail)

    shapes: dict[int, int] = {}
    if k_fail > 0:
        fam_tilde = biorthogonal_family(std.perturbed, k_fail)[2]
        for n in range(min(std.M_R, k_fail)):
            shapes[n] = _step_index(fam_tilde.A[n], std.p)

    all_tau = not taus.zeros()
    sufficiency = {
        "all_tau_nonzero": all_tau,
        "omega_lu": omega_lu,
        "perturbed_lu": k_fail == N,
        "criteria_met_and_lu": all_tau and omega_lu and k_fail == N,
    }
    logger.info("mopkit: existence N=%d %s", N, sufficiency)
    return ExistenceReport(N, field, taus, minors, omega_lu, k_fail, violations, shapes, sufficiency)


# =============================================================================
# Christoffel formulas against brute force
# =============================================================================


def oracle_comparison(bundle: PerturbationBundle, N: int) -> ResidualReport:
    """Christoffel-type formulas against :func:`oracle_direct` at truncation ``N``.

    Residuals are keyed ``typeII[n]`` and ``typeI[n]`` (dual bundles: ``A[n]``
    and ``B[n]``). Indices the truncation does not determine are left out.

    """
    field = bundle.field
    report = ResidualReport(field)
    if bundle.orientation == "standard":
        _, _, fam = biorthogonal_family(bundle.mu, N)
        ledger = spectral_vectors(bundle, fam)
        oracle = oracle_direct(bundle.perturbed, N)
        for n in range(max(N - bundle.M_L, 0)):
            diff = _vec_sub(christoffel_typeII(bundle, ledger, n), oracle.B[n])
            report.record(f"typeII[{n}]", _poly_max(field, diff))
        for n in typeI_window(bundle, ledger):
            diff = _vec_sub(christoffel_typeI(bundle, ledger, n), oracle.A[n - 1])
            report.record(f"typeI[{n - 1}]", _poly_max(field, diff))
    else:
        _, _, fam = biorthogonal_family(bundle.mu, N, "A_monic")
        ledger = spectral_vectors(bundle, fam)
        oracle = oracle_direct(bundle.perturbed, N, "A_monic")
        for n in range(N):
            for which, target in (("A", oracle.A), ("B", oracle.B)):
                try:
                    poly = dual_christoffel(bundle, ledger, n, which)
                except OutsideWindow:
                    continue
                report.record(f"{which}[{n}]", _poly_max(field, _vec_sub(poly, target[n])))
    logger.info("mopkit: %d Christoffel members compared with the oracle", len(report.residuals))
    return report


__all__ = [
    "CAUCHY_SKIPS",
    "ExistenceReport",
    "ResidualReport",
    "connection_residuals",
    "existence_report",
    "omega_factor_residual",
    "oracle_comparison",
    "tau_pivot_check",
]
