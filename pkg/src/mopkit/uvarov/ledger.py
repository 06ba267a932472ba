"""Spectral-vector ledger.

For a standard bundle the ledger tabulates, for every base polynomial
``B_m``, one number per spectral column:

* one ``L`` column per right Jordan-chain position ``(i, j, k)`` of ``L``,
  holding ``sum_l B_m^(l)(lambda_i)/l! . l_{j,k-l}``;
* one ``R`` column per right Jordan-chain position of ``R``, holding
  ``sum_l (-1)^l integral B_m dmu / (rho_i - x)^(l+1) . r_{j,k-l}`` minus the
  mass contribution paired with the pole vector ``R(x) P_{i,j,k}(x)``.

Stacked, these form the row ``T_m`` of length ``M_L + M_R``. Every Omega row
solve, tau determinant and Christoffel formula reads from these rows.

"""

from __future__ import annotations

import logging
from dataclasses import dataclass
from functools import cached_property
from typing import TYPE_CHECKING, Literal

from mopkit.exceptions import LeadingFormViolation
from mopkit.matrix_poly import MatrixPolynomial
from mopkit.measures import cauchy_pairing, pair_integrate, perturb_measure
from mopkit.numerics import UniPoly, vector_poly_zero

if TYPE_CHECKING:
    from mopkit.biorth import VectorPolyFamily
    from mopkit.fields.base import Scalar
    from mopkit.measures import MatrixOfMeasures
    from mopkit.numerics import VectorPoly
    from mopkit.uvarov.bundle import PerturbationBundle

logger = logging.getLogger(__name__)


@dataclass(frozen=True, slots=True)
class LedgerColumn:
    """One spectral column: side, eigenvalue index, chain, position."""

    side: Literal["L", "R"]
    eig: int
    chain: int
    position: int


def _dot(row: tuple[Scalar, ...], vec: tuple[Scalar, ...], zero: Scalar) -> Scalar:
    total = zero
    for a, b in zip(row, vec, strict=True):
        total += a * b
    return total


class SpectralLedger:
    """Spectral rows ``T_m = [BB_m | DD_m - WW_m]`` of a standard bundle.

    Args:
        bundle: Perturbation bundle (dual bundles are mapped to standard).
        fam: Base families in the ``B_monic`` normalization of the standard
            view's measure.

    """

    def __init__(self, bundle: PerturbationBundle, fam: VectorPolyFamily) -> None:
        self.bundle = bundle.standard()
        self.fam = fam
        self.field = self.bundle.field
        self._rows: dict[int, tuple[Scalar, ...]] = {}
        self._low: dict[tuple[int, int], Scalar] = {}
        self.columns: list[LedgerColumn] = [
            LedgerColumn("L", i, j, k)
            for i, datum in enumerate(self.bundle.spectra_L)
            for j, chain in enumerate(datum.right_chains)
            for k in range(len(chain))
        ] + [
            LedgerColumn("R", i, j, k)
            for i, datum in enumerate(self.bundle.spectra_R)
            for j, chain in enumerate(datum.right_chains)
            for k in range(len(chain))
        ]
        n_left = sum(1 for c in self.columns if c.side == "L")
        if n_left != self.bundle.M_L or len(self.columns) - n_left != self.bundle.M_R:
            msg = (
                f"chain positions ({n_left}, {len(self.columns) - n_left}) do not match "
                f"deg det ({self.bundle.M_L}, {self.bundle.M_R})"
            )
            raise LeadingFormViolation(msg)

    @property
    def width(self) -> int:
        """Row length ``M_L + M_R``."""
        return len(self.columns)

    @property
    def size(self) -> int:
        """Number of base polynomials available."""
        return self.fam.size

    # -- pole vectors ---------------------------------------------------------

    @cached_property
    def pole_vectors(self) -> dict[LedgerColumn, VectorPoly]:
        """``R(x) P_c(x)`` for every ``R`` column, a polynomial ``p``-vector.

        ``P_{i,j,k}(x) = sum_{t<=k} r_{j,t} (x - rho_i)^(t-k-1)``; the product with
        ``R`` is polynomial because the chain annihilates the principal part.

        """
        field = self.field
        out: dict[LedgerColumn, VectorPoly] = {}
        R = self.bundle.R
        for col in self.columns:
            if col.side != "R":
                continue
            datum = self.bundle.spectra_R[col.eig]
            chain = datum.right_chains[col.chain]
            shift = UniPoly.linear(field, datum.eigenvalue)
            numer = vector_poly_zero(field, R.size)
            for t in range(col.position + 1):
                power = shift**t
                numer = tuple(n + power.scale(v) for n, v in zip(numer, chain[t], strict=True))
            denom = shift ** (col.position + 1)
            out[col] = tuple(entry.exact_div(denom) for entry in R.times_col(numer))
        return out

    @cached_property
    def pole_index(self) -> int:
        """Largest scalar (step-line) index among the pole vectors, ``-1`` if none.

        Raises:
            LeadingFormViolation: If the index reaches ``M_R``.

        """
        p = self.bundle.p
        idx = -1
        for vec in self.pole_vectors.values():
            for a, poly in enumerate(vec):
                if not poly.chop().is_zero():
                    idx = max(idx, poly.chop().degree * p + a)
        if idx > self.bundle.M_R - 1:
            msg = f"pole vectors reach step-line index {idx} >= M_R = {self.bundle.M_R}"
            raise LeadingFormViolation(msg)
        return idx

    # -- mass pairing ---------------------------------------------------------

    def mass_pairing(self, b_row: VectorPoly, col_vec: VectorPoly) -> Scalar:
        """Pair ``b_row`` with ``col_vec`` against the mass functional (``L = I``).

        Each mass ``xi`` at chain position ``(i, j, k)`` contributes
        ``sum_l [x - rho]^l {(b_row . xi)(x) (rbar_{j,k-l} . col_vec(x))}``, the
        Taylor coefficient form of ``sum_l (-1)^l/l! integral f delta^(l)``.

        """
        field = self.field
        total = field.zero
        for (i, j, k), xi in self.bundle.mass.items():
            datum = self.bundle.spectra_R[i]
            rho = datum.eigenvalue
            bx = sum((bp * x for bp, x in zip(b_row, xi, strict=True)), UniPoly.zero(field))
            if bx.is_zero():
                continue
            for lvl in range(k + 1):
                rbar = datum.left_chains[j][k - lvl]
                rc = sum((cp.scale(r) for cp, r in zip(col_vec, rbar, strict=True)), UniPoly.zero(field))
                total += (bx * rc).taylor(rho, lvl + 1)[lvl]
        return total

    # -- rows -----------------------------------------------------------------

    def _cauchy_rows(self, m: int) -> dict[tuple[int, int], tuple[Scalar, ...]]:
        """``integral B_m dmu / (rho_i - x)^(l+1)`` per eigenvalue ``i`` and order ``l``."""
        out = {}
        for i, datum in enumerate(self.bundle.spectra_R):
            longest = max((len(c) for c in datum.right_chains), default=0)
            for lvl in range(longest):
                out[i, lvl] = cauchy_pairing(self.fam.B[m], self.bundle.mu, datum.eigenvalue, "left", lvl)
        return out

    def row(self, m: int) -> tuple[Scalar, ...]:
        """``T_m``."""
        if m in self._rows:
            return self._rows[m]
        if m >= self.size:
            msg = f"ledger row {m} needs base polynomial B_{m}, only {self.size} available"
            raise IndexError(msg)
        field = self.field
        b_row = self.fam.B[m]
        cauchy = self._cauchy_rows(m) if self.bundle.M_R else {}
        values = []
        for col in self.columns:
            if col.side == "L":
                datum = self.bundle.spectra_L[col.eig]
                chain = datum.right_chains[col.chain]
                taylor = [poly.taylor(datum.eigenvalue, col.position + 1) for poly in b_row]
                val = field.zero
                for lvl in range(col.position + 1):
                    val += _dot(tuple(t[lvl] for t in taylor), chain[col.position - lvl], field.zero)
                values.append(val)
            else:
                datum = self.bundle.spectra_R[col.eig]
                chain = datum.right_chains[col.chain]
                dd = field.zero
                for lvl in range(col.position + 1):
                    sign = -1 if lvl % 2 else 1
                    dd += sign * _dot(cauchy[col.eig, lvl], chain[col.position - lvl], field.zero)
                ww = self.mass_pairing(b_row, self.pole_vectors[col]) if self.bundle.mass.vectors else field.zero
                values.append(dd - ww)
        self._rows[m] = tuple(values)
        return self._rows[m]

    def bb(self, m: int) -> tuple[Scalar, ...]:
        """The ``L`` part of ``T_m``."""
        return self.row(m)[: self.bundle.M_L]

    def dw(self, m: int) -> tuple[Scalar, ...]:
        """The ``R`` part of ``T_m`` (``DD - WW``)."""
        return self.row(m)[self.bundle.M_L :]

    def ww(self, m: int) -> tuple[Scalar, ...]:
        """Mass corrections alone, per ``R`` column."""
        field = self.field
        if not self.bundle.mass.vectors:
            return tuple(field.zero for c in self.columns if c.side == "R")
        return tuple(self.mass_pairing(self.fam.B[m], self.pole_vectors[c]) for c in self.columns if c.side == "R")

    # -- low regime -----------------------------------------------------------

    @cached_property
    def mu_hat(self) -> MatrixOfMeasures:
        """``dmu R^-1`` plus masses (the perturbed measure with ``L = I``)."""
        b = self.bundle
        identity = MatrixPolynomial.identity(self.field, b.q)
        return perturb_measure(b.mu, identity, b.R, b.mass, "standard", b.spectra_R)

    def low(self, m: int, j: int) -> Scalar:
        """``II_{m,j} = integral B_m d(mu_hat) x^(j//p) e_{j%p}``."""
        key = (m, j)
        if key not in self._low:
            field, p = self.field, self.bundle.p
            col = tuple(
                UniPoly.monomial(field, j // p) if a == j % p else UniPoly.zero(field) for a in range(p)
            )
            self._low[key] = pair_integrate(self.fam.B[m], self.mu_hat, col)
        return self._low[key]

    # -- kernel side ----------------------------------------------------------

    def bordering_row(self, k: int) -> list[VectorPoly]:
        """``G(x)`` columns: ``R(x) sum_{m<=k} A_m(x) T_m`` plus ``R(x) P_c(x)`` on ``R`` columns."""
        field = self.field
        R = self.bundle.R
        out = []
        for c, col in enumerate(self.columns):
            acc = vector_poly_zero(field, self.bundle.p)
            for m in range(k + 1):
                t = self.row(m)[c]
                if field.is_zero(t):
                    continue
                acc = tuple(x + a.scale(t) for x, a in zip(acc, self.fam.A[m], strict=True))
            g = R.times_col(acc)
            if col.side == "R":
                g = tuple(x + y for x, y in zip(g, self.pole_vectors[col], strict=True))
            out.append(g)
        return out


def spectral_vectors(bundle: PerturbationBundle, fam: VectorPolyFamily) -> SpectralLedger:
    """Build the ledger for ``bundle`` over the base families ``fam``.

    For a dual bundle ``fam`` must be the ``A_monic`` families of the original
    measure; they are read as ``B_monic`` families of the transposed measure.

    """
    if bundle.orientation == "dual":
        fam = as_standard_family(fam)
    ledger = SpectralLedger(bundle, fam)
    logger.debug("mopkit: ledger with %d spectral columns over %d polynomials", ledger.width, fam.size)
    return ledger


def as_standard_family(fam: VectorPolyFamily) -> VectorPolyFamily:
    """Read ``A_monic`` families of ``mu`` as ``B_monic`` families of ``mu^T``."""
    from mopkit.biorth import VectorPolyFamily  # noqa: PLC0415

    if fam.normalization != "A_monic":
        fam = fam.renormalized("A_monic")
    return VectorPolyFamily(fam.A, fam.B, fam.H, fam.p, fam.q, "B_monic")


__all__ = ["LedgerColumn", "SpectralLedger", "as_standard_family", "spectral_vectors"]
