"""Tests for matrix polynomials.

This module tests:
    - Determinant and adjugate
    - Leading-form templates and their classification
    - Spectra, Jordan chains and partial multiplicities
    - Agreement of Smith-form and rank-profile multiplicities
    - Difference quotients and band embeddings
"""

from __future__ import annotations

import math
import random
from fractions import Fraction

import pytest

from mopkit.exceptions import FloatSmithUnsupported, NonRationalSpectrum
from mopkit.fields import BigFloatField, RationalField
from mopkit.matrix_poly import (
    LeadingForm,
    MatrixPolynomial,
    band_offsets,
    classify_leading_form,
    mp_adjugate,
    mp_band_embed,
    mp_determinant,
    mp_difference_quotient,
    mp_eval_derive,
    mp_jordan_chains,
    mp_leading_check,
    mp_smith_form,
    mp_spectrum,
    smith_partial_multiplicities,
    spectral_data,
)
from mopkit.numerics import DenseMatrix, UniPoly
from mopkit.random_cases import MAX_BLOCK, MAX_DEGREE, random_regular_polynomial


def jordan_block(field: RationalField, rho: int = 0) -> MatrixPolynomial:
    """``[[x - rho, 1], [0, x - rho]]``: one chain of length 2."""
    return MatrixPolynomial.from_coefficients(field, [[[-rho, 1], [0, -rho]], [[1, 0], [0, 1]]])


def cyclic(field: RationalField, d: int = 0) -> MatrixPolynomial:
    """``[[0, x - d, 0], [0, 0, x - d], [1, 0, 0]]``."""
    const = [[0, -d, 0], [0, 0, -d], [1, 0, 0]]
    lead = [[0, 1, 0], [0, 0, 1], [0, 0, 0]]
    return MatrixPolynomial.from_coefficients(field, [const, lead])


class TestDeterminant:
    """Tests for determinant and adjugate."""

    def test_jordan_block(self, rational: RationalField) -> None:
        """Verify det [[x, 1], [0, x]] = x^2."""
        assert mp_determinant(jordan_block(rational)) == UniPoly.monomial(rational, 2)

    def test_adjugate_identity(self, rational: RationalField) -> None:
        """Verify P adj(P) = det(P) I."""
        P = cyclic(rational, 2)
        product = (P @ mp_adjugate(P)).entries()
        det = mp_determinant(P)
        for i in range(3):
            for j in range(3):
                expected = det if i == j else UniPoly.zero(rational)
                assert product[i][j].chop() == expected


class TestLeadingForms:
    """Tests for the block templates."""

    def test_cyclic_is_identity_template(self, rational: RationalField) -> None:
        """Verify the cyclic polynomial has defect 1 under the identity template."""
        assert classify_leading_form(cyclic(rational), side="right") == LeadingForm(1, "C2_1")

    def test_monic_is_defect_zero(self, rational: RationalField) -> None:
        """Verify a monic polynomial satisfies every template with defect 0."""
        assert mp_leading_check(jordan_block(rational), 0, "C2_1")
        assert mp_leading_check(jordan_block(rational), 0, "C2_2")

    def test_triangular_template(self, rational: RationalField) -> None:
        """Verify an upper-triangular invertible leading block satisfies C1 only."""
        P = MatrixPolynomial.from_coefficients(rational, [[[1, 0], [0, 1]], [[2, 5], [0, 3]]])
        assert mp_leading_check(P, 0, "C1")
        assert not mp_leading_check(P, 0, "C2_1")

    def test_defect_out_of_range(self, rational: RationalField) -> None:
        """Verify the defect must be smaller than the size."""
        with pytest.raises(ValueError, match="defect"):
            mp_leading_check(jordan_block(rational), 2, "C1")

    def test_no_template(self, rational: RationalField) -> None:
        """Verify a singular leading block yields no condition."""
        P = MatrixPolynomial.from_coefficients(rational, [[[1, 0], [0, 1]], [[1, 1], [1, 1]]])
        assert classify_leading_form(P, side="right").condition is None


class TestSpectrum:
    """Tests for eigenvalues and Jordan chains."""

    def test_multiplicity(self, rational: RationalField) -> None:
        """Verify the Jordan block has eigenvalue 3 with multiplicity 2."""
        (datum,) = mp_spectrum(jordan_block(rational, 3))
        assert datum.eigenvalue == 3
        assert datum.multiplicity == 2

    def test_chain_length_two(self, rational: RationalField) -> None:
        """Verify one chain of length 2 and the chain equations."""
        P = jordan_block(rational)
        (datum,) = spectral_data(P)
        assert datum.partial_multiplicities == (2,)
        v0, v1 = datum.right_chains[0]
        at0 = P(Fraction(0))
        first = at0 @ DenseMatrix.column(rational, v0)
        second = at0 @ DenseMatrix.column(rational, v1) + DenseMatrix.column(rational, v0)
        assert first.is_zero()
        assert second.is_zero()

    def test_chains_at_given_eigenvalue(self, rational: RationalField) -> None:
        """Verify chains built directly satisfy the Taylor-coupled chain equations."""
        P = jordan_block(rational, 2)
        datum = mp_jordan_chains(P, 2, 2)
        assert datum.partial_multiplicities == (2,)
        chain = datum.right_chains[0]
        for i in range(len(chain)):
            total = DenseMatrix.zeros(rational, 2, 1)
            for m in range(i + 1):
                taylor = mp_eval_derive(P, Fraction(2), m).scale(Fraction(1, math.factorial(m)))
                total = total + taylor @ DenseMatrix.column(rational, chain[i - m])
            assert total.is_zero()
        (left,) = datum.left_chains
        assert len(left) == 2

    def test_eval_derive(self, rational: RationalField) -> None:
        """Verify entrywise derivatives of [[x^2, 1], [0, x]] at 3."""
        P = MatrixPolynomial.from_coefficients(rational, [[[0, 1], [0, 0]], [[0, 0], [0, 1]], [[1, 0], [0, 0]]])
        assert mp_eval_derive(P, Fraction(3), 1) == DenseMatrix.from_rows(rational, [[6, 0], [0, 1]])
        assert mp_eval_derive(P, Fraction(3), 2) == DenseMatrix.from_rows(rational, [[2, 0], [0, 0]])
        assert mp_eval_derive(P, Fraction(3), 3).is_zero()

    def test_semisimple(self, rational: RationalField) -> None:
        """Verify x I_2 has two chains of length 1."""
        P = MatrixPolynomial.scalar(rational, UniPoly.monomial(rational, 1), 2)
        (datum,) = spectral_data(P)
        assert datum.partial_multiplicities == (1, 1)

    def test_explicit_eigenvalues(self, rational: RationalField) -> None:
        """Verify explicit roots bypass the determinant factorization."""
        (datum,) = spectral_data(cyclic(rational, 2), eigenvalues=[2])
        assert datum.multiplicity == 2
        assert len(datum.left_chains) == 2

    def test_irrational_root(self, rational: RationalField) -> None:
        """Verify x^2 - 2 has no rational spectrum."""
        P = MatrixPolynomial.from_polys(rational, [[UniPoly.from_coeffs(rational, [-2, 0, 1])]])
        with pytest.raises(NonRationalSpectrum):
            mp_spectrum(P)

    def test_float_roots(self, bigfloat: BigFloatField) -> None:
        """Verify float roots of (x - 1/2)(x + 3) cluster correctly."""
        poly = UniPoly.linear(bigfloat, "1/2") * UniPoly.linear(bigfloat, -3)
        P = MatrixPolynomial.from_polys(bigfloat, [[poly]])
        roots = [d.eigenvalue for d in mp_spectrum(P)]
        assert bigfloat.close(roots[0], bigfloat.coerce(-3))
        assert bigfloat.close(roots[1], bigfloat.coerce("1/2"))


class TestSmithForm:
    """Tests for the Smith normal form."""

    def test_reconstructs(self, rational: RationalField) -> None:
        """Verify E D F reproduces the polynomial."""
        P = jordan_block(rational, 1)
        E, D, F = mp_smith_form(P)
        assert [[p.chop() for p in row] for row in (E @ D @ F).entries()] == P.entries()

    @pytest.mark.parametrize(
        ("build", "expected"),
        [
            pytest.param(lambda f: jordan_block(f, 0), (2,), id="jordan"),
            pytest.param(lambda f: MatrixPolynomial.scalar(f, UniPoly.monomial(f, 1), 2), (1, 1), id="semisimple"),
        ],
    )
    def test_matches_chains(self, rational: RationalField, build, expected: tuple[int, ...]) -> None:  # noqa: ANN001
        """Verify Smith-form exponents equal rank-profile chain lengths."""
        P = build(rational)
        _, D, _ = mp_smith_form(P)
        (datum,) = spectral_data(P)
        assert smith_partial_multiplicities(D, datum.eigenvalue) == expected
        assert datum.partial_multiplicities == expected

    @pytest.mark.parametrize("seed", range(24))
    def test_random_polynomials(self, rational: RationalField, seed: int) -> None:
        """Verify Smith form, chain lengths and the construction agree on random polynomials."""
        P, expected = random_regular_polynomial(rational, random.Random(seed))
        assert P.size <= MAX_BLOCK
        assert max(p.degree for row in P.entries() for p in row) <= MAX_DEGREE
        _, D, _ = mp_smith_form(P)
        data = spectral_data(P)
        assert {d.eigenvalue: d.partial_multiplicities for d in data} == expected
        for datum in data:
            assert smith_partial_multiplicities(D, datum.eigenvalue) == datum.partial_multiplicities

    def test_float_refused(self, bigfloat: BigFloatField) -> None:
        """Verify the float backend has no Smith form."""
        with pytest.raises(FloatSmithUnsupported):
            mp_smith_form(MatrixPolynomial.identity(bigfloat, 2))


class TestQuotientAndEmbedding:
    """Tests for difference quotients and band embeddings."""

    def test_difference_quotient(self, rational: RationalField) -> None:
        """Verify (x^2 - y^2) / (x - y) at (2, 3) is 5."""
        P = MatrixPolynomial.from_polys(rational, [[UniPoly.monomial(rational, 2)]])
        assert mp_difference_quotient(P).evaluate(Fraction(2), Fraction(3))[0, 0] == 5

    def test_shift_embedding(self, rational: RationalField) -> None:
        """Verify x embedded on Lambda^T is the unit subdiagonal."""
        P = MatrixPolynomial.from_polys(rational, [[UniPoly.monomial(rational, 1)]])
        m = mp_band_embed(P, "right_on_lambda_t", 1, 3)
        assert m.to_lists() == [[0, 0, 0], [1, 0, 0], [0, 1, 0]]
        assert band_offsets(m) == (1, 0)

    def test_embedding_size_mismatch(self, rational: RationalField) -> None:
        """Verify the block size must match the polynomial."""
        with pytest.raises(ValueError, match="does not match"):
            mp_band_embed(MatrixPolynomial.identity(rational, 2), "left_on_lambda", 3, 6)
