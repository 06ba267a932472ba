"""Tests for residual reports and existence diagnostics."""

from __future__ import annotations

from fractions import Fraction

from mopkit.biorth import biorthogonal_family
from mopkit.fields import BigFloatField, RationalField
from mopkit.matrix_poly import MatrixPolynomial
from mopkit.measures import MatrixOfMeasures
from mopkit.uvarov import (
    PerturbationBundle,
    ResidualReport,
    build_connection,
    connection_residuals,
    existence_report,
    omega_factor_residual,
    oracle_direct,
    spectral_vectors,
    tau_ledger,
    tau_pivot_check,
)


def _pieces(bundle: PerturbationBundle, N: int):  # noqa: ANN202
    _, _, fam = biorthogonal_family(bundle.mu, N)
    ledger = spectral_vectors(bundle, fam)
    omega = build_connection(bundle, ledger)
    return ledger, omega, oracle_direct(bundle.perturbed, N)


class TestResidualReport:
    """Tests for the report container."""

    def test_keeps_largest(self, rational: RationalField) -> None:
        """Verify repeated records keep the largest absolute value."""
        report = ResidualReport(rational)
        report.record("x", Fraction(-1, 2))
        report.record("x", Fraction(1, 4))
        assert report.residuals["x"] == Fraction(1, 2)
        assert not report.ok

    def test_skip_first_reason(self, rational: RationalField) -> None:
        """Verify the first skip reason wins and skips do not fail the report."""
        report = ResidualReport(rational)
        report.skip("cauchy", "first")
        report.skip("cauchy", "second")
        report.record("omega_B", 0)
        assert report.ok
        assert report.to_json() == {
            "backend": "rational",
            "precision_bits": None,
            "residuals": {"omega_B": "0/1"},
            "skipped": {"cauchy": "first"},
            "ok": True,
        }

    def test_float_tolerance(self, bigfloat: BigFloatField) -> None:
        """Verify float residuals below the backend tolerance count as zero."""
        report = ResidualReport(bigfloat)
        report.record("x", bigfloat.ctx.mpf(2) ** -200)
        assert report.ok


class TestConnectionResiduals:
    """Tests for the connection-formula residuals."""

    def test_mixed_uvarov(self, mixed_uvarov: PerturbationBundle) -> None:
        """Verify every connection formula holds exactly at an off-support probe."""
        ledger, omega, fam_tilde = _pieces(mixed_uvarov, 5)
        report = connection_residuals(ledger, omega, fam_tilde, [(2, Fraction(5, 2))])
        assert report.ok, report.to_json()
        assert {"omega_B", "A_omega", "ledger_annihilation", "moments", "kernel", "cauchy_D", "cauchy_C"} <= set(
            report.residuals
        )
        assert report.skipped == {}

    def test_logarithmic_cauchy_skipped(self, christoffel: PerturbationBundle) -> None:
        """Verify exact Lebesgue Cauchy transforms are skipped instead of failing."""
        ledger, omega, fam_tilde = _pieces(christoffel, 4)
        report = connection_residuals(ledger, omega, fam_tilde, [(3, Fraction(5, 2))])
        assert report.ok
        assert "cauchy" in report.skipped
        assert "mixed_kernel" in report.skipped
        assert "kernel" in report.residuals

    def test_geronimus_factors(self, discrete_geronimus: PerturbationBundle) -> None:
        """Verify both factor products reproduce the ledger rows."""
        ledger, omega, _ = _pieces(discrete_geronimus, 5)
        report = omega_factor_residual(discrete_geronimus, ledger, omega)
        assert report.ok
        assert set(report.residuals) == {"omega_left_factors", "omega_right_factors"}

    def test_tau_pivots(self, mixed_uvarov: PerturbationBundle) -> None:
        """Verify perturbed pivots follow from consecutive taus."""
        ledger, _, fam_tilde = _pieces(mixed_uvarov, 5)
        report = tau_pivot_check(mixed_uvarov, ledger, tau_ledger(mixed_uvarov, ledger), fam_tilde)
        assert report.ok
        assert "tau_pivot" in report.residuals


class TestExistence:
    """Tests for the existence report."""

    def test_regular(self, christoffel: PerturbationBundle) -> None:
        """Verify a perturbation outside the support meets every criterion."""
        report = existence_report(christoffel, 4)
        assert report.necessity_holds
        assert report.perturbed_lu_index == 4
        assert report.sufficiency["all_tau_nonzero"]
        assert report.sufficiency["perturbed_lu"]

    def test_vanishing_tau(self, rational: RationalField, lebesgue: MatrixOfMeasures) -> None:
        """Verify a Christoffel factor at the centre of [0, 1] kills tau_1 and the first pivot."""
        L = MatrixPolynomial.from_coefficients(rational, [[["-1/2"]], [[1]]])
        bundle = PerturbationBundle(lebesgue, L, MatrixPolynomial.identity(rational, 1))
        report = existence_report(bundle, 4)
        assert 1 in report.taus.zeros()
        assert report.perturbed_lu_index == 0
        assert report.necessity_holds
        assert not report.sufficiency["criteria_met_and_lu"]
        assert report.to_json()["necessity_holds"] is True

    def test_low_index_shapes(self, discrete_geronimus: PerturbationBundle) -> None:
        """Verify the first perturbed type I member is a constant."""
        report = existence_report(discrete_geronimus, 5)
        assert report.low_index_shapes == {0: 0}
        assert report.necessity_holds
