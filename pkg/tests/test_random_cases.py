"""Tests for seeded random bundles and the sweep over them."""

from __future__ import annotations

import random
from fractions import Fraction

import pytest

from mopkit.biorth import biorthogonal_family, projection_residual
from mopkit.fields import RationalField
from mopkit.matrix_poly import MatrixPolynomial
from mopkit.random_cases import (
    MAX_BAND,
    MAX_BLOCK,
    RandomCase,
    random_case,
    random_discrete_measure,
    random_perturbation,
    random_sweep,
)
from mopkit.uvarov import (
    ResidualReport,
    SpectralLedger,
    build_connection,
    connection_residuals,
    existence_report,
    oracle_direct,
)


class TestSampling:
    """Tests for the samplers."""

    def test_measure_shape(self, rational: RationalField) -> None:
        """Verify every cell shares one node pool inside [-1, 1] with nonzero weights."""
        mu = random_discrete_measure(rational, random.Random(7), 2, 3, 5)
        assert (mu.q, mu.p) == (2, 3)
        pools = {entry.nodes for entry in mu.entries()}
        assert len(pools) == 1
        (pool,) = pools
        assert len(pool) == 5
        assert all(-1 <= x <= 1 for x in pool)
        assert all(w != 0 for entry in mu.entries() for _, w in entry.atoms)

    def test_perturbation_band(self, rational: RationalField) -> None:
        """Verify sampled bundles have simple eigenvalues off the support and a bounded band."""
        rng = random.Random(11)
        mu = random_discrete_measure(rational, rng, 2, 1, 6)
        bundle = random_perturbation(rational, rng, mu)
        assert 1 <= bundle.M <= MAX_BAND
        for datum in [*bundle.spectra_L, *bundle.spectra_R]:
            assert datum.multiplicity == 1
            assert abs(datum.eigenvalue) >= 2
        bundle.validate()

    def test_too_wide(self, rational: RationalField) -> None:
        """Verify block sizes with no admissible band split are refused."""
        rng = random.Random(0)
        mu = random_discrete_measure(rational, rng, 5, 5, 4)
        with pytest.raises(ValueError, match="no perturbation"):
            random_perturbation(rational, rng, mu)


class TestRandomCase:
    """Tests for reproducible cases."""

    def test_deterministic(self) -> None:
        """Verify the same seed gives the same case."""
        first, second = random_case(42, N=4), random_case(42, N=4)
        assert first.describe() == second.describe()
        assert first.bundle.L.coeffs == second.bundle.L.coeffs
        assert first.bundle.R.coeffs == second.bundle.R.coeffs

    def test_describe(self) -> None:
        """Verify the summary lists shapes within bounds."""
        info = random_case(5, N=4, orientation="dual").describe()
        assert info["seed"] == 5
        assert info["orientation"] == "dual"
        assert 1 <= info["q"] <= MAX_BLOCK
        assert 1 <= info["p"] <= MAX_BLOCK
        assert info["N"] == 4


SWEEP_SEEDS = 50
SWEEP_TRUNCATION = 8
PAIRS_PER_CASE = 5


def _point_pairs(seed: int) -> list[tuple[Fraction, Fraction]]:
    """Distinct rational pairs outside [-1, 1] that avoid the integer eigenvalues."""
    rng = random.Random(1000 + seed)

    def point() -> Fraction:
        numerator = rng.choice([k for k in range(4, 40) if k % 3])
        return Fraction(rng.choice((-1, 1)) * numerator, 3)

    pairs = []
    while len(pairs) < PAIRS_PER_CASE:
        x, y = point(), point()
        if x != y:
            pairs.append((x, y))
    return pairs


@pytest.fixture(scope="module")
def sweep() -> dict[int, tuple[RandomCase, ResidualReport]]:
    """Fifty seeded cases at truncation eight, shared by the sweep tests."""
    return random_sweep(range(SWEEP_SEEDS), N=SWEEP_TRUNCATION)


@pytest.mark.slow
class TestSweep:
    """Identities over the seeded sweep, each case checked exactly."""

    def test_christoffel_matches_oracle(self, sweep: dict[int, tuple[RandomCase, ResidualReport]]) -> None:
        """Verify every Christoffel member in the window equals brute force."""
        assert sorted(sweep) == list(range(SWEEP_SEEDS))
        for seed, (case, report) in sweep.items():
            assert case.N == SWEEP_TRUNCATION
            assert report.residuals, seed
            assert report.ok, (seed, report.to_json())

    def test_both_orientations_sampled(self, sweep: dict[int, tuple[RandomCase, ResidualReport]]) -> None:
        """Verify the sweep covers standard and dual perturbations."""
        assert {case.bundle.orientation for case, _ in sweep.values()} == {"standard", "dual"}

    def test_connection_identities(self, sweep: dict[int, tuple[RandomCase, ResidualReport]]) -> None:
        """Verify connection, kernel and Cauchy identities at five point pairs per case."""
        for seed, (case, _) in sweep.items():
            std = case.bundle.standard()
            _, _, fam = biorthogonal_family(std.mu, SWEEP_TRUNCATION)
            ledger = SpectralLedger(std, fam)
            omega = build_connection(case.bundle, ledger)
            fam_tilde = oracle_direct(std.perturbed, SWEEP_TRUNCATION)
            report = connection_residuals(ledger, omega, fam_tilde, _point_pairs(seed))
            assert {"omega_B", "A_omega", "moments", "kernel", "cauchy_D", "cauchy_C"} <= set(report.residuals)
            assert report.ok, (seed, report.to_json())

    def test_projection_property(self, sweep: dict[int, tuple[RandomCase, ResidualReport]]) -> None:
        """Verify the kernel reproduces x I + C from index 2p - 1 on."""
        for seed, (case, _) in sweep.items():
            mu = case.bundle.mu
            field = mu.field
            _, _, fam = biorthogonal_family(mu, SWEEP_TRUNCATION)
            rng = random.Random(seed)
            const = [[rng.randint(-3, 3) for _ in range(mu.p)] for _ in range(mu.p)]
            ident = [[int(i == j) for j in range(mu.p)] for i in range(mu.p)]
            P = MatrixPolynomial.from_coefficients(field, [const, ident])
            for x, _ in _point_pairs(seed):
                for n in range(2 * mu.p - 1, SWEEP_TRUNCATION):
                    assert projection_residual(fam, mu, n, P, x).is_zero(), (seed, n, x)

    def test_necessity(self, sweep: dict[int, tuple[RandomCase, ResidualReport]]) -> None:
        """Verify no tau vanishes when the perturbed factorization reaches the truncation."""
        for seed, (case, _) in sweep.items():
            report = existence_report(case.bundle, SWEEP_TRUNCATION)
            assert report.perturbed_lu_index == SWEEP_TRUNCATION, seed
            assert report.necessity_holds, (seed, report.to_json())
