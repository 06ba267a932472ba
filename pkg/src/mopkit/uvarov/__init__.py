"""Uvarov perturbations: ledger, connection matrix, tau-determinants and Christoffel formulas.

Example:
    Perturb Lebesgue measure on ``[0, 1]`` by ``x - 2``::

        from mopkit.biorth import biorthogonal_family
        from mopkit.fields import RationalField
        from mopkit.matrix_poly import MatrixPolynomial
        from mopkit.measures import lebesgue_measure
        from mopkit.uvarov import PerturbationBundle, christoffel_typeII, spectral_vectors

        field = RationalField()
        mu = lebesgue_measure(field)
        L = MatrixPolynomial.from_coefficients(field, [[[-2]], [[1]]])
        bundle = PerturbationBundle(mu, L, MatrixPolynomial.identity(field, 1))
        _, _, fam = biorthogonal_family(mu, 6)
        ledger = spectral_vectors(bundle, fam)
        christoffel_typeII(bundle, ledger, 2)

"""

from __future__ import annotations

from mopkit.uvarov.bundle import Orientation, PerturbationBundle
from mopkit.uvarov.christoffel import (
    christoffel_typeI,
    christoffel_typeII,
    dual_christoffel,
    oracle_direct,
    typeI_polynomial,
    typeI_window,
    typeII_polynomial,
)
from mopkit.uvarov.connection import (
    ConnectionMatrix,
    TauLedger,
    bordered_cofactors,
    build_connection,
    omega_below_window,
    omega_commutator_window,
    omega_from_factors,
    omega_row,
    omega_solve,
    tau_det,
    tau_ledger,
    tau_pivot_ratio,
)
from mopkit.uvarov.diagnostics import (
    ExistenceReport,
    ResidualReport,
    connection_residuals,
    existence_report,
    omega_factor_residual,
    oracle_comparison,
    tau_pivot_check,
)
from mopkit.uvarov.ledger import LedgerColumn, SpectralLedger, as_standard_family, spectral_vectors

__all__ = [
    "ConnectionMatrix",
    "ExistenceReport",
    "LedgerColumn",
    "Orientation",
    "PerturbationBundle",
    "ResidualReport",
    "SpectralLedger",
    "TauLedger",
    "as_standard_family",
    "bordered_cofactors",
    "build_connection",
    "christoffel_typeI",
    "christoffel_typeII",
    "connection_residuals",
    "dual_christoffel",
    "existence_report",
    "omega_below_window",
    "omega_commutator_window",
    "omega_factor_residual",
    "omega_from_factors",
    "omega_row",
    "omega_solve",
    "oracle_comparison",
    "oracle_direct",
    "spectral_vectors",
    "tau_det",
    "tau_ledger",
    "tau_pivot_check",
    "tau_pivot_ratio",
    "typeII_polynomial",
    "typeI_polynomial",
    "typeI_window",
]
