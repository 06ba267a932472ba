"""mopkit: Uvarov perturbations of mixed-type multiple orthogonal polynomials.

The package builds biorthogonal families from the moment matrix of a ``q x p``
matrix of measures, perturbs the measure by matrix polynomials ``L`` and ``R``
(plus discrete masses), and expresses the perturbed families through the
spectral data of the perturbation. Every formula can be checked against a
brute-force refactorization of the perturbed moment matrix.

Features:
    - Exact rational and arbitrary-precision float backends
    - Jordan chains, Smith forms and leading-form checks for matrix polynomials
    - Christoffel-type formulas, the connection matrix and tau-determinants
    - Markov-Stieltjes transform identities
    - Jacobi-Pineiro closed forms and the two case-study perturbations

Example:
    Compare the Christoffel formulas with the oracle::

        from mopkit import PerturbationBundle, RationalField, lebesgue_measure, oracle_comparison
        from mopkit.matrix_poly import MatrixPolynomial

        field = RationalField()
        mu = lebesgue_measure(field)
        L = MatrixPolynomial.from_coefficients(field, [[[-2]], [[1]]])
        bundle = PerturbationBundle(mu, L, MatrixPolynomial.identity(field, 1))
        assert oracle_comparison(bundle, 6).ok

"""

from __future__ import annotations

__version__ = "0.1.0"

from mopkit.biorth import VectorPolyFamily, biorthogonal_family  # noqa: E402
from mopkit.exceptions import MopkitError  # noqa: E402
from mopkit.fields import BigFloatField, RationalField  # noqa: E402
from mopkit.measures import MassData, MatrixOfMeasures, discrete_measure, lebesgue_measure  # noqa: E402
from mopkit.uvarov import PerturbationBundle, oracle_comparison  # noqa: E402

__all__ = [
    "BigFloatField",
    "MassData",
    "MatrixOfMeasures",
    "MopkitError",
    "PerturbationBundle",
    "RationalField",
    "VectorPolyFamily",
    "__version__",
    "biorthogonal_family",
    "discrete_measure",
    "lebesgue_measure",
    "oracle_comparison",
]
