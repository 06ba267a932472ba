"""Test suite for mopkit.

This package contains tests for each mopkit module:
    - test_numerics.py, test_fields.py: Polynomials, matrices and backends
    - test_matrix_poly.py: Spectra, Jordan chains and Smith forms
    - test_measures.py, test_biorth.py: Moments, families and kernels
    - test_uvarov/: Perturbation bundles, connection matrix and Christoffel formulas
    - test_stieltjes.py, test_jacobi_pineiro.py: Transform identity and case study
    - test_config.py, test_cli.py: Configuration and the command line

JSON configurations are available in the fixtures/ subdirectory.
"""
