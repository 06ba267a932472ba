"""JSON configurations used by the command-line tests.

Files:
    - minimal.json: Factorization suite on Lebesgue measure
    - uvarov.json: Scalar Uvarov perturbation of a discrete measure, all exact suites
    - jp_case_study.json: Small Jacobi-Pineiro case study
    - bad_band.json: Left factor whose leading form fails the band condition
    - malformed.json: Truncated JSON
"""
