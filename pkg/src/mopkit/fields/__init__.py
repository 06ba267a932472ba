"""Scalar backends for mopkit.

This package provides two interchangeable fields:
    - RationalField: exact arithmetic with ``fractions.Fraction``
    - BigFloatField: binary floating point at a chosen precision (mpmath)

Everything downstream (polynomials, matrices, measures, factorizations) is
generic over the field instance it was built with.

Example:
    Build both backends::

        from mopkit.fields import BigFloatField, RationalField

        exact = RationalField()
        wide = BigFloatField(precision_bits=512)

"""

from mopkit.fields.base import Scalar, ScalarField
from mopkit.fields.bigfloat import DEFAULT_PRECISION_BITS, BigFloatField
from mopkit.fields.rational import RationalField

__all__ = ["DEFAULT_PRECISION_BITS", "BigFloatField", "RationalField", "Scalar", "ScalarField"]
