"""Seeded random discrete measures and perturbations for oracle sweeps.

Measures are ``q x p`` grids of rational atoms on a shared node pool inside
``[-1, 1]``. Perturbations are ``x I + T`` with ``T`` upper triangular and
distinct integer diagonal, so every eigenvalue is simple, rational and off
the support. Masses are random constant or linear vectors on the chains.

"""

from __future__ import annotations

import logging
import random
from dataclasses import dataclass
from fractions import Fraction
from typing import TYPE_CHECKING, Any

from mopkit.exceptions import SingularLeadingMinor
from mopkit.fields import RationalField
from mopkit.matrix_poly import MatrixPolynomial
from mopkit.measures import MassData, MatrixOfMeasures, discrete_measure
from mopkit.moments import build_moment_matrix
from mopkit.numerics import UniPoly, lu_nopivot
from mopkit.uvarov import PerturbationBundle, oracle_comparison

if TYPE_CHECKING:
    from collections.abc import Iterable

    from mopkit.fields.base import ScalarField
    from mopkit.measures import Orientation
    from mopkit.uvarov import ResidualReport

logger = logging.getLogger(__name__)

MAX_ATOMS = 12
MAX_BLOCK = 3
MAX_BAND = 4
MAX_DEGREE = 3
MAX_ATTEMPTS = 25
DEFAULT_TRUNCATION = 6


@dataclass(frozen=True)
class RandomCase:
    """One sampled bundle together with the seed and attempt that produced it."""

    seed: int
    attempt: int
    bundle: PerturbationBundle
    N: int

    def describe(self) -> dict[str, Any]:
        """Shapes and band widths, for reports."""
        b = self.bundle
        return {
            "seed": self.seed,
            "attempt": self.attempt,
            "q": b.q,
            "p": b.p,
            "M_L": b.M_L,
            "M_R": b.M_R,
            "orientation": b.orientation,
            "masses": len(b.mass.vectors),
            "N": self.N,
        }


def _rational(rng: random.Random, bound: int = 5, den: int = 4) -> Fraction:
    return Fraction(rng.randint(-bound, bound), rng.randint(1, den))


def random_discrete_measure(
    field: ScalarField, rng: random.Random, q: int, p: int, atoms: int = MAX_ATOMS
) -> MatrixOfMeasures:
    """Every cell carries nonzero rational weights on the same ``atoms`` nodes."""
    nodes: set[Fraction] = set()
    while len(nodes) < atoms:
        x = Fraction(rng.randint(-24, 24), 24)
        nodes.add(x)
    pool = sorted(nodes)

    def weight() -> Fraction:
        w = Fraction(0)
        while w == 0:
            w = _rational(rng)
        return w

    grid = [[[(x, weight()) for x in pool] for _ in range(p)] for _ in range(q)]
    return discrete_measure(field, grid)


def _triangular(field: ScalarField, rng: random.Random, size: int, roots: list[int]) -> MatrixPolynomial:
    """``x I + T``, ``T`` upper triangular with ``-roots`` on the diagonal."""
    const = [[Fraction(0)] * size for _ in range(size)]
    for i in range(size):
        const[i][i] = Fraction(-roots[i])
        for j in range(i + 1, size):
            const[i][j] = Fraction(rng.randint(-2, 2))
    lead = [[Fraction(int(i == j)) for j in range(size)] for i in range(size)]
    return MatrixPolynomial.from_coefficients(field, [const, lead])


def _unit_triangular(field: ScalarField, rng: random.Random, size: int, *, lower: bool) -> MatrixPolynomial:
    rows = [[Fraction(int(i == j)) for j in range(size)] for i in range(size)]
    for i in range(size):
        for j in range(size):
            if (j < i) if lower else (j > i):
                rows[i][j] = Fraction(rng.randint(-2, 2))
    return MatrixPolynomial.from_coefficients(field, [rows])


def random_regular_polynomial(
    field: ScalarField, rng: random.Random, size: int | None = None
) -> tuple[MatrixPolynomial, dict[Fraction, tuple[int, ...]]]:
    """A regular polynomial of degree ``<= MAX_DEGREE`` with known Jordan structure.

    The result is ``W U D V``: ``D`` diagonal with products of integer linear
    factors, ``U`` unit upper triangular with polynomial entries, ``W`` and
    ``V`` unit triangular constants. The second value maps every eigenvalue to
    its partial multiplicities, the orders of its factor along ``D``, largest
    first.
    """
    size = size if size is not None else rng.randint(1, MAX_BLOCK)
    roots = rng.sample(range(-2, 3), rng.randint(1, 2))
    orders = []
    for _ in range(size):
        count = dict.fromkeys(roots, 0)
        for _ in range(rng.randint(0, MAX_DEGREE)):
            count[rng.choice(roots)] += 1
        orders.append(count)
    if not any(sum(c.values()) for c in orders):
        orders[0][roots[0]] = 1

    diag = []
    for count in orders:
        poly = UniPoly.constant(field, 1)
        for r, k in count.items():
            poly = poly * UniPoly.linear(field, r) ** k
        diag.append(poly)
    zero, one = UniPoly.zero(field), UniPoly.constant(field, 1)
    upper = [[one if i == j else zero for j in range(size)] for i in range(size)]
    middle = [[diag[i] if i == j else zero for j in range(size)] for i in range(size)]
    for i in range(size):
        for j in range(i + 1, size):
            slack = min(MAX_DEGREE - diag[j].degree, 1)
            upper[i][j] = UniPoly.from_coeffs(field, [rng.randint(-2, 2) for _ in range(slack + 1)])

    product = (
        _unit_triangular(field, rng, size, lower=True)
        @ MatrixPolynomial.from_polys(field, upper)
        @ MatrixPolynomial.from_polys(field, middle)
        @ _unit_triangular(field, rng, size, lower=False)
    )
    P = MatrixPolynomial.from_polys(field, [[p.chop() for p in row] for row in product.entries()])
    expected = {
        Fraction(r): tuple(sorted((c[r] for c in orders if c[r]), reverse=True))
        for r in sorted(roots)
        if any(c[r] for c in orders)
    }
    return P, expected


def _masses(field: ScalarField, rng: random.Random, count: int, size: int) -> MassData:
    vectors = {}
    for i in range(count):
        if rng.random() < 0.5:
            continue
        degree = rng.randint(0, 1)
        vectors[i, 0, 0] = tuple(
            UniPoly.from_coeffs(field, [_rational(rng) for _ in range(degree + 1)]) for _ in range(size)
        )
    return MassData(size, vectors)


def random_perturbation(
    field: ScalarField,
    rng: random.Random,
    mu: MatrixOfMeasures,
    orientation: Orientation = "standard",
    *,
    with_mass: bool = True,
) -> PerturbationBundle:
    """A bundle with simple integer eigenvalues outside ``[-1, 1]`` and ``1 <= M <= 4``.

    Raises:
        ValueError: If no band split of the block sizes fits ``MAX_BAND``.

    """
    q, p = mu.q, mu.p
    splits = [(ml, mr) for ml in (0, q) for mr in (0, p) if 1 <= ml + mr <= MAX_BAND]
    if not splits:
        msg = f"no perturbation of width <= {MAX_BAND} for a {q}x{p} measure"
        raise ValueError(msg)
    m_l, m_r = rng.choice(splits)
    roots = rng.sample([k for k in range(-6, 7) if abs(k) >= 2], m_l + m_r)
    L = _triangular(field, rng, q, roots[:q]) if m_l else MatrixPolynomial.identity(field, q)
    R = _triangular(field, rng, p, roots[m_l:]) if m_r else MatrixPolynomial.identity(field, p)
    mass = None
    if with_mass:
        if orientation == "standard" and m_r:
            mass = _masses(field, rng, m_r, q)
        elif orientation == "dual" and m_l:
            mass = _masses(field, rng, m_l, p)
    return PerturbationBundle(mu, L, R, orientation, mass)


def _factorizable(mu: MatrixOfMeasures, N: int) -> bool:
    try:
        lu_nopivot(build_moment_matrix(mu, N).matrix)
    except SingularLeadingMinor:
        return False
    return True


def random_case(
    seed: int,
    field: ScalarField | None = None,
    N: int = DEFAULT_TRUNCATION,
    orientation: Orientation | None = None,
) -> RandomCase:
    """Sample until both the base and the perturbed moment matrices factor.

    Raises:
        SingularLeadingMinor: If ``MAX_ATTEMPTS`` samples all fail.

    """
    field = field if field is not None else RationalField()
    rng = random.Random(seed)
    for attempt in range(MAX_ATTEMPTS):
        q, p = rng.randint(1, MAX_BLOCK), rng.randint(1, MAX_BLOCK)
        side = orientation if orientation is not None else rng.choice(("standard", "dual"))
        mu = random_discrete_measure(field, rng, q, p, rng.randint(max(N, 4), MAX_ATOMS))
        bundle = random_perturbation(field, rng, mu, side)
        if _factorizable(mu, N) and _factorizable(bundle.perturbed, N):
            return RandomCase(seed, attempt, bundle, N)
        logger.debug("mopkit: seed %d attempt %d has a singular leading minor, resampling", seed, attempt)
    msg = f"seed {seed}: no factorizable sample in {MAX_ATTEMPTS} attempts"
    raise SingularLeadingMinor(-1, msg)


def random_sweep(
    seeds: Iterable[int], field: ScalarField | None = None, N: int = DEFAULT_TRUNCATION
) -> dict[int, tuple[RandomCase, ResidualReport]]:
    """Compare the Christoffel formulas with the oracle for every seed."""
    out = {}
    for seed in seeds:
        case = random_case(seed, field, N)
        out[seed] = (case, oracle_comparison(case.bundle, N))
    failed = [s for s, (_, rep) in out.items() if not rep.ok]
    if failed:
        logger.warning("mopkit: oracle mismatch for seeds %s", failed)
    logger.info("mopkit: random sweep over %d seeds, %d mismatches", len(out), len(failed))
    return out


__all__ = [
    "DEFAULT_TRUNCATION",
    "MAX_ATOMS",
    "MAX_DEGREE",
    "RandomCase",
    "random_case",
    "random_discrete_measure",
    "random_perturbation",
    "random_regular_polynomial",
    "random_sweep",
]
