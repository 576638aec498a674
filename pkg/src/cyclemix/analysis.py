"""Cycle Jacobians, multipliers, and stability verdicts.

The controlled system's Jacobian along a T-cycle factors in closed form as
J (sum_j theta_j J^(j-1))^T where J is the plain cycle Jacobian and the
outer T is a matrix power.  This module evaluates that closed form, checks
it against the brute-force chain-rule product (which needs no
invertibility assumptions), extracts multipliers, and renders the verdict:
the controlled cycle is asymptotically stable when every controlled
multiplier lies strictly inside the unit disk.

Matrices are tuples of tuple rows, 1x1 or 2x2; eigenvalues come from the
quadratic formula, exact in decimal arithmetic, no iterative solver.
"""

from __future__ import annotations

import random
from dataclasses import dataclass
from decimal import Decimal, getcontext

from . import control, maps
from .bignum import BigDec
from .control import ComplexPair, ControlPolynomial
from .maps import MapDef, Matrix, State

SmallMatrix = Matrix

#: Half-width of the |lambda| band around 1 that reads as "marginal".
STABILITY_MARGIN = Decimal("1e-10")


def as_matrix(rows) -> SmallMatrix:
    """Canonicalize to a square tuple-of-tuples of finite decimals."""
    mat = tuple(tuple(Decimal(c) for c in row) for row in rows)
    m = len(mat)
    for row in mat:
        if len(row) != m:
            raise ValueError(f"matrix is not square: {mat}")
        for c in row:
            if not c.is_finite():
                raise ValueError(f"matrix has a non-finite entry: {mat}")
    return mat


def identity(m: int) -> SmallMatrix:
    return tuple(
        tuple(Decimal(1 if i == j else 0) for j in range(m)) for i in range(m)
    )


def mat_mul(a: SmallMatrix, b: SmallMatrix) -> SmallMatrix:
    m = len(a)
    return tuple(
        tuple(sum(a[i][k] * b[k][j] for k in range(m)) for j in range(m))
        for i in range(m)
    )


def mat_add(a: SmallMatrix, b: SmallMatrix) -> SmallMatrix:
    return tuple(
        tuple(x + y for x, y in zip(ra, rb)) for ra, rb in zip(a, b)
    )


def mat_scale(c: BigDec, a: SmallMatrix) -> SmallMatrix:
    return tuple(tuple(c * x for x in row) for row in a)


def mat_pow(a: SmallMatrix, n: int) -> SmallMatrix:
    if n < 0:
        raise ValueError("negative matrix powers not supported")
    out = identity(len(a))
    base = a
    while n:
        if n & 1:
            out = mat_mul(out, base)
        base = mat_mul(base, base)
        n >>= 1
    return out


def mat_max_diff(a: SmallMatrix, b: SmallMatrix) -> BigDec:
    return max(
        abs(x - y) for ra, rb in zip(a, b) for x, y in zip(ra, rb)
    )


# --------------------------------------------------------------------------
# Jacobians
# --------------------------------------------------------------------------


def cycle_jacobian(mapdef: MapDef, cycle) -> SmallMatrix:
    """Ordered product J_T ... J_1 of the per-point Jacobians along the
    cycle eta_1..eta_T (later points multiply from the left)."""
    cycle = list(cycle)
    if not cycle:
        raise ValueError("cycle must contain at least one point")
    acc = identity(mapdef.dimension)
    for point in cycle:
        acc = mat_mul(maps.jacobian(mapdef, point), acc)
    return acc


def controlled_jacobian_closed_form(
    j: SmallMatrix, theta: ControlPolynomial, period: int
) -> SmallMatrix:
    """J (sum theta_k J^(k-1))^T: Horner in J, T-th power, left-multiply.

    The exponent is a matrix power.
    """
    if period < 1:
        raise ValueError("period must be >= 1")
    j = as_matrix(j)
    m = len(j)
    coeffs = theta.coefficients
    acc = mat_scale(coeffs[-1], identity(m))
    for c in reversed(coeffs[:-1]):
        acc = mat_add(mat_mul(acc, j), mat_scale(c, identity(m)))
    return mat_mul(j, mat_pow(acc, period))


def controlled_jacobian_from_factors(
    factors, theta: ControlPolynomial
) -> SmallMatrix:
    """Chain-rule product of the controlled step's Jacobians, given the
    per-point plain Jacobians J_1..J_T of a cycle.

    At cycle point i the controlled step differentiates to
    sum_j theta_j * (product of the (j-1)T+1 consecutive factors starting
    at i, cyclically); the result is the ordered product of those sums.
    Everything is evaluated directly, so singular factors are fine, which
    is what makes this the oracle for the closed form.
    """
    factors = [as_matrix(f) for f in factors]
    t = len(factors)
    if t < 1:
        raise ValueError("need at least one factor")
    m = len(factors[0])
    coeffs = theta.coefficients
    total = identity(m)
    for i in range(t):
        chain = identity(m)
        done = 0
        fprime = None
        for j, w in enumerate(coeffs):
            target = j * t + 1
            while done < target:
                chain = mat_mul(factors[(i + done) % t], chain)
                done += 1
            term = mat_scale(w, chain)
            fprime = term if fprime is None else mat_add(fprime, term)
        total = mat_mul(fprime, total)
    return total


def controlled_jacobian_direct(
    mapdef: MapDef, theta: ControlPolynomial, period: int, cycle
) -> SmallMatrix:
    """Chain-rule product evaluated from the map's analytic Jacobians."""
    cycle = list(cycle)
    if len(cycle) != period:
        raise ValueError(
            f"cycle has {len(cycle)} points, expected period {period}"
        )
    factors = [maps.jacobian(mapdef, point) for point in cycle]
    return controlled_jacobian_from_factors(factors, theta)


# --------------------------------------------------------------------------
# Multipliers and the verdict
# --------------------------------------------------------------------------


def multipliers(j: SmallMatrix) -> list[ComplexPair]:
    """Eigenvalues of a 1x1 or 2x2 matrix as (re, im) pairs, by the
    quadratic formula."""
    j = as_matrix(j)
    m = len(j)
    if m == 1:
        return [(j[0][0], Decimal(0))]
    if m != 2:
        raise ValueError(f"only 1x1 and 2x2 matrices supported, got {m}x{m}")
    tr = j[0][0] + j[1][1]
    det = j[0][0] * j[1][1] - j[0][1] * j[1][0]
    half = tr / 2
    disc = tr * tr - 4 * det
    if disc >= 0:
        root = disc.sqrt() / 2
        return [(half + root, Decimal(0)), (half - root, Decimal(0))]
    root = (-disc).sqrt() / 2
    return [(half, root), (half, -root)]


@dataclass(frozen=True)
class StabilityReport:
    """Everything the disk criterion produces for one cycle.

    ``verdict``: "stable" when every controlled |lambda| < 1 - margin,
    "unstable" when any exceeds 1 + margin, "marginal" in between.
    ``stability_values`` are mu_j r(mu_j)^T per open-loop multiplier; by
    the closed form they coincide with the controlled multipliers, and
    ``cross_check_residual`` records how closely the two computations
    agree.  ``lemma1_residual`` is the max-norm gap between the closed
    form and the direct chain-rule product.
    """

    open_multipliers: tuple[ComplexPair, ...]
    controlled_multipliers: tuple[ComplexPair, ...]
    stability_values: tuple[ComplexPair, ...]
    verdict: str
    lemma1_residual: BigDec
    cross_check_residual: BigDec


def _pairing_distance(
    a: list[ComplexPair], b: list[ComplexPair]
) -> BigDec:
    """Best-assignment distance between two multisets of <= 2 values."""

    def dist(p: ComplexPair, q: ComplexPair) -> BigDec:
        return max(abs(p[0] - q[0]), abs(p[1] - q[1]))

    if len(a) == 1:
        return dist(a[0], b[0])
    straight = max(dist(a[0], b[0]), dist(a[1], b[1]))
    crossed = max(dist(a[0], b[1]), dist(a[1], b[0]))
    return min(straight, crossed)


def stability_verdict(
    mapdef: MapDef, cycle, theta: ControlPolynomial, period: int
) -> StabilityReport:
    """Full stability analysis of one cycle under the coefficient vector.

    For runs made with the scalar-gain scheme, convert the gain first with
    :func:`cyclemix.control.scalar_to_polynomial`.
    """
    cycle = list(cycle)
    j = cycle_jacobian(mapdef, cycle)
    mus = multipliers(j)
    values = [control.stability_value(theta, mu, period) for mu in mus]

    controlled = controlled_jacobian_closed_form(j, theta, period)
    lambdas = multipliers(controlled)
    cross = _pairing_distance(lambdas, values)

    direct = controlled_jacobian_direct(mapdef, theta, period, cycle)
    lemma1 = mat_max_diff(controlled, direct)

    moduli = [control.cabs(lam) for lam in lambdas]
    if any(mod > 1 + STABILITY_MARGIN for mod in moduli):
        verdict = "unstable"
    elif all(mod < 1 - STABILITY_MARGIN for mod in moduli):
        verdict = "stable"
    else:
        verdict = "marginal"

    return StabilityReport(
        open_multipliers=tuple(mus),
        controlled_multipliers=tuple(lambdas),
        stability_values=tuple(values),
        verdict=verdict,
        lemma1_residual=lemma1,
        cross_check_residual=cross,
    )


# --------------------------------------------------------------------------
# Randomized closed-form verification
# --------------------------------------------------------------------------


def lemma1_residuals(trials: int, seed: int) -> list[BigDec]:
    """Max-norm gaps between the closed form and the direct product over
    random synthetic cycles: 2x2 factors with entries in [-2, 2], periods
    1..4, normalized random positive coefficient vectors of length 1..4.

    Deterministic for a given seed.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    rng = random.Random(seed)
    gaps = []
    for _ in range(trials):
        t = rng.randint(1, 4)
        n = rng.randint(1, 4)
        factors = [
            tuple(
                tuple(Decimal(rng.uniform(-2, 2)) for _ in range(2))
                for _ in range(2)
            )
            for _ in range(t)
        ]
        raw = [Decimal(rng.uniform(0.05, 1)) for _ in range(n)]
        total = sum(raw)
        theta = ControlPolynomial(tuple(u / total for u in raw))
        j = identity(2)
        for f in factors:
            j = mat_mul(as_matrix(f), j)
        closed = controlled_jacobian_closed_form(j, theta, t)
        direct = controlled_jacobian_from_factors(factors, theta)
        gaps.append(mat_max_diff(closed, direct))
    return gaps
