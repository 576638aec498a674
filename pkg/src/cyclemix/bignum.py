"""Arbitrary-precision decimal arithmetic and the Taylor kernels built on it.

Everything downstream (map iteration, control mixing, multiplier analysis)
runs on ``decimal.Decimal`` under a shared context: ``ExtendedContext``
semantics (round-half-even, no trapped signals) with a configurable number
of significant digits.  ``BigDec`` is an alias, not a wrapper; the stdlib
type already gives correctly rounded arithmetic and exact digit-string
round-trips, so there is nothing to add on top.

The transcendental kernels (`sin`, `cos`, `exp`) are plain Taylor series
summed with two guard digits until the partial sum is stationary.  No range
reduction is performed: every argument that occurs in the map catalog is
O(10), where the series converge comfortably at the precisions in use
(hundreds of digits).  Feeding these kernels very large arguments is a
mistake, not a supported case.
"""

from __future__ import annotations

from decimal import Decimal, ExtendedContext, getcontext, setcontext

BigDec = Decimal

#: Working precision used when nothing else is configured (significant digits).
DEFAULT_PRECISION = 250

#: Smallest precision at which the search/analysis tolerances make sense.
MIN_PRECISION = 30


def configure(precision: int = DEFAULT_PRECISION) -> None:
    """Install the shared arithmetic context for the current thread.

    Must be called once at startup (the CLI does this before touching any
    numbers).  Contexts are thread-local, so concurrent workers each call
    this on entry.
    """
    if precision < 1:
        raise ValueError(f"precision must be positive, got {precision}")
    ctx = ExtendedContext.copy()
    ctx.prec = precision
    setcontext(ctx)


def precision() -> int:
    return getcontext().prec


def detection_epsilon(p: int | None = None) -> BigDec:
    """Cycle-detection threshold at ``p`` significant digits.

    This is the decimal value of the binary double nearest 10**-p, not the
    exact power of ten.  The distinction matters: near convergence the
    difference between states one period apart shrinks to a small integer
    multiple of one unit in the last place, and for states of magnitude
    [0.1, 1) that unit is exactly 10**-p.  The double sits a hair above the
    exact power, so it accepts agreement to one ulp where the exact power
    would demand bit identity, and that decides at which step of a sweep a
    cycle is first flagged (hence which of its points gets reported).  The
    reference results this package reproduces were generated with the
    double-derived threshold.

    For p large enough that the double underflows to zero (p > 323) the
    exact power of ten is used instead, since a zero threshold can never
    fire.
    """
    if p is None:
        p = precision()
    eps = Decimal(float(f"1e-{p}"))
    if eps == 0:
        return Decimal(10) ** -p
    return eps


def sin(x: BigDec) -> BigDec:
    """Sine of x (radians) by Taylor series, stationary-sum termination."""
    getcontext().prec += 2
    i, lasts, s, fact, num, sign = 1, 0, x, 1, x, 1
    while s != lasts:
        lasts = s
        i += 2
        fact *= i * (i - 1)
        num *= x * x
        sign *= -1
        s += num / fact * sign
    getcontext().prec -= 2
    return +s


def cos(x: BigDec) -> BigDec:
    """Cosine of x (radians) by Taylor series, stationary-sum termination."""
    getcontext().prec += 2
    i, lasts, s, fact, num, sign = 0, 0, 1, 1, 1, 1
    while s != lasts:
        lasts = s
        i += 2
        fact *= i * (i - 1)
        num *= x * x
        sign *= -1
        s += num / fact * sign
    getcontext().prec -= 2
    return +s


def exp(x: BigDec) -> BigDec:
    """e**x by Taylor series with the same termination rule as sin/cos."""
    getcontext().prec += 2
    i, lasts, s, fact, num = 0, 0, 1, 1, 1
    while s != lasts:
        lasts = s
        i += 1
        fact *= i
        num *= x
        s += num / fact
    getcontext().prec -= 2
    return +s


def pi() -> BigDec:
    """pi at the current precision."""
    getcontext().prec += 2
    three = Decimal(3)
    lasts, t, s, n, na, d, da = 0, three, 3, 1, 0, 0, 24
    while s != lasts:
        lasts = s
        n, na = n + na, na + 8
        d, da = d + da, da + 32
        t = t * n / d
        s += t
    getcontext().prec -= 2
    return +s
