"""Control coefficient construction.

The controlled system mixes iterates of the map with weights theta_1..theta_N,
and every stability question about the mix reduces to the scalar polynomial

    r(mu) = theta_1 + theta_2 mu + ... + theta_N mu^(N-1)

evaluated at the open-loop cycle multipliers: the controlled cycle is
asymptotically stable when every mu * r(mu)**T lies inside the unit disk.
The normalization r(1) = 1 is obligatory; without it the original cycle is
not even a solution of the controlled system.

Constructors in this module cover the standard placements: exact known
multipliers (all controlled multipliers collapse to zero), multipliers
localized in the left half-plane, the one-unknown-multiplier gain vector
[1, 0, ..., eps, -eps], a single complex conjugate pair, and the two
Chebyshev-polynomial constructions that maximize the reachable multiplier
range for symmetric and one-sided real spectra.

Complex numbers are (re, im) pairs of decimals throughout; there is no
complex type.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import Decimal, getcontext

from . import bignum
from .bignum import BigDec

#: (re, im) pair.
ComplexPair = tuple[BigDec, BigDec]


class NonStabilizableError(ValueError):
    """The requested multiplier placement has no valid coefficient vector
    (a multiplier equals 1, or a denominator vanishes)."""


def _tol() -> Decimal:
    return Decimal(10) ** (5 - getcontext().prec)


def as_pair(mu) -> ComplexPair:
    """Coerce a real number or (re, im) tuple to a complex pair."""
    if isinstance(mu, tuple):
        re, im = mu
        return (Decimal(re), Decimal(im))
    return (Decimal(mu), Decimal(0))


def cmul(a: ComplexPair, b: ComplexPair) -> ComplexPair:
    return (a[0] * b[0] - a[1] * b[1], a[0] * b[1] + a[1] * b[0])


def cabs(a: ComplexPair) -> BigDec:
    return (a[0] * a[0] + a[1] * a[1]).sqrt()


def cpow(a: ComplexPair, n: int) -> ComplexPair:
    if n < 0:
        raise ValueError("negative powers not supported")
    out = (Decimal(1), Decimal(0))
    base = a
    while n:
        if n & 1:
            out = cmul(out, base)
        base = cmul(base, base)
        n >>= 1
    return out


@dataclass(frozen=True)
class ControlPolynomial:
    """Coefficient vector theta_1..theta_N of r(mu), normalized to r(1)=1."""

    coefficients: tuple[BigDec, ...]

    def __post_init__(self):
        if not self.coefficients:
            raise ValueError("need at least one coefficient")
        object.__setattr__(
            self, "coefficients", tuple(Decimal(c) for c in self.coefficients)
        )
        if self.coefficients[-1] == 0:
            raise ValueError("leading coefficient must be nonzero")
        total = sum(self.coefficients)
        if abs(total - 1) >= _tol():
            raise ValueError(
                f"coefficients must sum to 1 (r(1)=1 is obligatory); "
                f"got sum {total}"
            )

    def __len__(self) -> int:
        return len(self.coefficients)


@dataclass(frozen=True)
class MultiplierEstimate:
    """A localized multiplier: center estimate plus uncertainty radius.

    The radius is carried for reporting; stability under an inexact
    placement is guaranteed only for sufficiently small radii, and no
    certified bound is computed here.
    """

    value: ComplexPair
    radius: BigDec = Decimal(0)

    def __post_init__(self):
        object.__setattr__(self, "value", as_pair(self.value))
        object.__setattr__(self, "radius", Decimal(self.radius))
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")


def _poly_from_roots(roots) -> list[BigDec]:
    """Expand prod (mu - root) into ascending real coefficients.

    Complex roots must come in exactly matching conjugate pairs so the
    product stays real; each pair contributes the quadratic
    mu^2 - 2 Re(root) mu + |root|^2.
    """
    pairs = [as_pair(r) for r in roots]
    reals = [p[0] for p in pairs if p[1] == 0]
    pos = [p for p in pairs if p[1] > 0]
    neg = [p for p in pairs if p[1] < 0]

    quads = []
    for p in pos:
        match = next(
            (q for q in neg if q[0] == p[0] and q[1] == -p[1]), None
        )
        if match is None:
            raise ValueError(
                f"complex multiplier {p} has no conjugate partner; "
                "coefficients would not be real"
            )
        neg.remove(match)
        quads.append(p)
    if neg:
        raise ValueError(
            f"complex multiplier {neg[0]} has no conjugate partner; "
            "coefficients would not be real"
        )

    coeffs: list[BigDec] = [Decimal(1)]

    def convolve(factor: list[BigDec]) -> None:
        nonlocal coeffs
        out = [Decimal(0)] * (len(coeffs) + len(factor) - 1)
        for i, a in enumerate(coeffs):
            for j, b in enumerate(factor):
                out[i + j] += a * b
        coeffs = out

    for rho in reals:
        convolve([-rho, Decimal(1)])
    for re, im in quads:
        convolve([re * re + im * im, -2 * re, Decimal(1)])
    return coeffs


def from_exact_multipliers(mus) -> ControlPolynomial:
    """r(mu) = prod (mu - mu_k) / prod (1 - mu_k).

    Every supplied multiplier becomes a root of r, so on its own cycle the
    controlled multipliers all vanish and convergence is superlinear.
    Fails when any mu_k = 1: the normalizer is zero and no admissible r
    exists (a multiplier at 1 cannot be moved by this family of controls).
    """
    mus = list(mus)
    if not mus:
        raise ValueError("need at least one multiplier")
    coeffs = _poly_from_roots(mus)
    norm = sum(coeffs)
    if norm == 0:
        raise NonStabilizableError(
            "a multiplier equals 1; the normalization r(1)=1 is impossible"
        )
    return ControlPolynomial(tuple(c / norm for c in coeffs))


def from_left_half_plane(estimates) -> ControlPolynomial:
    """Coefficients from multiplier estimates lying in Re(mu) <= 0.

    Same construction as :func:`from_exact_multipliers`, applied to the
    estimate centers.  The half-plane hypothesis is what buys robustness:
    with all centers strictly in the open left half-plane every
    coefficient comes out positive, so small localization errors cannot
    flip signs.
    """
    ests = [
        e if isinstance(e, MultiplierEstimate) else MultiplierEstimate(e)
        for e in estimates
    ]
    if not ests:
        raise ValueError("need at least one estimate")
    for e in ests:
        if e.value[0] > 0:
            raise ValueError(
                f"estimate {e.value} has positive real part; the left "
                "half-plane construction does not apply"
            )
    return from_exact_multipliers([e.value for e in ests])


def polyak_coefficients(
    mu_star: BigDec,
    n: int,
    rho: BigDec,
    period: int,
    sign: str = "-",
) -> ControlPolynomial:
    """Gain vector [1, 0, ..., 0, eps, -eps] targeting one real multiplier.

    eps = (1 -/+ (|mu*|/rho)**(-1/T)) / (mu***(N-2) (mu* - 1)) pulls the
    multiplier mu* to magnitude rho**(1/T)-scale while the telescoping
    eps - eps keeps the coefficient sum at exactly 1.  ``sign`` selects the
    branch; "-" is the default and places the image on the positive side.
    """
    mu_star = Decimal(mu_star)
    rho = Decimal(rho)
    if n < 3:
        raise ValueError(f"need at least 3 coefficients, got n={n}")
    if period < 1:
        raise ValueError("period must be >= 1")
    if sign not in ("-", "+"):
        raise ValueError("sign must be '-' or '+'")
    if abs(mu_star) <= 1:
        raise ValueError("|mu*| must exceed 1 (the cycle must be unstable)")
    if not (0 < rho < 1):
        raise ValueError("rho must lie in (0, 1)")
    if mu_star == 1:
        raise NonStabilizableError("mu* = 1 cannot be stabilized")

    root = (abs(mu_star) / rho) ** (Decimal(-1) / period)
    numer = 1 - root if sign == "-" else 1 + root
    eps = numer / (mu_star ** (n - 2) * (mu_star - 1))
    coeffs = [Decimal(1)] + [Decimal(0)] * (n - 3) + [eps, -eps]
    return ControlPolynomial(tuple(coeffs))


def from_complex_pair(rho: BigDec, phi: BigDec) -> ControlPolynomial:
    """Three-term coefficients annihilating the pair rho e^(+-i phi).

    theta = [rho^2, -2 rho cos(phi), 1] / (rho^2 - 2 rho cos(phi) + 1).
    When the pair sits in the left half-plane (cos(phi) < 0) all three
    coefficients are positive.
    """
    rho = Decimal(rho)
    phi = Decimal(phi)
    c = bignum.cos(phi)
    den = rho * rho - 2 * rho * c + 1
    if den == 0:
        raise NonStabilizableError(
            "rho e^(i phi) = 1; the normalization r(1)=1 is impossible"
        )
    return ControlPolynomial(
        (rho * rho / den, -2 * rho * c / den, 1 / den)
    )


def chebyshev_coeffs(n: int) -> list[BigDec]:
    """Monomial coefficients (ascending) of the degree-n Chebyshev
    polynomial of the first kind, by the three-term recurrence.  Exact
    integers."""
    if n < 0:
        raise ValueError("degree must be nonnegative")
    t_prev = [Decimal(1)]
    if n == 0:
        return t_prev
    t_cur = [Decimal(0), Decimal(1)]
    for _ in range(n - 1):
        t_next = [Decimal(0)] + [2 * c for c in t_cur]
        for i, c in enumerate(t_prev):
            t_next[i] -= c
        t_prev, t_cur = t_cur, t_next
    return t_cur


def chebyshev_symmetric(n: int) -> tuple[ControlPolynomial, BigDec]:
    """Odd-degree Chebyshev gain for multipliers in a symmetric interval.

    mu r(mu) = (-1)^((n-1)/2) T_n(mu sin(pi/2n)); the polynomial is odd, so
    the division by mu is exact.  Returns the coefficients together with
    the admissible bound csc(pi/2n) on |mu*| (asymptotically (2/pi) n, the
    widest symmetric range any length-n vector can reach).
    """
    if n < 3 or n % 2 == 0:
        raise ValueError(f"degree must be odd and >= 3, got {n}")
    s = bignum.sin(bignum.pi() / (2 * n))
    sigma = -1 if ((n - 1) // 2) % 2 else 1
    cheb = chebyshev_coeffs(n)
    theta = []
    power = s  # s^j for the mu^j term
    for j in range(1, n + 1):
        theta.append(sigma * cheb[j] * power)
        power *= s
    return ControlPolynomial(tuple(theta)), 1 / s


def chebyshev_one_sided(n: int) -> tuple[ControlPolynomial, BigDec]:
    """Shifted Chebyshev gain for multipliers in [-bound, 1).

    mu r(mu) = T_n(mu (1 - cos(pi/2n)) + cos(pi/2n)).  The shift is chosen
    so the constant term T_n(cos(pi/2n)) = cos(pi/2) vanishes; the tiny
    numerical remainder of that zero is dropped and the rest renormalized
    to r(1) = 1.  Returns the coefficients and the bound cot^2(pi/4n),
    asymptotically (16/pi^2) n^2.
    """
    if n < 2:
        raise ValueError(f"degree must be >= 2, got {n}")
    c = bignum.cos(bignum.pi() / (2 * n))
    w = 1 - c
    cheb = chebyshev_coeffs(n)
    # Expand sum_k cheb[k] (w mu + c)^k by accumulating powers of the
    # linear argument.
    acc = [Decimal(0)] * (n + 1)
    lin_pow = [Decimal(1)]
    acc[0] += cheb[0]
    for k in range(1, n + 1):
        nxt = [Decimal(0)] * (len(lin_pow) + 1)
        for i, v in enumerate(lin_pow):
            nxt[i] += v * c
            nxt[i + 1] += v * w
        lin_pow = nxt
        for i, v in enumerate(lin_pow):
            acc[i] += cheb[k] * v
    # acc[0] is analytically zero; drop it and renormalize.
    theta = acc[1:]
    total = sum(theta)
    theta = [t / total for t in theta]

    q = bignum.pi() / (4 * n)
    cq, sq = bignum.cos(q), bignum.sin(q)
    bound = (cq * cq) / (sq * sq)
    return ControlPolynomial(tuple(theta)), bound


def scalar_to_polynomial(theta: BigDec) -> ControlPolynomial:
    """Two-term vector [theta/(1+theta), 1/(1+theta)] equivalent to the
    scalar-gain scheme; theta = -1 has no equivalent."""
    theta = Decimal(theta)
    den = theta + 1
    if den == 0:
        raise ValueError("theta = -1 is singular")
    return ControlPolynomial((theta / den, 1 / den))


def evaluate_r(theta: ControlPolynomial, mu) -> ComplexPair:
    """r(mu) by Horner in complex pair arithmetic."""
    z = as_pair(mu)
    acc = (theta.coefficients[-1], Decimal(0))
    for c in reversed(theta.coefficients[:-1]):
        acc = cmul(acc, z)
        acc = (acc[0] + c, acc[1])
    return acc


def stability_value(theta: ControlPolynomial, mu, period: int) -> ComplexPair:
    """mu * r(mu)**T, the multiplier the controlled cycle sees.

    The caller compares its modulus against 1.
    """
    if period < 1:
        raise ValueError("period must be >= 1")
    z = as_pair(mu)
    return cmul(z, cpow(evaluate_r(theta, z), period))
