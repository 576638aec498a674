"""Coefficient constructors and the stability-value evaluation."""

import random
from decimal import Decimal

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from cyclemix import bignum, control
from cyclemix.control import (
    ControlPolynomial,
    MultiplierEstimate,
    NonStabilizableError,
    cabs,
    evaluate_r,
    stability_value,
)


def tol(shift: int = 5) -> Decimal:
    return Decimal(10) ** (shift - bignum.precision())


class TestControlPolynomial:
    def test_requires_weights_summing_to_one(self):
        with pytest.raises(ValueError):
            ControlPolynomial((Decimal("0.5"), Decimal("0.4")))

    def test_requires_nonzero_leading_coefficient(self):
        with pytest.raises(ValueError):
            ControlPolynomial((Decimal(1), Decimal(0)))

    def test_requires_at_least_one_coefficient(self):
        with pytest.raises(ValueError):
            ControlPolynomial(())

    def test_len_is_coefficient_count(self):
        assert len(ControlPolynomial((Decimal(1),))) == 1

    def test_normalization_at_one(self):
        theta = ControlPolynomial((Decimal("0.25"), Decimal("0.25"), Decimal("0.5")))
        assert abs(cabs(evaluate_r(theta, Decimal(1))) - 1) < tol()


class TestFromExactMultipliers:
    def test_single_real_multiplier_matches_two_term_form(self):
        mu = Decimal("-1.99")
        theta = control.from_exact_multipliers([mu])
        want = (Decimal("1.99") / Decimal("2.99"), 1 / Decimal("2.99"))
        for got, expect in zip(theta.coefficients, want):
            assert abs(got - expect) < tol()

    def test_zero_multiplier(self):
        theta = control.from_exact_multipliers([Decimal(0)])
        assert theta.coefficients == (Decimal(0), Decimal(1))

    def test_two_real_multipliers(self):
        theta = control.from_exact_multipliers([Decimal(-2), Decimal(-3)])
        want = (Decimal(1) / 2, Decimal(5) / 12, Decimal(1) / 12)
        for got, expect in zip(theta.coefficients, want):
            assert abs(got - expect) < tol()

    def test_degree_bookkeeping(self):
        mus = [Decimal(-2), Decimal(-3), Decimal(-5)]
        assert len(control.from_exact_multipliers(mus)) == len(mus) + 1

    def test_roots_are_annihilated(self):
        mus = [Decimal("-1.5"), (Decimal("-0.5"), Decimal("1.25")),
               (Decimal("-0.5"), Decimal("-1.25"))]
        theta = control.from_exact_multipliers(mus)
        for mu in mus:
            assert cabs(evaluate_r(theta, mu)) < tol()
        assert abs(cabs(evaluate_r(theta, Decimal(1))) - 1) < tol()

    def test_against_symbolic_expansion(self):
        sympy = pytest.importorskip("sympy")
        mus = [Decimal("-1.5"), Decimal("-2.25"), Decimal("0.5")]
        theta = control.from_exact_multipliers(mus)
        lam = sympy.symbols("lam")
        poly = 1
        norm = 1
        for m in mus:
            poly *= lam - sympy.Rational(str(m))
            norm *= 1 - sympy.Rational(str(m))
        coeffs = sympy.Poly(sympy.expand(poly / norm), lam).all_coeffs()[::-1]
        assert len(coeffs) == len(theta)
        for got, frac in zip(theta.coefficients, coeffs):
            want = Decimal(int(frac.p)) / Decimal(int(frac.q))
            assert abs(got - want) < tol()

    def test_multiplier_one_is_not_stabilizable(self):
        with pytest.raises(NonStabilizableError):
            control.from_exact_multipliers([Decimal(1)])

    def test_unpaired_complex_rejected(self):
        with pytest.raises(ValueError):
            control.from_exact_multipliers([(Decimal(-1), Decimal(2))])


class TestFromLeftHalfPlane:
    def test_single_estimate_matches_exact_construction(self):
        est = MultiplierEstimate((Decimal("-1.99"), Decimal(0)), Decimal("0.01"))
        assert (
            control.from_left_half_plane([est]).coefficients
            == control.from_exact_multipliers([Decimal("-1.99")]).coefficients
        )

    def test_symmetric_root(self):
        theta = control.from_left_half_plane([Decimal(-1)])
        for got in theta.coefficients:
            assert abs(got - Decimal("0.5")) < tol()

    def test_conjugate_pair(self):
        pair = [(Decimal(-1), Decimal(1)), (Decimal(-1), Decimal(-1))]
        theta = control.from_left_half_plane(pair)
        want = (Decimal(2) / 5, Decimal(2) / 5, Decimal(1) / 5)
        for got, expect in zip(theta.coefficients, want):
            assert abs(got - expect) < tol()

    def test_strictly_left_plane_gives_positive_coefficients(self):
        rng = random.Random(3)
        for _ in range(10):
            roots = []
            for _ in range(rng.randint(1, 2)):
                re = Decimal(str(rng.uniform(-3.0, -0.1)))
                if rng.random() < 0.5:
                    roots.append(re)
                else:
                    im = Decimal(str(rng.uniform(0.1, 2.0)))
                    roots.append((re, im))
                    roots.append((re, -im))
            theta = control.from_left_half_plane(roots)
            assert all(c > 0 for c in theta.coefficients)

    def test_right_half_plane_rejected(self):
        with pytest.raises(ValueError):
            control.from_left_half_plane([Decimal("0.5")])


class TestPolyak:
    def test_reference_epsilon(self):
        theta = control.polyak_coefficients(Decimal(2), 3, Decimal("0.5"), 1)
        assert theta.coefficients == (Decimal(1), Decimal("0.375"), Decimal("-0.375"))

    def test_telescoping_sum_is_exactly_one(self):
        theta = control.polyak_coefficients(Decimal("-1.99"), 5, Decimal("0.5"), 3)
        assert sum(theta.coefficients) == 1
        assert list(theta.coefficients[1:3]) == [Decimal(0), Decimal(0)]

    @pytest.mark.parametrize("sign", ["-", "+"])
    def test_target_multiplier_lands_on_rho(self, sign):
        # By construction r(mu*) = -/+ (|mu*|/rho)^(-1/T), so the stability
        # value at mu* has modulus exactly rho up to rounding.
        rng = random.Random(17)
        for _ in range(8):
            mu = Decimal(str(rng.choice([-1, 1]) * rng.uniform(1.5, 20.0)))
            n = rng.randint(3, 6)
            rho = Decimal(str(rng.uniform(0.05, 0.95)))
            period = rng.choice([1, 2, 7])
            theta = control.polyak_coefficients(mu, n, rho, period, sign=sign)
            assert abs(cabs(stability_value(theta, mu, period)) - rho) < tol(10)

    def test_validations(self):
        with pytest.raises(ValueError):
            control.polyak_coefficients(Decimal(2), 2, Decimal("0.5"), 1)
        with pytest.raises(ValueError):
            control.polyak_coefficients(Decimal("0.5"), 3, Decimal("0.5"), 1)
        with pytest.raises(ValueError):
            control.polyak_coefficients(Decimal(2), 3, Decimal("1.5"), 1)
        with pytest.raises(ValueError):
            control.polyak_coefficients(Decimal(2), 3, Decimal("0.5"), 1, sign="?")


class TestFromComplexPair:
    def test_rho_two_phi_pi(self):
        theta = control.from_complex_pair(Decimal(2), bignum.pi())
        want = (Decimal(4) / 9, Decimal(4) / 9, Decimal(1) / 9)
        for got, expect in zip(theta.coefficients, want):
            assert abs(got - expect) < tol()

    def test_unit_rho_quarter_turn(self):
        theta = control.from_complex_pair(Decimal(1), bignum.pi() / 2)
        want = (Decimal("0.5"), Decimal(0), Decimal("0.5"))
        for got, expect in zip(theta.coefficients, want):
            assert abs(got - expect) < tol()

    def test_left_plane_pairs_have_positive_coefficients(self):
        rng = random.Random(5)
        for _ in range(10):
            rho = Decimal(str(rng.uniform(0.2, 3.0)))
            phi = Decimal(str(rng.uniform(1.6, 3.1)))
            theta = control.from_complex_pair(rho, phi)
            assert all(c > 0 for c in theta.coefficients)

    def test_root_at_one_rejected(self):
        with pytest.raises(NonStabilizableError):
            control.from_complex_pair(Decimal(1), Decimal(0))


class TestChebyshev:
    KNOWN = {
        0: [1],
        1: [0, 1],
        2: [-1, 0, 2],
        3: [0, -3, 0, 4],
        4: [1, 0, -8, 0, 8],
        5: [0, 5, 0, -20, 0, 16],
    }

    @pytest.mark.parametrize("n", sorted(KNOWN))
    def test_monomial_coefficients(self, n):
        assert control.chebyshev_coeffs(n) == [Decimal(c) for c in self.KNOWN[n]]

    def test_endpoint_identity(self):
        for n in range(21):
            assert sum(control.chebyshev_coeffs(n)) == 1

    def test_symmetric_degree_three(self):
        theta, bound = control.chebyshev_symmetric(3)
        assert abs(theta.coefficients[0] - Decimal("1.5")) < tol()
        assert abs(theta.coefficients[1]) < tol()
        assert abs(theta.coefficients[2] + Decimal("0.5")) < tol()
        assert abs(bound - 2) < tol()

    def test_symmetric_rejects_even_degree(self):
        with pytest.raises(ValueError):
            control.chebyshev_symmetric(4)

    def test_one_sided_degree_two(self):
        theta, bound = control.chebyshev_one_sided(2)
        root2 = Decimal(2).sqrt()
        assert abs(theta.coefficients[0] - (2 * root2 - 2)) < tol()
        assert abs(theta.coefficients[1] - (3 - 2 * root2)) < tol()
        assert abs(bound - (3 + 2 * root2)) < tol()

    def test_one_sided_rejects_degree_one(self):
        with pytest.raises(ValueError):
            control.chebyshev_one_sided(1)

    @pytest.mark.parametrize("n", [3, 5, 7, 9])
    def test_symmetric_bound_on_grid(self, n):
        theta, bound = control.chebyshev_symmetric(n)
        assert len(theta) == n
        lim = 1 + Decimal(10) ** (10 - bignum.precision())
        for k in range(201):
            mu = -bound + 2 * bound * k / 200
            assert cabs(stability_value(theta, mu, 1)) <= lim

    @pytest.mark.parametrize("n", [2, 3, 4])
    def test_one_sided_bound_on_grid(self, n):
        theta, bound = control.chebyshev_one_sided(n)
        lim = 1 + Decimal(10) ** (10 - bignum.precision())
        for k in range(201):
            mu = -bound + (bound + 1) * k / 200
            assert cabs(stability_value(theta, mu, 1)) <= lim
        assert abs(cabs(evaluate_r(theta, Decimal(1))) - 1) < tol()


class TestScalarConversion:
    def test_two_term_weights(self):
        theta = control.scalar_to_polynomial(Decimal(680))
        assert theta.coefficients == (Decimal(680) / 681, 1 / Decimal(681))

    def test_minus_one_rejected(self):
        with pytest.raises(ValueError):
            control.scalar_to_polynomial(Decimal(-1))


class TestEvaluation:
    @settings(max_examples=60)
    @given(
        st.lists(st.floats(min_value=-2.0, max_value=2.0), min_size=1, max_size=6),
        st.floats(min_value=-2.0, max_value=2.0),
        st.floats(min_value=-2.0, max_value=2.0),
    )
    def test_horner_matches_power_sum(self, raw, re, im):
        coeffs = [Decimal(str(c)) for c in raw]
        total = sum(coeffs)
        if abs(total) < Decimal("0.01") or coeffs[-1] == 0:
            return
        theta = ControlPolynomial(tuple(c / total for c in coeffs))
        mu = (Decimal(str(re)), Decimal(str(im)))
        acc = (Decimal(0), Decimal(0))
        power = (Decimal(1), Decimal(0))
        for c in theta.coefficients:
            acc = (acc[0] + c * power[0], acc[1] + c * power[1])
            power = control.cmul(power, mu)
        r = evaluate_r(theta, mu)
        assert cabs((r[0] - acc[0], r[1] - acc[1])) < tol(10)

    def test_stability_value_modulus_factorizes(self):
        theta = ControlPolynomial((Decimal("0.3"), Decimal("0.2"), Decimal("0.5")))
        mu = (Decimal("0.4"), Decimal("-0.8"))
        for period in (1, 2, 5):
            sv = stability_value(theta, mu, period)
            want = cabs(mu) * cabs(evaluate_r(theta, mu)) ** period
            assert abs(cabs(sv) - want) < tol(10)

    def test_zero_multiplier_maps_to_zero(self):
        theta = ControlPolynomial((Decimal("0.5"), Decimal("0.5")))
        assert stability_value(theta, Decimal(0), 3) == (Decimal(0), Decimal(0))


class TestConvexContraction:
    def test_strict_contraction_inside_unit_disk(self):
        # Any convex mix with some weight beyond the first term satisfies
        # |r(mu)| < 1 strictly for |mu| < 1, hence |mu r(mu)^T| < |mu|.
        rng = random.Random(11)
        for _ in range(20):
            n = rng.randint(2, 5)
            raw = [Decimal(str(rng.uniform(0.05, 1.0))) for _ in range(n)]
            total = sum(raw)
            theta = ControlPolynomial(tuple(c / total for c in raw))
            for _ in range(25):
                angle = Decimal(str(rng.uniform(0.0, 6.28)))
                radius = Decimal(str(rng.uniform(0.05, 0.99)))
                mu = (radius * bignum.cos(angle), radius * bignum.sin(angle))
                for period in (1, 2, 5):
                    sv = stability_value(theta, mu, period)
                    assert cabs(sv) < cabs(mu)

    def test_exponent_bound_counterexample(self):
        # The half-and-half mix at mu = 1/2, T = 1 gives exactly 3/8, which
        # exceeds |mu|^(1+T) = 1/4: the T-th-power contraction rate only
        # applies to the polynomial factor, not to mu itself.
        theta = ControlPolynomial((Decimal("0.5"), Decimal("0.5")))
        sv = stability_value(theta, Decimal("0.5"), 1)
        assert cabs(sv) == Decimal("0.375")
        assert cabs(sv) > Decimal("0.5") ** 2
