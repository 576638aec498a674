"""Map catalog behavior, analytic Jacobians, and the expression-map registry."""

import random
from decimal import Decimal

import pytest

from cyclemix import bignum, maps
from cyclemix.maps import DivergenceError, ExpressionError, UnknownMapError

CATALOG = [
    "burgers",
    "delayed-logistic",
    "elhadj-sprott",
    "gingerbredman",
    "henon",
    "holmes",
    "ikeda",
    "logistic",
    "lozi",
    "multihorseshoe",
    "prey-predator",
    "tinkerbell",
    "triangular",
]


def test_catalog_has_exactly_the_thirteen_entries():
    assert sorted(maps.map_names()) == CATALOG


def test_unknown_name_raises():
    with pytest.raises(UnknownMapError):
        maps.get_map("lorenz")


@pytest.mark.parametrize("name", CATALOG)
def test_catalog_entry_shape(name):
    md = maps.get_map(name)
    assert md.dimension in (1, 2)
    state = md.initial_grid[0]
    assert len(state) == md.dimension
    j = maps.jacobian(md, state)
    assert len(j) == md.dimension
    assert all(len(row) == md.dimension for row in j)
    assert md.default_period >= 1
    assert md.default_theta is not None


class TestStepExamples:
    def test_logistic_step(self):
        md = maps.get_map("logistic")
        h = md.parameters["h"]
        x = Decimal("0.5")
        (out,) = maps.step(md, (x,))
        assert out == h * x * (1 - x)
        assert str(out).startswith("0.9975")

    def test_logistic_two_iterations(self):
        md = maps.get_map("logistic")
        (out,) = maps.iterate(md, (Decimal("0.5"),), 2)
        # The parameter h carries the binary-float value of 3.99, so the
        # product drifts from the pencil-and-paper 0.0099500625 after ~16 digits.
        assert str(out).startswith("0.00995006249999")

    def test_gingerbredman_rational_point(self):
        md = maps.get_map("gingerbredman")
        x = Decimal(13) / 11
        y = Decimal(-1) / 11
        nx, ny = maps.step(md, (x, y))
        tol = Decimal(10) ** (2 - bignum.precision())
        assert abs(nx - Decimal(25) / 11) < tol
        assert ny == x

    def test_iterate_one_equals_step(self):
        md = maps.get_map("tinkerbell")
        s = md.initial_grid[0]
        assert maps.iterate(md, s, 1) == maps.step(md, s)

    def test_iterate_folds_step(self):
        md = maps.get_map("henon")
        s = md.initial_grid[0]
        folded = s
        for _ in range(4):
            folded = maps.step(md, folded)
        assert maps.iterate(md, s, 4) == folded

    def test_ikeda_agrees_with_lower_precision_reevaluation(self):
        state = (Decimal("0.1"), Decimal("-1.0"))
        hi = maps.step(maps.get_map("ikeda"), state)
        bignum.configure(80)
        lo = maps.step(maps.get_map("ikeda"), state)
        for a, b in zip(lo, hi):
            assert abs(a - b) < Decimal("1e-76")

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ValueError):
            maps.step(maps.get_map("logistic"), (Decimal(1), Decimal(2)))

    def test_escape_to_infinity_raises_divergence(self):
        with pytest.raises(DivergenceError):
            maps.step(maps.get_map("logistic"), (Decimal("1e500000"),))


class TestJacobianExamples:
    def test_logistic_critical_point(self):
        md = maps.get_map("logistic")
        assert maps.jacobian(md, (Decimal("0.5"),))[0][0] == 0

    def test_henon_determinant_is_minus_b(self):
        md = maps.get_map("henon")
        b = md.parameters["b"]
        for s in ((Decimal("0.3"), Decimal("-0.2")), (Decimal(0), Decimal(1))):
            j = maps.jacobian(md, s)
            assert j[0][0] * j[1][1] - j[0][1] * j[1][0] == -b

    def test_lozi_uses_plus_convention_on_the_kink(self):
        md = maps.get_map("lozi")
        a = md.parameters["a"]
        b = md.parameters["b"]
        j = maps.jacobian(md, (Decimal("0.5"), Decimal(0)))
        assert j == ((a, b), (Decimal(1), Decimal(0)))
        # sign(0) = +1 by convention, so the kink reports the right-hand slope.
        j0 = maps.jacobian(md, (Decimal(0), Decimal(0)))
        assert j0[0][0] == a

    def test_sign_convention(self):
        assert maps.sign(Decimal(0)) == 1
        assert maps.sign(Decimal("-0")) == 1
        assert maps.sign(Decimal("-3")) == -1


def _finite_difference_jacobian(md, state):
    """Central differences evaluated with doubled working precision.

    The quotient (f(x+h) - f(x-h)) / 2h at step h = 10^(-P/2) loses about
    P/2 digits to cancellation, so the difference itself is computed at 2P
    digits; truncation error ~ |f'''| h^2 then dominates and sits far below
    the 10^(8-P) comparison tolerance.
    """
    p = bignum.precision()
    step = Decimal(10) ** -(p // 2)
    bignum.configure(2 * p)
    try:
        cols = []
        for k in range(md.dimension):
            up = list(state)
            dn = list(state)
            up[k] += step
            dn[k] -= step
            fu = maps.step(md, tuple(up))
            fd = maps.step(md, tuple(dn))
            cols.append([(a - b) / (2 * step) for a, b in zip(fu, fd)])
    finally:
        bignum.configure(p)
    return [[cols[k][i] for k in range(md.dimension)] for i in range(md.dimension)]


@pytest.mark.parametrize("name", CATALOG)
def test_analytic_jacobian_matches_finite_differences(name):
    md = maps.get_map(name)
    rng = random.Random(hash(name) & 0xFFFF)
    tol = Decimal(10) ** (8 - bignum.precision())
    for _ in range(20):
        state = tuple(Decimal(str(rng.uniform(-0.9, 0.9))) for _ in range(md.dimension))
        analytic = maps.jacobian(md, state)
        numeric = _finite_difference_jacobian(md, state)
        for i in range(md.dimension):
            for k in range(md.dimension):
                scale = max(Decimal(1), abs(analytic[i][k]))
                assert abs(analytic[i][k] - numeric[i][k]) < tol * scale, (
                    f"{name} d f_{i}/d x_{k} at {state}"
                )


class TestScheduleAndGrid:
    def test_henon_schedule(self):
        md = maps.get_map("henon")
        assert md.theta_for(28) == 15000
        assert md.theta_for(29) is None
        assert md.default_period == 28

    def test_henon_grid(self):
        grid = maps.get_map("henon").grid_for(28)
        assert len(grid) == 11
        assert grid[9] == (Decimal(0), Decimal(0))
        assert all(y == Decimal(0.3) * x for x, y in grid)

    def test_grid_for_unknown_period_falls_back_to_default(self):
        md = maps.get_map("lozi")
        assert md.grid_for(9999) == md.grid_for(md.default_period)

    def test_triangular_hint_box(self):
        md = maps.get_map("triangular")
        assert md.invariant_set_hint is not None


class TestExpressionMaps:
    def test_matches_catalog_logistic(self):
        cat = maps.get_map("logistic")
        maps.register_expression_map(
            "poly-logistic",
            1,
            ["h * x * (1 - x)"],
            parameters={"h": cat.parameters["h"]},
            replace=True,
        )
        try:
            md = maps.get_map("poly-logistic")
            tol = Decimal(10) ** (5 - bignum.precision())
            for xf in ("0.12", "0.5", "0.83"):
                s = (Decimal(xf),)
                assert maps.step(md, s) == maps.step(cat, s)
                got = maps.jacobian(md, s)[0][0]
                want = maps.jacobian(cat, s)[0][0]
                assert abs(got - want) < tol
        finally:
            maps.unregister_map("poly-logistic")

    def test_trig_partials(self):
        maps.register_expression_map(
            "wave",
            2,
            ["sin(x) + a * cos(y)", "x"],
            parameters={"a": "0.25"},
            initial_states=[("0.1", "0.1")],
            replace=True,
        )
        try:
            md = maps.get_map("wave")
            x, y = Decimal("0.4"), Decimal("-0.7")
            j = maps.jacobian(md, (x, y))
            tol = Decimal(10) ** (5 - bignum.precision())
            assert abs(j[0][0] - bignum.cos(x)) < tol
            assert abs(j[0][1] + Decimal("0.25") * bignum.sin(y)) < tol
            assert j[1][0] == 1
            assert j[1][1] == 0
        finally:
            maps.unregister_map("wave")

    def test_abs_derivative_at_kink(self):
        maps.register_expression_map("vee", 1, ["abs(x)"], replace=True)
        try:
            md = maps.get_map("vee")
            assert maps.jacobian(md, (Decimal(0),))[0][0] == 1
            assert maps.jacobian(md, (Decimal(-2),))[0][0] == -1
        finally:
            maps.unregister_map("vee")

    def test_integer_power(self):
        maps.register_expression_map("cube", 1, ["x^3 - x"], replace=True)
        try:
            md = maps.get_map("cube")
            (out,) = maps.step(md, (Decimal(2),))
            assert out == 6
            assert maps.jacobian(md, (Decimal(2),))[0][0] == 11
        finally:
            maps.unregister_map("cube")

    @pytest.mark.parametrize(
        "source",
        [
            "x +",
            "x ** 2",
            "x ^ 0.5",
            "x ^ y",
            "unknown_name + x",
            "log(x)",
            "(x",
            "x @ 2",
        ],
    )
    def test_rejects_malformed_expressions(self, source):
        with pytest.raises(ExpressionError):
            maps.register_expression_map("bad", 1, [source], replace=True)

    def test_component_count_must_match_dimension(self):
        with pytest.raises(ValueError):
            maps.register_expression_map("short", 2, ["x + y"], replace=True)

    def test_catalog_names_are_protected(self):
        with pytest.raises(ValueError):
            maps.register_expression_map("logistic", 1, ["x"])

    def test_duplicate_registration_requires_replace(self):
        maps.register_expression_map("dup", 1, ["x"], replace=True)
        try:
            with pytest.raises(ValueError):
                maps.register_expression_map("dup", 1, ["x + 1"])
        finally:
            maps.unregister_map("dup")

    def test_unregister_leaves_catalog_untouched(self):
        maps.unregister_map("henon")
        assert "henon" in maps.map_names()
