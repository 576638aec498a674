"""Benchmark map catalog and user-defined expression maps.

Each catalog entry packages one discrete map: its step rule, analytic
Jacobian, exact parameter values, per-period control-gain schedule, and the
grid of initial states its reference experiments start from.  Scalar maps
(logistic, triangular) are represented natively in dimension 1; everything
else is planar.

Parameter values deserve a word.  They are constructed as
``Decimal(<float literal>)``, i.e. the exact decimal expansion of the
nearest binary double, not the round decimal one might expect
(``Decimal(0.3)`` is 0.29999...98827).  The reference trajectories this
package reproduces digit-for-digit were generated from those binary
values, so the catalog preserves them deliberately.  The same applies to
the initial-state grids, where some coordinates are computed in float
arithmetic before conversion.

User maps are registered from expression strings over a small language:
``+ - * / ^<integer> abs sin cos exp``, parentheses, coordinate names and
parameter names.  Components are differentiated symbolically at
registration time, so registered maps get analytic Jacobians for free.
Numeric literals in expressions are read as exact decimals.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from decimal import Decimal
from typing import Callable, Mapping, Optional, Sequence

from . import bignum
from .bignum import BigDec

#: A point of the state space: tuple of coordinates, length 1 or 2.
State = tuple[BigDec, ...]

#: Row-major m x m Jacobian.
Matrix = tuple[tuple[BigDec, ...], ...]


class UnknownMapError(KeyError):
    """Raised when a map name resolves neither in the catalog nor in the
    user registry."""

    def __init__(self, name: str):
        super().__init__(name)
        self.name = name

    def __str__(self) -> str:
        return f"unknown map {self.name!r}"


class DivergenceError(ArithmeticError):
    """A trajectory left the representable range (decimal overflow or an
    invalid operation produced a non-finite coordinate)."""

    def __init__(self, state: State, detail: str = "trajectory diverged"):
        super().__init__(detail)
        self.state = state


def sign(u: BigDec) -> BigDec:
    """Derivative of ``abs`` at u, with sign(0) = +1.

    The kink of |u| is a measure-zero locus; a fixed convention there keeps
    Jacobians total and deterministic.
    """
    return Decimal(-1) if u < 0 else Decimal(1)


@dataclass(frozen=True)
class MapDef:
    """One catalog entry.

    ``step_fn``/``jacobian_fn`` are the raw callables (no validation); the
    module-level :func:`step`, :func:`iterate`, :func:`jacobian` wrap them
    with dimension checks and divergence detection.  ``schedule`` maps a
    cycle length T to the control gain and the number of initial states the
    reference experiment used for that T; ``default_period`` is the first
    schedule row.
    """

    name: str
    dimension: int
    parameters: Mapping[str, BigDec]
    step_fn: Callable[[State], State]
    jacobian_fn: Callable[[State], Matrix]
    schedule: Mapping[int, tuple[BigDec, int]]
    grid_fn: Callable[[int], tuple[State, ...]]
    invariant_set_hint: Optional[tuple[tuple[BigDec, BigDec], ...]] = None
    axis_labels: tuple[str, str] = ("x", "y")

    @property
    def default_period(self) -> int:
        return next(iter(self.schedule))

    @property
    def default_theta(self) -> BigDec:
        return self.schedule[self.default_period][0]

    @property
    def initial_grid(self) -> tuple[State, ...]:
        return self.grid_fn(self.schedule[self.default_period][1])

    def theta_for(self, period: int) -> Optional[BigDec]:
        entry = self.schedule.get(period)
        return entry[0] if entry else None

    def grid_for(self, period: int) -> tuple[State, ...]:
        entry = self.schedule.get(period)
        niv = entry[1] if entry else self.schedule[self.default_period][1]
        return self.grid_fn(niv)


def step(mapdef: MapDef, s: State) -> State:
    """One forward application of the map, with divergence detection."""
    if len(s) != mapdef.dimension:
        raise ValueError(
            f"{mapdef.name} is {mapdef.dimension}-dimensional, got a state "
            f"of length {len(s)}"
        )
    out = mapdef.step_fn(s)
    for c in out:
        if not c.is_finite():
            raise DivergenceError(out)
    return out


def iterate(mapdef: MapDef, s: State, k: int) -> State:
    """f^(k)(s) for k >= 1."""
    if k < 1:
        raise ValueError(f"iteration count must be >= 1, got {k}")
    for _ in range(k):
        s = step(mapdef, s)
    return s


def jacobian(mapdef: MapDef, s: State) -> Matrix:
    if len(s) != mapdef.dimension:
        raise ValueError(
            f"{mapdef.name} is {mapdef.dimension}-dimensional, got a state "
            f"of length {len(s)}"
        )
    return mapdef.jacobian_fn(s)


# --------------------------------------------------------------------------
# Catalog
# --------------------------------------------------------------------------

D = Decimal


def _fixed_grid(points: Sequence[State]) -> Callable[[int], tuple[State, ...]]:
    pts = tuple(points)

    def grid(niv: int) -> tuple[State, ...]:
        if not 1 <= niv <= len(pts):
            raise ValueError(f"grid supports 1..{len(pts)} states, got {niv}")
        return pts[:niv]

    return grid


def _logistic() -> MapDef:
    h = D(3.99)

    def f(s: State) -> State:
        (x,) = s
        return (h * x * (1 - x),)

    def jac(s: State) -> Matrix:
        (x,) = s
        return ((h * (1 - 2 * x),),)

    return MapDef(
        name="logistic",
        dimension=1,
        parameters={"h": h},
        step_fn=f,
        jacobian_fn=jac,
        schedule={101: (D(2e24), 2)},
        grid_fn=_fixed_grid([(D(0.5),), (D(0.1),)]),
        invariant_set_hint=((D(0), D(1)),),
        axis_labels=("x[n]", "x[n+1]"),
    )


def _triangular() -> MapDef:
    h = D(0.99)

    def f(s: State) -> State:
        (x,) = s
        return (h * (1 - abs(2 * x - 1)),)

    def jac(s: State) -> Matrix:
        (x,) = s
        return ((h * (-2 * sign(2 * x - 1)),),)

    return MapDef(
        name="triangular",
        dimension=1,
        parameters={"h": h},
        step_fn=f,
        jacobian_fn=jac,
        schedule={101: (D(64e28), 2)},
        grid_fn=_fixed_grid([(D(0.5),), (D(0.1),)]),
        # Advisory box only; the tent at h=0.99 keeps [0,1] invariant but
        # nothing here enforces it.
        invariant_set_hint=((D(0), D(1)),),
        axis_labels=("x[n]", "x[n+1]"),
    )


def _burgers() -> MapDef:
    a, b = D(0.75), D(1.75)

    def f(s: State) -> State:
        x, y = s
        return (a * x - y ** 2, b * y + x * y)

    def jac(s: State) -> Matrix:
        x, y = s
        return ((a, -2 * y), (y, b + x))

    return MapDef(
        name="burgers",
        dimension=2,
        parameters={"a": a, "b": b},
        step_fn=f,
        jacobian_fn=jac,
        schedule={28: (D(680), 2), 50: (D(10000), 2), 101: (D(16e7), 2)},
        grid_fn=_fixed_grid([(D(-1.7), D(0.2)), (D(-0.5), D(0.5))]),
    )


def _tinkerbell() -> MapDef:
    a, b, c, d = D(0.9), D(-0.6), D(2.0), D(0.5)

    def f(s: State) -> State:
        x, y = s
        return (x ** 2 - y ** 2 + a * x + b * y, 2 * x * y + c * x + d * y)

    def jac(s: State) -> Matrix:
        x, y = s
        return ((2 * x + a, -2 * y + b), (2 * y + c, 2 * x + d))

    return MapDef(
        name="tinkerbell",
        dimension=2,
        parameters={"a": a, "b": b, "c": c, "d": d},
        step_fn=f,
        jacobian_fn=jac,
        schedule={28: (D(100), 2), 50: (D(2000), 2), 101: (D(8e8), 2)},
        grid_fn=_fixed_grid([(D(0.0), D(-0.3)), (D(-0.5), D(-0.5))]),
    )


def _gingerbredman() -> MapDef:
    def f(s: State) -> State:
        x, y = s
        return (1 + abs(x) - y, x)

    def jac(s: State) -> Matrix:
        x, _ = s
        return ((sign(x), D(-1)), (D(1), D(0)))

    def grid(niv: int) -> tuple[State, ...]:
        out = []
        for j in range(niv):
            v = D(-2.09 + 1.5 * (j + 1) / 12.0)
            out.append((v, v))
        return tuple(out)

    return MapDef(
        name="gingerbredman",
        dimension=2,
        parameters={},
        step_fn=f,
        jacobian_fn=jac,
        schedule={28: (D(30), 2), 50: (D(100), 2), 101: (D(4e5), 2)},
        grid_fn=grid,
    )


def _prey_predator() -> MapDef:
    a, b, c = D(3.0), D(5.0), D(5.0)

    def f(s: State) -> State:
        x, y = s
        return (
            x * bignum.exp(a * (1 - x) - b * y),
            x * (1 - bignum.exp(-c * y)),
        )

    def jac(s: State) -> Matrix:
        x, y = s
        e1 = bignum.exp(a * (1 - x) - b * y)
        e2 = bignum.exp(-c * y)
        return (
            (e1 * (1 - a * x), x * e1 * -b),
            (1 - e2, x * c * e2),
        )

    def grid(niv: int) -> tuple[State, ...]:
        return tuple(
            (D(0.02 + (j + 13) / 19.0), D(0.1 + (j + 13) / 11.0))
            for j in range(niv)
        )

    return MapDef(
        name="prey-predator",
        dimension=2,
        parameters={"a": a, "b": b, "c": c},
        step_fn=f,
        jacobian_fn=jac,
        schedule={28: (D(350), 15), 50: (D(19500), 15), 101: (D(1e8), 2)},
        grid_fn=grid,
    )


def _delayed_logistic() -> MapDef:
    h = D(2.27)

    def f(s: State) -> State:
        x, y = s
        return (h * x * (1 - y), x)

    def jac(s: State) -> Matrix:
        x, y = s
        return ((h * (1 - y), -(h * x)), (D(1), D(0)))

    return MapDef(
        name="delayed-logistic",
        dimension=2,
        parameters={"h": h},
        step_fn=f,
        jacobian_fn=jac,
        schedule={101: (D(1e5), 2)},
        grid_fn=_fixed_grid([(D(0.1), D(0.1)), (D(0.05), D(0.025))]),
    )


def _henon() -> MapDef:
    a, b = D(-1.400000001), D(0.30000002)

    def f(s: State) -> State:
        x, y = s
        return (1 + a * x ** 2 + y, b * x)

    def jac(s: State) -> Matrix:
        x, _ = s
        return ((a * 2 * x, D(1)), (b, D(0)))

    def grid(niv: int) -> tuple[State, ...]:
        out = []
        for j in range(niv):
            x0 = D(-1.0 + j / 9.0)
            out.append((x0, D(0.3) * x0))
        return tuple(out)

    return MapDef(
        name="henon",
        dimension=2,
        parameters={"a": a, "b": b},
        step_fn=f,
        jacobian_fn=jac,
        schedule={
            28: (D(15000), 11),
            50: (D(100000), 11),
            101: (D(1e16), 11),
            1001: (D(5e174), 11),
        },
        grid_fn=grid,
    )


def _elhadj_sprott() -> MapDef:
    a, b = D(-4.0), D(0.9)

    def f(s: State) -> State:
        x, y = s
        return (1 + a * bignum.sin(x) + b * y, x)

    def jac(s: State) -> Matrix:
        x, _ = s
        return ((a * bignum.cos(x), b), (D(1), D(0)))

    return MapDef(
        name="elhadj-sprott",
        dimension=2,
        parameters={"a": a, "b": b},
        step_fn=f,
        jacobian_fn=jac,
        schedule={101: (D(1e28), 2)},
        grid_fn=_fixed_grid([(D(10.0), D(10.0)), (D(0.0), D(0.0))]),
    )


def _lozi() -> MapDef:
    a, b = D(-1.7), D(0.5)

    def f(s: State) -> State:
        x, y = s
        return (1 + a * abs(x) + b * y, x)

    def jac(s: State) -> Matrix:
        x, _ = s
        return ((a * sign(x), b), (D(1), D(0)))

    return MapDef(
        name="lozi",
        dimension=2,
        parameters={"a": a, "b": b},
        step_fn=f,
        jacobian_fn=jac,
        schedule={
            28: (D(4000), 2),
            50: (D(9.9e7), 2),
            101: (D(64e16), 2),
            601: (D(2e120), 2),
            1001: (D(1e203), 2),
        },
        grid_fn=_fixed_grid([(D(0.5), D(0.0)), (D(-0.5), D(-0.5))]),
    )


def _ikeda() -> MapDef:
    k, a, b = D(0.9), D(0.4), D(6.0)

    def phase(x: BigDec, y: BigDec) -> BigDec:
        return a - b / (1 + x ** 2 + y ** 2)

    def f(s: State) -> State:
        x, y = s
        ff = phase(x, y)
        c, sn = bignum.cos(ff), bignum.sin(ff)
        return (1 + k * (x * c - y * sn), k * (x * sn + y * c))

    def jac(s: State) -> Matrix:
        x, y = s
        r2 = 1 + x ** 2 + y ** 2
        ff = phase(x, y)
        c, sn = bignum.cos(ff), bignum.sin(ff)
        # d(phase)/dx = 2bx / r2^2, likewise in y
        px = b * 2 * x / (r2 * r2)
        py = b * 2 * y / (r2 * r2)
        u = -x * sn - y * c  # d/d(ff) of (x cos - y sin)
        v = x * c - y * sn   # d/d(ff) of (x sin + y cos)
        return (
            (k * (c + u * px), k * (-sn + u * py)),
            (k * (sn + v * px), k * (c + v * py)),
        )

    return MapDef(
        name="ikeda",
        dimension=2,
        parameters={"k": k, "a": a, "b": b},
        step_fn=f,
        jacobian_fn=jac,
        schedule={
            28: (D(9000), 2),
            50: (D(1.7e7), 2),
            101: (D(1e22), 2),
            1001: (D(3.8e225), 2),
        },
        grid_fn=_fixed_grid([(D(0.1), D(-1.0)), (D(1.0), D(0.0))]),
    )


def _holmes() -> MapDef:
    a, b = D(-0.2), D(2.77)

    def f(s: State) -> State:
        x, y = s
        return (y, a * x + b * y - y ** 3)

    def jac(s: State) -> Matrix:
        _, y = s
        return ((D(0), D(1)), (a, b - 3 * y ** 2))

    return MapDef(
        name="holmes",
        dimension=2,
        parameters={"a": a, "b": b},
        step_fn=f,
        jacobian_fn=jac,
        schedule={101: (D(2e28), 2)},
        grid_fn=_fixed_grid([(D(0.1), D(0.1)), (D(-0.1), D(0.1))]),
    )


def _multihorseshoe() -> MapDef:
    ak, bk = D(3.0), D(3.0)
    p, q = D(0.8), D(0.2)

    def f(s: State) -> State:
        x, y = s
        return (
            x * bignum.exp(ak - p * x - q * y),
            y * (q * x + p * y) * bignum.exp(bk - q * x - p * y),
        )

    def jac(s: State) -> Matrix:
        x, y = s
        e1 = bignum.exp(ak - p * x - q * y)
        e2 = bignum.exp(bk - q * x - p * y)
        w = q * x + p * y
        return (
            (e1 * (1 - p * x), -q * x * e1),
            (q * y * e2 * (1 - w), e2 * (w + p * y - p * y * w)),
        )

    return MapDef(
        name="multihorseshoe",
        dimension=2,
        parameters={"a": ak, "b": bk, "p": p, "q": q},
        step_fn=f,
        jacobian_fn=jac,
        schedule={1001: (D(1.5e187), 1)},
        grid_fn=_fixed_grid([(D(3.0), D(6.0))]),
    )


CATALOG: dict[str, MapDef] = {
    m.name: m
    for m in (
        _logistic(),
        _triangular(),
        _burgers(),
        _tinkerbell(),
        _gingerbredman(),
        _prey_predator(),
        _delayed_logistic(),
        _henon(),
        _elhadj_sprott(),
        _lozi(),
        _ikeda(),
        _holmes(),
        _multihorseshoe(),
    )
}

_user_registry: dict[str, MapDef] = {}


def get_map(name: str) -> MapDef:
    if name in CATALOG:
        return CATALOG[name]
    if name in _user_registry:
        return _user_registry[name]
    raise UnknownMapError(name)


def map_names() -> list[str]:
    return list(CATALOG) + sorted(_user_registry)


# --------------------------------------------------------------------------
# Expression-defined maps
# --------------------------------------------------------------------------

_TOKEN = re.compile(
    r"\s*(?:(?P<num>\d+\.\d*|\.\d+|\d+)|(?P<name>[A-Za-z_][A-Za-z_0-9]*)"
    r"|(?P<op>[-+*/^()]))"
)

_FUNCTIONS = ("abs", "sin", "cos", "exp")


class ExpressionError(ValueError):
    pass


def _tokenize(text: str) -> list[tuple[str, str]]:
    tokens = []
    text = text.rstrip()
    pos = 0
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m:
            raise ExpressionError(f"bad character at {text[pos:pos + 10]!r}")
        pos = m.end()
        for kind in ("num", "name", "op"):
            val = m.group(kind)
            if val is not None:
                tokens.append((kind, val))
                break
    tokens.append(("end", ""))
    return tokens


# AST: ("num", Decimal) | ("var", name) | ("call", fn, node)
#    | ("neg", node) | ("+"|"-"|"*"|"/", left, right) | ("pow", node, int)


class _Parser:
    def __init__(self, tokens: list[tuple[str, str]]):
        self.tokens = tokens
        self.i = 0

    def peek(self) -> tuple[str, str]:
        return self.tokens[self.i]

    def take(self) -> tuple[str, str]:
        tok = self.tokens[self.i]
        self.i += 1
        return tok

    def expect_op(self, op: str) -> None:
        kind, val = self.take()
        if kind != "op" or val != op:
            raise ExpressionError(f"expected {op!r}, found {val or 'end of input'!r}")

    def parse(self):
        node = self.expr()
        kind, val = self.peek()
        if kind != "end":
            raise ExpressionError(f"unexpected trailing {val!r}")
        return node

    def expr(self):
        node = self.term()
        while self.peek() == ("op", "+") or self.peek() == ("op", "-"):
            _, op = self.take()
            node = (op, node, self.term())
        return node

    def term(self):
        node = self.unary()
        while self.peek() == ("op", "*") or self.peek() == ("op", "/"):
            _, op = self.take()
            node = (op, node, self.unary())
        return node

    def unary(self):
        if self.peek() == ("op", "-"):
            self.take()
            return ("neg", self.unary())
        if self.peek() == ("op", "+"):
            self.take()
            return self.unary()
        return self.power()

    def power(self):
        node = self.atom()
        if self.peek() == ("op", "^"):
            self.take()
            negative = False
            if self.peek() == ("op", "-"):
                self.take()
                negative = True
            kind, val = self.take()
            if kind != "num" or "." in val:
                raise ExpressionError("exponent must be an integer literal")
            n = -int(val) if negative else int(val)
            return ("pow", node, n)
        return node

    def atom(self):
        kind, val = self.take()
        if kind == "num":
            return ("num", Decimal(val))
        if kind == "name":
            if self.peek() == ("op", "("):
                if val not in _FUNCTIONS:
                    raise ExpressionError(f"unknown function {val!r}")
                self.take()
                arg = self.expr()
                self.expect_op(")")
                return ("call", val, arg)
            return ("var", val)
        if kind == "op" and val == "(":
            node = self.expr()
            self.expect_op(")")
            return node
        raise ExpressionError(f"unexpected {val or 'end of input'!r}")


def _free_names(node) -> set[str]:
    tag = node[0]
    if tag == "num":
        return set()
    if tag == "var":
        return {node[1]}
    if tag == "call":
        return _free_names(node[2])
    if tag == "neg":
        return _free_names(node[1])
    if tag == "pow":
        return _free_names(node[1])
    return _free_names(node[1]) | _free_names(node[2])


_ZERO = ("num", Decimal(0))
_ONE = ("num", Decimal(1))


def _is_zero(node) -> bool:
    return node[0] == "num" and node[1] == 0


def _mul(a, b):
    if _is_zero(a) or _is_zero(b):
        return _ZERO
    if a == _ONE:
        return b
    if b == _ONE:
        return a
    return ("*", a, b)


def _add(a, b):
    if _is_zero(a):
        return b
    if _is_zero(b):
        return a
    return ("+", a, b)


def _diff(node, var: str):
    """Symbolic derivative with light zero/one folding."""
    tag = node[0]
    if tag == "num":
        return _ZERO
    if tag == "var":
        return _ONE if node[1] == var else _ZERO
    if tag == "neg":
        d = _diff(node[1], var)
        return _ZERO if _is_zero(d) else ("neg", d)
    if tag == "+":
        return _add(_diff(node[1], var), _diff(node[2], var))
    if tag == "-":
        da, db = _diff(node[1], var), _diff(node[2], var)
        if _is_zero(db):
            return da
        return ("-", da, db)
    if tag == "*":
        a, b = node[1], node[2]
        return _add(_mul(_diff(a, var), b), _mul(a, _diff(b, var)))
    if tag == "/":
        a, b = node[1], node[2]
        num = ("-", _mul(_diff(a, var), b), _mul(a, _diff(b, var)))
        return ("/", num, ("pow", b, 2))
    if tag == "pow":
        base, n = node[1], node[2]
        if n == 0:
            return _ZERO
        chain = _diff(base, var)
        outer = _mul(("num", Decimal(n)), ("pow", base, n - 1))
        return _mul(outer, chain)
    if tag == "call":
        fn, arg = node[1], node[2]
        chain = _diff(arg, var)
        if _is_zero(chain):
            return _ZERO
        if fn == "sin":
            return _mul(("call", "cos", arg), chain)
        if fn == "cos":
            return ("neg", _mul(("call", "sin", arg), chain))
        if fn == "exp":
            return _mul(("call", "exp", arg), chain)
        if fn == "abs":
            return _mul(("call", "_sign", arg), chain)
    raise ExpressionError(f"cannot differentiate node {tag!r}")


def _evaluate(node, env: Mapping[str, BigDec]) -> BigDec:
    tag = node[0]
    if tag == "num":
        return node[1]
    if tag == "var":
        return env[node[1]]
    if tag == "neg":
        return -_evaluate(node[1], env)
    if tag == "pow":
        return _evaluate(node[1], env) ** node[2]
    if tag == "call":
        v = _evaluate(node[2], env)
        if node[1] == "abs":
            return abs(v)
        if node[1] == "sin":
            return bignum.sin(v)
        if node[1] == "cos":
            return bignum.cos(v)
        if node[1] == "exp":
            return bignum.exp(v)
        if node[1] == "_sign":
            return sign(v)
        raise ExpressionError(f"cannot evaluate call to {node[1]!r}")
    a = _evaluate(node[1], env)
    b = _evaluate(node[2], env)
    if tag == "+":
        return a + b
    if tag == "-":
        return a - b
    if tag == "*":
        return a * b
    if tag == "/":
        return a / b
    raise ExpressionError(f"cannot evaluate node {tag!r}")


def register_expression_map(
    name: str,
    dimension: int,
    components: Sequence[str],
    parameters: Optional[Mapping[str, str | BigDec]] = None,
    initial_states: Optional[Sequence[Sequence[str | BigDec]]] = None,
    default_theta: str | BigDec = "1",
    default_period: int = 1,
    replace: bool = False,
) -> MapDef:
    """Build a MapDef from component expression strings and register it.

    Coordinates are named ``x`` for 1-dimensional maps and ``x``, ``y``
    for planar ones.  Parameter values and initial-state coordinates given
    as strings are read as exact decimals.
    """
    if dimension not in (1, 2):
        raise ValueError("dimension must be 1 or 2")
    if len(components) != dimension:
        raise ValueError(f"need {dimension} component expression(s)")
    if name in CATALOG:
        raise ValueError(f"{name!r} is a catalog map and cannot be replaced")
    if name in _user_registry and not replace:
        raise ValueError(f"map {name!r} already registered")

    params = {k: Decimal(v) for k, v in (parameters or {}).items()}
    coords = ("x",) if dimension == 1 else ("x", "y")
    clash = set(params) & set(coords)
    if clash:
        raise ValueError(f"parameter names shadow coordinates: {sorted(clash)}")

    asts = [_Parser(_tokenize(c)).parse() for c in components]
    allowed = set(params) | set(coords)
    for ast, text in zip(asts, components):
        unknown = _free_names(ast) - allowed
        if unknown:
            raise ExpressionError(
                f"unknown identifier(s) {sorted(unknown)} in {text!r}"
            )
    grads = [[_diff(ast, c) for c in coords] for ast in asts]

    def f(s: State) -> State:
        env = dict(params)
        env.update(zip(coords, s))
        return tuple(_evaluate(ast, env) for ast in asts)

    def jac(s: State) -> Matrix:
        env = dict(params)
        env.update(zip(coords, s))
        return tuple(
            tuple(_evaluate(g, env) for g in row) for row in grads
        )

    if initial_states:
        grid_pts = [tuple(Decimal(c) for c in p) for p in initial_states]
        for p in grid_pts:
            if len(p) != dimension:
                raise ValueError("initial state has wrong dimension")
    else:
        grid_pts = [tuple(Decimal("0.1") for _ in range(dimension))]

    mapdef = MapDef(
        name=name,
        dimension=dimension,
        parameters=params,
        step_fn=f,
        jacobian_fn=jac,
        schedule={default_period: (Decimal(default_theta), len(grid_pts))},
        grid_fn=_fixed_grid(grid_pts),
        axis_labels=("x[n]", "x[n+1]") if dimension == 1 else ("x", "y"),
    )
    _user_registry[name] = mapdef
    return mapdef


def unregister_map(name: str) -> None:
    _user_registry.pop(name, None)
