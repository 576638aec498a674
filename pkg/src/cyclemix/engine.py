"""Controlled iteration and cycle detection.

A search runs each initial state through three phases on a ring buffer of
T+1 consecutive states:

1. T plain (uncontrolled) steps to fill the ring,
2. ``warmup`` circular repeats of T+1 plain steps,
3. up to ``max_sweeps`` controlled sweeps of T+1 steps each.

During a controlled sweep every freshly written state is compared against
the state T steps earlier (available in the ring for free).  When every
component agrees within the detection epsilon, the last T states are
recorded as a cycle, re-verified under the plain map, and checked for a
smaller period dividing T.

One-dimensional maps run as (previous, current) pairs internally, so the
detector always compares at least two components and the 1-D and 2-D
paths share one protocol; recorded cycle points are the plain scalar
states.

The protocol details (ring size, warmup shape, slot-major stepping, the
sweep-granular stop once any track has found a cycle) are load-bearing:
the regression values in the test suite pin sweep indexes, and those only
reproduce if the step count ahead of each comparison is preserved
exactly.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from decimal import Decimal
from typing import Callable, Optional, Union

from . import bignum, maps
from .bignum import BigDec
from .control import ControlPolynomial
from .maps import DivergenceError, MapDef, State

#: Recognized controlled-iteration schemes.
SCHEMES = (
    "combination-of-iterates",
    "pre-averaged",
    "two-term",
    "scalar-theta-two-term",
    "adaptive-scalar",
)

_POLYNOMIAL_SCHEMES = ("combination-of-iterates", "pre-averaged", "two-term")

ThetaSpec = Union[ControlPolynomial, BigDec, None]


class SingularWeightError(ArithmeticError):
    """The adaptive weight 1 + theta(x) fell below the singularity guard;
    the step is undefined and the trajectory is abandoned."""

    def __init__(self, state: State, theta: BigDec):
        super().__init__(
            f"adaptive weight 1 + theta = {1 + theta} is singular at {state}"
        )
        self.state = state
        self.theta = theta


# --------------------------------------------------------------------------
# Controlled steps
# --------------------------------------------------------------------------


def controlled_step_combination(
    mapdef: MapDef, theta: ControlPolynomial, period: int, s: State
) -> State:
    """Weighted sum of iterates: sum_j theta_j f^((j-1)T+1)(s).

    The iterates are taken from one cumulative chain, (N-1)T+1 map
    applications in total, not N separate restarts.
    """
    coeffs = theta.coefficients
    z = tuple(Decimal(c) for c in s)
    acc = [Decimal(0)] * mapdef.dimension
    done = 0
    for j, w in enumerate(coeffs):
        target = j * period + 1
        while done < target:
            z = maps.step(mapdef, z)
            done += 1
        for i in range(mapdef.dimension):
            acc[i] += w * z[i]
    out = tuple(acc)
    if not all(c.is_finite() for c in out):
        raise DivergenceError(out)
    return out


def controlled_step_preaveraged(
    mapdef: MapDef, theta: ControlPolynomial, period: int, s: State
) -> State:
    """One map application of the weighted state mix:
    f(theta_1 s + sum_{j>=2} theta_j f^((j-1)T)(s)).

    Costs (N-1)T+1 map applications per step, the same chain length as
    :func:`controlled_step_combination`: the final application of f replaces
    the first link of the chain rather than coming on top of it.
    """
    coeffs = theta.coefficients
    z = tuple(Decimal(c) for c in s)
    acc = [coeffs[0] * c for c in z]
    done = 0
    for j in range(2, len(coeffs) + 1):
        target = (j - 1) * period
        while done < target:
            z = maps.step(mapdef, z)
            done += 1
        for i in range(mapdef.dimension):
            acc[i] += coeffs[j - 1] * z[i]
    mix = tuple(acc)
    if not all(c.is_finite() for c in mix):
        raise DivergenceError(mix)
    return maps.step(mapdef, mix)


def controlled_step_scalar_theta(
    mapdef: MapDef, theta: BigDec, period: int, s: State
) -> State:
    """The scalar-gain workhorse: f(theta/(1+theta) s + 1/(1+theta) f^(T)(s))."""
    theta = Decimal(theta)
    den = theta + 1
    if den == 0:
        raise ValueError("theta = -1 is singular")
    w1 = theta / den
    w2 = 1 / den
    z = tuple(Decimal(c) for c in s)
    g = z
    for _ in range(period):
        g = maps.step(mapdef, g)
    mix = tuple(w1 * a + w2 * b for a, b in zip(z, g))
    if not all(c.is_finite() for c in mix):
        raise DivergenceError(mix)
    return maps.step(mapdef, mix)


def _singular_guard() -> Decimal:
    return Decimal(10) ** -(bignum.precision() // 2)


def adaptive_scalar_step(
    mapdef: MapDef, period: int, s: State, magnitude: bool = False
) -> State:
    """Self-tuning two-term step for one-dimensional maps.

    The gain is the negated derivative product along the forward orbit,
    theta(x) = -f'(f^(T-1)(x)) ... f'(x), which near a T-cycle approaches
    the negated cycle multiplier; the step is then
    (theta/(1+theta)) f(x) + (1/(1+theta)) f^(T+1)(x), reusing the orbit
    already computed.  ``magnitude`` switches the gain to |theta(x)|.
    """
    if mapdef.dimension != 1:
        raise ValueError("the adaptive scheme needs a one-dimensional map")
    chain = [tuple(Decimal(c) for c in s)]
    for _ in range(period + 1):
        chain.append(maps.step(mapdef, chain[-1]))
    prod = Decimal(1)
    for i in range(period):
        prod *= maps.jacobian(mapdef, chain[i])[0][0]
    theta = abs(prod) if magnitude else -prod
    den = 1 + theta
    if abs(den) < _singular_guard():
        raise SingularWeightError(s, theta)
    w1 = theta / den
    w2 = 1 / den
    out = (w1 * chain[1][0] + w2 * chain[period + 1][0],)
    if not out[0].is_finite():
        raise DivergenceError(out)
    return out


# --------------------------------------------------------------------------
# Search configuration and results
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SearchConfig:
    """Everything a cycle search needs; immutable and revalidated on
    construction so ``dataclasses.replace`` stays safe."""

    map_name: str
    period: int
    scheme: str
    theta: ThetaSpec
    initial_states: tuple[State, ...]
    max_sweeps: int = 250
    warmup: int = 3
    stop_on_first: bool = True
    adaptive_magnitude: bool = False

    def __post_init__(self):
        mapdef = maps.get_map(self.map_name)
        if self.period < 1:
            raise ValueError(f"period must be >= 1, got {self.period}")
        if self.max_sweeps < 1:
            raise ValueError(f"max_sweeps must be >= 1, got {self.max_sweeps}")
        if self.warmup < 0:
            raise ValueError(f"warmup must be >= 0, got {self.warmup}")
        if self.scheme not in SCHEMES:
            raise ValueError(
                f"unknown scheme {self.scheme!r}; choose one of {SCHEMES}"
            )

        states = tuple(
            tuple(Decimal(c) for c in state) for state in self.initial_states
        )
        if not states:
            raise ValueError("need at least one initial state")
        for state in states:
            if len(state) != mapdef.dimension:
                raise ValueError(
                    f"initial state {state} does not match the "
                    f"{mapdef.dimension}-dimensional map {self.map_name!r}"
                )
        object.__setattr__(self, "initial_states", states)

        theta = self.theta
        if self.scheme in _POLYNOMIAL_SCHEMES:
            if theta is None:
                raise ValueError(f"scheme {self.scheme!r} requires theta")
            if not isinstance(theta, ControlPolynomial):
                theta = ControlPolynomial(tuple(Decimal(c) for c in theta))
            if self.scheme == "two-term" and len(theta) != 2:
                raise ValueError(
                    f"the two-term scheme takes exactly 2 coefficients, "
                    f"got {len(theta)}"
                )
        elif self.scheme == "scalar-theta-two-term":
            theta = Decimal(theta)
            if theta == -1:
                raise ValueError("theta = -1 is singular")
        else:  # adaptive-scalar
            if theta is not None:
                raise ValueError("the adaptive scheme computes its own gain; "
                                 "pass theta=None")
            if mapdef.dimension != 1:
                raise ValueError(
                    "the adaptive scheme needs a one-dimensional map"
                )
        object.__setattr__(self, "theta", theta)


@dataclass(frozen=True)
class CycleRecord:
    """One detected cycle.

    ``points`` are the last T states before detection, in orbit order
    (each approximately the plain-map image of its predecessor).
    ``residual`` is max componentwise |f^(T)(eta_1) - eta_1| under the
    plain map; it is recorded, not gated, so a marginal detection is
    visible rather than silently dropped.  ``sweep_index`` counts
    controlled sweeps from zero.  ``detection_state`` is the internal
    state vector the detector compared (for 1-D maps: the (previous,
    current) pair).
    """

    points: tuple[State, ...]
    map_name: str
    scheme: str
    theta: Union[tuple[BigDec, ...], BigDec, None]
    sweep_index: int
    residual: BigDec
    minimal_period: int
    initial_state_index: int
    detection_state: tuple[BigDec, ...]
    convergence_gaps: tuple[BigDec, ...] = ()


@dataclass(frozen=True)
class SearchOutcome:
    """Full search result: records plus per-track status and counters.

    ``track_status`` entries: "found", "exhausted" (no detection within
    the sweep budget), "stopped" (search ended early because another track
    found a cycle first), "escaped" (divergence), "singular" (adaptive
    weight blew up).
    """

    records: tuple[CycleRecord, ...]
    track_status: tuple[str, ...]
    sweeps_run: int
    evaluations: int
    epsilon: BigDec
    precision: int


class _Counter:
    __slots__ = ("count",)

    def __init__(self):
        self.count = 0


def _counting(mapdef: MapDef, counter: _Counter) -> MapDef:
    base = mapdef.step_fn

    def step_fn(state: State) -> State:
        counter.count += 1
        return base(state)

    return replace(mapdef, step_fn=step_fn)


@dataclass(frozen=True)
class _Adapter:
    """Internal-state protocol: how one track is initialized, stepped
    plainly, stepped under control, and projected back to map coordinates."""

    init: Callable[[State], tuple[BigDec, ...]]
    plain: Callable[[tuple], tuple]
    controlled: Callable[[tuple], tuple]
    present: Callable[[tuple], State]


def _build_adapter(mapdef: MapDef, cfg: SearchConfig) -> _Adapter:
    identity = lambda z: z  # noqa: E731

    if cfg.scheme == "scalar-theta-two-term" and mapdef.dimension == 1:
        # Delay embedding: carry (previous mix, current state).  The plain
        # step shifts, the controlled step mixes the current state with its
        # T-th iterate and applies f once; detection then sees both the mix
        # and the state.
        theta = cfg.theta
        den = theta + 1
        w1 = theta / den
        w2 = 1 / den

        def init(s: State) -> tuple:
            x0 = s[0]
            return (x0, maps.step(mapdef, (x0,))[0])

        def plain(z: tuple) -> tuple:
            return (z[1], maps.step(mapdef, (z[1],))[0])

        def controlled(z: tuple) -> tuple:
            g = (z[1],)
            for _ in range(cfg.period):
                g = maps.step(mapdef, g)
            mix = w1 * z[1] + w2 * g[0]
            if not mix.is_finite():
                raise DivergenceError((mix,))
            return (mix, maps.step(mapdef, (mix,))[0])

        return _Adapter(init, plain, controlled,
                        present=lambda z: (z[1],))

    plain = lambda z: maps.step(mapdef, z)  # noqa: E731

    if cfg.scheme == "scalar-theta-two-term":
        ctrl = lambda z: controlled_step_scalar_theta(  # noqa: E731
            mapdef, cfg.theta, cfg.period, z)
    elif cfg.scheme == "pre-averaged":
        ctrl = lambda z: controlled_step_preaveraged(  # noqa: E731
            mapdef, cfg.theta, cfg.period, z)
    elif cfg.scheme in ("combination-of-iterates", "two-term"):
        ctrl = lambda z: controlled_step_combination(  # noqa: E731
            mapdef, cfg.theta, cfg.period, z)
    else:  # adaptive-scalar
        ctrl = lambda z: adaptive_scalar_step(  # noqa: E731
            mapdef, cfg.period, z, cfg.adaptive_magnitude)

    return _Adapter(identity, plain, ctrl, identity)


class _Track:
    __slots__ = ("index", "ring", "live", "found", "status", "record", "ends")

    def __init__(self, index: int, size: int):
        self.index = index
        self.ring: list = [None] * size
        self.live = True
        self.found = False
        self.status = "running"
        self.record: Optional[CycleRecord] = None
        self.ends: list = []  # internal states at recent sweep ends


def _freeze(track: _Track, err: Exception) -> None:
    track.live = False
    if not track.found:
        track.status = (
            "singular" if isinstance(err, SingularWeightError) else "escaped"
        )


def _minimal_period(points: tuple[State, ...], tol: Decimal) -> int:
    t = len(points)
    for d in range(1, t):
        if t % d:
            continue
        if all(
            abs(a - b) < tol
            for k in range(t)
            for a, b in zip(points[k], points[(k + d) % t])
        ):
            return d
    return t


def search(cfg: SearchConfig) -> SearchOutcome:
    """Run the three-phase search over all initial states in lockstep.

    Tracks never exchange data; the only coupling is the shared stop flag,
    which ends the search at the end of the first sweep in which any track
    detected a cycle (when ``stop_on_first`` is set).  Every track that
    detects within that same sweep still yields a record.
    """
    mapdef = maps.get_map(cfg.map_name)
    counter = _Counter()
    counted = _counting(mapdef, counter)
    ad = _build_adapter(counted, cfg)
    t = cfg.period
    eps = bignum.detection_epsilon()
    verify_tol = Decimal(10) ** (30 - bignum.precision())

    tracks = []
    for idx, state in enumerate(cfg.initial_states):
        tr = _Track(idx, t + 1)
        try:
            tr.ring[0] = ad.init(state)
        except DivergenceError as e:
            _freeze(tr, e)
        tracks.append(tr)

    def plain_pass(src: int, dst: int) -> None:
        for tr in tracks:
            if not tr.live:
                continue
            try:
                tr.ring[dst] = ad.plain(tr.ring[src])
            except DivergenceError as e:
                _freeze(tr, e)

    # Phase 1: fill the ring.
    for i in range(t):
        plain_pass(i, i + 1)
    # Phase 2: circular plain repeats.
    for _ in range(cfg.warmup):
        plain_pass(t, 0)
        for i in range(t):
            plain_pass(i, i + 1)

    # Phase 3: controlled sweeps with detection.
    records: list[CycleRecord] = []
    found_any = False
    sweeps_run = 0
    for sweep in range(cfg.max_sweeps):
        if not any(tr.live for tr in tracks):
            break
        sweeps_run = sweep + 1
        for tr in tracks:
            if not tr.live:
                continue
            try:
                tr.ring[0] = ad.controlled(tr.ring[t])
            except (DivergenceError, SingularWeightError) as e:
                _freeze(tr, e)
        for i in range(t):
            for tr in tracks:
                if not tr.live:
                    continue
                try:
                    z = ad.controlled(tr.ring[i])
                except (DivergenceError, SingularWeightError) as e:
                    _freeze(tr, e)
                    continue
                tr.ring[i + 1] = z
                if tr.found:
                    continue
                past = tr.ring[i + 1 - t]
                if all(abs(a - b) < eps for a, b in zip(z, past)):
                    tr.found = True
                    found_any = True
                    window = [tr.ring[k] for k in range(i + 2 - t, i + 2)]
                    points = tuple(ad.present(w) for w in window)
                    eta1 = points[0]
                    image = maps.iterate(counted, eta1, t)
                    residual = max(
                        abs(a - b) for a, b in zip(image, eta1)
                    )
                    gaps = tuple(
                        min(
                            max(abs(a - b) for a, b in zip(ad.present(e), p))
                            for p in points
                        )
                        for e in tr.ends
                    )
                    tr.record = CycleRecord(
                        points=points,
                        map_name=cfg.map_name,
                        scheme=cfg.scheme,
                        theta=(
                            cfg.theta.coefficients
                            if isinstance(cfg.theta, ControlPolynomial)
                            else cfg.theta
                        ),
                        sweep_index=sweep,
                        residual=residual,
                        minimal_period=_minimal_period(points, verify_tol),
                        initial_state_index=tr.index,
                        detection_state=z,
                        convergence_gaps=gaps,
                    )
                    records.append(tr.record)
        for tr in tracks:
            if tr.live:
                tr.ends.append(tr.ring[t])
                del tr.ends[:-4]
        if cfg.stop_on_first and found_any:
            break
        if all(tr.found or not tr.live for tr in tracks):
            break

    statuses = []
    for tr in tracks:
        if tr.found:
            statuses.append("found")
        elif tr.status in ("escaped", "singular"):
            statuses.append(tr.status)
        elif found_any and cfg.stop_on_first and sweeps_run < cfg.max_sweeps:
            statuses.append("stopped")
        else:
            statuses.append("exhausted")

    records.sort(key=lambda r: r.initial_state_index)
    return SearchOutcome(
        records=tuple(records),
        track_status=tuple(statuses),
        sweeps_run=sweeps_run,
        evaluations=counter.count,
        epsilon=eps,
        precision=bignum.precision(),
    )


def run_search(cfg: SearchConfig) -> list[CycleRecord]:
    """Cycle records only; :func:`search` returns the full outcome."""
    return list(search(cfg).records)


# --------------------------------------------------------------------------
# Gain doubling
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class DoublingAttempt:
    k: int
    theta: BigDec
    cycles_found: int
    sweeps_run: int
    track_status: tuple[str, ...]


@dataclass(frozen=True)
class ThetaDoublingResult:
    """Outcome of the doubling scan.  ``theta_found`` is None when every
    attempt came up empty; ``attempts`` always carries the per-k log."""

    theta_found: Optional[BigDec]
    records: tuple[CycleRecord, ...]
    attempts: tuple[DoublingAttempt, ...]

    @property
    def found(self) -> bool:
        return self.theta_found is not None


def theta_doubling_search(
    map_name: str,
    period: int,
    theta0: BigDec,
    k_max: int,
    template: Optional[SearchConfig] = None,
) -> ThetaDoublingResult:
    """Scan gains theta0 * 2^k for k = 0..k_max, stopping at the first k
    whose search yields a cycle.

    A sufficiently large scalar gain always stabilizes a cycle whose
    largest multiplier is real and negative, and the admissible gain window
    grows linearly with that multiplier, so doubling cannot step over it.
    ``template`` supplies the non-gain search settings; by default the
    map's cataloged initial grid for the period, 250 sweeps, warmup 3.
    """
    theta0 = Decimal(theta0)
    if theta0 <= 0:
        raise ValueError("theta0 must be positive")
    if k_max < 0:
        raise ValueError("k_max must be >= 0")

    mapdef = maps.get_map(map_name)
    if template is None:
        template = SearchConfig(
            map_name=map_name,
            period=period,
            scheme="scalar-theta-two-term",
            theta=theta0,
            initial_states=mapdef.grid_for(period),
        )

    attempts: list[DoublingAttempt] = []
    for k in range(k_max + 1):
        theta = theta0 * (Decimal(2) ** k)
        cfg = replace(
            template,
            map_name=map_name,
            period=period,
            scheme="scalar-theta-two-term",
            theta=theta,
        )
        outcome = search(cfg)
        attempts.append(
            DoublingAttempt(
                k=k,
                theta=theta,
                cycles_found=len(outcome.records),
                sweeps_run=outcome.sweeps_run,
                track_status=outcome.track_status,
            )
        )
        if outcome.records:
            return ThetaDoublingResult(theta, outcome.records, tuple(attempts))
    return ThetaDoublingResult(None, (), tuple(attempts))
