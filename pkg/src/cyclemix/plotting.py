"""Static scatter rendering of found cycles.

Each figure shows the detected cycle as solid dots over a grey background
cloud of plain (uncontrolled) orbit points started from the same initial
state, so the cycle is visible inside the attractor it was pulled from.
One-dimensional maps are drawn in delay coordinates (x_n, x_{n+1}).

Uses the non-interactive Agg backend; output files only.
"""

from __future__ import annotations

from decimal import Decimal

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from . import maps  # noqa: E402
from .maps import DivergenceError, MapDef, State  # noqa: E402

#: Minimum number of background orbit points.
BACKGROUND_POINTS = 200


def background_orbit(
    mapdef: MapDef, initial_state: State, period: int
) -> list[State]:
    """Plain forward orbit from the given state, long enough to sketch the
    attractor: (200 // T + 1) * T points (always at least 200).

    Truncated early if the orbit diverges.
    """
    repeats = BACKGROUND_POINTS // period + 1
    orbit = []
    state = tuple(Decimal(c) for c in initial_state)
    try:
        for _ in range(repeats * period):
            state = maps.step(mapdef, state)
            orbit.append(state)
    except DivergenceError:
        pass
    return orbit


def delay_pairs(points, dimension: int, cyclic: bool) -> list[tuple]:
    """Plot coordinates for a point sequence.

    Planar states plot as themselves; scalar states plot as consecutive
    (x_n, x_{n+1}) pairs, wrapping around when the sequence is a cycle.
    """
    pts = list(points)
    if dimension == 2:
        return [(p[0], p[1]) for p in pts]
    if cyclic:
        return [
            (pts[i][0], pts[(i + 1) % len(pts)][0]) for i in range(len(pts))
        ]
    return [(pts[i][0], pts[i + 1][0]) for i in range(len(pts) - 1)]


def render_cycle_figure(
    path,
    background: list[tuple],
    cycle: list[tuple],
    title: str,
    xlabel: str,
    ylabel: str,
) -> None:
    """Write one scatter figure to ``path``.

    The PNG metadata is stripped of the library version stamp so identical
    inputs produce byte-identical files.
    """
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    if background:
        ax.plot(
            [float(x) for x, _ in background],
            [float(y) for _, y in background],
            linestyle="none",
            marker="x",
            markersize=3,
            color="0.65",
            label="plain orbit",
        )
    ax.plot(
        [float(x) for x, _ in cycle],
        [float(y) for _, y in cycle],
        linestyle="none",
        marker=".",
        markersize=7,
        color="tab:blue",
        label="cycle",
    )
    ax.set_title(title)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.legend(loc="upper right", framealpha=0.9)
    fig.tight_layout()
    fig.savefig(path, dpi=150, metadata={"Software": None})
    plt.close(fig)
