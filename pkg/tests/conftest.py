"""Shared fixtures: precision management, reference cycles, digit helpers."""

import json
from decimal import Decimal
from pathlib import Path

import pytest
from hypothesis import HealthCheck, settings

from cyclemix import bignum, engine, maps

DATA_DIR = Path(__file__).parent / "data"

settings.register_profile(
    "cyclemix",
    deadline=None,
    suppress_health_check=[HealthCheck.function_scoped_fixture],
)
settings.load_profile("cyclemix")


@pytest.fixture(autouse=True)
def _default_precision():
    """Every test starts from (and restores) the library default of 250 digits."""
    bignum.configure(250)
    yield
    bignum.configure(250)


@pytest.fixture(scope="session")
def reference_cycles():
    """Recorded cycle detections used as fixed expectations across modules."""
    with open(DATA_DIR / "golden_cycles.json", encoding="utf-8") as fh:
        return json.load(fh)


def rows_for(rows, map_name, period):
    return [r for r in rows if r["map"] == map_name and r["period"] == period]


def matching_digits(a: Decimal, b: Decimal) -> int:
    """Count the leading significant digits on which a and b agree."""
    a, b = Decimal(a), Decimal(b)
    if a == b:
        return 10_000
    scale = max(abs(a), abs(b))
    return int((scale / abs(a - b)).log10())


@pytest.fixture(scope="session")
def henon_short_outcome():
    """One shared Henon period-28 search; several test modules inspect it."""
    bignum.configure(250)
    md = maps.get_map("henon")
    cfg = engine.SearchConfig(
        "henon", 28, "scalar-theta-two-term", md.theta_for(28), md.grid_for(28)
    )
    outcome = engine.search(cfg)
    bignum.configure(250)
    return outcome
