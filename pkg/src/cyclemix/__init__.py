"""High-precision location and stabilization of periodic orbits in
chaotic maps.

The package iterates a controlled companion of a chaotic map, built as a
normalized mix of the map's iterates, whose dynamics keep the original
T-periodic orbits but make unstable ones attracting.  Running the
controlled system forward at a few hundred decimal digits then reads off
cycle points to nearly full precision, and the stability theory is
checked a posteriori through cycle multipliers.

Layout: :mod:`cyclemix.bignum` (decimal context and kernels),
:mod:`cyclemix.maps` (map catalog plus expression-defined maps),
:mod:`cyclemix.control` (coefficient constructors), :mod:`cyclemix.engine`
(search protocol), :mod:`cyclemix.analysis` (Jacobians, multipliers,
verdicts), :mod:`cyclemix.cli` (manifest runner and serialization),
:mod:`cyclemix.plotting` (figure rendering).
"""

from . import bignum
from .analysis import (
    StabilityReport,
    controlled_jacobian_closed_form,
    controlled_jacobian_direct,
    cycle_jacobian,
    multipliers,
    stability_verdict,
)
from .bignum import BigDec, configure, detection_epsilon, precision
from .control import (
    ControlPolynomial,
    MultiplierEstimate,
    NonStabilizableError,
    chebyshev_one_sided,
    chebyshev_symmetric,
    evaluate_r,
    from_complex_pair,
    from_exact_multipliers,
    from_left_half_plane,
    polyak_coefficients,
    scalar_to_polynomial,
    stability_value,
)
from .engine import (
    CycleRecord,
    SearchConfig,
    SearchOutcome,
    SingularWeightError,
    adaptive_scalar_step,
    controlled_step_combination,
    controlled_step_preaveraged,
    controlled_step_scalar_theta,
    run_search,
    search,
    theta_doubling_search,
)
from .maps import (
    DivergenceError,
    MapDef,
    UnknownMapError,
    get_map,
    iterate,
    jacobian,
    map_names,
    register_expression_map,
    step,
    unregister_map,
)

__version__ = "0.1.0"

__all__ = [
    "BigDec",
    "ControlPolynomial",
    "CycleRecord",
    "DivergenceError",
    "MapDef",
    "MultiplierEstimate",
    "NonStabilizableError",
    "SearchConfig",
    "SearchOutcome",
    "SingularWeightError",
    "StabilityReport",
    "UnknownMapError",
    "adaptive_scalar_step",
    "bignum",
    "chebyshev_one_sided",
    "chebyshev_symmetric",
    "configure",
    "controlled_jacobian_closed_form",
    "controlled_jacobian_direct",
    "controlled_step_combination",
    "controlled_step_preaveraged",
    "controlled_step_scalar_theta",
    "cycle_jacobian",
    "detection_epsilon",
    "evaluate_r",
    "from_complex_pair",
    "from_exact_multipliers",
    "from_left_half_plane",
    "get_map",
    "iterate",
    "jacobian",
    "map_names",
    "multipliers",
    "polyak_coefficients",
    "precision",
    "register_expression_map",
    "run_search",
    "scalar_to_polynomial",
    "search",
    "stability_value",
    "stability_verdict",
    "step",
    "theta_doubling_search",
    "unregister_map",
]
