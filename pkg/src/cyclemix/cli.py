"""Manifest-driven command line runner.

Subcommands:

* ``run <manifest.json>`` executes a batch of cycle searches and writes,
  per search, a JSON result file with the found cycles and their stability
  reports; per found cycle, a CSV of the orbit, a plot-data CSV (cycle plus
  a plain-orbit background cloud), and optionally a rendered PNG; and
  finally a ``summary.json``.
* ``list-maps`` prints the catalog with cataloged periods and gains.
* ``analyze <cycle-file>`` re-runs the stability analysis on a stored
  cycle.
* ``verify-lemma1`` cross-checks the closed-form controlled Jacobian
  against the direct chain-rule product on random synthetic cycles.

Exit codes: 0 success; 1 validation problem (malformed manifest, unknown
map, bad values); 2 the run finished but at least one trajectory diverged
or hit a singular adaptive weight; 3 I/O failure.  Validation beats I/O
beats divergence when several apply.

All decimal values are serialized as strings with every digit kept, and
result files contain nothing time- or path-dependent, so a rerun of the
same manifest at the same precision is byte-identical.

The environment variable ``CYCLEMIX_PRECISION`` supplies the default
working precision when neither the command line nor the manifest sets
one.
"""

from __future__ import annotations

import argparse
import json
import os
import re
import sys
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Optional, Union

from . import analysis, bignum, control, engine, maps
from .analysis import StabilityReport
from .bignum import BigDec
from .control import ControlPolynomial
from .engine import CycleRecord, SearchConfig, SearchOutcome
from .maps import ExpressionError, State, UnknownMapError

ENV_PRECISION = "CYCLEMIX_PRECISION"

EXIT_OK = 0
EXIT_VALIDATION = 1
EXIT_DIVERGENCE = 2
EXIT_IO = 3


class ManifestError(ValueError):
    """The manifest (or a command line value) failed validation."""


# --------------------------------------------------------------------------
# Manifest
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class RunManifest:
    precision: int
    searches: tuple[SearchConfig, ...]
    output_dir: Path
    emit_plots: bool = True
    stop_on_first: bool = True

    def __post_init__(self):
        if self.precision < bignum.MIN_PRECISION:
            raise ManifestError(
                f"precision must be >= {bignum.MIN_PRECISION}, "
                f"got {self.precision}"
            )


def _env_precision() -> Optional[int]:
    raw = os.environ.get(ENV_PRECISION)
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise ManifestError(
            f"{ENV_PRECISION} must be an integer, got {raw!r}"
        ) from None


def _parse_theta(raw) -> Union[ControlPolynomial, BigDec]:
    try:
        if isinstance(raw, (list, tuple)):
            return ControlPolynomial(tuple(Decimal(str(c)) for c in raw))
        return Decimal(str(raw))
    except (InvalidOperation, ValueError) as err:
        raise ManifestError(f"bad theta value {raw!r}: {err}") from None


def _parse_states(raw, entry: str) -> tuple[State, ...]:
    if not isinstance(raw, list) or not raw:
        raise ManifestError(f"{entry}: initial_states must be a list of states")
    states = []
    for item in raw:
        coords = item if isinstance(item, (list, tuple)) else [item]
        try:
            states.append(tuple(Decimal(str(c)) for c in coords))
        except (InvalidOperation, ValueError):
            raise ManifestError(
                f"{entry}: bad initial state {item!r}"
            ) from None
    return tuple(states)


def _register_custom_maps(entries) -> None:
    if not isinstance(entries, list):
        raise ManifestError("custom_maps must be a list")
    for i, entry in enumerate(entries):
        if not isinstance(entry, dict):
            raise ManifestError(f"custom_maps[{i}] must be an object")
        try:
            maps.register_expression_map(
                name=entry["name"],
                dimension=entry.get("dimension", 1),
                components=entry["components"],
                parameters=entry.get("parameters"),
                initial_states=entry.get("initial_states"),
                default_theta=entry.get("default_theta", "1"),
                default_period=entry.get("default_period", 1),
                replace=True,
            )
        except KeyError as err:
            raise ManifestError(
                f"custom_maps[{i}] is missing the {err.args[0]!r} field"
            ) from None
        except (ExpressionError, ValueError) as err:
            raise ManifestError(f"custom_maps[{i}]: {err}") from None


def load_manifest(
    path,
    precision: Optional[int] = None,
    output_dir: Optional[str] = None,
    stop_on_first: Optional[bool] = None,
) -> RunManifest:
    """Read and validate a manifest file; keyword arguments are the
    command-line overrides.  Raises ManifestError for content problems and
    OSError for unreadable files.  Sets the working precision as a side
    effect (search validation is precision-dependent)."""
    text = Path(path).read_text()
    try:
        data = json.loads(text, parse_float=str)
    except json.JSONDecodeError as err:
        raise ManifestError(f"manifest is not valid JSON: {err}") from None
    if not isinstance(data, dict):
        raise ManifestError("manifest must be a JSON object")

    p = precision or data.get("precision") or _env_precision() \
        or bignum.DEFAULT_PRECISION
    if not isinstance(p, int):
        raise ManifestError(f"precision must be an integer, got {p!r}")
    if p < bignum.MIN_PRECISION:
        raise ManifestError(
            f"precision must be >= {bignum.MIN_PRECISION}, got {p}"
        )
    bignum.configure(p)

    _register_custom_maps(data.get("custom_maps", []))

    stop = (
        stop_on_first
        if stop_on_first is not None
        else bool(data.get("stop_on_first", True))
    )

    raw_searches = data.get("searches", [])
    if not isinstance(raw_searches, list):
        raise ManifestError("searches must be a list")
    searches = []
    for i, entry in enumerate(raw_searches):
        label = f"searches[{i}]"
        if not isinstance(entry, dict):
            raise ManifestError(f"{label} must be an object")
        try:
            map_name = entry["map"]
            period = entry["period"]
        except KeyError as err:
            raise ManifestError(
                f"{label} is missing the {err.args[0]!r} field"
            ) from None
        if not isinstance(period, int):
            raise ManifestError(f"{label}: period must be an integer")
        try:
            mapdef = maps.get_map(map_name)
        except UnknownMapError as err:
            raise ManifestError(f"{label}: {err}") from None

        scheme = entry.get("scheme", "scalar-theta-two-term")
        theta = entry.get("theta")
        if theta is not None:
            theta = _parse_theta(theta)
        elif scheme != "adaptive-scalar":
            theta = mapdef.theta_for(period)
            if theta is None:
                raise ManifestError(
                    f"{label}: no cataloged gain for {map_name!r} at "
                    f"period {period}; set \"theta\" explicitly"
                )

        raw_states = entry.get("initial_states")
        states = (
            _parse_states(raw_states, label)
            if raw_states is not None
            else mapdef.grid_for(period)
        )

        try:
            searches.append(
                SearchConfig(
                    map_name=map_name,
                    period=period,
                    scheme=scheme,
                    theta=theta,
                    initial_states=states,
                    max_sweeps=entry.get("max_sweeps", 250),
                    warmup=entry.get("warmup", 3),
                    stop_on_first=stop,
                    adaptive_magnitude=bool(
                        entry.get("adaptive_magnitude", False)
                    ),
                )
            )
        except (ValueError, InvalidOperation) as err:
            raise ManifestError(f"{label}: {err}") from None

    out = Path(output_dir or data.get("output_dir") or "results")
    return RunManifest(
        precision=p,
        searches=tuple(searches),
        output_dir=out,
        emit_plots=bool(data.get("emit_plots", True)),
        stop_on_first=stop,
    )


# --------------------------------------------------------------------------
# Serialization
# --------------------------------------------------------------------------


def _dump_json(path: Path, payload) -> None:
    path.write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _pair_payload(pair) -> list[str]:
    return [str(pair[0]), str(pair[1])]


def _theta_payload(theta):
    if theta is None:
        return None
    if isinstance(theta, tuple):
        return [str(c) for c in theta]
    return str(theta)


def _report_payload(report: Optional[StabilityReport]):
    if report is None:
        return None
    return {
        "open_multipliers": [
            _pair_payload(p) for p in report.open_multipliers
        ],
        "controlled_multipliers": [
            _pair_payload(p) for p in report.controlled_multipliers
        ],
        "stability_values": [
            _pair_payload(p) for p in report.stability_values
        ],
        "verdict": report.verdict,
        "lemma1_residual": str(report.lemma1_residual),
        "cross_check_residual": str(report.cross_check_residual),
    }


def record_payload(
    record: CycleRecord,
    report: Optional[StabilityReport],
    precision: int,
    epsilon: BigDec,
) -> dict:
    return {
        "map": record.map_name,
        "scheme": record.scheme,
        "theta": _theta_payload(record.theta),
        "period": len(record.points),
        "sweep_index": record.sweep_index,
        "initial_state_index": record.initial_state_index,
        "minimal_period": record.minimal_period,
        "residual": str(record.residual),
        "detection_state": [str(c) for c in record.detection_state],
        "convergence_gaps": [str(g) for g in record.convergence_gaps],
        "points": [[str(c) for c in p] for p in record.points],
        "precision": precision,
        "epsilon": str(epsilon),
        "stability": _report_payload(report),
    }


def emit_cycle_json(
    record: CycleRecord,
    report: Optional[StabilityReport],
    path,
    precision: int,
    epsilon: BigDec,
) -> None:
    _dump_json(Path(path), record_payload(record, report, precision, epsilon))


def read_cycle_json(path):
    """Parse a cycle JSON file back into (CycleRecord, StabilityReport or
    None, metadata dict).  Exact inverse of :func:`emit_cycle_json`."""
    data = json.loads(Path(path).read_text())
    theta = data["theta"]
    if isinstance(theta, list):
        theta = tuple(Decimal(c) for c in theta)
    elif theta is not None:
        theta = Decimal(theta)
    record = CycleRecord(
        points=tuple(
            tuple(Decimal(c) for c in p) for p in data["points"]
        ),
        map_name=data["map"],
        scheme=data["scheme"],
        theta=theta,
        sweep_index=data["sweep_index"],
        residual=Decimal(data["residual"]),
        minimal_period=data["minimal_period"],
        initial_state_index=data["initial_state_index"],
        detection_state=tuple(
            Decimal(c) for c in data["detection_state"]
        ),
        convergence_gaps=tuple(
            Decimal(g) for g in data["convergence_gaps"]
        ),
    )
    rep = data["stability"]
    report = None
    if rep is not None:
        pairs = lambda key: tuple(  # noqa: E731
            (Decimal(p[0]), Decimal(p[1])) for p in rep[key]
        )
        report = StabilityReport(
            open_multipliers=pairs("open_multipliers"),
            controlled_multipliers=pairs("controlled_multipliers"),
            stability_values=pairs("stability_values"),
            verdict=rep["verdict"],
            lemma1_residual=Decimal(rep["lemma1_residual"]),
            cross_check_residual=Decimal(rep["cross_check_residual"]),
        )
    meta = {"precision": data["precision"], "epsilon": Decimal(data["epsilon"])}
    return record, report, meta


def emit_cycle_csv(record: CycleRecord, path) -> None:
    """Orbit-ordered delimited dump: header ``index,x,y`` (``y`` omitted
    for scalar states), one full-precision row per cycle point."""
    m = len(record.points[0])
    lines = ["index,x" if m == 1 else "index,x,y"]
    for i, point in enumerate(record.points):
        lines.append(",".join([str(i)] + [str(c) for c in point]))
    Path(path).write_text("\n".join(lines) + "\n")


def read_cycle_csv(path) -> list[State]:
    lines = Path(path).read_text().splitlines()
    if not lines or not lines[0].startswith("index,"):
        raise ManifestError(f"{path} is not a cycle CSV file")
    points = []
    for line in lines[1:]:
        if not line:
            continue
        cells = line.split(",")
        try:
            points.append(tuple(Decimal(c) for c in cells[1:]))
        except InvalidOperation:
            raise ManifestError(f"bad CSV row {line!r}") from None
    if not points:
        raise ManifestError(f"{path} contains no cycle points")
    return points


def _emit_plot_data(path: Path, background, cycle) -> None:
    lines = ["role,index,x,y"]
    for i, (x, y) in enumerate(background):
        lines.append(f"background,{i},{x},{y}")
    for i, (x, y) in enumerate(cycle):
        lines.append(f"cycle,{i},{x},{y}")
    path.write_text("\n".join(lines) + "\n")


# --------------------------------------------------------------------------
# Stability report construction
# --------------------------------------------------------------------------


def report_for_record(record: CycleRecord) -> Optional[StabilityReport]:
    """Analyze a record with the coefficients it was produced under.

    Scalar gains convert to their two-term coefficient vector.  Adaptive
    runs carry no fixed gain; they are analyzed with the gain the scheme
    tunes itself to at the found cycle (the negated cycle multiplier),
    which is also the placement that zeroes the controlled multiplier.
    Returns None when no admissible coefficient vector exists (multiplier
    exactly 1).
    """
    mapdef = maps.get_map(record.map_name)
    period = len(record.points)
    theta = record.theta
    try:
        if theta is None:
            j = analysis.cycle_jacobian(mapdef, record.points)
            theta_poly = control.scalar_to_polynomial(-j[0][0])
        elif isinstance(theta, tuple):
            theta_poly = ControlPolynomial(theta)
        else:
            theta_poly = control.scalar_to_polynomial(theta)
    except (ValueError, InvalidOperation):
        return None
    return analysis.stability_verdict(
        mapdef, record.points, theta_poly, period
    )


# --------------------------------------------------------------------------
# Manifest execution
# --------------------------------------------------------------------------


def _safe_name(name: str) -> str:
    return re.sub(r"[^A-Za-z0-9_-]+", "-", name)


def run_manifest(manifest: RunManifest) -> int:
    """Execute every search, write all result files, return the exit code
    (0, or 2 when any trajectory escaped or went singular)."""
    bignum.configure(manifest.precision)
    out = manifest.output_dir
    out.mkdir(parents=True, exist_ok=True)

    divergence = False
    summary_entries = []
    total_records = 0
    epsilon = bignum.detection_epsilon()

    for idx, cfg in enumerate(manifest.searches):
        outcome = engine.search(cfg)
        if any(s in ("escaped", "singular") for s in outcome.track_status):
            divergence = True
        mapdef = maps.get_map(cfg.map_name)
        base = f"search{idx:02d}_{_safe_name(cfg.map_name)}_T{cfg.period}"

        record_payloads = []
        for record in outcome.records:
            report = report_for_record(record)
            payload = record_payload(
                record, report, outcome.precision, outcome.epsilon
            )
            stem = f"{base}_iv{record.initial_state_index}"
            emit_cycle_csv(record, out / f"{stem}.csv")
            _dump_json(out / f"{stem}.json", payload)

            from . import plotting  # deferred: pulls in matplotlib

            orbit = plotting.background_orbit(
                mapdef,
                cfg.initial_states[record.initial_state_index],
                cfg.period,
            )
            background = plotting.delay_pairs(
                orbit, mapdef.dimension, cyclic=False
            )
            cycle_pairs = plotting.delay_pairs(
                record.points, mapdef.dimension, cyclic=True
            )
            _emit_plot_data(
                out / f"{stem}_plot.csv", background, cycle_pairs
            )
            if manifest.emit_plots:
                xlabel, ylabel = mapdef.axis_labels
                plotting.render_cycle_figure(
                    out / f"{stem}.png",
                    background,
                    cycle_pairs,
                    title=(
                        f"{cfg.map_name}: {cfg.period}-cycle "
                        f"(state {record.initial_state_index})"
                    ),
                    xlabel=xlabel,
                    ylabel=ylabel,
                )
            record_payloads.append(payload)
            total_records += 1

        result_file = f"{base}.json"
        _dump_json(
            out / result_file,
            {
                "config": {
                    "map": cfg.map_name,
                    "period": cfg.period,
                    "scheme": cfg.scheme,
                    "theta": _theta_payload(
                        cfg.theta.coefficients
                        if isinstance(cfg.theta, ControlPolynomial)
                        else cfg.theta
                    ),
                    "initial_states": [
                        [str(c) for c in s] for s in cfg.initial_states
                    ],
                    "max_sweeps": cfg.max_sweeps,
                    "warmup": cfg.warmup,
                    "stop_on_first": cfg.stop_on_first,
                },
                "precision": outcome.precision,
                "epsilon": str(outcome.epsilon),
                "sweeps_run": outcome.sweeps_run,
                "evaluations": outcome.evaluations,
                "track_status": list(outcome.track_status),
                "records": record_payloads,
            },
        )
        summary_entries.append(
            {
                "file": result_file,
                "map": cfg.map_name,
                "period": cfg.period,
                "scheme": cfg.scheme,
                "cycles_found": len(outcome.records),
                "sweep_indexes": [
                    r.sweep_index for r in outcome.records
                ],
                "track_status": list(outcome.track_status),
                "sweeps_run": outcome.sweeps_run,
                "evaluations": outcome.evaluations,
            }
        )

    _dump_json(
        out / "summary.json",
        {
            "precision": manifest.precision,
            "epsilon": str(epsilon),
            "total_cycles": total_records,
            "divergence": divergence,
            "searches": summary_entries,
        },
    )
    return EXIT_DIVERGENCE if divergence else EXIT_OK


# --------------------------------------------------------------------------
# Subcommands
# --------------------------------------------------------------------------


def _cmd_run(args) -> int:
    manifest = load_manifest(
        args.manifest,
        precision=args.precision,
        output_dir=args.output_dir,
        stop_on_first=args.stop_on_first,
    )
    return run_manifest(manifest)


def _cmd_list_maps(args) -> int:
    for name in maps.map_names():
        mapdef = maps.get_map(name)
        params = ", ".join(
            f"{k}={v}" for k, v in mapdef.parameters.items()
        )
        periods = ", ".join(
            f"T={t} (theta {gain}, {niv} starts)"
            for t, (gain, niv) in mapdef.schedule.items()
        )
        print(f"{name}  [{mapdef.dimension}-D]")
        if params:
            print(f"  parameters: {params}")
        print(f"  cataloged:  {periods}")
    return EXIT_OK


def _cmd_analyze(args) -> int:
    _configure_from(args)
    path = Path(args.cycle_file)
    if path.suffix == ".json":
        record, _, _ = read_cycle_json(path)
        points = record.points
    else:
        points = tuple(read_cycle_csv(path))
    period = args.period if args.period else len(points)
    if period != len(points):
        raise ManifestError(
            f"--period {period} does not match the {len(points)} stored "
            "cycle points"
        )
    mapdef = maps.get_map(args.map)

    if args.scalar_theta is not None:
        theta = control.scalar_to_polynomial(Decimal(args.scalar_theta))
    else:
        try:
            coeffs = tuple(
                Decimal(c) for c in args.theta.split(",") if c.strip()
            )
            theta = ControlPolynomial(coeffs)
        except (InvalidOperation, ValueError) as err:
            raise ManifestError(f"bad --theta: {err}") from None

    report = analysis.stability_verdict(mapdef, points, theta, period)
    print(json.dumps(_report_payload(report), indent=2, sort_keys=True))
    return EXIT_OK


def _cmd_verify_lemma1(args) -> int:
    _configure_from(args)
    gaps = analysis.lemma1_residuals(args.trials, args.seed)
    tol = Decimal(10) ** (20 - bignum.precision())
    worst = max(gaps)
    ok = worst < tol
    print(
        f"{'PASS' if ok else 'FAIL'}: {args.trials} synthetic cycles, "
        f"max closed-vs-direct gap {worst:.3E} "
        f"(tolerance {tol:.0E} at precision {bignum.precision()})"
    )
    return EXIT_OK if ok else EXIT_VALIDATION


def _configure_from(args) -> None:
    p = args.precision or _env_precision() or bignum.DEFAULT_PRECISION
    if p < bignum.MIN_PRECISION:
        raise ManifestError(
            f"precision must be >= {bignum.MIN_PRECISION}, got {p}"
        )
    bignum.configure(p)


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="cyclemix",
        description=(
            "Locate and stabilize periodic orbits of chaotic maps with "
            "high-precision controlled iteration."
        ),
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_run = sub.add_parser("run", help="execute a search manifest")
    p_run.add_argument("manifest", help="path to the manifest JSON file")
    p_run.add_argument("--precision", type=int, default=None,
                       help="override the working precision")
    p_run.add_argument("--output-dir", default=None,
                       help="override the output directory")
    p_run.add_argument("--stop-on-first", default=None,
                       action=argparse.BooleanOptionalAction,
                       help="stop each search at the first sweep that "
                            "finds a cycle")

    sub.add_parser("list-maps", help="print the map catalog")

    p_an = sub.add_parser("analyze",
                          help="stability report for a stored cycle")
    p_an.add_argument("cycle_file", help="cycle CSV or JSON file")
    p_an.add_argument("--map", required=True, help="map name")
    p_an.add_argument("--period", type=int, default=None,
                      help="cycle length (default: number of stored points)")
    group = p_an.add_mutually_exclusive_group(required=True)
    group.add_argument("--theta",
                       help="comma-separated coefficient vector")
    group.add_argument("--scalar-theta",
                       help="scalar gain (converted to its two-term vector)")
    p_an.add_argument("--precision", type=int, default=None)

    p_lm = sub.add_parser("verify-lemma1",
                          help="closed form vs direct product on random "
                               "synthetic cycles")
    p_lm.add_argument("--trials", type=int, default=50)
    p_lm.add_argument("--seed", type=int, default=0)
    p_lm.add_argument("--precision", type=int, default=None)

    return parser


_COMMANDS = {
    "run": _cmd_run,
    "list-maps": _cmd_list_maps,
    "analyze": _cmd_analyze,
    "verify-lemma1": _cmd_verify_lemma1,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return _COMMANDS[args.command](args)
    except (ManifestError, UnknownMapError, ExpressionError, ValueError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
