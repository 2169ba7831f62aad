"""Command-line interface.

Every command writes its result as CSV (default) or JSON to ``--out`` or
stdout, and a run manifest as JSON next to the result (``<out>.manifest.json``)
or on stderr. Settings come from, in decreasing precedence: command-line
flags, the ``--config`` file, the ``QINSIM_SEED`` environment variable (seed
only) and built-in defaults.

Exit status: 0 on success, 1 when inputs are invalid, 2 on bad usage.
"""
from __future__ import annotations

import argparse
import csv
import datetime as dt
import hashlib
import io
import json
import math
import os
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

from . import __version__
from .config import (
    ConfigError,
    dumps,
    load_config,
    network_from_dict,
    network_to_dict,
    sim_from_dict,
)
from .linkbudget import (
    SECONDS_PER_CENTURY,
    channel_transmittance,
    expected_detections,
    fiber_transmittance,
    link_budget,
)
from .model import BsmParams, ChannelParams, EpsParams, LinkKind, MemoryParams, ScenarioId
from .orbit import (
    EARTH_RADIUS_KM,
    GroundSite,
    Orbit,
    dual_visibility_windows,
    max_ground_separation_km,
    visibility_windows,
)
from .scenarios import (
    DESCRIPTIONS,
    ScenarioError,
    ScenarioParams,
    SATELLITE_COUNT,
    build_scenario,
    compare_scenarios,
    tradeoff_record,
)
from .sim import (
    SimConfig,
    SimulationError,
    direct_template,
    estimate_rate,
    fiber_chain,
    repeater_template,
    run_simulation,
    sweep_distance,
)
from .swapchain import (
    ChainConfig,
    SwapStrategy,
    classify_scaling,
    memoryless_rate_hz,
    single_shot_e2e_prob,
)

SEED_ENV = "QINSIM_SEED"


class UsageError(Exception):
    pass


@dataclass(frozen=True)
class RunManifest:
    tool_version: str
    config_digest: str
    seed: int | None
    timestamp: str
    subcommand: str
    argv: tuple[str, ...]

    def to_json(self) -> str:
        d = asdict(self)
        d["argv"] = list(self.argv)
        return json.dumps(d, indent=2) + "\n"


def config_digest(text: bytes) -> str:
    return hashlib.sha256(text).hexdigest()


# -- output ------------------------------------------------------------------------


def _fmt(value, precision):
    if isinstance(value, bool) or value is None:
        return "" if value is None else str(value).lower()
    if isinstance(value, float):
        return repr(value) if precision is None else format(value, f".{precision}g")
    if hasattr(value, "value"):
        return str(value.value)
    return str(value)


def _round(value, precision):
    if precision is None:
        return value
    if isinstance(value, float) and math.isfinite(value):
        return float(format(value, f".{precision}g"))
    if isinstance(value, dict):
        return {k: _round(v, precision) for k, v in value.items()}
    if isinstance(value, list):
        return [_round(v, precision) for v in value]
    return value


def render(rows: list[dict], columns: list[str], fmt: str, precision=None) -> str:
    if fmt == "json":
        clean = [
            {k: (v.value if hasattr(v, "value") else v) for k, v in row.items()}
            for row in rows
        ]
        return json.dumps(_round(clean, precision), indent=2, allow_nan=True) + "\n"
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(row.get(c), precision) for c in columns])
    return buf.getvalue()


class _Run:
    """Output plumbing shared by every subcommand."""

    def __init__(self, args, argv):
        self.args = args
        self.argv = tuple(argv)
        self.digest: str | None = None
        self.seed: int | None = None
        self.notes: list[str] = []

    def note(self, text: str):
        self.notes.append(text)

    def emit(self, text: str):
        args = self.args
        manifest = RunManifest(
            tool_version=__version__,
            config_digest=self.digest or config_digest(self._flags_bytes()),
            seed=self.seed,
            timestamp=dt.datetime.now(dt.timezone.utc).isoformat(timespec="seconds"),
            subcommand=args.command,
            argv=self.argv,
        )
        for line in self.notes:
            print(line, file=sys.stderr)
        if args.out:
            out = Path(args.out)
            out.write_text(text)
            Path(f"{out}.manifest.json").write_text(manifest.to_json())
        else:
            sys.stdout.write(text)
            sys.stderr.write(manifest.to_json())

    def _flags_bytes(self) -> bytes:
        flags = {k: v for k, v in sorted(vars(self.args).items()) if k != "func"}
        return json.dumps(flags, sort_keys=True, default=str).encode()


def _seed(args, file_data=None) -> int:
    if getattr(args, "seed", None) is not None:
        return args.seed
    if file_data and "seed" in file_data.get("sim", {}):
        return int(file_data["sim"]["seed"])
    env = os.environ.get(SEED_ENV)
    if env:
        try:
            return int(env)
        except ValueError:
            raise UsageError(f"{SEED_ENV} must be an integer, got {env!r}") from None
    return 0


# -- subcommands ---------------------------------------------------------------------


def cmd_linkbudget(args, run: _Run) -> str:
    kind = LinkKind(args.kind)
    optical = kind.is_optical
    channel = ChannelParams(
        kind,
        fiber_alpha_db_per_km=args.alpha,
        wavelength_m=args.wavelength_m,
        tx_aperture_m=args.tx_aperture_m if optical else None,
        rx_aperture_m=args.rx_aperture_m if optical else None,
        atmospheric_penalty_db=args.atmospheric_db,
        pointing_loss_db=args.pointing_db,
        system_loss_db=args.system_db,
        detector_efficiency=args.detector_efficiency,
    )
    rows = []
    for d in args.distance_km:
        key = {"range_km": d} if optical else {"length_km": d}
        budget = link_budget(channel, **key)
        t = float(channel_transmittance(channel, **key))
        row = asdict(budget)
        row.update(total_db=budget.total_db, transmittance=t)
        if args.source_rate_hz is not None:
            row["expected_detections"] = expected_detections(
                args.source_rate_hz, t, args.duration_s
            )
        rows.append(row)
    columns = ["kind", "distance_km", "geometric_db", "atmospheric_db", "pointing_db",
               "system_db", "detector_db", "total_db", "transmittance"]
    if args.source_rate_hz is not None:
        columns.append("expected_detections")
    return render(rows, columns, args.format, args.precision)


def _site_arg(text: str) -> GroundSite:
    try:
        parts = [float(x) for x in text.split(",")]
        return GroundSite(*parts)
    except (TypeError, ValueError) as exc:
        raise argparse.ArgumentTypeError(f"expected LAT,LON[,ALT_M]: {exc}") from None


def _east_of(site: GroundSite, distance_km: float) -> GroundSite:
    """Destination ``distance_km`` due east of ``site`` along a great circle."""
    lat = math.radians(site.latitude_deg)
    delta = distance_km / EARTH_RADIUS_KM
    lat2 = math.asin(math.sin(lat) * math.cos(delta))
    dlon = math.atan2(math.sin(delta) * math.cos(lat), math.cos(delta) - math.sin(lat) * math.sin(lat2))
    lon2 = (site.longitude_deg + math.degrees(dlon) + 180.0) % 360.0 - 180.0
    return GroundSite(math.degrees(lat2), lon2)


def cmd_passes(args, run: _Run) -> str:
    orbit = Orbit(args.alt_km, args.inclination_deg, args.raan_deg % 360.0,
                  args.anomaly_deg % 360.0)
    site_a = args.site_a
    if args.site_b is not None:
        site_b = args.site_b
    elif args.sep_km is not None:
        site_b = _east_of(site_a, args.sep_km)
    else:
        site_b = None
    t1 = args.t0 + args.span_s
    label = {"dual": "A+B", "a": "A", "b": "B"}[args.mode]
    if args.mode == "dual":
        if site_b is None:
            raise UsageError("dual windows need --site-b or --sep-km")
        windows = dual_visibility_windows(orbit, site_a, site_b, args.mask_deg, args.t0,
                                          t1, args.step_s)
        if args.alt_km > 0 and 0 <= args.mask_deg < 90:
            run.note(f"dual-visibility bound: "
                     f"{max_ground_separation_km(args.alt_km, args.mask_deg):.1f} km")
    else:
        site = site_a if args.mode == "a" else site_b
        if site is None:
            raise UsageError("site B windows need --site-b or --sep-km")
        windows = visibility_windows(orbit, site, args.mask_deg, args.t0, t1, args.step_s)
    columns = ["site_or_pair", "start_s", "end_s", "duration_s", "max_elevation_deg"]
    rows = [
        dict(zip(columns, (label, w.start_s, w.end_s, w.duration_s, w.max_elevation_deg)))
        for w in windows
    ]
    return render(rows, columns, args.format, args.precision)


def _analytic_chain(args, distance_km, n):
    t_seg = float(fiber_transmittance(distance_km / n, args.alpha))
    t_seg *= args.heralding_efficiency * args.detector_efficiency
    chain = ChainConfig(n, (t_seg,) * n, BsmParams(args.q, args.v), args.source_rate_hz)
    rate = memoryless_rate_hz(chain)
    return {
        "distance_km": distance_km,
        "n_segments": n,
        "per_segment_transmittance": t_seg,
        "single_shot_prob": single_shot_e2e_prob(chain),
        "rate_hz": rate,
        "per_century": rate * SECONDS_PER_CENTURY,
    }


def cmd_chain(args, run: _Run) -> str:
    distances = args.sweep if args.sweep else [args.distance_km]
    if distances[0] is None:
        raise UsageError("chain needs --distance-km or --sweep")
    rows = []
    for d in distances:
        n = args.n if args.segment_km is None else max(1, round(d / args.segment_km))
        rows.append(_analytic_chain(args, d, n))
    if len(rows) == 1:
        r = rows[0]
        run.note(f"rate {r['rate_hz']:.6g} Hz, ≈{r['per_century']:.2g} per century")
    elif len(rows) >= 4 and all(r["rate_hz"] > 0 for r in rows):
        fit = classify_scaling(distances, [r["rate_hz"] for r in rows])
        run.note(f"scaling: {fit.model.value} (decay {fit.decay_db_per_km:.4g} dB/km, "
                 f"exponent {fit.exponent:.4g})")
    columns = ["distance_km", "n_segments", "per_segment_transmittance",
               "single_shot_prob", "rate_hz", "per_century"]
    return render(rows, columns, args.format, args.precision)


def _network_for(args, run: _Run):
    """Network and chain from --config, --scenario or --segments-km."""
    chosen = [x for x in (args.config, args.scenario, args.segments_km) if x]
    if len(chosen) != 1:
        raise UsageError("give exactly one of --config, --scenario, --segments-km")
    data = {}
    if args.config:
        data, digest = load_config(args.config)
        run.digest = digest
        network, binding = network_from_dict(data)
        if binding is None:
            raise ConfigError(f"{args.config}: no [chain] section to simulate")
    elif args.scenario:
        built = build_scenario(args.scenario)
        network, binding = built.network, built.binding
    else:
        memory = MemoryParams(cutoff_s=args.cutoff_s) if args.memory else None
        network, binding = fiber_chain(
            args.segments_km, alpha_db_per_km=args.alpha,
            eps=EpsParams(args.source_rate_hz), bsm=BsmParams(args.q, args.v),
            repeater_memory=memory, user_memory=memory, strategy=args.strategy,
        )
    return network, binding, data


def _sim_config(args, data, default_duration):
    base = {"sim": {"duration_s": default_duration, **data.get("sim", {})}}
    return sim_from_dict(
        base, duration_s=args.duration_s, slot_s=args.slot_s, seed=_seed(args, data),
        time_origin_s=args.time_origin_s, geometry_step_s=args.geometry_step_s,
    )


_RESULT_COLUMNS = ["engine", "seed", "duration_s", "slot_s", "n_slots", "e2e_successes",
                   "e2e_rate_hz", "mean_latency_s", "active_time_s", "events_total"]


def cmd_simulate(args, run: _Run) -> str:
    network, binding, data = _network_for(args, run)
    sim = _sim_config(args, data, default_duration=1.0)
    run.seed = sim.seed
    if args.batches > 1:
        est = estimate_rate(network, binding, sim, args.batches, jobs=args.jobs,
                            engine=args.engine)
        row = {"seed": sim.seed, "batches": args.batches, "rate_hz": est.mean_rate_hz,
               "stderr_hz": est.stderr_hz, "active_fraction": est.active_fraction}
        return render([row], list(row), args.format, args.precision)
    result = run_simulation(network, binding, sim, max_events=args.max_events,
                            engine=args.engine)
    if args.events_out and result.event_log is not None:
        with open(args.events_out, "w") as fh:
            for ev in result.event_log:
                fh.write(json.dumps(ev.to_dict()) + "\n")
    if args.format == "json":
        d = result.to_dict()
        if not args.include_events:
            d.pop("event_log")
        return json.dumps(_round(d, args.precision), indent=2) + "\n"
    rows = []
    for label in result.per_link_attempts:
        row = {c: getattr(result, c) for c in _RESULT_COLUMNS}
        row.update(segment=label, segment_attempts=result.per_link_attempts[label],
                   segment_successes=result.per_link_successes[label])
        rows.append(row)
    return render(rows, _RESULT_COLUMNS + ["segment", "segment_attempts",
                                           "segment_successes"],
                  args.format, args.precision)


def cmd_sweep(args, run: _Run) -> str:
    memory = MemoryParams(cutoff_s=args.cutoff_s) if args.memory else None
    common = dict(alpha_db_per_km=args.alpha, eps=EpsParams(args.source_rate_hz),
                  bsm=BsmParams(args.q, args.v))
    if args.direct:
        template = direct_template(**common)
    else:
        if args.segment_km is None:
            raise UsageError("sweep needs --segment-km or --direct")
        template = repeater_template(args.segment_km, repeater_memory=memory,
                                     user_memory=memory, strategy=args.strategy, **common)
    seed = _seed(args)
    run.seed = seed
    sim = SimConfig(args.duration_s, args.slot_s, seed)
    rows = sweep_distance(template, args.distances_km, sim, args.batches, jobs=args.jobs)
    if len(rows) >= 4 and all(r.rate_hz > 0 for r in rows):
        fit = classify_scaling([r.distance_km for r in rows], [r.rate_hz for r in rows])
        run.note(f"scaling: {fit.model.value} (decay {fit.decay_db_per_km:.4g} dB/km, "
                 f"exponent {fit.exponent:.4g})")
    return render([asdict(r) for r in rows], ["distance_km", "rate_hz", "stderr_hz"],
                  args.format, args.precision)


def cmd_scenarios(args, run: _Run) -> str:
    if args.action == "list":
        rows = []
        for sid in ScenarioId:
            rec = tradeoff_record(sid)
            rows.append({
                "scenario": sid.value,
                "satellites": SATELLITE_COUNT[sid],
                "complexity_1to5": rec.complexity_1to5,
                "interest_1to5": rec.interest_1to5,
                "note": rec.note,
                "description": DESCRIPTIONS[sid],
            })
        return render(rows, list(rows[0]), args.format, args.precision)
    if not args.id:
        raise UsageError("scenarios build needs --id")
    built = build_scenario(args.id)
    fmt = args.config_format or ("toml" if (args.out or "").endswith(".toml") else "json")
    return dumps(network_to_dict(built.network, built.binding), fmt)


def cmd_compare(args, run: _Run) -> str:
    seed = _seed(args)
    run.seed = seed
    params = ScenarioParams()
    sim = SimConfig(args.duration_s, None, seed, -args.duration_s / 2.0)
    rows = compare_scenarios(args.ids, params, sim, args.batches, jobs=args.jobs)
    columns = ["scenario", "rate_hz", "stderr_hz", "active_fraction", "complexity_1to5",
               "interest_1to5", "note"]
    return render([asdict(r) for r in rows], columns, args.format, args.precision)


# -- parser -------------------------------------------------------------------------


def _common(p: argparse.ArgumentParser):
    p.add_argument("--out", help="result file (default: stdout)")
    p.add_argument("--format", choices=("csv", "json"), default="csv")
    p.add_argument("--precision", type=int, default=None,
                   help="significant digits for reals (default: full)")


def _hardware(p, rate=1e9):
    p.add_argument("--alpha", type=float, default=0.2, help="fiber loss, dB/km")
    p.add_argument("--source-rate-hz", type=float, default=rate)
    p.add_argument("--q", type=float, default=0.5, help="BSM success probability")
    p.add_argument("--v", type=float, default=1.0, help="photon indistinguishability")


def _run_opts(p):
    p.add_argument("--seed", type=int, default=None,
                   help=f"RNG seed (default: config file, then ${SEED_ENV}, then 0)")
    p.add_argument("--jobs", type=int, default=1, help="parallel worker processes")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="qinsim",
        description="Entanglement distribution over fiber and satellite links.",
    )
    parser.add_argument("--version", action="version", version=f"qinsim {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="command")

    p = sub.add_parser("linkbudget", help="itemized channel losses")
    _common(p)
    p.add_argument("--kind", choices=[k.value for k in LinkKind], default="fiber")
    p.add_argument("--distance-km", type=float, nargs="+", required=True)
    p.add_argument("--alpha", type=float, default=0.2)
    p.add_argument("--wavelength-m", type=float, default=1550e-9)
    p.add_argument("--tx-aperture-m", type=float, default=0.3)
    p.add_argument("--rx-aperture-m", type=float, default=1.0)
    p.add_argument("--atmospheric-db", type=float, default=0.0)
    p.add_argument("--pointing-db", type=float, default=0.0)
    p.add_argument("--system-db", type=float, default=0.0)
    p.add_argument("--detector-efficiency", type=float, default=1.0)
    p.add_argument("--source-rate-hz", type=float, default=None)
    p.add_argument("--duration-s", type=float, default=SECONDS_PER_CENTURY)
    p.set_defaults(func=cmd_linkbudget)

    p = sub.add_parser("passes", help="single or dual visibility windows")
    _common(p)
    p.add_argument("--alt-km", type=float, required=True)
    p.add_argument("--inclination-deg", type=float, default=0.0)
    p.add_argument("--raan-deg", type=float, default=0.0)
    p.add_argument("--anomaly-deg", type=float, default=0.0)
    p.add_argument("--site-a", type=_site_arg, default=GroundSite(0.0, 0.0),
                   metavar="LAT,LON[,ALT_M]")
    p.add_argument("--site-b", type=_site_arg, default=None, metavar="LAT,LON[,ALT_M]")
    p.add_argument("--sep-km", type=float, default=None,
                   help="place site B this far due east of site A")
    p.add_argument("--mask-deg", type=float, default=10.0)
    p.add_argument("--t0", type=float, default=0.0)
    p.add_argument("--span-s", type=float, default=86400.0)
    p.add_argument("--step-s", type=float, default=1.0)
    p.add_argument("--mode", choices=("dual", "a", "b"), default="dual")
    p.set_defaults(func=cmd_passes)

    p = sub.add_parser("chain", help="analytic rate of a memoryless repeater chain")
    _common(p)
    _hardware(p, rate=1e10)
    p.add_argument("--distance-km", type=float, default=None)
    p.add_argument("--sweep", type=float, nargs="+", default=None, metavar="KM")
    p.add_argument("--n", type=int, default=1, help="number of segments")
    p.add_argument("--segment-km", type=float, default=None,
                   help="choose n = round(d / segment) per distance instead of --n")
    p.add_argument("--heralding-efficiency", type=float, default=1.0)
    p.add_argument("--detector-efficiency", type=float, default=1.0)
    p.set_defaults(func=cmd_chain)

    p = sub.add_parser("simulate", help="Monte Carlo run of one network")
    _common(p)
    _run_opts(p)
    _hardware(p)
    p.add_argument("--config", help="network file (.json or .toml) with a chain")
    p.add_argument("--scenario", choices=[s.value for s in ScenarioId])
    p.add_argument("--segments-km", type=float, nargs="+",
                   help="terrestrial fiber chain with these segment lengths")
    p.add_argument("--strategy", choices=[s.value for s in SwapStrategy], default="balanced")
    p.add_argument("--memory", action="store_true", help="ideal memories at every node")
    p.add_argument("--cutoff-s", type=float, default=math.inf)
    p.add_argument("--duration-s", type=float, default=None)
    p.add_argument("--slot-s", type=float, default=None)
    p.add_argument("--time-origin-s", type=float, default=None)
    p.add_argument("--geometry-step-s", type=float, default=None)
    p.add_argument("--batches", type=int, default=1)
    p.add_argument("--engine", choices=("auto", "events", "counts"), default="auto")
    p.add_argument("--max-events", type=int, default=0)
    p.add_argument("--events-out", help="write the event log here as JSON lines")
    p.add_argument("--include-events", action="store_true",
                   help="embed the event log in JSON output")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("sweep", help="simulated rate against distance")
    _common(p)
    _run_opts(p)
    _hardware(p)
    p.add_argument("--distances-km", type=float, nargs="+", required=True)
    p.add_argument("--direct", action="store_true", help="no repeaters")
    p.add_argument("--segment-km", type=float, default=None)
    p.add_argument("--strategy", choices=[s.value for s in SwapStrategy], default="nested")
    p.add_argument("--memory", action="store_true")
    p.add_argument("--cutoff-s", type=float, default=math.inf)
    p.add_argument("--duration-s", type=float, default=1e-3)
    p.add_argument("--slot-s", type=float, default=None)
    p.add_argument("--batches", type=int, default=4)
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("scenarios", help="list scenarios or write one as a config file")
    _common(p)
    p.add_argument("action", choices=("list", "build"))
    p.add_argument("--id", choices=[s.value for s in ScenarioId])
    p.add_argument("--config-format", choices=("json", "toml"), default=None)
    p.set_defaults(func=cmd_scenarios)

    p = sub.add_parser("compare", help="simulate several scenarios side by side")
    _common(p)
    _run_opts(p)
    p.add_argument("--ids", nargs="+", default=[s.value for s in ScenarioId],
                   choices=[s.value for s in ScenarioId])
    p.add_argument("--duration-s", type=float, default=20.0,
                   help="window centred on the pass")
    p.add_argument("--batches", type=int, default=4)
    p.set_defaults(func=cmd_compare)
    return parser


_INVALID = (ConfigError, ScenarioError, SimulationError, ValueError, OSError)


def main(argv=None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    run = _Run(args, argv)
    try:
        text = args.func(args, run)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"qinsim: error: {exc}", file=sys.stderr)
        return 2
    except _INVALID as exc:
        print("qinsim: invalid input:", file=sys.stderr)
        for item in str(exc).split("; "):
            print(f"  - {item}", file=sys.stderr)
        return 1
    run.emit(text)
    return 0
