"""Command-line interface.

Five subcommands: ``theory`` (closed-form handoff-rate curves), ``simulate``
(Monte Carlo rates with the matching theory column), ``fit`` (rank candidate
length laws on a trace corpus), ``ingest`` (reduce a corpus to per-transition
samples), and ``compare`` (model, classic-baseline, and optional replay
series side by side).

Every output starts with a ``#`` comment line holding the fully resolved
experiment configuration as JSON. Feeding that line (or the whole output
file) back via ``--config`` reproduces the run byte for byte; ``--out`` and
``--workers`` are execution details, not part of the experiment identity, so
they may differ between reproductions.

Floats are rendered with repr(), which round-trips exactly through JSON, and
rows always end with a bare newline.
"""

import argparse
import csv
import io
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import fitting, montecarlo, theory, traces
from .presets import get_preset, preset_names
from .trips import DURATION_FIRST, LENGTH_FIRST, BearingModel

__all__ = ["main"]

_DEFAULT_LAMBDA_GRID = (0.5, 1.0, 2.0, 4.0)  # per km^2


def _parse_bearing(text):
    text = text.strip()
    if text == "uniform":
        return BearingModel.uniform()
    if text.startswith("normal:"):
        try:
            mean_s, std_s = text[len("normal:") :].split(",")
            return BearingModel.normal(float(mean_s), float(std_s))
        except ValueError:
            pass
    raise ValueError(
        "bearing must be 'uniform' or 'normal:MEAN,STD' (radians); got %r" % text
    )


def _parse_grid(text):
    try:
        grid = [float(v) for v in text.split(",") if v.strip()]
    except ValueError:
        raise ValueError("lambda grid must be comma-separated numbers") from None
    if not grid or any(v <= 0.0 or not math.isfinite(v) for v in grid):
        raise ValueError("lambda grid values must be positive and finite")
    return grid


def _fmt(value):
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def _emit(out, config, columns, rows):
    buf = io.StringIO()
    buf.write("# " + json.dumps(config, sort_keys=True) + "\n")
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(columns)
    for row in rows:
        writer.writerow([_fmt(c) for c in row])
    text = buf.getvalue()
    if out is None or out == "-":
        sys.stdout.write(text)
    else:
        Path(out).write_text(text, encoding="utf-8", newline="")


def _load_config(path, command, expected_keys):
    """Read a resolved config from a JSON file or a previous output's header."""
    text = Path(path).read_text(encoding="utf-8")
    first = text.splitlines()[0] if text else ""
    payload = first[2:] if first.startswith("# ") else text
    cfg = json.loads(payload)
    if not isinstance(cfg, dict):
        raise ValueError("config must be a JSON object")
    if cfg.get("command") != command:
        raise ValueError(
            "config is for command %r, not %r" % (cfg.get("command"), command)
        )
    unknown = set(cfg) - expected_keys
    if unknown:
        raise ValueError("unknown config keys: %s" % ", ".join(sorted(unknown)))
    missing = expected_keys - set(cfg)
    if missing:
        raise ValueError("missing config keys: %s" % ", ".join(sorted(missing)))
    return cfg


def _resolve(args, command, expected_keys, builder, exclusive_flags):
    if args.config is not None:
        for name in exclusive_flags:
            if getattr(args, name) is not None:
                raise ValueError(
                    "--config replaces the experiment flags; drop --%s"
                    % name.replace("_", "-")
                )
        return _load_config(args.config, command, expected_keys)
    return builder(args)


# ---- theory ---------------------------------------------------------------

_THEORY_KEYS = {"command", "presets", "lambda_grid_per_km2", "pause_s", "bearing"}


def _theory_config(args):
    chosen = args.preset if args.preset else list(preset_names())
    return {
        "command": "theory",
        "presets": [get_preset(p).name for p in chosen],
        "lambda_grid_per_km2": _parse_grid(args.lambda_grid)
        if args.lambda_grid
        else list(_DEFAULT_LAMBDA_GRID),
        "pause_s": float(args.pause_s) if args.pause_s is not None else 0.0,
        "bearing": args.bearing or "uniform",
    }


def cmd_theory(args):
    cfg = _resolve(
        args,
        "theory",
        _THEORY_KEYS,
        _theory_config,
        ("preset", "lambda_grid", "pause_s", "bearing"),
    )
    bearing = _parse_bearing(cfg["bearing"])
    rows = []
    for name in cfg["presets"]:
        preset = get_preset(name)
        for lam_km2 in cfg["lambda_grid_per_km2"]:
            inputs = theory.TheoryInputs(
                length=preset.length,
                velocity=preset.velocity,
                intensity_per_m2=lam_km2 * 1e-6,
                pause_s=cfg["pause_s"],
                bearing=bearing,
            )
            rows.append((preset.name, lam_km2, theory.handoff_rate(inputs)))
    _emit(args.out, cfg, ("preset", "lambda_per_km2", "handoff_rate_per_s"), rows)
    return 0


# ---- simulate -------------------------------------------------------------

_SIM_KEYS = {
    "command",
    "preset",
    "lambda_grid_per_km2",
    "pause_s",
    "realizations",
    "region_km",
    "transitions",
    "seed",
    "mode",
    "bearing",
}


def _sim_config(args, command="simulate"):
    return {
        "command": command,
        "preset": get_preset(args.preset or "manhattan").name,
        "lambda_grid_per_km2": _parse_grid(args.lambda_grid)
        if args.lambda_grid
        else list(_DEFAULT_LAMBDA_GRID),
        "pause_s": float(args.pause_s) if args.pause_s is not None else 0.0,
        "realizations": int(args.realizations) if args.realizations is not None else 400,
        "region_km": float(args.region_km) if args.region_km is not None else 40.0,
        "transitions": int(args.transitions) if args.transitions is not None else 10,
        "seed": int(args.seed) if args.seed is not None else 0,
        "mode": args.mode or DURATION_FIRST,
        "bearing": args.bearing or "uniform",
    }


def _sim_rows(cfg, profile, series=None, workers=1):
    bearing = _parse_bearing(cfg["bearing"])
    rows = []
    for lam_km2 in cfg["lambda_grid_per_km2"]:
        sim = montecarlo.SimConfig(
            profile=profile,
            intensity_per_m2=lam_km2 * 1e-6,
            realizations=cfg["realizations"],
            region_side_m=cfg["region_km"] * 1000.0,
            transitions_per_trip=cfg["transitions"],
            pause_s=cfg["pause_s"],
            bearing=bearing,
            seed=cfg["seed"],
            trip_mode=cfg["mode"],
            workers=workers,
        )
        stats = montecarlo.run_simulation(sim)
        inputs = profile.theory_inputs(sim)
        theory_rate = theory.handoff_rate(inputs) if inputs is not None else float("nan")
        row = (
            lam_km2,
            montecarlo.empirical_rate(stats),
            theory_rate,
            montecarlo.rate_stderr(stats),
            stats.n_realizations,
        )
        rows.append(row if series is None else (series,) + row)
    return rows


def cmd_simulate(args):
    cfg = _resolve(
        args,
        "simulate",
        _SIM_KEYS,
        _sim_config,
        (
            "preset",
            "lambda_grid",
            "pause_s",
            "realizations",
            "region_km",
            "transitions",
            "seed",
            "mode",
            "bearing",
        ),
    )
    preset = get_preset(cfg["preset"])
    profile = montecarlo.LognormalMixtureProfile.from_preset(preset)
    rows = _sim_rows(cfg, profile, workers=args.workers or 1)
    _emit(
        args.out,
        cfg,
        ("lambda_per_km2", "empirical_rate", "theory_rate", "stderr", "n_realizations"),
        rows,
    )
    return 0


# ---- fit ------------------------------------------------------------------

_FIT_KEYS = {"command", "trace", "families"}


def _fit_config(args):
    if not args.trace:
        raise ValueError("fit needs --trace (or --config)")
    if args.families in (None, "all"):
        fams = list(fitting.family_names())
    else:
        fams = [f.strip() for f in args.families.split(",") if f.strip()]
        for f in fams:
            fitting.get_family(f)
    return {"command": "fit", "trace": args.trace, "families": fams}


def cmd_fit(args):
    cfg = _resolve(args, "fit", _FIT_KEYS, _fit_config, ("trace", "families"))
    corpus = traces.parse_trace_file(Path(cfg["trace"]).read_bytes())
    summary = traces.corpus_statistics(corpus)
    results = fitting.rank_fits(summary.lengths_m, families=cfg["families"])
    columns = (
        "rank",
        "family",
        "loglik",
        "rmse",
        "param1",
        "value1",
        "ci95_lo1",
        "ci95_hi1",
        "param2",
        "value2",
        "ci95_lo2",
        "ci95_hi2",
        "error",
    )
    rows = []
    for res in results:
        cells = [res.rank if res.rank is not None else "", res.family.name]
        if res.params is None:
            cells += [""] * 10 + [res.error or ""]
        else:
            cells += [res.loglik, res.rmse]
            for i in range(2):
                if i < res.params.size:
                    cells += [
                        res.family.param_names[i],
                        res.params[i],
                        res.ci95[i, 0],
                        res.ci95[i, 1],
                    ]
                else:
                    cells += ["", "", "", ""]
            cells.append("")
        rows.append(tuple(cells))
    _emit(args.out, cfg, columns, rows)
    return 0


# ---- ingest ---------------------------------------------------------------

_INGEST_KEYS = {"command", "trace", "length_from_waypoints"}


def _ingest_config(args):
    if not args.trace:
        raise ValueError("ingest needs --trace (or --config)")
    return {
        "command": "ingest",
        "trace": args.trace,
        "length_from_waypoints": bool(args.length_from_waypoints),
    }


def cmd_ingest(args):
    cfg = _resolve(
        args, "ingest", _INGEST_KEYS, _ingest_config, ("trace", "length_from_waypoints")
    )
    corpus = traces.parse_trace_file(Path(cfg["trace"]).read_bytes())
    rows = []
    for trace in corpus:
        for i, transition in enumerate(trace.transitions):
            sample = traces.reduce_transition(
                transition, length_from_waypoints=cfg["length_from_waypoints"]
            )
            rows.append((trace.trip_id, i, sample.length_m, sample.velocity_mps))
    _emit(
        args.out,
        cfg,
        ("trip_id", "transition_index", "length_m", "velocity_mps"),
        rows,
    )
    return 0


# ---- compare --------------------------------------------------------------

_COMPARE_KEYS = _SIM_KEYS | {"trace"}


def _compare_config(args):
    cfg = _sim_config(args, command="compare")
    cfg["trace"] = args.trace
    return cfg


def cmd_compare(args):
    cfg = _resolve(
        args,
        "compare",
        _COMPARE_KEYS,
        _compare_config,
        (
            "preset",
            "lambda_grid",
            "pause_s",
            "realizations",
            "region_km",
            "transitions",
            "seed",
            "mode",
            "bearing",
            "trace",
        ),
    )
    preset = get_preset(cfg["preset"])
    workers = args.workers or 1
    model = montecarlo.LognormalMixtureProfile.from_preset(preset)
    baseline = montecarlo.PppWaypointProfile(
        waypoint_density_per_m2=theory.literature_waypoint_density(preset.length),
        v_min_mps=min(preset.velocity.means),
        v_max_mps=max(preset.velocity.means),
    )
    rows = _sim_rows(cfg, model, series="lognormal_mixture", workers=workers)
    rows += _sim_rows(cfg, baseline, series="ppp_waypoint", workers=workers)
    if cfg["trace"]:
        corpus = traces.parse_trace_file(Path(cfg["trace"]).read_bytes())
        replay = montecarlo.ReplayProfile.from_traces(corpus)
        rows += _sim_rows(cfg, replay, series="replay", workers=workers)
    _emit(
        args.out,
        cfg,
        (
            "series",
            "lambda_per_km2",
            "empirical_rate",
            "theory_rate",
            "stderr",
            "n_realizations",
        ),
        rows,
    )
    return 0


# ---- parser ---------------------------------------------------------------


def _add_common(sp):
    sp.add_argument("--out", default=None, help="output CSV path (default: stdout)")
    sp.add_argument(
        "--config",
        default=None,
        help="re-run from a resolved-config JSON file or a previous output "
        "(its first line); replaces the experiment flags",
    )


def _add_sim_flags(sp):
    sp.add_argument("--preset", default=None, help="city preset name")
    sp.add_argument(
        "--lambda-grid",
        default=None,
        help="comma-separated site densities per km^2 (default 0.5,1,2,4)",
    )
    sp.add_argument("--pause-s", type=float, default=None, help="pause per waypoint, s")
    sp.add_argument(
        "--realizations", type=int, default=None, help="independent realizations (400)"
    )
    sp.add_argument(
        "--region-km", type=float, default=None, help="square region side, km (40)"
    )
    sp.add_argument(
        "--transitions", type=int, default=None, help="transitions per trip (10)"
    )
    sp.add_argument("--seed", type=int, default=None, help="master seed (0)")
    sp.add_argument(
        "--mode",
        default=None,
        choices=(LENGTH_FIRST, DURATION_FIRST),
        help="trip generation order (default %s)" % DURATION_FIRST,
    )
    sp.add_argument(
        "--bearing",
        default=None,
        help="bearing law: 'uniform' or 'normal:MEAN,STD' in radians",
    )
    sp.add_argument(
        "--workers", type=int, default=None, help="thread count (results identical)"
    )


def _build_parser():
    parser = argparse.ArgumentParser(
        prog="rwpkit",
        description="Mobility modeling and cellular handoff-rate analysis",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    sp = sub.add_parser("theory", help="closed-form handoff-rate curves")
    sp.add_argument(
        "--preset",
        action="append",
        default=None,
        help="city preset; repeat for several (default: all)",
    )
    sp.add_argument("--lambda-grid", default=None, help="densities per km^2")
    sp.add_argument("--pause-s", type=float, default=None)
    sp.add_argument("--bearing", default=None)
    _add_common(sp)
    sp.set_defaults(func=cmd_theory)

    sp = sub.add_parser("simulate", help="Monte Carlo handoff rates")
    _add_sim_flags(sp)
    _add_common(sp)
    sp.set_defaults(func=cmd_simulate)

    sp = sub.add_parser("fit", help="rank length laws fitted to a trace corpus")
    sp.add_argument("--trace", default=None, help="newline-delimited JSON corpus")
    sp.add_argument(
        "--families",
        default=None,
        help="comma-separated family names (default: all nine)",
    )
    _add_common(sp)
    sp.set_defaults(func=cmd_fit)

    sp = sub.add_parser("ingest", help="reduce a corpus to per-transition samples")
    sp.add_argument("--trace", default=None, help="newline-delimited JSON corpus")
    sp.add_argument(
        "--length-from-waypoints",
        action="store_const",
        const=True,
        default=None,
        help="use great-circle endpoint distance as the transition length",
    )
    _add_common(sp)
    sp.set_defaults(func=cmd_ingest)

    sp = sub.add_parser(
        "compare", help="model vs classic baseline vs optional replay"
    )
    _add_sim_flags(sp)
    sp.add_argument("--trace", default=None, help="corpus to replay (optional)")
    _add_common(sp)
    sp.set_defaults(func=cmd_compare)

    return parser


def main(argv=None):
    args = _build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (ValueError, OSError, RuntimeError) as exc:
        print("error: %s" % exc, file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
