"""Command-line entry point.

Subcommands map one-to-one onto the desk experiments and the closed-form
analysis; every run writes its CSV outputs, a human-readable summary and
a manifest (resolved config snapshot + seed) into the output directory,
so any seeded run can be reproduced bit-exactly.

Exit codes: 0 success, 1 usage/config error, 2 non-converged simulation.
"""

import argparse
import dataclasses
import json
import sys
import time
from pathlib import Path

from . import __version__
from .analysis import analyze_gains
from .config import (
    EMPTY_SOURCE,
    ConfigSource,
    build_characterize,
    build_lateral_scenario,
    build_scenario,
    load_config_file,
)
from .control import PdGains
from .errors import PedbrakeError
from .scenarios import (
    default_sweep_base,
    run_braking_scenario,
    run_detection_characterization,
    run_kp_sweep,
    run_lateral_scenario,
    write_detection_csv,
    write_lateral_csv,
    write_trajectory_csv,
)

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NOT_CONVERGED = 2


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with code 2 on usage errors; 2 means "non-converged"
    # here, so route usage problems through our own exception instead.
    def error(self, message):
        raise _UsageError(message)


def main(argv=None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return args.handler(args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except PedbrakeError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_USAGE


def _build_parser() -> _Parser:
    parser = _Parser(prog="pedbrake", description=__doc__)
    parser.add_argument("--version", action="version", version=f"pedbrake {__version__}")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, help="INI config file")
    common.add_argument("--defaults", action="store_true",
                        help="run with built-in defaults (no config file needed)")
    common.add_argument("--out-dir", type=Path, help="output directory")
    common.add_argument("--seed", type=int, help="RNG seed override")

    scenario_flags = _Parser(add_help=False)
    scenario_flags.add_argument("--label")
    scenario_flags.add_argument("--initial-speed", type=float, metavar="M_S")
    scenario_flags.add_argument("--initial-ped-distance", type=float, metavar="M")
    scenario_flags.add_argument("--safe-offset", type=float, metavar="M")
    scenario_flags.add_argument("--dt", type=float, metavar="S")
    scenario_flags.add_argument("--horizon", type=float, metavar="S")
    scenario_flags.add_argument("--kd", type=float)
    scenario_flags.add_argument("--k-inner", type=float)
    scenario_flags.add_argument("--f-brake-max", type=float, metavar="N")
    scenario_flags.add_argument("--detection-every", type=int, metavar="STEPS")

    p_brake = sub.add_parser("brake", parents=[common, scenario_flags],
                             help="closed-loop pedestrian braking run")
    p_brake.add_argument("--kp", type=float)
    p_brake.add_argument("--noise", action=argparse.BooleanOptionalAction,
                         help="enable/disable the detection noise model")
    p_brake.set_defaults(handler=_cmd_brake)

    p_sweep = sub.add_parser("sweep-kp", parents=[common, scenario_flags],
                             help="noise-free comfort sweep over the outer gain")
    p_sweep.add_argument("--kp", dest="kp_values", default="0.4,0.6,0.8",
                         metavar="LIST",
                         help="comma-separated outer gains (default 0.4,0.6,0.8)")
    p_sweep.set_defaults(handler=_cmd_sweep_kp)

    p_lat = sub.add_parser("lateral", parents=[common],
                           help="lateral step-response run")
    p_lat.add_argument("--label")
    p_lat.add_argument("--y-ref", type=float, metavar="M")
    p_lat.add_argument("--initial-offset", type=float, metavar="M")
    p_lat.add_argument("--vx", type=float, metavar="M_S")
    p_lat.add_argument("--dt", type=float, metavar="S")
    p_lat.add_argument("--horizon", type=float, metavar="S")
    p_lat.add_argument("--kp", type=float)
    p_lat.add_argument("--kd", type=float)
    p_lat.add_argument("--k-inner", type=float)
    p_lat.set_defaults(handler=_cmd_lateral)

    p_char = sub.add_parser("characterize", parents=[common],
                            help="detection-range characterization sweep")
    p_char.add_argument("--ranges", metavar="LIST",
                        help="comma-separated ranges in meters")
    p_char.add_argument("--dwell", type=float, metavar="S")
    p_char.add_argument("--rate", type=float, metavar="HZ")
    p_char.set_defaults(handler=_cmd_characterize)

    p_an = sub.add_parser("analyze", parents=[common],
                          help="closed-loop stability report")
    p_an.add_argument("--gains", metavar="KP,KD,K",
                      help="outer P, outer D, inner gain (default 0.8,0.1,10000)")
    p_an.add_argument("--mass", type=float, metavar="KG")
    p_an.set_defaults(handler=_cmd_analyze)

    return parser


def _load_source(args) -> ConfigSource:
    if args.config is not None:
        return load_config_file(args.config)
    if getattr(args, "defaults", False):
        return EMPTY_SOURCE
    raise _UsageError("provide --config PATH or --defaults")


def _out_dir(args) -> Path:
    out = args.out_dir if args.out_dir is not None else Path("runs") / args.subcommand
    out.mkdir(parents=True, exist_ok=True)
    return out


def _scenario_overrides(args) -> dict:
    overrides = {
        "scenario.label": args.label,
        "scenario.initial_speed": args.initial_speed,
        "scenario.initial_ped_distance": args.initial_ped_distance,
        "scenario.safe_offset": args.safe_offset,
        "scenario.dt": args.dt,
        "scenario.horizon": args.horizon,
        "scenario.seed": args.seed,
        "scenario.detection_every": args.detection_every,
        "gains.k_p": getattr(args, "kp", None),  # sweep-kp owns --kp as a list
        "gains.k_d": args.kd,
        "gains.k_inner": args.k_inner,
        "plant.f_brake_max": args.f_brake_max,
    }
    if getattr(args, "noise", None) is not None:
        overrides["scenario.noise"] = args.noise
    return overrides


def _write_summary(path: Path, sections) -> None:
    with open(path, "w") as fh:
        for name, items in sections:
            fh.write(f"[{name}]\n")
            for key, value in items:
                fh.write(f"{key} = {value}\n")
            fh.write("\n")


def _write_manifest(out: Path, args, config_obj, duration: float) -> None:
    snapshot = dataclasses.asdict(config_obj) if dataclasses.is_dataclass(config_obj) else config_obj
    manifest = {
        "subcommand": args.subcommand,
        "tool_version": __version__,
        "seed": args.seed,
        "out_dir": str(out),
        "config": snapshot,
        "duration_s": duration,
    }
    with open(out / "manifest.json", "w") as fh:
        json.dump(manifest, fh, indent=2, default=str)
        fh.write("\n")


def _cmd_brake(args) -> int:
    started = time.perf_counter()
    source = _load_source(args)
    config = build_scenario(source, _scenario_overrides(args))
    out = _out_dir(args)
    log = run_braking_scenario(config)
    write_trajectory_csv(log, out / "trajectory.csv")
    _write_summary(out / "summary.txt", [("run", log.summary_items())])
    _write_manifest(out, args, config, time.perf_counter() - started)
    print(f"{log.label}: converged={log.converged} final_gap={log.final_gap:.3f} m "
          f"stop_time={log.stop_time:.2f} s -> {out}")
    return EXIT_OK if log.converged else EXIT_NOT_CONVERGED


def _cmd_sweep_kp(args) -> int:
    started = time.perf_counter()
    source = _load_source(args)
    try:
        kp_values = [float(v) for v in args.kp_values.split(",") if v.strip()]
    except ValueError:
        raise _UsageError(f"cannot parse --kp {args.kp_values!r}")
    if not kp_values:
        raise _UsageError("--kp must name at least one gain")
    base = build_scenario(source, _scenario_overrides(args), defaults=default_sweep_base())
    base = dataclasses.replace(base, noise=None)  # the sweep is always noise-free
    out = _out_dir(args)
    logs = run_kp_sweep(base, kp_values)
    sections = []
    for log in logs:
        write_trajectory_csv(log, out / f"{log.label}.csv")
        sections.append((log.label, log.summary_items()))
    _write_summary(out / "summary.txt", sections)
    _write_manifest(out, args, base, time.perf_counter() - started)
    for log in logs:
        print(f"{log.label}: peak_decel={log.peak_decel:.3f} m/s^2 "
              f"final_gap={log.final_gap:.3f} m")
    return EXIT_OK if all(log.converged for log in logs) else EXIT_NOT_CONVERGED


def _cmd_lateral(args) -> int:
    started = time.perf_counter()
    source = _load_source(args)
    overrides = {
        "lateral.label": args.label,
        "lateral.y_ref": args.y_ref,
        "lateral.initial_offset": args.initial_offset,
        "lateral.v_x": args.vx,
        "lateral.dt": args.dt,
        "lateral.horizon": args.horizon,
        "lateral.k_p": args.kp,
        "lateral.k_d": args.kd,
        "lateral.k_inner": args.k_inner,
        "scenario.seed": args.seed,
    }
    config = build_lateral_scenario(source, overrides)
    out = _out_dir(args)
    log = run_lateral_scenario(config)
    write_lateral_csv(log, out / "trajectory.csv")
    _write_summary(out / "summary.txt", [("run", log.summary_items())])
    _write_manifest(out, args, config, time.perf_counter() - started)
    print(f"{log.label}: diverged={log.diverged} overshoot={100 * log.overshoot:.1f}% "
          f"settling_time={log.settling_time:.2f} s -> {out}")
    return EXIT_NOT_CONVERGED if log.diverged else EXIT_OK


def _cmd_characterize(args) -> int:
    started = time.perf_counter()
    source = _load_source(args)
    overrides = {
        "characterize.ranges": args.ranges,
        "characterize.dwell": args.dwell,
        "characterize.rate": args.rate,
        "scenario.seed": args.seed,
    }
    config = build_characterize(source, overrides)
    out = _out_dir(args)
    log = run_detection_characterization(config.ranges, config.dwell, config.model,
                                         rate=config.rate)
    write_detection_csv(log, out / "detection.csv")
    sections = []
    for s in log.summaries:
        sections.append((f"range-{s.true_range:g}", [
            ("true_range", format(s.true_range, ".12g")),
            ("n_samples", str(s.n_samples)),
            ("n_dropped", str(s.n_dropped)),
            ("mean", format(s.mean, ".12g")),
            ("std", format(s.std, ".12g")),
        ]))
    _write_summary(out / "summary.txt", sections)
    _write_manifest(out, args, config, time.perf_counter() - started)
    for s in log.summaries:
        print(f"range {s.true_range:g} m: mean={s.mean:.3f} std={s.std:.3f} "
              f"dropped={s.n_dropped}/{s.n_samples}")
    return EXIT_OK


def _cmd_analyze(args) -> int:
    started = time.perf_counter()
    if args.config is not None:
        load_config_file(args.config)  # validate, and fail early if malformed
    if args.gains is not None:
        try:
            k_p, k_d, k_inner = (float(v) for v in args.gains.split(","))
        except ValueError:
            raise _UsageError(f"--gains expects KP,KD,K, got {args.gains!r}")
        gains = PdGains(k_p, k_d, k_inner)
    else:
        gains = PdGains(0.8, 0.1, 10000.0)
    mass = args.mass if args.mass is not None else 1725.0
    report = analyze_gains(gains, mass)
    p = report.coefficients
    pole_lo, pole_hi = report.poles
    print(f"denominator: ({p.a2:.6g}, {p.a1:.6g}, {p.a0:.6g})")
    print(f"verdict: {'stable' if report.stable else 'not stable'}")
    print(f"poles: {pole_lo.real:.4g} {pole_lo.imag:+.4g}i, "
          f"{pole_hi.real:.4g} {pole_hi.imag:+.4g}i  (1/s)")
    print(f"natural_frequency: {report.natural_frequency:.4g} rad/s")
    print(f"damping_ratio: {report.damping_ratio:.4g}")

    out = _out_dir(args)
    record = {
        "gains": dataclasses.asdict(gains),
        "mass": mass,
        "coefficients": [p.a2, p.a1, p.a0],
        "stable": report.stable,
        "poles": [[pole_lo.real, pole_lo.imag], [pole_hi.real, pole_hi.imag]],
        "natural_frequency": report.natural_frequency,
        "damping_ratio": report.damping_ratio,
    }
    with open(out / "stability.json", "w") as fh:
        json.dump(record, fh, indent=2)
        fh.write("\n")
    _write_manifest(out, args, {"gains": dataclasses.asdict(gains), "mass": mass},
                    time.perf_counter() - started)
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
