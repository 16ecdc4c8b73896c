"""Command-line interface.

Subcommands: simulate, baseline, voi-curve, profile-shutdown, sweep,
gen-scenario. All take --config pointing at a JSON run configuration;
summaries print in a fixed field order so shell tests can assert on
them. Exit status is 0 only when the run completed and wrote its
outputs.
"""

from __future__ import annotations

import argparse
import copy
import sys
from pathlib import Path

from . import energy, io, scenario, sim
from .errors import EhmpcError

CONFIG_KEY_HELP = """\
config keys (JSON):
  window_hours                  decision-window length in hours (default setup: 1)
  voi.lambda_c                  threat decay per process unit (1.4)
  voi.x_c                       critical process threshold (3)
  voi.alpha_r                   fidelity gain per sample (0.018)
  voi.alpha_d                   delay-cost decay per transmission (0.025)
  voi.d_o                       maximum delay cost (0.5)
  profile.i_sleep_a             sleep current, amperes (0.00143)
  profile.i_sense_a             sense current, amperes (0.105)
  profile.i_transmit_a          transmit current, amperes (0.127)
  profile.d_sense_s             seconds per sample (13)
  profile.d_transmit_s          seconds per transmission (4.1)
  battery.capacity_ah           cell capacity, ampere-hours (2.75)
  battery.z_min                 SoC floor (0.015)
  battery.v_nom                 nominal voltage, volts (3.6)
  battery.ocv_table             path to a soc,voltage CSV, or null for the
                                shipped 21-knot lithium-ion curve
  harvest.efficiency            harvesting chain efficiency (0.05)
  harvest.panel_area_m2         panel area, square meters (0.01)
  mpc.horizon                   future windows per plan (11)
  mpc.discount                  per-window discount rate (0)
  mpc.w_info / mpc.w_energy     utility weights (0.5 / 0.5)
  mpc.f_s_max / mpc.f_t_max     frequency caps per hour (120 / 120)
  sim.restart_hysteresis        SoC margin above the floor to restart (0.02)
  sim.belief_lookback_windows   windows feeding the process belief (1)
  initial.soe | initial.z       starting charge, exactly one of the two
  dataset.process_csv           timestamp,level_m recorded series
  dataset.irradiance_csv        timestamp,irradiance_wm2 recorded series
  output.trace_csv              default trace destination
  scenario.seed                 RNG seed for generated scenarios (0)
"""


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="ehmpc",
        description="Context-aware energy management simulator for "
                    "energy-harvesting sensor nodes.",
        epilog=CONFIG_KEY_HELP,
        formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    simulate = sub.add_parser(
        "simulate", help="hindcast the receding-horizon controller")
    simulate.add_argument("--config", required=True)
    simulate.add_argument("--initial-soe", type=float, default=None,
                          help="override the configured initial state of energy")
    simulate.add_argument("--out", default=None,
                          help="trace CSV destination (default: config output.trace_csv)")

    baseline = sub.add_parser(
        "baseline", help="hindcast a fixed-frequency duty cycle")
    baseline.add_argument("--config", required=True)
    baseline.add_argument("--fs", type=float, required=True,
                          help="fixed sampling frequency per hour")
    baseline.add_argument("--ft", type=float, required=True,
                          help="fixed transmission frequency per hour")
    baseline.add_argument("--initial-soe", type=float, default=None)
    baseline.add_argument("--out", default=None)

    curve = sub.add_parser(
        "voi-curve", help="emit risk-inclined vs risk-averse information "
                          "values over the configured level series")
    curve.add_argument("--config", required=True)
    curve.add_argument("--fs", type=float, default=30.0)
    curve.add_argument("--ft", type=float, default=30.0)
    curve.add_argument("--out", required=True)

    shutdown = sub.add_parser(
        "profile-shutdown", help="zero-harvest hours from full charge to "
                                 "the SoC floor at fixed frequencies")
    shutdown.add_argument("--config", required=True)
    shutdown.add_argument("--fs", type=float, required=True)
    shutdown.add_argument("--ft", type=float, required=True)

    sweep = sub.add_parser(
        "sweep", help="re-run the hindcast across values of one config key")
    sweep.add_argument("--config", required=True)
    sweep.add_argument("--param", required=True,
                       help="dotted config key, e.g. mpc.w_energy")
    sweep.add_argument("--values", required=True,
                       help="comma-separated numeric values")
    sweep.add_argument("--out", default=None,
                       help="optional summary CSV destination")

    gen = sub.add_parser(
        "gen-scenario", help="materialize the canonical synthetic scenario "
                             "to the configured dataset CSVs")
    gen.add_argument("--config", required=True)
    gen.add_argument("--out-dir", default=None,
                     help="write stream_level.csv/irradiance.csv here instead")
    gen.add_argument("--irradiance-scale", type=float, default=1.0)

    return parser


def _print_summary(summary: sim.TraceSummary, trace_path: Path) -> None:
    print(f"windows: {summary.windows}")
    print(f"cumulative_voi: {summary.cumulative_voi:.9g}")
    print(f"terminal_soe: {summary.terminal_soe:.9g}")
    print(f"depleted_windows: {summary.depleted_windows}")
    print(f"mean_f_s: {summary.mean_f_s:.9g}")
    print(f"mean_f_t: {summary.mean_f_t:.9g}")
    print(f"trace_csv: {trace_path}")


def _initial_z(config: io.RunConfig, initial_soe: float | None) -> float:
    if initial_soe is None:
        return config.z_initial
    if not 0.0 <= initial_soe <= 1.0:
        raise EhmpcError(f"--initial-soe: must be in [0, 1], got {initial_soe}")
    return energy.z_from_soe(initial_soe, config.battery)


def _cmd_simulate(args) -> int:
    config = io.load_run_config(args.config)
    dataset = config.load_dataset()
    trace = sim.run_hindcast(dataset, config.node_models(), config.mpc,
                             _initial_z(config, args.initial_soe),
                             config.options)
    out = Path(args.out) if args.out else config.trace_csv
    io.write_trace(trace, out)
    _print_summary(sim.trace_summary(trace), out)
    return 0


def _cmd_baseline(args) -> int:
    config = io.load_run_config(args.config)
    dataset = config.load_dataset()
    trace = sim.run_static_baseline(dataset, args.fs, args.ft,
                                    config.node_models(), config.mpc,
                                    _initial_z(config, args.initial_soe),
                                    config.options)
    out = Path(args.out) if args.out else config.trace_csv
    io.write_trace(trace, out)
    _print_summary(sim.trace_summary(trace), out)
    return 0


def _cmd_voi_curve(args) -> int:
    from .voi import risk_averse_params, risk_inclined_params
    config = io.load_run_config(args.config)
    dataset = config.load_dataset()
    inclined = risk_inclined_params(config.voi.x_c, config.window_hours)
    averse = risk_averse_params(config.voi.x_c, config.window_hours)
    curves = io.emit_voi_curve(inclined, averse, dataset.process,
                               args.fs, args.ft)
    io.write_voi_curve(dataset.timestamps, dataset.process, curves,
                       Path(args.out))
    print(f"voi_curve_csv: {args.out}")
    return 0


def _cmd_profile_shutdown(args) -> int:
    config = io.load_run_config(args.config)
    hours = energy.shutdown_time(config.profile, config.battery,
                                 args.fs, args.ft)
    print(f"shutdown_hours: {hours:.9g}")
    return 0


def _cmd_sweep(args, parser: argparse.ArgumentParser) -> int:
    values = [v for v in args.values.split(",") if v.strip()]
    if not values:
        parser.error("--values: empty value list")
    try:
        values = [float(v) for v in values]
    except ValueError:
        parser.error(f"--values: not numeric: {args.values!r}")
    section, _, key = args.param.partition(".")
    if not key:
        parser.error("--param must be a dotted config key like mpc.w_energy")

    config_path = Path(args.config)
    raw = io.load_raw_config(config_path)
    if section not in raw or key not in io._SCHEMA.get(section, set()):
        raise EhmpcError(f"--param: unknown config key {args.param!r}")

    rows = []
    for value in values:
        variant = copy.deepcopy(raw)
        variant.setdefault(section, {})[key] = value
        config = io.build_run_config(variant, config_path.parent)
        dataset = config.load_dataset()
        trace = sim.run_hindcast(dataset, config.node_models(), config.mpc,
                                 config.z_initial, config.options)
        rows.append((value, sim.trace_summary(trace)))

    print(f"param: {args.param}")
    print("value cumulative_voi terminal_soe depleted_windows mean_f_s mean_f_t")
    for value, summary in rows:
        print(f"{value:.9g} {summary.cumulative_voi:.9g} "
              f"{summary.terminal_soe:.9g} {summary.depleted_windows} "
              f"{summary.mean_f_s:.9g} {summary.mean_f_t:.9g}")
    if args.out:
        lines = ["value,cumulative_voi,terminal_soe,depleted_windows,mean_f_s,mean_f_t"]
        lines += [f"{value:.9g},{s.cumulative_voi:.9g},{s.terminal_soe:.9g},"
                  f"{s.depleted_windows},{s.mean_f_s:.9g},{s.mean_f_t:.9g}"
                  for value, s in rows]
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text("\n".join(lines) + "\n")
        print(f"sweep_csv: {args.out}")
    return 0


def _cmd_gen_scenario(args) -> int:
    config = io.load_run_config(args.config, require_dataset_files=False)
    dataset = scenario.generate_canonical_scenario(
        seed=config.scenario_seed, irradiance_scale=args.irradiance_scale)
    if args.out_dir:
        out_dir = Path(args.out_dir)
        process_csv = out_dir / "stream_level.csv"
        irradiance_csv = out_dir / "irradiance.csv"
    else:
        process_csv = config.process_csv
        irradiance_csv = config.irradiance_csv
    io.write_scenario_csvs(dataset, process_csv, irradiance_csv)
    print(f"process_csv: {process_csv}")
    print(f"irradiance_csv: {irradiance_csv}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "simulate":
            return _cmd_simulate(args)
        if args.command == "baseline":
            return _cmd_baseline(args)
        if args.command == "voi-curve":
            return _cmd_voi_curve(args)
        if args.command == "profile-shutdown":
            return _cmd_profile_shutdown(args)
        if args.command == "sweep":
            return _cmd_sweep(args, parser)
        if args.command == "gen-scenario":
            return _cmd_gen_scenario(args)
        parser.error(f"unknown command {args.command!r}")
    except EhmpcError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
