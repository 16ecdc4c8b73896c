"""Ingestion and emission: time series, OCV tables, run configs, traces.

Loading validates everything at the boundary; nothing partially
validated reaches the simulator. Time series resample onto the window
grid (process by carried-forward per-window maximum, irradiance by
per-window mean), and any gap longer than one window is a hard error.
Trace output is byte-deterministic: fixed header, numbers at nine
significant digits.
"""

from __future__ import annotations

import csv
import json
import math
from dataclasses import dataclass
from datetime import datetime, timedelta
from pathlib import Path

import numpy as np

from .energy import (BatteryModel, EnergyProfile, HarvestModel, OcvCurve,
                     default_ocv_curve, z_from_soe)
from .errors import ConfigError, DataError, InputError
from .mpc import MpcConfig, NodeModels
from .sim import Dataset, SimOptions, TraceRecord
from .voi import VoiParams

TRACE_HEADER = "timestamp,x,f_s,f_t,z,soe,voi,utility,state"
VOI_CURVE_HEADER = "timestamp,level,vc_a,voi_a,vc_b,voi_b"


def _fmt(value: float) -> str:
    """Nine significant digits, no exponent padding: the trace number format."""
    return f"{value:.9g}"


# ---------------------------------------------------------------------------
# Time series


def load_timeseries(path: str | Path, value_column: str, window_hours: float,
                    aggregate: str, timestamp_column: str = "timestamp"):
    """Load one CSV column onto the window grid.

    aggregate "max" carries the last observation forward and takes the
    per-window maximum (conservative for threshold processes);
    "mean" averages the readings inside each window. Returns
    (window start timestamps, values array).
    """
    if aggregate not in ("max", "mean"):
        raise InputError(f"aggregate must be 'max' or 'mean', got {aggregate!r}")
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: file does not exist")
    times: list[datetime] = []
    values: list[float] = []
    with path.open(newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None:
            raise DataError(f"{path}: empty file")
        header = [h.strip() for h in header]
        for column in (timestamp_column, value_column):
            if column not in header:
                raise DataError(f"{path}:1: missing column {column!r} in header {header}")
        t_idx = header.index(timestamp_column)
        v_idx = header.index(value_column)
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                stamp = datetime.fromisoformat(row[t_idx].strip())
            except (ValueError, IndexError) as exc:
                raise DataError(f"{path}:{line_no}: bad timestamp: {exc}") from exc
            try:
                value = float(row[v_idx])
            except (ValueError, IndexError) as exc:
                raise DataError(f"{path}:{line_no}: bad value: {exc}") from exc
            if not math.isfinite(value):
                raise DataError(f"{path}:{line_no}: non-finite value {value!r}")
            if times and stamp <= times[-1]:
                raise DataError(
                    f"{path}:{line_no}: non-monotone timestamp {stamp.isoformat()} "
                    f"after {times[-1].isoformat()}")
            times.append(stamp)
            values.append(value)
    if len(times) < 2:
        raise DataError(f"{path}: need at least two readings")

    window = timedelta(hours=window_hours)
    for i in range(1, len(times)):
        if times[i] - times[i - 1] > window:
            raise DataError(
                f"{path}: gap of {(times[i] - times[i - 1]).total_seconds() / 3600:.3g} h "
                f"between {times[i - 1].isoformat()} and {times[i].isoformat()} "
                f"exceeds one window")

    epoch = datetime(1970, 1, 1)
    window_s = window_hours * 3600.0
    indices = [math.floor((t - epoch).total_seconds() / window_s) for t in times]
    first, last = indices[0], indices[-1]
    grid = [epoch + timedelta(seconds=w * window_s) for w in range(first, last + 1)]
    buckets: list[list[float]] = [[] for _ in grid]
    for idx, value in zip(indices, values):
        buckets[idx - first].append(value)

    out = np.empty(len(grid))
    carried: float | None = None
    for w, bucket in enumerate(buckets):
        if aggregate == "max":
            # Last observation carried forward: the previous window's final
            # reading still holds at this window's start.
            candidates = bucket if carried is None else [carried] + bucket
            if not candidates:
                raise DataError(f"{path}: window {grid[w].isoformat()} has no data")
            out[w] = max(candidates)
            if bucket:
                carried = bucket[-1]
        else:
            if not bucket:
                raise DataError(f"{path}: window {grid[w].isoformat()} has no data")
            out[w] = sum(bucket) / len(bucket)
    return grid, out


def load_dataset(process_csv: str | Path, irradiance_csv: str | Path,
                 window_hours: float, process_column: str = "level_m",
                 irradiance_column: str = "irradiance_wm2") -> Dataset:
    """Load and align the two recorded series onto one window grid."""
    p_times, p_values = load_timeseries(process_csv, process_column,
                                        window_hours, "max")
    i_times, i_values = load_timeseries(irradiance_csv, irradiance_column,
                                        window_hours, "mean")
    start = max(p_times[0], i_times[0])
    stop = min(p_times[-1], i_times[-1])
    if stop <= start:
        raise DataError("process and irradiance series do not overlap")
    p_lo, p_hi = p_times.index(start), p_times.index(stop)
    i_lo, i_hi = i_times.index(start), i_times.index(stop)
    if np.any(i_values[i_lo:i_hi + 1] < 0):
        raise DataError(f"{irradiance_csv}: negative irradiance values")
    return Dataset(timestamps=tuple(p_times[p_lo:p_hi + 1]),
                   process=p_values[p_lo:p_hi + 1],
                   irradiance=i_values[i_lo:i_hi + 1],
                   window_hours=window_hours)


# ---------------------------------------------------------------------------
# OCV tables


def load_ocv_table(path: str | Path) -> OcvCurve:
    """Read a `soc,voltage` CSV into a validated curve."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: file does not exist")
    soc: list[float] = []
    voltage: list[float] = []
    with path.open(newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or [h.strip() for h in header] != ["soc", "voltage"]:
            raise DataError(f"{path}:1: expected header 'soc,voltage', got {header}")
        for line_no, row in enumerate(reader, start=2):
            if not row or all(not cell.strip() for cell in row):
                continue
            try:
                soc.append(float(row[0]))
                voltage.append(float(row[1]))
            except (ValueError, IndexError) as exc:
                raise DataError(f"{path}:{line_no}: bad row: {exc}") from exc
    try:
        return OcvCurve(soc=np.array(soc), voltage=np.array(voltage))
    except InputError as exc:
        raise DataError(f"{path}: {exc}") from exc


def write_ocv_table(curve: OcvCurve, path: str | Path) -> None:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = ["soc,voltage"]
    lines += [f"{_fmt(s)},{_fmt(v)}" for s, v in zip(curve.soc, curve.voltage)]
    path.write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Traces


def write_trace(trace: list[TraceRecord], path: str | Path) -> None:
    """Write a trace CSV; identical traces produce identical bytes."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [TRACE_HEADER]
    for r in trace:
        lines.append(",".join([
            r.timestamp.isoformat(),
            _fmt(r.x_observed),
            _fmt(r.f_s_applied),
            _fmt(r.f_t_applied),
            _fmt(r.z),
            _fmt(r.soe),
            _fmt(r.voi),
            _fmt(r.utility),
            r.node_state,
        ]))
    path.write_text("\n".join(lines) + "\n")


def read_trace(path: str | Path) -> list[dict]:
    """Parse a trace CSV back into dict rows (round-trip checks, plotting)."""
    path = Path(path)
    if not path.exists():
        raise DataError(f"{path}: file does not exist")
    rows: list[dict] = []
    with path.open(newline="") as handle:
        reader = csv.reader(handle)
        header = next(reader, None)
        if header is None or ",".join(header) != TRACE_HEADER:
            raise DataError(f"{path}:1: unexpected trace header {header}")
        for line_no, row in enumerate(reader, start=2):
            if len(row) != 9:
                raise DataError(f"{path}:{line_no}: expected 9 fields, got {len(row)}")
            rows.append({
                "timestamp": datetime.fromisoformat(row[0]),
                "x": float(row[1]),
                "f_s": float(row[2]),
                "f_t": float(row[3]),
                "z": float(row[4]),
                "soe": float(row[5]),
                "voi": float(row[6]),
                "utility": float(row[7]),
                "state": row[8],
            })
    return rows


# ---------------------------------------------------------------------------
# Planner-comparison curves


def emit_voi_curve(params_a: VoiParams, params_b: VoiParams,
                   levels: np.ndarray, f_s: float, f_t: float):
    """Per-level threat ratings and information values for two planners.

    Returns four arrays (vc_a, voi_a, vc_b, voi_b) aligned with `levels`,
    at the fixed frequencies; lets the two risk appetites be plotted
    against the same recorded series.
    """
    from .voi import threat_rating, value_of_information
    levels = np.asarray(levels, dtype=float)
    vc_a = np.array([threat_rating(x, params_a) for x in levels])
    voi_a = np.array([value_of_information(x, f_s, f_t, params_a) for x in levels])
    vc_b = np.array([threat_rating(x, params_b) for x in levels])
    voi_b = np.array([value_of_information(x, f_s, f_t, params_b) for x in levels])
    return vc_a, voi_a, vc_b, voi_b


def write_voi_curve(timestamps, levels, curves, path: str | Path) -> None:
    vc_a, voi_a, vc_b, voi_b = curves
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    lines = [VOI_CURVE_HEADER]
    for i, stamp in enumerate(timestamps):
        lines.append(",".join([
            stamp.isoformat(), _fmt(levels[i]),
            _fmt(vc_a[i]), _fmt(voi_a[i]), _fmt(vc_b[i]), _fmt(voi_b[i]),
        ]))
    path.write_text("\n".join(lines) + "\n")


# ---------------------------------------------------------------------------
# Run configuration


@dataclass(frozen=True)
class RunConfig:
    """Fully validated run setup; every referenced model is constructed."""

    window_hours: float
    voi: VoiParams
    profile: EnergyProfile
    battery: BatteryModel
    harvest: HarvestModel
    mpc: MpcConfig
    options: SimOptions
    z_initial: float
    process_csv: Path
    irradiance_csv: Path
    trace_csv: Path
    scenario_seed: int

    def node_models(self) -> NodeModels:
        return NodeModels(voi=self.voi, profile=self.profile,
                          battery=self.battery, harvest=self.harvest)

    def load_dataset(self) -> Dataset:
        return load_dataset(self.process_csv, self.irradiance_csv,
                            self.window_hours)


_SCHEMA = {
    "window_hours": None,
    "voi": {"lambda_c", "x_c", "alpha_r", "alpha_d", "d_o"},
    "profile": {"i_sleep_a", "i_sense_a", "i_transmit_a", "d_sense_s", "d_transmit_s"},
    "battery": {"capacity_ah", "z_min", "v_nom", "ocv_table"},
    "harvest": {"efficiency", "panel_area_m2"},
    "mpc": {"horizon", "discount", "w_info", "w_energy", "f_s_max", "f_t_max"},
    "sim": {"restart_hysteresis", "belief_lookback_windows"},
    "initial": {"soe", "z"},
    "dataset": {"process_csv", "irradiance_csv"},
    "output": {"trace_csv"},
    "scenario": {"seed"},
}
_OPTIONAL_SECTIONS = {"sim", "scenario"}


def load_raw_config(path: str | Path) -> dict:
    """Parse the JSON config and check its key structure."""
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"{path}: file does not exist")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: invalid JSON: {exc.msg}") from exc
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    unknown = set(raw) - set(_SCHEMA)
    if unknown:
        raise ConfigError(f"unknown top-level key(s): {sorted(unknown)}")
    missing = set(_SCHEMA) - _OPTIONAL_SECTIONS - set(raw)
    if missing:
        raise ConfigError(f"missing required key(s): {sorted(missing)}")
    for section, keys in _SCHEMA.items():
        if keys is None or section not in raw:
            continue
        body = raw[section]
        if not isinstance(body, dict):
            raise ConfigError(f"{section}: must be an object")
        bad = set(body) - keys
        if bad:
            raise ConfigError(f"{section}: unknown key(s) {sorted(bad)}")
    return raw


def _number(raw: dict, section: str, key: str, default=None) -> float:
    body = raw.get(section, {})
    if key not in body:
        if default is not None:
            return default
        raise ConfigError(f"{section}.{key}: missing")
    value = body[key]
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{section}.{key}: expected a number, got {value!r}")
    return float(value)


def build_run_config(raw: dict, base_dir: str | Path,
                     require_dataset_files: bool = True) -> RunConfig:
    """Construct and validate a RunConfig from a parsed config dict.

    Relative paths resolve against `base_dir` (the config file's
    directory). Model-construction errors are re-raised with the
    offending section named. `gen-scenario` loads with
    require_dataset_files=False since it is about to create them.
    """
    base_dir = Path(base_dir)
    window_hours = raw.get("window_hours")
    if isinstance(window_hours, bool) or not isinstance(window_hours, (int, float)):
        raise ConfigError(f"window_hours: expected a number, got {window_hours!r}")
    window_hours = float(window_hours)

    def build(section, factory, **kwargs):
        try:
            return factory(**kwargs)
        except InputError as exc:
            raise ConfigError(f"{section}: {exc}") from exc

    voi_params = build("voi", VoiParams,
                       lambda_c=_number(raw, "voi", "lambda_c"),
                       x_c=_number(raw, "voi", "x_c"),
                       alpha_r=_number(raw, "voi", "alpha_r"),
                       alpha_d=_number(raw, "voi", "alpha_d"),
                       d_o=_number(raw, "voi", "d_o"),
                       window_hours=window_hours)
    profile = build("profile", EnergyProfile,
                    i_sleep_a=_number(raw, "profile", "i_sleep_a"),
                    i_sense_a=_number(raw, "profile", "i_sense_a"),
                    i_transmit_a=_number(raw, "profile", "i_transmit_a"),
                    d_sense_s=_number(raw, "profile", "d_sense_s"),
                    d_transmit_s=_number(raw, "profile", "d_transmit_s"))
    ocv_path = raw["battery"].get("ocv_table")
    if ocv_path is None:
        curve = default_ocv_curve()
    elif isinstance(ocv_path, str):
        curve = load_ocv_table(_resolve(base_dir, ocv_path))
    else:
        raise ConfigError(f"battery.ocv_table: expected a path or null, got {ocv_path!r}")
    battery = build("battery", BatteryModel,
                    capacity_ah=_number(raw, "battery", "capacity_ah"),
                    z_min=_number(raw, "battery", "z_min"),
                    v_nom=_number(raw, "battery", "v_nom"),
                    curve=curve)
    harvest = build("harvest", HarvestModel,
                    efficiency=_number(raw, "harvest", "efficiency"),
                    panel_area_m2=_number(raw, "harvest", "panel_area_m2"))
    horizon = raw["mpc"].get("horizon")
    if isinstance(horizon, bool) or not isinstance(horizon, int):
        raise ConfigError(f"mpc.horizon: expected an integer, got {horizon!r}")
    mpc_config = build("mpc", MpcConfig,
                       horizon=horizon,
                       discount=_number(raw, "mpc", "discount"),
                       w_info=_number(raw, "mpc", "w_info"),
                       w_energy=_number(raw, "mpc", "w_energy"),
                       f_s_max=_number(raw, "mpc", "f_s_max"),
                       f_t_max=_number(raw, "mpc", "f_t_max"),
                       window_hours=window_hours)
    lookback = raw.get("sim", {}).get("belief_lookback_windows", 1)
    if isinstance(lookback, bool) or not isinstance(lookback, int):
        raise ConfigError(f"sim.belief_lookback_windows: expected an integer, got {lookback!r}")
    options = build("sim", SimOptions,
                    restart_hysteresis=_number(raw, "sim", "restart_hysteresis",
                                               default=0.02),
                    belief_lookback_windows=lookback)

    initial = raw["initial"]
    if set(initial) == {"soe"}:
        soe = _number(raw, "initial", "soe")
        if not (0.0 <= soe <= 1.0):
            raise ConfigError(f"initial.soe: must be in [0, 1], got {soe}")
        z_initial = z_from_soe(soe, battery)
    elif set(initial) == {"z"}:
        z_initial = _number(raw, "initial", "z")
        if not (0.0 <= z_initial <= 1.0):
            raise ConfigError(f"initial.z: must be in [0, 1], got {z_initial}")
    else:
        raise ConfigError("initial: exactly one of 'soe' or 'z' must be present")

    def path_field(section, key):
        value = raw[section].get(key)
        if not isinstance(value, str) or not value:
            raise ConfigError(f"{section}.{key}: expected a path string, got {value!r}")
        return _resolve(base_dir, value)

    process_csv = path_field("dataset", "process_csv")
    irradiance_csv = path_field("dataset", "irradiance_csv")
    if require_dataset_files:
        for name, p in (("dataset.process_csv", process_csv),
                        ("dataset.irradiance_csv", irradiance_csv)):
            if not p.exists():
                raise ConfigError(f"{name}: file does not exist: {p}")
    trace_csv = path_field("output", "trace_csv")

    seed = raw.get("scenario", {}).get("seed", 0)
    if isinstance(seed, bool) or not isinstance(seed, int):
        raise ConfigError(f"scenario.seed: expected an integer, got {seed!r}")

    return RunConfig(window_hours=window_hours, voi=voi_params, profile=profile,
                     battery=battery, harvest=harvest, mpc=mpc_config,
                     options=options, z_initial=z_initial,
                     process_csv=process_csv, irradiance_csv=irradiance_csv,
                     trace_csv=trace_csv, scenario_seed=seed)


def load_run_config(path: str | Path,
                    require_dataset_files: bool = True) -> RunConfig:
    path = Path(path)
    raw = load_raw_config(path)
    return build_run_config(raw, path.parent, require_dataset_files)


def write_scenario_csvs(dataset: Dataset, process_csv: str | Path,
                        irradiance_csv: str | Path) -> None:
    """Write a dataset in the input format `load_dataset` expects."""
    for path, column, series in ((Path(process_csv), "level_m", dataset.process),
                                 (Path(irradiance_csv), "irradiance_wm2",
                                  dataset.irradiance)):
        path.parent.mkdir(parents=True, exist_ok=True)
        lines = [f"timestamp,{column}"]
        lines += [f"{t.isoformat()},{_fmt(v)}"
                  for t, v in zip(dataset.timestamps, series)]
        path.write_text("\n".join(lines) + "\n")


def _resolve(base_dir: Path, value: str) -> Path:
    p = Path(value)
    return p if p.is_absolute() else (base_dir / p).resolve()
