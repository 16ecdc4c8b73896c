"""Receding-horizon hindcasting over recorded datasets.

Each window of the hindcast rebuilds beliefs (process persistence of the
previous window's maximum; clairvoyant harvest), solves the horizon,
applies the integer-rounded first decision, and advances the battery with
the window's actually recorded irradiance. A node whose SoC is at or
below the floor at the start of a window is depleted: its decision is
forced to zero until the charge recovers past the floor plus a
hysteresis margin. Static-frequency baselines share the stepping and
depletion logic with the decision fixed.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass
from datetime import datetime

import numpy as np

from . import energy, mpc, voi
from .errors import InputError
from .mpc import Beliefs, Decision, MpcConfig, NodeModels, Plan

logger = logging.getLogger(__name__)

NODE_ACTIVE = "active"
NODE_DEPLETED = "depleted"


@dataclass(frozen=True)
class Dataset:
    """Window-aligned recorded series: process values and irradiance."""

    timestamps: tuple[datetime, ...]
    process: np.ndarray
    irradiance: np.ndarray
    window_hours: float

    def __post_init__(self):
        process = np.asarray(self.process, dtype=float)
        irradiance = np.asarray(self.irradiance, dtype=float)
        if not (len(self.timestamps) == process.size == irradiance.size):
            raise InputError("dataset series must share one window grid")
        if process.size < 2:
            raise InputError("dataset must cover at least two windows")
        if not np.all(np.isfinite(process)):
            raise InputError("process series must be finite")
        if not np.all(np.isfinite(irradiance)) or np.any(irradiance < 0):
            raise InputError("irradiance series must be finite and >= 0")
        if self.window_hours <= 0:
            raise InputError("window_hours must be > 0")
        process.setflags(write=False)
        irradiance.setflags(write=False)
        object.__setattr__(self, "timestamps", tuple(self.timestamps))
        object.__setattr__(self, "process", process)
        object.__setattr__(self, "irradiance", irradiance)

    def __len__(self) -> int:
        return self.process.size


@dataclass(frozen=True)
class SimOptions:
    """Hindcast behavior knobs."""

    restart_hysteresis: float = 0.02
    belief_lookback_windows: int = 1

    def __post_init__(self):
        if self.restart_hysteresis < 0:
            raise InputError("restart_hysteresis must be >= 0")
        if self.belief_lookback_windows < 1:
            raise InputError("belief_lookback_windows must be >= 1")


@dataclass(frozen=True)
class TraceRecord:
    """One simulated window.

    z and soe are the end-of-window values; voi and utility score the
    window's actually observed process value under the applied decision.
    drain_as / harvest_as / clamp_as carry the charge bookkeeping used by
    the energy-conservation audit.
    """

    timestamp: datetime
    x_observed: float
    f_s_applied: float
    f_t_applied: float
    z: float
    soe: float
    voi: float
    utility: float
    planned_objective: float
    node_state: str
    drain_as: float
    harvest_as: float
    clamp_as: float


@dataclass(frozen=True)
class TraceSummary:
    windows: int
    cumulative_voi: float
    terminal_soe: float
    depleted_windows: int
    mean_f_s: float
    mean_f_t: float


@dataclass(frozen=True)
class TraceComparison:
    a: TraceSummary
    b: TraceSummary
    cumulative_voi_delta: float
    terminal_soe_delta: float
    depleted_windows_delta: int


def build_beliefs(dataset: Dataset, current_index: int, config: MpcConfig,
                  lookback_windows: int = 1) -> Beliefs:
    """Forecasts for the horizon starting at `current_index`.

    The process forecast persists the maximum of the preceding
    `lookback_windows` recorded values; the harvest forecast is the
    recorded irradiance of the next horizon windows (clairvoyant),
    zero-padded with a logged warning past the end of the dataset.
    """
    if current_index < lookback_windows or current_index >= len(dataset):
        raise InputError(
            f"window index {current_index} needs {lookback_windows} preceding "
            f"window(s) within the {len(dataset)}-window dataset")
    level = float(np.max(dataset.process[current_index - lookback_windows:current_index]))
    n = config.n_windows
    future = dataset.irradiance[current_index:current_index + n]
    if future.size < n:
        logger.warning(
            "harvest forecast at window %d: only %d of %d future windows "
            "recorded, padding with zeros", current_index, future.size, n)
        future = np.concatenate([future, np.zeros(n - future.size)])
    return Beliefs(process_forecast=(level,) * n,
                   harvest_forecast=tuple(future))


def run_hindcast(dataset: Dataset, models: NodeModels, config: MpcConfig,
                 z_initial: float, options: SimOptions = SimOptions(),
                 ) -> list[TraceRecord]:
    """Replay the dataset through the receding-horizon controller."""
    _check_setup(dataset, models, config, z_initial)
    records: list[TraceRecord] = []
    z = z_initial
    depleted = False
    previous_plan: Plan | None = None

    for index in range(options.belief_lookback_windows, len(dataset)):
        depleted = _update_node_state(z, depleted, models.battery, options)
        beliefs = build_beliefs(dataset, index, config,
                                options.belief_lookback_windows)
        if depleted:
            applied = Decision(0.0, 0.0)
            planned_objective = math.nan
            previous_plan = None
        else:
            warm = _shift_warm_start(previous_plan)
            plan = mpc.solve(z, beliefs, config, models, warm_start=warm)
            applied = mpc.round_first_decision(plan, z, beliefs, config, models)
            planned_objective = plan.objective_value
            previous_plan = plan
        records.append(_step_and_record(
            dataset, index, z, applied, planned_objective,
            NODE_DEPLETED if depleted else NODE_ACTIVE, models, config))
        z = records[-1].z
    return records


def run_static_baseline(dataset: Dataset, f_s: float, f_t: float,
                        models: NodeModels, config: MpcConfig,
                        z_initial: float,
                        options: SimOptions = SimOptions()) -> list[TraceRecord]:
    """Replay the dataset at fixed frequencies with the same depletion logic."""
    _check_setup(dataset, models, config, z_initial)
    if f_t > f_s:
        raise InputError(f"baseline needs f_s >= f_t, got ({f_s}, {f_t})")
    if f_s < 0 or f_t < 0:
        raise InputError("baseline frequencies must be >= 0")
    if energy.duty_cycle_slack_s(f_s, f_t, models.profile) < 0:
        raise InputError(f"baseline ({f_s}, {f_t}) is duty-cycle infeasible")

    records: list[TraceRecord] = []
    z = z_initial
    depleted = False
    for index in range(options.belief_lookback_windows, len(dataset)):
        depleted = _update_node_state(z, depleted, models.battery, options)
        applied = Decision(0.0, 0.0) if depleted else Decision(f_s, f_t)
        records.append(_step_and_record(
            dataset, index, z, applied, math.nan,
            NODE_DEPLETED if depleted else NODE_ACTIVE, models, config))
        z = records[-1].z
    return records


def _update_node_state(z: float, depleted: bool, battery: energy.BatteryModel,
                       options: SimOptions) -> bool:
    if depleted:
        return z < battery.z_min + options.restart_hysteresis
    return z <= battery.z_min


def _shift_warm_start(plan: Plan | None):
    if plan is None or plan.infeasible_idle:
        return None
    return plan.decisions[1:] + (plan.decisions[-1],)


def _step_and_record(dataset: Dataset, index: int, z: float, applied: Decision,
                     planned_objective: float, node_state: str,
                     models: NodeModels, config: MpcConfig) -> TraceRecord:
    transition = energy.soc_transition(
        z, applied.f_s, applied.f_t, models.profile, models.harvest,
        models.battery, float(dataset.irradiance[index]), config.window_hours)
    x = float(dataset.process[index])
    soe = energy.soe_from_soc(transition.z_new, models.battery)
    value = voi.value_of_information(x, applied.f_s, applied.f_t, models.voi)
    utility = (config.w_info * voi.normalize_voi(value, models.voi)
               + config.w_energy * soe)
    return TraceRecord(
        timestamp=dataset.timestamps[index],
        x_observed=x,
        f_s_applied=applied.f_s,
        f_t_applied=applied.f_t,
        z=transition.z_new,
        soe=soe,
        voi=value,
        utility=utility,
        planned_objective=planned_objective,
        node_state=node_state,
        drain_as=transition.drain_as,
        harvest_as=transition.harvest_as,
        clamp_as=transition.clamp_as,
    )


def _check_setup(dataset: Dataset, models: NodeModels, config: MpcConfig,
                 z_initial: float) -> None:
    if not (0.0 <= z_initial <= 1.0):
        raise InputError(f"z_initial must be in [0, 1], got {z_initial!r}")
    if dataset.window_hours != config.window_hours:
        raise InputError("dataset and config disagree on the window length")
    if models.voi.window_hours != config.window_hours:
        raise InputError("VoiParams and MpcConfig disagree on the window length")


def trace_summary(trace: list[TraceRecord]) -> TraceSummary:
    """Deterministic aggregates of one trace."""
    if not trace:
        raise InputError("cannot summarize an empty trace")
    return TraceSummary(
        windows=len(trace),
        cumulative_voi=float(sum(r.voi for r in trace)),
        terminal_soe=trace[-1].soe,
        depleted_windows=sum(1 for r in trace if r.node_state == NODE_DEPLETED),
        mean_f_s=float(sum(r.f_s_applied for r in trace) / len(trace)),
        mean_f_t=float(sum(r.f_t_applied for r in trace) / len(trace)),
    )


def compare_traces(trace_a: list[TraceRecord],
                   trace_b: list[TraceRecord]) -> TraceComparison:
    """Side-by-side summaries of two traces over the same timeline."""
    if [r.timestamp for r in trace_a] != [r.timestamp for r in trace_b]:
        raise InputError("traces cover different timelines")
    summary_a = trace_summary(trace_a)
    summary_b = trace_summary(trace_b)
    return TraceComparison(
        a=summary_a,
        b=summary_b,
        cumulative_voi_delta=summary_a.cumulative_voi - summary_b.cumulative_voi,
        terminal_soe_delta=summary_a.terminal_soe - summary_b.terminal_soe,
        depleted_windows_delta=summary_a.depleted_windows - summary_b.depleted_windows,
    )


def audit_energy_balance(trace: list[TraceRecord], z_initial: float,
                         battery: energy.BatteryModel) -> float:
    """Absolute SoC error between the summed charge flows and the state.

    z_final must equal z_initial - sum(drain)/C + sum(harvest)/C plus the
    logged clamp corrections; anything above floating accumulation noise
    means charge was silently created or lost.
    """
    cap = battery.capacity_as
    net = sum(r.harvest_as - r.drain_as + r.clamp_as for r in trace)
    return abs(z_initial + net / cap - trace[-1].z)
