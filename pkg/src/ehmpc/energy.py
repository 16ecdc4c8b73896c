"""Battery, consumption-profile and harvesting models.

State of charge z in [0, 1] is tracked by Coulomb counting. One decision
window of length `delta` hours at f_s samples/hour and f_t
transmissions/hour drains

  drain = delta * ( f_s * i_sense * d_sense
                  + f_t * i_transmit * d_transmit
                  + i_sleep * (3600 - f_s * d_sense - f_t * d_transmit) )

ampere-seconds (durations in seconds, currents in amperes); harvesting a
mean irradiance G over the window returns

  harvest = efficiency * G * panel_area * 3600 * delta / v_nom

ampere-seconds. State of energy maps z through the open-circuit-voltage
curve: the remaining extractable energy relative to a full buffer,

  soe(z) = max(0, int_{z_min}^{z} ocv) / int_{z_min}^{1} ocv,

computed exactly (trapezoid) on the piecewise-linear stored curve. All
internal charge bookkeeping is in ampere-seconds; capacities are supplied
in ampere-hours and converted once.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import InfeasibleDecisionError, InputError, UnboundedError

logger = logging.getLogger(__name__)

SECONDS_PER_HOUR = 3600.0


@dataclass(frozen=True)
class EnergyProfile:
    """Per-phase current draws (A) and task durations (s) of the node."""

    i_sleep_a: float
    i_sense_a: float
    i_transmit_a: float
    d_sense_s: float
    d_transmit_s: float

    def __post_init__(self):
        for name in ("i_sleep_a", "i_sense_a", "i_transmit_a",
                     "d_sense_s", "d_transmit_s"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise InputError(f"EnergyProfile.{name} must be finite and > 0, got {value!r}")
        if self.i_sleep_a >= self.i_sense_a or self.i_sleep_a >= self.i_transmit_a:
            raise InputError("sleep current must be below sense and transmit currents")


# Bench profile of the reference ESP32-class node with its sensor set.
DEFAULT_PROFILE = EnergyProfile(
    i_sleep_a=1.43e-3,
    i_sense_a=0.105,
    i_transmit_a=0.127,
    d_sense_s=13.0,
    d_transmit_s=4.1,
)


@dataclass(frozen=True)
class OcvCurve:
    """Monotone open-circuit-voltage table over the full SoC range.

    Knots must cover [0, 1] with strictly increasing soc and
    nondecreasing positive voltage; values between knots interpolate
    linearly. The cumulative integral at the knots is precomputed so that
    energy integrals are exact for the piecewise-linear curve.
    """

    soc: np.ndarray
    voltage: np.ndarray
    _cumulative: np.ndarray = field(init=False, repr=False, compare=False)

    def __post_init__(self):
        soc = np.asarray(self.soc, dtype=float)
        voltage = np.asarray(self.voltage, dtype=float)
        if soc.ndim != 1 or soc.shape != voltage.shape or soc.size < 2:
            raise InputError("OCV curve needs matching 1-d soc/voltage arrays with >= 2 knots")
        if not (np.all(np.isfinite(soc)) and np.all(np.isfinite(voltage))):
            raise InputError("OCV curve values must be finite")
        if soc[0] != 0.0 or soc[-1] != 1.0:
            raise InputError("OCV curve must span soc 0.0 to 1.0")
        if np.any(np.diff(soc) <= 0):
            raise InputError("OCV curve soc knots must be strictly increasing")
        if np.any(voltage <= 0):
            raise InputError("OCV curve voltages must be > 0")
        if np.any(np.diff(voltage) < 0):
            raise InputError("OCV curve voltages must be nondecreasing")
        cumulative = np.concatenate(
            ([0.0], np.cumsum(0.5 * (voltage[1:] + voltage[:-1]) * np.diff(soc))))
        for name, arr in (("soc", soc), ("voltage", voltage), ("_cumulative", cumulative)):
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def voltage_at(self, z):
        """Interpolated voltage; z may be a scalar or an array in [0, 1]."""
        return np.interp(z, self.soc, self.voltage)

    def integral_from_zero(self, z):
        """Exact integral of the curve over [0, z] (volt * soc units)."""
        idx = np.clip(np.searchsorted(self.soc, z, side="right") - 1,
                      0, self.soc.size - 2)
        partial = 0.5 * (self.voltage[idx] + self.voltage_at(z)) * (z - self.soc[idx])
        return self._cumulative[idx] + partial

    def integral_between(self, lo: float, hi: float) -> float:
        return float(self.integral_from_zero(hi) - self.integral_from_zero(lo))


def default_ocv_curve() -> OcvCurve:
    """Shipped 21-knot lithium-ion-shaped curve, 3.0 V empty to 4.2 V full.

    Steep knee below 10 % charge, a flat mid plateau around 3.6-3.7 V and
    a rising tail toward full: the generic shape of a single Li-ion cell.
    Used by the shipped configuration; replace with a measured table for
    a specific cell.
    """
    soc = np.linspace(0.0, 1.0, 21)
    voltage = np.array([
        3.000, 3.300, 3.430, 3.490, 3.530, 3.560, 3.580, 3.600, 3.620, 3.640,
        3.660, 3.680, 3.710, 3.740, 3.780, 3.830, 3.880, 3.940, 4.020, 4.110,
        4.200,
    ])
    return OcvCurve(soc=soc, voltage=voltage)


def flat_ocv_curve(voltage: float = 3.6) -> OcvCurve:
    """Constant-voltage curve; reduces soe(z) to (z - z_min)/(1 - z_min)."""
    return OcvCurve(soc=np.array([0.0, 1.0]),
                    voltage=np.array([voltage, voltage]))


@dataclass(frozen=True)
class BatteryModel:
    """Single-cell battery: capacity, SoC floor, nominal voltage, OCV curve."""

    capacity_ah: float
    z_min: float
    v_nom: float
    curve: OcvCurve
    energy_denominator: float = field(init=False, compare=False)

    def __post_init__(self):
        if not math.isfinite(self.capacity_ah) or self.capacity_ah <= 0:
            raise InputError(f"BatteryModel.capacity_ah must be > 0, got {self.capacity_ah!r}")
        if not (0.0 <= self.z_min < 1.0):
            raise InputError(f"BatteryModel.z_min must be in [0, 1), got {self.z_min!r}")
        if not math.isfinite(self.v_nom) or self.v_nom <= 0:
            raise InputError(f"BatteryModel.v_nom must be > 0, got {self.v_nom!r}")
        denominator = self.curve.integral_between(self.z_min, 1.0)
        if denominator <= 0:
            raise InputError("usable OCV integral over [z_min, 1] must be > 0")
        object.__setattr__(self, "energy_denominator", denominator)

    @property
    def capacity_as(self) -> float:
        """Charge capacity in ampere-seconds."""
        return self.capacity_ah * SECONDS_PER_HOUR


@dataclass(frozen=True)
class HarvestModel:
    """Solar harvesting chain: overall efficiency and panel area (m^2)."""

    efficiency: float
    panel_area_m2: float

    def __post_init__(self):
        if not (0.0 < self.efficiency <= 1.0):
            raise InputError(f"HarvestModel.efficiency must be in (0, 1], got {self.efficiency!r}")
        if not math.isfinite(self.panel_area_m2) or self.panel_area_m2 <= 0:
            raise InputError(f"HarvestModel.panel_area_m2 must be > 0, got {self.panel_area_m2!r}")


@dataclass(frozen=True)
class SocState:
    """State of charge, clamped to [0, 1] by every update."""

    z: float

    def __post_init__(self):
        if not (0.0 <= self.z <= 1.0):
            raise InputError(f"SoC must be in [0, 1], got {self.z!r}")


@dataclass(frozen=True)
class SocTransition:
    """One window's charge bookkeeping.

    clamp_as is the charge the [0, 1] clamp added (> 0, floor hit while
    over-draining) or removed (< 0, harvest discarded at full buffer);
    zero on an unclamped step. z_new already includes it.
    """

    z_new: float
    drain_as: float
    harvest_as: float
    clamp_as: float


def duty_cycle_slack_s(f_s: float, f_t: float, profile: EnergyProfile) -> float:
    """Seconds per hour left after sensing and transmitting; >= 0 is feasible.

    The bound is per hour of window (activity cannot exceed wall time),
    so it is independent of the window length.
    """
    return SECONDS_PER_HOUR - f_s * profile.d_sense_s - f_t * profile.d_transmit_s


def drain_charge(f_s: float, f_t: float, profile: EnergyProfile,
                 delta: float = 1.0) -> float:
    """Charge drawn over a window of `delta` hours, in ampere-seconds.

    Strictly increasing and affine in both frequencies; the node sleeps
    whenever it is not sensing or transmitting.
    """
    _check_nonnegative("f_s", f_s)
    _check_nonnegative("f_t", f_t)
    _check_positive("delta", delta)
    slack = duty_cycle_slack_s(f_s, f_t, profile)
    if slack < 0:
        raise InfeasibleDecisionError(
            f"duty cycle infeasible: sensing+transmitting exceeds the hour by {-slack:.3f} s",
            constraint="duty_cycle")
    return delta * (f_s * profile.i_sense_a * profile.d_sense_s
                    + f_t * profile.i_transmit_a * profile.d_transmit_s
                    + profile.i_sleep_a * slack)


def harvest_charge(mean_irradiance: float, harvest: HarvestModel,
                   battery: BatteryModel, delta: float = 1.0) -> float:
    """Charge gained from a mean irradiance (W/m^2), in ampere-seconds."""
    if not math.isfinite(mean_irradiance) or mean_irradiance < 0:
        raise InputError(f"irradiance must be finite and >= 0, got {mean_irradiance!r}")
    _check_positive("delta", delta)
    energy_j = harvest.efficiency * mean_irradiance * harvest.panel_area_m2 \
        * SECONDS_PER_HOUR * delta
    return energy_j / battery.v_nom


def soc_transition(z: float, f_s: float, f_t: float, profile: EnergyProfile,
                   harvest: HarvestModel, battery: BatteryModel,
                   mean_irradiance: float, delta: float = 1.0) -> SocTransition:
    """Advance the SoC one window, with full charge bookkeeping."""
    drain = drain_charge(f_s, f_t, profile, delta)
    gained = harvest_charge(mean_irradiance, harvest, battery, delta)
    unclamped = z + (gained - drain) / battery.capacity_as
    z_new = min(1.0, max(0.0, unclamped))
    clamp = (z_new - unclamped) * battery.capacity_as
    if clamp != 0.0:
        kind = "discarded surplus harvest" if clamp < 0 else "floor-limited drain"
        logger.debug("SoC clamp at z=%.6f: %s of %.6f A*s", z_new, kind, abs(clamp))
    return SocTransition(z_new=z_new, drain_as=drain, harvest_as=gained,
                         clamp_as=clamp)


def soc_step(state: SocState, f_s: float, f_t: float, profile: EnergyProfile,
             harvest: HarvestModel, battery: BatteryModel,
             mean_irradiance: float, delta: float = 1.0) -> SocState:
    """Advance the SoC one window; see `soc_transition` for the bookkeeping."""
    transition = soc_transition(state.z, f_s, f_t, profile, harvest, battery,
                                mean_irradiance, delta)
    return SocState(z=transition.z_new)


def ocv(z, battery: BatteryModel):
    """Open-circuit voltage at SoC z (scalar or array), in volts."""
    _check_soc(z)
    value = battery.curve.voltage_at(z)
    return float(value) if np.ndim(z) == 0 else value


def soe_from_soc(z, battery: BatteryModel):
    """State of energy in [0, 1]: extractable energy relative to full.

    Zero at and below the SoC floor, exactly one at z = 1, nondecreasing
    in between. Accepts a scalar or an array.
    """
    _check_soc(z)
    numerator = battery.curve.integral_from_zero(z) \
        - battery.curve.integral_from_zero(battery.z_min)
    value = np.maximum(0.0, numerator) / battery.energy_denominator
    return float(value) if np.ndim(z) == 0 else value


def z_from_soe(soe: float, battery: BatteryModel) -> float:
    """Invert `soe_from_soc` by bisection (width 1e-12 < the 1e-9 target).

    soe = 0 maps to the SoC floor, the canonical preimage of the flat
    region below it.
    """
    if not (0.0 <= soe <= 1.0):
        raise InputError(f"SoE must be in [0, 1], got {soe!r}")
    lo, hi = battery.z_min, 1.0
    if soe == 0.0:
        return lo
    if soe == 1.0:
        return hi
    while hi - lo > 1e-12:
        mid = 0.5 * (lo + hi)
        if soe_from_soc(mid, battery) < soe:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def shutdown_time(profile: EnergyProfile, battery: BatteryModel,
                  f_s: float, f_t: float) -> float:
    """Hours from a full buffer to the SoC floor at constant frequencies.

    Zero-harvest closed form: (1 - z_min) * capacity / drain-per-hour.
    """
    per_hour = drain_charge(f_s, f_t, profile, delta=1.0)
    if per_hour <= 0:
        raise UnboundedError("zero drain: the node never reaches the SoC floor")
    return (1.0 - battery.z_min) * battery.capacity_as / per_hour


def _check_nonnegative(name: str, value: float) -> None:
    if not math.isfinite(value) or value < 0:
        raise InputError(f"{name} must be finite and >= 0, got {value!r}")


def _check_positive(name: str, value: float) -> None:
    if not math.isfinite(value) or value <= 0:
        raise InputError(f"{name} must be finite and > 0, got {value!r}")


def _check_soc(z) -> None:
    arr = np.asarray(z, dtype=float)
    if not np.all(np.isfinite(arr)) or np.any(arr < 0.0) or np.any(arr > 1.0):
        raise InputError("SoC values must lie in [0, 1]")
