"""Value-of-information scoring for sensed observations.

An observation x of the monitored process is scored against three factors:

  threat rating     v_c(x) = exp(-lambda_c * (x_c - x))  for x < x_c,
                             1                           for x >= x_c
  process fidelity  v_r(f)  = 1 - exp(-alpha_r * window_hours * f)
  update delay cost v_d(f)  = d_o * exp(-alpha_d * f)

Fidelity rewards the sampling frequency with diminishing returns; the
delay cost punishes sparse transmissions. Both are context-weighted by
dividing the frequency by the threat rating, so a higher threat demands
proportionally higher frequencies to reach the same score. The combined
value of one decision window is

  v_i = v_c * v_r(f_s / v_c) - v_c * v_d(f_t / v_c)

which is jointly concave in (f_s, f_t), bounded in (-d_o, 1), and can be
negative when transmissions are too sparse for the data to be useful.

All frequencies are per hour; window_hours is the decision-window length.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InputError

# Threat ratings are divided into exponents; anything below this floor is
# indistinguishable in the combined score (v_i ~ v_c) and would overflow
# the exponent, so v_c is clamped here.
V_C_FLOOR = 1e-6


@dataclass(frozen=True)
class VoiParams:
    """Risk-appetite parameters of the scoring function.

    lambda_c      threat decay per unit of process value (> 0)
    x_c           critical threshold, in process units
    alpha_r       fidelity gain per sample (> 0)
    alpha_d       delay-cost decay per transmission (> 0)
    d_o           maximum delay cost, dimensionless (> 0)
    window_hours  decision-window duration in hours (> 0)
    """

    lambda_c: float
    x_c: float
    alpha_r: float
    alpha_d: float
    d_o: float
    window_hours: float

    def __post_init__(self):
        for name in ("lambda_c", "alpha_r", "alpha_d", "d_o", "window_hours"):
            value = getattr(self, name)
            if not math.isfinite(value) or value <= 0:
                raise InputError(f"VoiParams.{name} must be finite and > 0, got {value!r}")
        if not math.isfinite(self.x_c):
            raise InputError(f"VoiParams.x_c must be finite, got {self.x_c!r}")


@dataclass(frozen=True)
class VoiBreakdown:
    """The three factors and their combination for one decision.

    v_r and v_d are the context-weighted values, i.e. already evaluated at
    f / v_c, so that v_i == v_c * v_r - v_c * v_d holds exactly.
    """

    v_c: float
    v_r: float
    v_d: float
    v_i: float


def threat_rating(x: float, params: VoiParams) -> float:
    """Proximity of observation x to the critical threshold, in (0, 1].

    Exponential in the shortfall below x_c, saturating at 1 at and above
    the threshold (both branches meet at x = x_c, so the rating is
    continuous). Floored at V_C_FLOOR to keep downstream exponents finite.
    """
    if not math.isfinite(x):
        raise InputError(f"process value must be finite, got {x!r}")
    if x >= params.x_c:
        return 1.0
    return max(math.exp(-params.lambda_c * (params.x_c - x)), V_C_FLOOR)


def process_fidelity(f_s: float, v_c: float, params: VoiParams) -> float:
    """Reconstruction accuracy achieved by f_s samples/hour, in [0, 1).

    1 - exp(-alpha_r * window_hours * f_s / v_c): zero without samples,
    strictly increasing and strictly concave in f_s. The division by the
    threat rating makes a threatened process harder to satisfy.
    """
    _check_frequency("f_s", f_s)
    v_c = _check_rating(v_c)
    return 1.0 - math.exp(-params.alpha_r * params.window_hours * f_s / v_c)


def update_delay_cost(f_t: float, v_c: float, params: VoiParams) -> float:
    """Information lost to transmission latency at f_t transmissions/hour.

    d_o * exp(-alpha_d * f_t / v_c): worth d_o at zero transmissions,
    strictly decreasing and strictly convex in f_t, asymptotically zero.
    """
    _check_frequency("f_t", f_t)
    v_c = _check_rating(v_c)
    return params.d_o * math.exp(-params.alpha_d * f_t / v_c)


def value_of_information(x: float, f_s: float, f_t: float,
                         params: VoiParams) -> float:
    """Combined, context-weighted value of one decision window.

    v_c * (1 - exp(-alpha_r * wh * f_s / v_c)) - v_c * d_o * exp(-alpha_d * f_t / v_c).
    Jointly concave in (f_s, f_t) for fixed x; negative when the delay
    cost dominates (sparse transmissions of a low-value process).
    """
    return voi_breakdown(x, f_s, f_t, params).v_i


def voi_breakdown(x: float, f_s: float, f_t: float,
                  params: VoiParams) -> VoiBreakdown:
    """As `value_of_information`, exposing the individual factors."""
    v_c = threat_rating(x, params)
    v_r = process_fidelity(f_s, v_c, params)
    v_d = update_delay_cost(f_t, v_c, params)
    return VoiBreakdown(v_c=v_c, v_r=v_r, v_d=v_d, v_i=v_c * v_r - v_c * v_d)


def normalize_voi(v_i: float, params: VoiParams) -> float:
    """Affine map of the combined value onto [0, 1].

    The global bounds are [-d_o, 1]: the infimum is attained at zero
    frequencies with v_c = 1, the supremum approached as v_c -> 1 with
    saturated sampling. Inputs outside the bounds (floating error only)
    are clamped.
    """
    scaled = (v_i + params.d_o) / (1.0 + params.d_o)
    return min(1.0, max(0.0, scaled))


def risk_inclined_params(x_c: float, window_hours: float = 1.0) -> VoiParams:
    """Planner that tolerates threat and discounts staleness lightly."""
    return VoiParams(lambda_c=1.0, x_c=x_c, alpha_r=0.009, alpha_d=0.025,
                     d_o=0.5, window_hours=window_hours)


def risk_averse_params(x_c: float, window_hours: float = 1.0) -> VoiParams:
    """Planner that escalates early: slow threat decay, fast-saturating factors."""
    return VoiParams(lambda_c=0.5, x_c=x_c, alpha_r=0.02, alpha_d=0.25,
                     d_o=0.25, window_hours=window_hours)


def _check_frequency(name: str, value: float) -> None:
    if not math.isfinite(value) or value < 0:
        raise InputError(f"{name} must be finite and >= 0, got {value!r}")


def _check_rating(v_c: float) -> float:
    if not math.isfinite(v_c) or v_c <= 0 or v_c > 1:
        raise InputError(f"threat rating must be in (0, 1], got {v_c!r}")
    return max(v_c, V_C_FLOOR)
