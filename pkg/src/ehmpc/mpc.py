"""Receding-horizon frequency planning.

One plan covers windows k = 0..horizon. Each window's utility is

  u_k = w_info * normalized_voi(x_k, f_s(k), f_t(k)) + w_energy * soe(z(k+1))

where z(k+1) is the post-decision state of charge under the believed
harvest, and the objective is the discounted sum over the horizon,
sum_k (1 + discount)^-k * u_k, maximized subject to, per window:

  soe(z(k+1)) >= 0   (equivalently z(k+1) >= z_min)
  f_s * d_sense + f_t * d_transmit <= 3600 s of activity per hour
  f_s >= f_t,  f_s <= f_s_max,  f_t <= f_t_max,  f_s, f_t >= 0

The maximizer is projected gradient ascent with backtracking line
search: decisions are swept forward through a per-window polygon
projection whose charge budget reserves enough energy for an idle
completion of the horizon, which keeps every iterate inside the true
(convex) feasible set. `brute_force_plan` enumerates an integer decision
grid depth-first with constraint pruning and serves as the verification
oracle for the solver.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from . import energy, voi
from .energy import BatteryModel, EnergyProfile, HarvestModel
from .errors import InfeasibleDecisionError, InputError
from .voi import VoiParams

FEAS_TOL = 1e-9
BRUTE_FORCE_NODE_GUARD = 1e8

RESIDUAL_COLUMNS = ("soe_floor", "duty_cycle", "sampling_order",
                    "f_s_cap", "f_t_cap", "nonnegativity")


@dataclass(frozen=True)
class Decision:
    """Sampling and transmission frequencies (per hour) for one window."""

    f_s: float
    f_t: float

    def __post_init__(self):
        for name in ("f_s", "f_t"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise InputError(f"Decision.{name} must be finite and >= 0, got {value!r}")


@dataclass(frozen=True)
class MpcConfig:
    """Horizon shape, discounting, utility weights and frequency caps.

    `horizon` counts future windows beyond the current one, so a plan has
    horizon + 1 decisions; horizon 0 degenerates to a single window.
    """

    horizon: int
    discount: float
    w_info: float
    w_energy: float
    f_s_max: float
    f_t_max: float
    window_hours: float

    def __post_init__(self):
        if not isinstance(self.horizon, int) or self.horizon < 0:
            raise InputError(f"MpcConfig.horizon must be an integer >= 0, got {self.horizon!r}")
        if not math.isfinite(self.discount) or self.discount < 0:
            raise InputError(f"MpcConfig.discount must be >= 0, got {self.discount!r}")
        for name in ("w_info", "w_energy"):
            value = getattr(self, name)
            if not math.isfinite(value) or value < 0:
                raise InputError(f"MpcConfig.{name} must be >= 0, got {value!r}")
        if self.w_info == 0 and self.w_energy == 0:
            raise InputError("at least one of w_info / w_energy must be positive")
        if not (math.isfinite(self.f_t_max) and 0 < self.f_t_max <= self.f_s_max):
            raise InputError("frequency caps must satisfy 0 < f_t_max <= f_s_max")
        if not math.isfinite(self.window_hours) or self.window_hours <= 0:
            raise InputError(f"MpcConfig.window_hours must be > 0, got {self.window_hours!r}")

    @property
    def n_windows(self) -> int:
        return self.horizon + 1


@dataclass(frozen=True)
class Beliefs:
    """Per-window forecasts: process value and mean irradiance (W/m^2)."""

    process_forecast: tuple[float, ...]
    harvest_forecast: tuple[float, ...]

    def __post_init__(self):
        process = tuple(float(v) for v in self.process_forecast)
        harvest = tuple(float(v) for v in self.harvest_forecast)
        if len(process) != len(harvest) or not process:
            raise InputError("belief sequences must be non-empty and of equal length")
        if not all(math.isfinite(v) for v in process):
            raise InputError("process forecast must be finite")
        if not all(math.isfinite(v) and v >= 0 for v in harvest):
            raise InputError("harvest forecast must be finite and >= 0")
        object.__setattr__(self, "process_forecast", process)
        object.__setattr__(self, "harvest_forecast", harvest)


@dataclass(frozen=True)
class NodeModels:
    """Everything the planner knows about the node."""

    voi: VoiParams
    profile: EnergyProfile
    battery: BatteryModel
    harvest: HarvestModel


@dataclass(frozen=True)
class Plan:
    """Solver output: decisions, projected SoC path and solve metadata.

    `infeasible_idle` marks the degenerate all-zero plan returned when
    even idling violates the SoC floor somewhere in the horizon; such a
    plan is exempt from the feasibility guarantee.
    """

    decisions: tuple[Decision, ...]
    projected_soc: tuple[float, ...]
    objective_value: float
    iterations: int
    converged: bool
    infeasible_idle: bool = False


class _Problem:
    """Precomputed per-solve quantities shared by objective and projection."""

    def __init__(self, z0: float, beliefs: Beliefs, config: MpcConfig,
                 models: NodeModels):
        if not (0.0 <= z0 <= 1.0):
            raise InputError(f"initial SoC must be in [0, 1], got {z0!r}")
        if len(beliefs.process_forecast) != config.n_windows:
            raise InputError(
                f"beliefs cover {len(beliefs.process_forecast)} windows, "
                f"config expects {config.n_windows}")
        if models.voi.window_hours != config.window_hours:
            raise InputError("VoiParams.window_hours and MpcConfig.window_hours disagree")
        self.z0 = z0
        self.config = config
        self.models = models
        self.n = config.n_windows
        delta = config.window_hours
        profile = models.profile
        battery = models.battery
        self.cap_as = battery.capacity_as
        self.z_min = battery.z_min
        self.delta = delta
        # drain(f_s, f_t) = base + a_s f_s + a_t f_t  [ampere-seconds/window]
        self.a_s = delta * profile.d_sense_s * (profile.i_sense_a - profile.i_sleep_a)
        self.a_t = delta * profile.d_transmit_s * (profile.i_transmit_a - profile.i_sleep_a)
        self.base_drain = delta * energy.SECONDS_PER_HOUR * profile.i_sleep_a
        self.v_c = np.array([voi.threat_rating(x, models.voi)
                             for x in beliefs.process_forecast])
        self.harvest_as = np.array([
            energy.harvest_charge(g, models.harvest, battery, delta)
            for g in beliefs.harvest_forecast])
        self.gamma = (1.0 + config.discount) ** -np.arange(self.n)
        self.k_s = models.voi.alpha_r * delta / self.v_c
        self.k_t = models.voi.alpha_d / self.v_c
        self.norm_scale = 1.0 / (1.0 + models.voi.d_o)
        self.needed = self._idle_requirements()

    def _idle_requirements(self) -> list[float]:
        """Minimum SoC at each state index from which an idle completion
        of the horizon keeps every later state at or above the floor."""
        needed = [0.0] * (self.n + 1)
        needed[self.n] = self.z_min
        for k in reversed(range(self.n)):
            if needed[k + 1] > 1.0:
                requirement = math.inf
            else:
                requirement = needed[k + 1] - (self.harvest_as[k] - self.base_drain) / self.cap_as
            floor = self.z_min if k >= 1 else 0.0
            needed[k] = max(floor, requirement)
        return needed

    def drains(self, f_s: np.ndarray, f_t: np.ndarray) -> np.ndarray:
        return self.base_drain + self.a_s * f_s + self.a_t * f_t

    def propagate(self, f_s: np.ndarray, f_t: np.ndarray):
        """Forward SoC path with clamp indicators (1 where the step was
        interior, 0 where the [0, 1] clamp froze the state)."""
        drains = self.drains(f_s, f_t)
        net = ((self.harvest_as - drains) / self.cap_as).tolist()
        z = self.z0
        states = [z]
        interior = []
        for k in range(self.n):
            unclamped = z + net[k]
            z = min(1.0, max(0.0, unclamped))
            interior.append(1.0 if 0.0 < unclamped < 1.0 else 0.0)
            states.append(z)
        return np.array(states), np.array(interior)

    def normalized_voi(self, f_s: np.ndarray, f_t: np.ndarray) -> np.ndarray:
        d_o = self.models.voi.d_o
        raw = (self.v_c * (1.0 - np.exp(-self.k_s * f_s))
               - self.v_c * d_o * np.exp(-self.k_t * f_t))
        return np.clip((raw + d_o) * self.norm_scale, 0.0, 1.0)

    def soe(self, z: np.ndarray) -> np.ndarray:
        battery = self.models.battery
        numerator = (battery.curve.integral_from_zero(z)
                     - battery.curve.integral_from_zero(self.z_min))
        return np.maximum(0.0, numerator) / battery.energy_denominator

    def objective(self, f_s: np.ndarray, f_t: np.ndarray) -> float:
        states, _ = self.propagate(f_s, f_t)
        utilities = (self.config.w_info * self.normalized_voi(f_s, f_t)
                     + self.config.w_energy * self.soe(states[1:]))
        return float(np.dot(self.gamma, utilities))

    def objective_and_gradient(self, f_s: np.ndarray, f_t: np.ndarray):
        config, models = self.config, self.models
        states, interior = self.propagate(f_s, f_t)
        z_next = states[1:]
        soe_vals = self.soe(z_next)
        voi_norm = self.normalized_voi(f_s, f_t)
        objective = float(np.dot(self.gamma,
                                 config.w_info * voi_norm + config.w_energy * soe_vals))

        d_o = models.voi.d_o
        g_fs = (self.gamma * config.w_info * self.norm_scale
                * models.voi.alpha_r * self.delta * np.exp(-self.k_s * f_s))
        g_ft = (self.gamma * config.w_info * self.norm_scale
                * models.voi.alpha_d * d_o * np.exp(-self.k_t * f_t))

        # Marginal SoE of each state, zero below the floor where soe is flat.
        battery = models.battery
        marginal = np.where(z_next > self.z_min,
                            battery.curve.voltage_at(z_next) / battery.energy_denominator,
                            0.0)
        # Adjoint sweep: value of one extra unit of SoC at each state.
        lam = np.zeros(self.n)
        lam[-1] = self.gamma[-1] * config.w_energy * marginal[-1]
        for k in range(self.n - 2, -1, -1):
            lam[k] = (self.gamma[k] * config.w_energy * marginal[k]
                      + interior[k + 1] * lam[k + 1])
        g_fs = g_fs - lam * interior * self.a_s / self.cap_as
        g_ft = g_ft - lam * interior * self.a_t / self.cap_as
        return objective, g_fs, g_ft

    def window_budget_rhs(self, z: float, k: int) -> float:
        """Right-hand side of a_s f_s + a_t f_t <= rhs for window k given
        its starting SoC, reserving charge for an idle completion."""
        budget = (z - self.needed[k + 1]) * self.cap_as + self.harvest_as[k]
        return max(0.0, budget - self.base_drain)

    def sweep_project(self, f_s: np.ndarray, f_t: np.ndarray):
        """Project each window's decision onto its feasible polygon,
        propagating the realized SoC forward so later budgets are exact."""
        out_s = np.empty(self.n)
        out_t = np.empty(self.n)
        z = self.z0
        for k in range(self.n):
            rhs = self.window_budget_rhs(z, k)
            fs_k, ft_k = _project_window(f_s[k], f_t[k], self.config,
                                         self.models.profile,
                                         self.a_s, self.a_t, rhs)
            out_s[k] = fs_k
            out_t[k] = ft_k
            unclamped = z + (self.harvest_as[k] - self.drains(fs_k, ft_k)) / self.cap_as
            z = min(1.0, max(0.0, unclamped))
        return out_s, out_t


def _project_window(f_s: float, f_t: float, config: MpcConfig,
                    profile: EnergyProfile, a_s: float, a_t: float,
                    budget_rhs: float | None):
    """Euclidean projection of one (f_s, f_t) point onto the window polygon.

    Constraints are half-planes a*f_s + b*f_t <= c; the projection is the
    point itself when feasible, otherwise the nearest feasible foot of a
    constraint line or polygon vertex.
    """
    constraints = [
        (-1.0, 0.0, 0.0),
        (0.0, -1.0, 0.0),
        (1.0, 0.0, config.f_s_max),
        (0.0, 1.0, config.f_t_max),
        (-1.0, 1.0, 0.0),
        (profile.d_sense_s, profile.d_transmit_s, energy.SECONDS_PER_HOUR),
    ]
    if budget_rhs is not None:
        constraints.append((a_s, a_t, budget_rhs))

    def feasible(x: float, y: float, tol: float = FEAS_TOL) -> bool:
        return all(a * x + b * y <= c + tol for a, b, c in constraints)

    if feasible(f_s, f_t):
        return _tidy(f_s, f_t, config)

    candidates = []
    for a, b, c in constraints:
        scale = (a * f_s + b * f_t - c) / (a * a + b * b)
        foot = (f_s - scale * a, f_t - scale * b)
        if feasible(*foot):
            candidates.append(foot)
    for (a1, b1, c1), (a2, b2, c2) in itertools.combinations(constraints, 2):
        det = a1 * b2 - a2 * b1
        if abs(det) < 1e-12:
            continue
        vertex = ((c1 * b2 - c2 * b1) / det, (a1 * c2 - a2 * c1) / det)
        if feasible(*vertex):
            candidates.append(vertex)
    if not candidates:
        raise InfeasibleDecisionError("window polygon is empty", constraint="soe_floor")
    best = min(candidates,
               key=lambda p: (p[0] - f_s) ** 2 + (p[1] - f_t) ** 2)
    return _tidy(best[0], best[1], config)


def _tidy(f_s: float, f_t: float, config: MpcConfig):
    """Snap projection roundoff back inside the box (downward only)."""
    f_s = min(max(f_s, 0.0), config.f_s_max)
    f_t = min(max(f_t, 0.0), config.f_t_max, f_s)
    return f_s, f_t


def window_utility(x: float, decision: Decision, z_next: float,
                   voi_params: VoiParams, battery: BatteryModel,
                   w_info: float, w_energy: float) -> float:
    """Weighted sum of normalized information value and post-decision SoE."""
    value = voi.value_of_information(x, decision.f_s, decision.f_t, voi_params)
    return (w_info * voi.normalize_voi(value, voi_params)
            + w_energy * energy.soe_from_soc(z_next, battery))


def horizon_objective(decisions: Sequence[Decision], z0: float,
                      beliefs: Beliefs, config: MpcConfig,
                      models: NodeModels) -> float:
    """Discounted utility of a full decision sequence.

    Raises InfeasibleDecisionError naming the first violated window and
    constraint when the sequence breaks any operating constraint.
    """
    problem = _Problem(z0, beliefs, config, models)
    if len(decisions) != config.n_windows:
        raise InputError(f"expected {config.n_windows} decisions, got {len(decisions)}")
    residuals = constraint_residuals(decisions, z0, beliefs, config, models)
    for k, row in enumerate(residuals):
        for name, slack in zip(RESIDUAL_COLUMNS, row):
            if slack < -FEAS_TOL:
                raise InfeasibleDecisionError(
                    f"window {k}: constraint '{name}' violated by {-slack:.3e}",
                    window=k, constraint=name)
    f_s = np.array([d.f_s for d in decisions])
    f_t = np.array([d.f_t for d in decisions])
    return problem.objective(f_s, f_t)


def constraint_residuals(decisions: Sequence[Decision], z0: float,
                         beliefs: Beliefs, config: MpcConfig,
                         models: NodeModels) -> np.ndarray:
    """Signed slack of every operating constraint, one row per window.

    Columns follow RESIDUAL_COLUMNS; nonnegative slack means satisfied.
    The SoC path uses the believed harvest, and the floor constraint is
    reported as z(k+1) - z_min.
    """
    problem = _Problem(z0, beliefs, config, models)
    f_s = np.array([d.f_s for d in decisions])
    f_t = np.array([d.f_t for d in decisions])
    states, _ = problem.propagate(f_s, f_t)
    delta = config.window_hours
    rows = np.column_stack([
        states[1:] - models.battery.z_min,
        delta * (energy.SECONDS_PER_HOUR
                 - f_s * models.profile.d_sense_s
                 - f_t * models.profile.d_transmit_s),
        f_s - f_t,
        config.f_s_max - f_s,
        config.f_t_max - f_t,
        np.minimum(f_s, f_t),
    ])
    return rows


def solve(z0: float, beliefs: Beliefs, config: MpcConfig, models: NodeModels,
          *, max_iterations: int = 10_000, tolerance: float = 1e-6,
          warm_start: Sequence[Decision] | None = None) -> Plan:
    """Maximize the horizon objective by projected gradient ascent.

    Backtracking line search (sufficient-increase rule) with an adaptive
    step; converged is set when the projected-gradient norm drops below
    `tolerance`. Ascent also stops once the objective stalls, which
    happens at the non-smooth clamp boundary of a full buffer. When even
    an idle horizon violates the SoC floor, the all-zero plan is returned
    flagged `infeasible_idle`.
    """
    problem = _Problem(z0, beliefs, config, models)
    n = problem.n

    if z0 < problem.needed[0] - 1e-12:
        f_s = np.zeros(n)
        f_t = np.zeros(n)
        return _build_plan(problem, f_s, f_t, iterations=0, converged=False,
                           infeasible_idle=True)

    if warm_start is not None and len(warm_start) == n:
        f_s = np.array([d.f_s for d in warm_start])
        f_t = np.array([d.f_t for d in warm_start])
    else:
        f_s = np.zeros(n)
        f_t = np.zeros(n)
    f_s, f_t = problem.sweep_project(f_s, f_t)

    step = 1.0
    stall = 0
    converged = False
    objective, g_s, g_t = problem.objective_and_gradient(f_s, f_t)
    iteration = 0
    for iteration in range(1, max_iterations + 1):
        ref_s, ref_t = problem.sweep_project(f_s + g_s, f_t + g_t)
        residual = max(np.max(np.abs(ref_s - f_s)), np.max(np.abs(ref_t - f_t)))
        if residual < tolerance:
            converged = True
            break

        accepted = False
        trial = min(step * 4.0, 1e9)
        while trial >= 1e-14:
            new_s, new_t = problem.sweep_project(f_s + trial * g_s, f_t + trial * g_t)
            move = float(np.sum((new_s - f_s) ** 2) + np.sum((new_t - f_t) ** 2))
            if move == 0.0:
                break
            new_objective = problem.objective(new_s, new_t)
            if new_objective >= objective + 1e-4 * move / trial:
                accepted = True
                break
            trial *= 0.5
        if not accepted:
            break

        step = trial
        improvement = new_objective - objective
        f_s, f_t = new_s, new_t
        objective, g_s, g_t = problem.objective_and_gradient(f_s, f_t)
        if improvement <= 1e-13 * (1.0 + abs(objective)):
            stall += 1
            if stall >= 50:
                break
        else:
            stall = 0

    return _build_plan(problem, f_s, f_t, iterations=iteration,
                       converged=converged)


def _build_plan(problem: _Problem, f_s: np.ndarray, f_t: np.ndarray, *,
                iterations: int, converged: bool,
                infeasible_idle: bool = False) -> Plan:
    models, config = problem.models, problem.config
    decisions = tuple(Decision(float(a), float(b)) for a, b in zip(f_s, f_t))
    soc_path = [problem.z0]
    for k, decision in enumerate(decisions):
        transition = energy.soc_transition(
            soc_path[-1], decision.f_s, decision.f_t, models.profile,
            models.harvest, models.battery,
            _irradiance_equiv(problem, k), config.window_hours)
        soc_path.append(transition.z_new)
    return Plan(decisions=decisions,
                projected_soc=tuple(soc_path),
                objective_value=problem.objective(f_s, f_t),
                iterations=iterations,
                converged=converged,
                infeasible_idle=infeasible_idle)


def _irradiance_equiv(problem: _Problem, k: int) -> float:
    """Mean irradiance that reproduces the precomputed window harvest."""
    harvest = problem.models.harvest
    battery = problem.models.battery
    joules = problem.harvest_as[k] * battery.v_nom
    return joules / (harvest.efficiency * harvest.panel_area_m2
                     * energy.SECONDS_PER_HOUR * problem.delta)


def brute_force_plan(z0: float, beliefs: Beliefs, config: MpcConfig,
                     models: NodeModels, grid_step: float = 1.0) -> Plan:
    """Exhaustive search over an integer-grid decision lattice.

    Depth-first over windows with SoC propagation; branches whose state
    cannot reach the floor requirements of an idle completion are pruned,
    which never discards a feasible completion. The final window is
    evaluated vectorized. Serves as the optimality oracle for `solve`.
    """
    problem = _Problem(z0, beliefs, config, models)
    if grid_step <= 0:
        raise InputError(f"grid_step must be > 0, got {grid_step!r}")
    nodes = (config.f_s_max / grid_step + 1.0) ** 2 * problem.n
    if nodes > BRUTE_FORCE_NODE_GUARD:
        raise InputError(
            f"brute-force lattice of {nodes:.3g} nodes exceeds the "
            f"{BRUTE_FORCE_NODE_GUARD:.0e} guard")
    if z0 < problem.needed[0] - 1e-12:
        zeros = np.zeros(problem.n)
        return _build_plan(problem, zeros, zeros, iterations=0,
                           converged=False, infeasible_idle=True)

    fs_values = np.arange(0.0, config.f_s_max + grid_step / 2, grid_step)
    ft_values = np.arange(0.0, config.f_t_max + grid_step / 2, grid_step)
    pairs = [(fs, ft) for fs in fs_values for ft in ft_values
             if ft <= fs and energy.duty_cycle_slack_s(fs, ft, models.profile) >= 0]
    dec_s = np.array([p[0] for p in pairs])
    dec_t = np.array([p[1] for p in pairs])
    drains = problem.drains(dec_s, dec_t)

    n = problem.n
    # Discounted information utility of every lattice decision, per window.
    util = [problem.gamma[k] * config.w_info
            * _lattice_voi_norm(problem, k, dec_s, dec_t) for k in range(n)]
    w_soe = [problem.gamma[k] * config.w_energy for k in range(n)]
    cap = problem.cap_as
    harvest = problem.harvest_as
    needed = problem.needed

    best = {"objective": -math.inf, "sequence": None, "count": 0}

    def descend(k: int, z: float, partial: float, prefix: list[int]):
        unclamped = z + (harvest[k] - drains) / cap
        z_next = np.clip(unclamped, 0.0, 1.0)
        feasible = z_next >= needed[k + 1] - 1e-12
        if k == n - 1:
            best["count"] += len(pairs)
            if not np.any(feasible):
                return
            totals = np.where(feasible,
                              partial + util[k] + w_soe[k] * problem.soe(z_next),
                              -math.inf)
            idx = int(np.argmax(totals))
            if totals[idx] > best["objective"]:
                best["objective"] = float(totals[idx])
                best["sequence"] = prefix + [idx]
            return
        soe_next = problem.soe(z_next)
        for d in range(len(pairs)):
            if not feasible[d]:
                continue
            descend(k + 1, float(z_next[d]),
                    partial + float(util[k][d]) + w_soe[k] * float(soe_next[d]),
                    prefix + [d])

    descend(0, z0, 0.0, [])
    if best["sequence"] is None:
        zeros = np.zeros(n)
        return _build_plan(problem, zeros, zeros, iterations=best["count"],
                           converged=False, infeasible_idle=True)
    f_s = np.array([dec_s[d] for d in best["sequence"]])
    f_t = np.array([dec_t[d] for d in best["sequence"]])
    return _build_plan(problem, f_s, f_t, iterations=best["count"],
                       converged=True)


def _lattice_voi_norm(problem: _Problem, k: int, f_s: np.ndarray,
                      f_t: np.ndarray) -> np.ndarray:
    d_o = problem.models.voi.d_o
    raw = (problem.v_c[k] * (1.0 - np.exp(-problem.k_s[k] * f_s))
           - problem.v_c[k] * d_o * np.exp(-problem.k_t[k] * f_t))
    return np.clip((raw + d_o) * problem.norm_scale, 0.0, 1.0)


def objective_lipschitz_bound(config: MpcConfig, models: NodeModels) -> float:
    """Upper bound on the objective change per unit move of any frequency.

    Used to convert a grid step into an optimality tolerance: the
    continuous optimum exceeds the best grid point by at most
    bound * grid_step.
    """
    problem_gamma = (1.0 + config.discount) ** -np.arange(config.n_windows)
    tails = np.cumsum(problem_gamma[::-1])[::-1]
    params = models.voi
    g_vs = config.w_info * params.alpha_r * config.window_hours / (1.0 + params.d_o)
    g_vt = config.w_info * params.alpha_d * params.d_o / (1.0 + params.d_o)
    profile = models.profile
    battery = models.battery
    delta = config.window_hours
    v_max = float(np.max(battery.curve.voltage))
    e_s = (delta * profile.d_sense_s * (profile.i_sense_a - profile.i_sleep_a)
           / battery.capacity_as * v_max / battery.energy_denominator)
    e_t = (delta * profile.d_transmit_s * (profile.i_transmit_a - profile.i_sleep_a)
           / battery.capacity_as * v_max / battery.energy_denominator)
    return float(np.sum(problem_gamma) * (g_vs + g_vt)
                 + np.sum(tails) * config.w_energy * (e_s + e_t))


def round_first_decision(plan: Plan, z0: float, beliefs: Beliefs,
                         config: MpcConfig, models: NodeModels) -> Decision:
    """Nearest feasible integer pair to the plan's first decision.

    Feasibility includes the idle-completion charge budget of the first
    window, so rounding up never strands the horizon below the SoC floor.
    Ties resolve toward the lower frequency. The floor/floor candidate is
    always feasible, so a result always exists.
    """
    if plan.infeasible_idle:
        return Decision(0.0, 0.0)
    problem = _Problem(z0, beliefs, config, models)
    rhs = problem.window_budget_rhs(z0, 0)
    first = plan.decisions[0]
    candidates = []
    for fs in {math.floor(first.f_s), math.ceil(first.f_s)}:
        for ft in {math.floor(first.f_t), math.ceil(first.f_t)}:
            if ft > fs or fs > config.f_s_max or ft > config.f_t_max:
                continue
            if energy.duty_cycle_slack_s(fs, ft, models.profile) < 0:
                continue
            if problem.a_s * fs + problem.a_t * ft > rhs + FEAS_TOL * problem.cap_as:
                continue
            distance = (fs - first.f_s) ** 2 + (ft - first.f_t) ** 2
            candidates.append((distance, fs, ft))
    if not candidates:
        raise InfeasibleDecisionError("no feasible integer rounding", window=0)
    _, fs, ft = min(candidates)
    return Decision(float(fs), float(ft))
