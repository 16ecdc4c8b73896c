"""Context-aware energy management for energy-harvesting sensor nodes.

A receding-horizon controller picks per-window sampling and transmission
frequencies to balance the value of the information collected against
the state of energy of the battery, validated by hindcasting recorded
environmental and irradiance series.
"""

from .energy import (BatteryModel, EnergyProfile, HarvestModel, OcvCurve,
                     SocState, SocTransition, default_ocv_curve,
                     drain_charge, flat_ocv_curve, harvest_charge, ocv,
                     shutdown_time, soc_step, soc_transition, soe_from_soc,
                     z_from_soe)
from .errors import (ConfigError, DataError, EhmpcError,
                     InfeasibleDecisionError, InputError, UnboundedError)
from .mpc import (Beliefs, Decision, MpcConfig, NodeModels, Plan,
                  brute_force_plan, constraint_residuals, horizon_objective,
                  solve, window_utility)
from .sim import (Dataset, SimOptions, TraceRecord, build_beliefs,
                  compare_traces, run_hindcast, run_static_baseline,
                  trace_summary)
from .voi import (VoiBreakdown, VoiParams, normalize_voi, process_fidelity,
                  threat_rating, update_delay_cost, value_of_information,
                  voi_breakdown)

__version__ = "0.1.0"
