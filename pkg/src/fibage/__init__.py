"""Age-of-information analysis of a shared-memory packet forwarder.

Location updates of a mobile terminal are written to a forwarding table
while app updates must read it to be addressed; the table is synchronized
either by RCU or by a write-preferring readers-writer lock. This package
computes the steady-state average ages of both update streams from the
five-state hybrid model of each mechanism and cross-validates every
number against an independent discrete-event simulation.

Layers:

* :mod:`fibage.shs` -- generic stationary-distribution and age fixed
  point solver for chains with binary reset maps.
* :mod:`fibage.models` -- the four concrete models (RCU/RWL, with and
  without reader preemption), closed-form cross-checks and delivery
  probabilities.
* :mod:`fibage.sim` -- seeded event-driven simulator of the physical
  forwarder (compiled core with a pure-Python twin).
* :mod:`fibage.sweep` / :mod:`fibage.cli` -- parameter sweeps, figure
  presets and the verification suite.
"""

from .errors import (FibageError, InvalidConfig, NegativeFixedPoint, NonErgodic,
                     SingularSystem, StructuralViolation, UnknownFigure, Unsupported)
from .models import (ALL_KINDS, AnalysisResult, DeliveryProbability, Mechanism,
                     PrimitiveKind, RCU_NON_PREEMPTIVE, RCU_PREEMPTIVE, RWL_NON_PREEMPTIVE,
                     RWL_PREEMPTIVE, analyze, build_model, delivery_probability,
                     rcu_stationary_closed_form, rwl_stationary_closed_form,
                     serialize_model, stationary_closed_form)
from .rates import RateParams, RateSymbol
from .shs import (AgeBalanceSolution, ResetMap, ShsModel, StationaryDistribution,
                  Transition, average_age, solve_age_balance, stationary_distribution,
                  validate_model)
from .sim import SimConfig, SimResult, occupancy_check, run_sim, sim_result_from_json
from .sweep import (FIGURES, GridSpec, SweepRow, SweepSpec, figure_data, rows_to_csv,
                    run_sweep, verify)

__version__ = "0.1.0"

__all__ = [
    "ALL_KINDS", "AgeBalanceSolution", "AnalysisResult", "DeliveryProbability",
    "FIGURES", "FibageError", "GridSpec", "InvalidConfig", "Mechanism",
    "NegativeFixedPoint", "NonErgodic", "PrimitiveKind", "RCU_NON_PREEMPTIVE",
    "RCU_PREEMPTIVE", "RWL_NON_PREEMPTIVE", "RWL_PREEMPTIVE", "RateParams",
    "RateSymbol", "ResetMap", "ShsModel", "SimConfig", "SimResult",
    "SingularSystem", "StationaryDistribution", "StructuralViolation", "SweepRow",
    "SweepSpec", "Transition", "UnknownFigure", "Unsupported", "analyze",
    "average_age", "build_model", "delivery_probability", "figure_data",
    "occupancy_check", "rcu_stationary_closed_form", "rows_to_csv", "run_sim",
    "run_sweep", "rwl_stationary_closed_form", "serialize_model",
    "sim_result_from_json", "solve_age_balance", "stationary_closed_form",
    "stationary_distribution", "validate_model", "verify",
]
