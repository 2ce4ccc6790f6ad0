"""pilotveil: OFDM pilot distortion design for time-of-arrival obfuscation.

A transmitter that wants to stay hard to range secretly multiplies its
pilot subcarriers by a complex distortion vector.  This package designs
that vector by maximizing sidelobe metrics (SLPR / ISL) of the receiver's
mismatched ambiguity function inside a proximity ball around the
communication-optimal pilot, and validates the designs with a mismatched
maximum-likelihood delay estimator under Monte Carlo noise.
"""

from .commcap import (CapacityReport, capacity_lower_bound, f_com,
                      lmmse_diag_exact, psi)
from .fracopt import (OptimizationReport, OptimizerOptions,
                      SolverConsistencyError, comm_optimal, dinkelbach_maximize,
                      doc_inner, doc_kkt_step, optimize_metric, solve_lambda)
from .harness import (ScenarioSpec, SweepRecord, capacity_sweep,
                      default_scenario, design_distortion, los_channel_response,
                      range_profile, rmse_sweep, tradeoff_sweep)
from .maf import (MetricKind, MetricQuadratics, SidelobeRegion,
                  default_sidelobe_region, dominant_sidelobe, isl_matrix,
                  maf_value, metric_pair, rank_one_q, rayleigh_ratio, steering)
from .mml import DelaySearchGrid, mml_estimate, mml_estimate_many, mml_objective
from .model import (SPEED_OF_LIGHT_M_S, MultipathChannel, NoiseModel,
                    PilotConfig, channel_frequency_response, draw_noise,
                    los_gain, meters_to_seconds, seconds_to_meters,
                    synthesize_received, synthesize_time_pilot,
                    zf_channel_estimate)

__version__ = "0.1.0"

__all__ = [
    "SPEED_OF_LIGHT_M_S",
    "CapacityReport",
    "DelaySearchGrid",
    "MetricKind",
    "MetricQuadratics",
    "MultipathChannel",
    "NoiseModel",
    "OptimizationReport",
    "OptimizerOptions",
    "PilotConfig",
    "ScenarioSpec",
    "SidelobeRegion",
    "SolverConsistencyError",
    "SweepRecord",
    "capacity_lower_bound",
    "capacity_sweep",
    "channel_frequency_response",
    "comm_optimal",
    "default_scenario",
    "default_sidelobe_region",
    "design_distortion",
    "dinkelbach_maximize",
    "doc_inner",
    "doc_kkt_step",
    "dominant_sidelobe",
    "draw_noise",
    "f_com",
    "isl_matrix",
    "lmmse_diag_exact",
    "los_channel_response",
    "los_gain",
    "maf_value",
    "meters_to_seconds",
    "metric_pair",
    "mml_estimate",
    "mml_estimate_many",
    "mml_objective",
    "optimize_metric",
    "psi",
    "range_profile",
    "rank_one_q",
    "rayleigh_ratio",
    "rmse_sweep",
    "seconds_to_meters",
    "solve_lambda",
    "steering",
    "synthesize_received",
    "synthesize_time_pilot",
    "tradeoff_sweep",
    "zf_channel_estimate",
]
