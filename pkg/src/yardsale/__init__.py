"""Simulation and verification toolkit for the yard-sale wealth exchange model."""

from .errors import (ConfigError, ExperimentError, ParameterError, StateError,
                     UnsupportedClaimError, YardSaleError)
from .experiments import (EnsembleSummary, GridPoint, TrajectoryConfig, TrajectoryRecord,
                          condensation_time_study, estimate_win_probabilities, martingale_check,
                          run_ensemble, run_trajectory, verify_increment_bound, wealth_path,
                          verify_stake_summability)
from .metrics import MetricsSnapshot, expected_norm_increment, gini, ipr, max_wealth, norm_sq
from .model import (ModelParams, StepOutcome, TradeDraw, WealthState, apply_taxation,
                    apply_trade, make_state, resolve_roles, step, uniform_state)
from .sampling import (BetaFraction, ConstantFraction, StreamKey, UniformFraction,
                       derive_stream, draw_fraction, draw_pair, draw_richer_wins)

__version__ = "0.1.0"
