"""Continuous-time policy evaluation by temporal-difference learning with
vanishing time steps.

The library simulates discounted diffusions on the torus, computes standard
and variance-reduced temporal differences, trains the TD(0) and residual
gradient families with their regularised and averaged variants, and provides
Monte-Carlo plus quadrature oracles for the closed-form limits so that the
convergence-rate experiments can be reproduced and checked end to end.
"""

from .config import ExperimentConfig, parse_config_text
from .engine import curve_from_sweep, sweep_paths
from .features import (FeatureMap, feature_map_from_key, fourier_features,
                       trig_features, value, value_field, value_grad_x,
                       value_hess_x)
from .learn import (DivergenceError, LearnerConfig, LearnerState, RgExtension,
                    ball_radius_for, log_grid, mu_for_budget, project_ball,
                    rg_step, td0_step, train)
from .model import (BenchmarkModel, ModelSpec, ScalarField, benchmark_model,
                    generator_apply)
from .observe import (Observation, Schedule, StationaryEnsemble, euler_step,
                      observation_stream, realworld_observation,
                      sample_stationary, simulator_observation)
from .oracle import (LimitSolution, MomentReport, RgLimits, RunningMoments,
                     conditional_moments, ell_loss, ell_matrix_mc,
                     estimate_limits, rg_limits, trace_diagnostics)
from .quadrature import grid_ell_matrix, grid_limits, grid_rg_limits
from .ratefit import RateFit, fit_rate
from .streams import RngStream, rademacher_rotated
from .td import (TDValue, correction_term, minibatch_td, multistep_td,
                 standard_td, stochastic_td)
from .torus import displacement, wrap

__version__ = "0.1.0"
