"""Learners: TD(0), regularised TD(0), Polyak averaging, and the residual
gradient family, plus the single-run training loop.

TD(0) is a semi-gradient method: its update direction is ``delta * phi(X)``
(never the full theta-gradient of delta).  Residual gradient descends the
squared TD and therefore uses the full gradient ``delta * grad_theta delta``.
The regularised variants add ``mu * theta`` to the direction and project onto
the ball of radius M after each step.

This module is the readable single-seed reference; multi-seed sweeps run the
vectorised engine in :mod:`ctpe.engine`, which mirrors these semantics draw
for draw.
"""

import math
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .features import FeatureMap
from .model import ModelSpec
from .observe import (Observation, Schedule, euler_step, observation_stream,
                      sample_stationary)
from .streams import PURPOSE_NOISE, PURPOSE_STATE, RngStream
from .td import minibatch_td, multistep_td, standard_td, stochastic_td
from .torus import wrap

__all__ = [
    "DivergenceError",
    "RgExtension",
    "LearnerConfig",
    "LearnerState",
    "project_ball",
    "ball_radius_for",
    "td0_step",
    "rg_step",
    "train",
    "log_grid",
]

DIVERGENCE_RADIUS = 1e8


class DivergenceError(RuntimeError):
    """Raised when the iterate blows up; carries the iteration index."""

    def __init__(self, k: int, norm: float):
        super().__init__(f"learner diverged at iteration {k} (|theta| = {norm:.3g})")
        self.k = k
        self.norm = norm


@dataclass(frozen=True)
class RgExtension:
    """Variance-bias tweaks of the residual gradient update.

    kind: "multistep" (average n_k consecutive TDs, n_k = ceil(c (k+1)^a)),
    "minibatch" (average N_k independent TDs at the same state, same law for
    N_k), "sigma" (replace the diffusion by the vanishing constant
    sigma_k = c (k+1)^(-a)), or "rademacher" (swap the Gaussian transition
    noise for Rademacher signs, which kills the quadratic-form variance).
    """

    kind: str
    c: float = 1.0
    a: float = 0.5

    def __post_init__(self):
        kinds = ("multistep", "minibatch", "sigma", "rademacher")
        if self.kind not in kinds:
            raise ValueError(f"RgExtension: kind must be one of {kinds}")
        if self.c <= 0 or self.a < 0:
            raise ValueError("RgExtension: need c > 0 and a >= 0")

    def count_at(self, k: int) -> int:
        return max(1, math.ceil(self.c * (k + 1.0) ** self.a))

    def counts(self, ks) -> np.ndarray:
        vals = np.ceil(self.c * (np.asarray(ks, dtype=float) + 1.0) ** self.a)
        return np.maximum(1, vals.astype(int))

    def sigma_at(self, k: int) -> float:
        return self.c * (k + 1.0) ** (-self.a)

    def sigmas(self, ks) -> np.ndarray:
        return self.c * (np.asarray(ks, dtype=float) + 1.0) ** (-self.a)


@dataclass(frozen=True)
class LearnerConfig:
    """Algorithm selection and hyperparameters for one learner."""

    algorithm: str = "td0"          # td0 | rg
    variant: str = "stochastic"     # standard | stochastic
    mu: float = 0.0
    ball_radius: Optional[float] = None
    averaging: bool = False
    lr: Schedule = field(default_factory=lambda: Schedule.power(2.0, 1.0))
    rg_extension: Optional[RgExtension] = None

    def __post_init__(self):
        if self.algorithm not in ("td0", "rg"):
            raise ValueError(f"LearnerConfig: unknown algorithm {self.algorithm!r}")
        if self.variant not in ("standard", "stochastic"):
            raise ValueError(f"LearnerConfig: unknown variant {self.variant!r}")
        if self.mu < 0:
            raise ValueError("LearnerConfig: mu must be >= 0")
        if self.ball_radius is not None and self.ball_radius <= 0:
            raise ValueError("LearnerConfig: ball radius must be positive")
        if self.rg_extension is not None and self.algorithm != "rg":
            raise ValueError("LearnerConfig: rg_extension requires algorithm='rg'")


@dataclass
class LearnerState:
    """Current iterate, its running Polyak average, and the error log."""

    theta: np.ndarray
    theta_bar: np.ndarray
    k: int = 0
    error_log: list = field(default_factory=list)

    @staticmethod
    def initial(theta0) -> "LearnerState":
        theta0 = np.asarray(theta0, dtype=float).copy()
        return LearnerState(theta=theta0, theta_bar=theta0.copy())


def project_ball(theta, radius: float) -> np.ndarray:
    """Euclidean projection onto the centred ball of the given radius."""
    if radius <= 0:
        raise ValueError("project_ball: radius must be positive")
    theta = np.asarray(theta, dtype=float)
    norm = float(np.linalg.norm(theta))
    if norm <= radius:
        return theta
    return theta * (radius / norm)


def ball_radius_for(model: ModelSpec, mu: float, n_grid: int = 4096) -> float:
    """The projection radius sup|r| / mu, estimated on a dense grid (1-D)."""
    if mu <= 0:
        raise ValueError("ball_radius_for: mu must be positive")
    x = wrap(np.linspace(-0.5, 0.5, n_grid, endpoint=False))
    return float(np.max(np.abs(model.reward(x)))) / mu


def mu_for_budget(k_max: int, variant: str) -> float:
    """Regularisation balancing the mu-bias against the convergence rate.

    With |theta* - theta*_mu| = O(mu) and errors O(1/(mu^2 k^{2/3})) resp.
    O(1/(mu^2 k)), equating the two at an iteration budget K gives
    mu = K^(-1/6) for the standard variant and mu = K^(-1/4) for the
    stochastic one.
    """
    if k_max < 1:
        raise ValueError("mu_for_budget: k_max must be >= 1")
    if variant == "standard":
        return float(k_max) ** (-1.0 / 6.0)
    if variant == "stochastic":
        return float(k_max) ** (-1.0 / 4.0)
    raise ValueError(f"mu_for_budget: unknown variant {variant!r}")


def _finish_update(state: LearnerState, direction: np.ndarray, alpha: float,
                   cfg: LearnerConfig) -> LearnerState:
    if cfg.averaging:
        # theta_bar_k = mean of theta_0 .. theta_{k-1}: fold in the pre-update iterate
        state.theta_bar += (state.theta - state.theta_bar) / (state.k + 1.0)
    theta = state.theta - alpha * direction
    if cfg.ball_radius is not None:
        theta = project_ball(theta, cfg.ball_radius)
    norm = float(np.linalg.norm(theta))
    if not np.isfinite(norm) or norm > DIVERGENCE_RADIUS:
        raise DivergenceError(state.k, norm)
    state.theta = theta
    state.k += 1
    return state


def td0_step(state: LearnerState, obs: Observation, phi: FeatureMap,
             model: ModelSpec, cfg: LearnerConfig, alpha: float) -> LearnerState:
    """One (regularised) TD(0) update: direction = delta * phi(X) + mu * theta."""
    if cfg.variant == "stochastic":
        tdv = stochastic_td(obs, state.theta, phi, model.rho, model.drift)
    else:
        tdv = standard_td(obs, state.theta, phi, model.rho)
    direction = tdv.delta * np.asarray(phi.eval(obs.x), dtype=float)
    if cfg.mu:
        direction = direction + cfg.mu * state.theta
    return _finish_update(state, direction, alpha, cfg)


def rg_step(state: LearnerState, obs: Optional[Observation], phi: FeatureMap,
            model: ModelSpec, cfg: LearnerConfig, alpha: float,
            x: Optional[float] = None, dt: Optional[float] = None,
            stream: Optional[RngStream] = None) -> LearnerState:
    """One (regularised) residual-gradient update.

    Descends (alpha/2) grad(delta^2 + mu |theta|^2), i.e. the direction is
    ``delta * grad_theta delta + mu * theta``.  Plain RG consumes ``obs``;
    the multistep/minibatch extensions build their own aggregate TD from
    ``(x, dt, stream)`` instead.
    """
    ext = cfg.rg_extension
    if ext is not None and ext.kind in ("multistep", "minibatch"):
        if x is None or dt is None or stream is None:
            raise ValueError("rg_step: extension needs x, dt and a stream")
        n = ext.count_at(state.k)
        if ext.kind == "multistep":
            tdv = multistep_td(model, x, state.theta, phi, dt, n, stream)
        else:
            tdv = minibatch_td(model, x, state.theta, phi, dt, n, stream)
    else:
        if obs is None:
            raise ValueError("rg_step: an observation is required")
        if cfg.variant == "stochastic":
            tdv = stochastic_td(obs, state.theta, phi, model.rho, model.drift)
        else:
            tdv = standard_td(obs, state.theta, phi, model.rho)
    direction = tdv.delta * tdv.grad_theta
    if cfg.mu:
        direction = direction + cfg.mu * state.theta
    return _finish_update(state, direction, alpha, cfg)


def log_grid(k_max: int) -> list:
    """The geometric logging grid {1, 2, 4, ...} | round(10^(j/8)), up to k_max."""
    ks = set()
    v = 1
    while v <= k_max:
        ks.add(v)
        v *= 2
    j = 0
    while True:
        k = round(10.0 ** (j / 8.0))
        if k > k_max:
            break
        ks.add(max(1, k))
        j += 1
    ks.add(k_max)
    return sorted(ks)


def train(model: ModelSpec, phi: FeatureMap, cfg: LearnerConfig,
          dt_schedule: Schedule, mode: str, stream: RngStream, k_max: int,
          metric: Optional[Callable] = None, log_every="geometric",
          theta0=None, n_sub: int = 32, burn_in: int = 20000) -> LearnerState:
    """Run one learner for ``k_max`` iterations over an i.i.d. observation stream.

    ``metric`` maps a LearnerState to a float and is recorded at the logging
    grid (geometric by default, or every ``log_every`` iterations when an int
    is given).  Divergence aborts with :class:`DivergenceError` carrying k.
    """
    if k_max < 0:
        raise ValueError("train: k_max must be >= 0")
    theta0 = np.zeros(phi.d_theta) if theta0 is None else np.asarray(theta0, float)
    state = LearnerState.initial(theta0)
    if k_max == 0:
        return state
    log_at = set(log_grid(k_max)) if log_every == "geometric" else \
        set(range(int(log_every), k_max + 1, int(log_every))) | {k_max}

    ext = cfg.rg_extension
    draws_own_noise = ext is not None and ext.kind in ("multistep", "minibatch")
    use_rademacher = ext is not None and ext.kind == "rademacher"
    use_sigma = ext is not None and ext.kind == "sigma"

    if ext is not None:
        if mode != "simulator":
            raise ValueError("train: rg extensions are defined for simulator mode")
        # extension paths share one draw discipline: a state draw per
        # iteration plus a private noise block
        state_stream = stream.child(PURPOSE_STATE)
        noise_stream = stream.child(PURPOSE_NOISE)
        noise_gen = noise_stream.generator()
        for k in range(k_max):
            dt = dt_schedule.at(k)
            alpha = cfg.lr.at(k)
            x = sample_stationary(model, state_stream)
            if draws_own_noise:
                state = rg_step(state, None, phi, model, cfg, alpha,
                                x=x, dt=dt, stream=noise_stream)
            else:
                eff_model = _with_sigma(model, ext.sigma_at(k)) if use_sigma else model
                if use_rademacher:
                    z = -1.0 if noise_gen.uniform() < 0.5 else 1.0
                else:
                    z = noise_gen.standard_normal()
                x_next = euler_step(eff_model, x, dt, z)
                obs = Observation(dt=dt, x=float(x), x_next=float(x_next),
                                  reward=float(eff_model.reward(np.asarray(x))))
                state = rg_step(state, obs, phi, eff_model, cfg, alpha)
            if state.k in log_at and metric is not None:
                state.error_log.append((state.k, float(metric(state))))
        return state

    obs_iter = observation_stream(model, dt_schedule, mode, stream, n_sub=n_sub,
                                  burn_in=burn_in)
    for k in range(k_max):
        obs = next(obs_iter)
        alpha = cfg.lr.at(k)
        if cfg.algorithm == "td0":
            state = td0_step(state, obs, phi, model, cfg, alpha)
        else:
            state = rg_step(state, obs, phi, model, cfg, alpha)
        if state.k in log_at and metric is not None:
            state.error_log.append((state.k, float(metric(state))))
    return state


def _with_sigma(model: ModelSpec, sigma: float) -> ModelSpec:
    """Model with the diffusion replaced by the constant ``sigma`` (1-D).

    Used by the vanishing-viscosity extension: the noise intensity is treated
    as a tunable input of the dynamics while drift, reward and the sampling
    law keep their original definitions.
    """
    return ModelSpec(
        d=model.d, d_w=model.d_w, rho=model.rho, reward=model.reward,
        drift=model.drift,
        diffusion=lambda x, s=float(sigma): np.full_like(np.asarray(x, float), s),
    )
