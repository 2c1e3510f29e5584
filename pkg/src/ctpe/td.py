"""Temporal differences: the standard form, the variance-reduced form, and
their multi-step / mini-batch aggregates.

The standard TD of an observation is

    delta = (v(X) - exp(-rho dt) v(X') - dt R) / dt,

whose conditional variance blows up like 1/dt as dt -> 0.  The stochastic TD
adds the correction ``Z / dt`` with ``Z = (X' - X - dt b(X)) . grad_x v(X)``,
a conditionally centred martingale increment that cancels the divergent term
and keeps the variance bounded.  Increments are taken as minimal torus
displacements; the raw difference of canonical representatives is wrong
whenever a step crosses the seam.
"""

import math
from dataclasses import dataclass

import numpy as np

from .features import FeatureMap, value_grad_x
from .model import ModelSpec
from .observe import Observation, simulator_observation
from .streams import RngStream
from .torus import displacement

__all__ = [
    "TDValue",
    "standard_td",
    "correction_term",
    "stochastic_td",
    "multistep_td",
    "minibatch_td",
]


@dataclass(frozen=True)
class TDValue:
    """A temporal difference with its theta-gradient.

    ``delta`` is the TD itself (stochastic TD includes the correction);
    ``correction`` is the Z/dt component (zero for the standard TD);
    ``grad_theta`` is the gradient of ``delta`` in theta.  TD(0) deliberately
    ignores ``grad_theta`` and uses phi(X) only (semi-gradient); the residual
    gradient family consumes ``grad_theta``.
    """

    delta: float
    correction: float
    grad_theta: np.ndarray


def standard_td(obs: Observation, theta, phi: FeatureMap, rho: float) -> TDValue:
    """The standard temporal difference and its theta-gradient."""
    if obs.dt <= 0:
        raise ValueError("standard_td: dt must be positive")
    gam = math.exp(-rho * obs.dt)
    phi_x = np.asarray(phi.eval(obs.x), dtype=float)
    phi_xp = np.asarray(phi.eval(obs.x_next), dtype=float)
    theta = np.asarray(theta, dtype=float)
    delta = (phi_x @ theta - gam * (phi_xp @ theta)) / obs.dt - obs.reward
    grad = (phi_x - gam * phi_xp) / obs.dt
    return TDValue(delta=float(delta), correction=0.0, grad_theta=grad)


def correction_term(obs: Observation, theta, phi: FeatureMap, drift) -> float:
    """Z = (X' - X - dt b(X)) . grad_x v(X), with the torus-minimal increment."""
    inc = displacement(obs.x, obs.x_next) - obs.dt * float(drift(np.asarray(obs.x)))
    return float(inc * value_grad_x(theta, phi, obs.x))


def stochastic_td(obs: Observation, theta, phi: FeatureMap, rho: float, drift) -> TDValue:
    """The variance-reduced temporal difference delta + Z/dt."""
    base = standard_td(obs, theta, phi, rho)
    inc = displacement(obs.x, obs.x_next) - obs.dt * float(drift(np.asarray(obs.x)))
    corr = float(inc * value_grad_x(theta, phi, obs.x)) / obs.dt
    grad = base.grad_theta + np.asarray(phi.jacobian(obs.x), dtype=float) * (inc / obs.dt)
    return TDValue(delta=base.delta + corr, correction=corr, grad_theta=grad)


def multistep_td(model: ModelSpec, x, theta, phi: FeatureMap, dt: float, n: int,
                 stream: RngStream) -> TDValue:
    """Average of n stochastic TDs along n consecutive Euler steps from x.

    Consecutive sub-TDs share endpoints, so for small dt the average behaves
    like a mean of nearly independent TDs and the quadratic-form variance
    shrinks like 1/n.
    """
    if n < 1:
        raise ValueError("multistep_td: n must be >= 1")
    xt = float(x)
    delta = 0.0
    corr = 0.0
    grad = np.zeros(phi.d_theta)
    for _ in range(n):
        obs = simulator_observation(model, xt, dt, stream)
        tdv = stochastic_td(obs, theta, phi, model.rho, model.drift)
        delta += tdv.delta
        corr += tdv.correction
        grad += tdv.grad_theta
        xt = obs.x_next
    return TDValue(delta=delta / n, correction=corr / n, grad_theta=grad / n)


def minibatch_td(model: ModelSpec, x, theta, phi: FeatureMap, dt: float, n_batch: int,
                 stream: RngStream) -> TDValue:
    """Average of n_batch stochastic TDs from independent noises at the same x.

    The conditional mean is that of a single TD; the conditional variance is
    divided by n_batch exactly.
    """
    if n_batch < 1:
        raise ValueError("minibatch_td: n_batch must be >= 1")
    delta = 0.0
    corr = 0.0
    grad = np.zeros(phi.d_theta)
    for _ in range(n_batch):
        obs = simulator_observation(model, float(x), dt, stream)
        tdv = stochastic_td(obs, theta, phi, model.rho, model.drift)
        delta += tdv.delta
        corr += tdv.correction
        grad += tdv.grad_theta
    return TDValue(delta=delta / n_batch, correction=corr / n_batch,
                   grad_theta=grad / n_batch)
