"""Observation quadruples (dt, X, X', R) from a simulator or a sub-discretised path.

Two regimes are supported.  The simulator regime applies one Euler-Maruyama
step and reports the instantaneous reward at X.  The real-world regime mimics
an exact trajectory observed at coarse times: it runs ``n_sub`` fine Euler
sub-steps and reports the time-averaged running reward (left-endpoint Riemann
sum divided by dt, which coincides with the simulator definition at
``n_sub = 1``).

States X are drawn i.i.d. from the stationary law: through the model's
inverse CDF when it has one, otherwise from a warmed-up ensemble of Euler
chains with thinned harvesting.
"""

import math
from dataclasses import dataclass
from typing import Iterator

import numpy as np

from .model import ModelSpec
from .streams import PURPOSE_NOISE, PURPOSE_STATE, RngStream
from .torus import wrap

__all__ = [
    "Observation",
    "Schedule",
    "euler_step",
    "simulator_observation",
    "realworld_observation",
    "sample_stationary",
    "StationaryEnsemble",
    "observation_stream",
]


@dataclass(frozen=True)
class Observation:
    """One observation: a time step, two states dt apart, and a reward rate."""

    dt: float
    x: float
    x_next: float
    reward: float

    def __post_init__(self):
        if self.dt <= 0:
            raise ValueError("Observation: dt must be positive")


@dataclass(frozen=True)
class Schedule:
    """Deterministic positive nonincreasing sequence c * (k+1)^(-a).

    ``family`` is "power" or "constant"; a constant schedule is the a = 0
    special case.  Used both for time steps dt_k and learning rates alpha_k.
    """

    family: str = "power"
    c: float = 1.0
    a: float = 0.0

    def __post_init__(self):
        if self.family not in ("power", "constant"):
            raise ValueError(f"Schedule: unknown family {self.family!r}")
        if self.c <= 0:
            raise ValueError("Schedule: c must be positive")
        if self.family == "constant":
            object.__setattr__(self, "a", 0.0)
        elif self.a < 0:
            raise ValueError("Schedule: a must be >= 0 (nonincreasing sequence)")

    def at(self, k: int) -> float:
        return self.c * (k + 1.0) ** (-self.a)

    def array(self, ks) -> np.ndarray:
        return self.c * (np.asarray(ks, dtype=float) + 1.0) ** (-self.a)

    @staticmethod
    def constant(c: float) -> "Schedule":
        return Schedule(family="constant", c=c)

    @staticmethod
    def power(c: float, a: float) -> "Schedule":
        return Schedule(family="power", c=c, a=a)


def euler_step(model: ModelSpec, x, dt: float, z):
    """One Euler-Maruyama step x + dt b(x) + sqrt(dt) sigma(x) z, wrapped."""
    if dt <= 0:
        raise ValueError("euler_step: dt must be positive")
    x = np.asarray(x, dtype=float)
    z = np.asarray(z, dtype=float)
    b = np.asarray(model.drift(x), dtype=float)
    sig = np.asarray(model.diffusion(x), dtype=float)
    if model.d == 1:
        return wrap(x + dt * b + math.sqrt(dt) * sig * z)
    return wrap(x + dt * b + math.sqrt(dt) * np.einsum("...ij,...j->...i", sig, z))


def simulator_observation(model: ModelSpec, x, dt: float, stream: RngStream) -> Observation:
    """Observation from one Euler step; reward is the rate r(X)."""
    z = stream.gaussian(model.d_w)
    z = z[0] if model.d == 1 else z
    x_next = euler_step(model, x, dt, z)
    return Observation(dt=float(dt), x=float(x), x_next=float(x_next),
                       reward=float(model.reward(np.asarray(x, dtype=float))))


def realworld_observation(model: ModelSpec, x, dt: float, n_sub: int,
                          stream: RngStream) -> Observation:
    """Observation from ``n_sub`` fine sub-steps with integrated reward.

    The reward is (1/dt) * sum_j (dt/n_sub) r(X_{t_j}) over left endpoints,
    i.e. the mean reward rate along the sub-trajectory.
    """
    if n_sub < 1:
        raise ValueError("realworld_observation: n_sub must be >= 1")
    h = dt / n_sub
    xt = np.asarray(x, dtype=float)
    total = 0.0
    for _ in range(n_sub):
        total += float(model.reward(xt))
        z = stream.gaussian(model.d_w)
        z = z[0] if model.d == 1 else z
        xt = euler_step(model, xt, h, z)
    return Observation(dt=float(dt), x=float(x), x_next=float(xt),
                       reward=total / n_sub)


class StationaryEnsemble:
    """Approximate i.i.d. sampler from the stationary law of a generic model.

    Runs ``chains`` parallel Euler chains at step ``dt``, burns in for
    ``burn_in`` steps, then harvests whole generations separated by ``thin``
    steps.  Thinning at about one unit of model time decorrelates samples
    enough for distribution-level diagnostics; the O(dt) Euler bias on the
    invariant law remains.
    """

    def __init__(self, model: ModelSpec, stream: RngStream, chains: int = 256,
                 dt: float = 1e-3, burn_in: int = 20000, thin: int = 1000):
        if model.d != 1:
            raise ValueError("StationaryEnsemble: only 1-D models supported")
        self.model = model
        self.dt = float(dt)
        self.thin = int(thin)
        self._gen = stream.generator()
        self._x = wrap(self._gen.uniform(-0.5, 0.5, size=chains))
        self._advance(burn_in)
        self._buffer = np.empty(0)

    def _advance(self, steps: int) -> None:
        m, dt = self.model, self.dt
        sq = math.sqrt(dt)
        x = self._x
        for _ in range(steps):
            z = self._gen.standard_normal(x.shape[0])
            x = wrap(x + dt * np.asarray(m.drift(x)) + sq * np.asarray(m.diffusion(x)) * z)
        self._x = x

    def draw(self, n: int) -> np.ndarray:
        out = []
        have = 0
        if self._buffer.size:
            out.append(self._buffer[:n])
            have = out[0].size
            self._buffer = self._buffer[n:]
        while have < n:
            self._advance(self.thin)
            out.append(self._x.copy())
            have += self._x.size
        samples = np.concatenate(out)
        self._buffer = samples[n:]
        return samples[:n]


def sample_stationary(model: ModelSpec, stream: RngStream, burn_in: int = 20000,
                      dt_burn: float = 1e-3):
    """One draw from the stationary law.

    Uses the model's inverse CDF when available (exact); otherwise runs a
    fresh Euler chain for ``burn_in`` steps and returns its endpoint.
    """
    inverse_cdf = getattr(model, "inverse_cdf", None)
    if inverse_cdf is not None:
        return float(inverse_cdf(stream.generator().uniform()))
    gen = stream.generator()
    x = wrap(gen.uniform(-0.5, 0.5))
    sq = math.sqrt(dt_burn)
    for _ in range(burn_in):
        z = gen.standard_normal()
        x = wrap(x + dt_burn * float(model.drift(x)) + sq * float(model.diffusion(x)) * z)
    return float(x)


def observation_stream(model: ModelSpec, schedule: Schedule, mode: str,
                       stream: RngStream, n_sub: int = 32,
                       burn_in: int = 20000) -> Iterator[Observation]:
    """Infinite i.i.d. observation sequence; the k-th element uses dt_k.

    State draws and transition noise come from separate purpose substreams of
    ``stream``, so consumers that batch one of the two stay reproducible.
    """
    if mode not in ("simulator", "realworld"):
        raise ValueError(f"observation_stream: unknown mode {mode!r}")
    state_stream = stream.child(PURPOSE_STATE)
    noise_stream = stream.child(PURPOSE_NOISE)
    inverse_cdf = getattr(model, "inverse_cdf", None)
    ensemble = (None if inverse_cdf is not None
                else StationaryEnsemble(model, state_stream, burn_in=burn_in))
    state_gen = state_stream.generator()
    k = 0
    while True:
        dt = schedule.at(k)
        if inverse_cdf is not None:
            x = float(inverse_cdf(state_gen.uniform()))
        else:
            x = float(ensemble.draw(1)[0])
        if mode == "simulator":
            yield simulator_observation(model, x, dt, noise_stream)
        else:
            yield realworld_observation(model, x, dt, n_sub, noise_stream)
        k += 1
