"""Dynamics/reward specifications and the benchmark model with closed forms.

A model is the tuple (reward r, drift b, diffusion sigma, discount rho) of a
discounted diffusion on the torus.  The associated value function V solves
``L V = r`` where ``L v = rho v - tr((sigma sigma^T / 2) D^2 v) - b . grad v``.

Shape conventions.  For ``d == 1`` positions are plain scalars or arrays of
any shape and the model callables map ``(...) -> (...)``; drift and diffusion
return scalars per point.  For ``d > 1`` positions have shape ``(..., d)``,
drift maps to ``(..., d)`` and diffusion to ``(..., d, d_w)``.
"""

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .torus import wrap

__all__ = [
    "ModelSpec",
    "ScalarField",
    "BenchmarkModel",
    "constant_field",
    "generator_apply",
    "benchmark_model",
]


@dataclass(frozen=True)
class ScalarField:
    """A twice-differentiable scalar field given by explicit evaluators.

    ``value``, ``gradient`` and ``hessian`` follow the shape conventions of
    the owning model dimension (see module docstring).
    """

    value: Callable
    gradient: Callable
    hessian: Callable


def constant_field(c: float) -> ScalarField:
    """The field identically equal to ``c`` (1-D convention)."""
    return ScalarField(
        value=lambda x: np.full_like(np.asarray(x, dtype=float), c),
        gradient=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        hessian=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
    )


@dataclass(frozen=True)
class ModelSpec:
    """Reward/drift/diffusion tuple defining a discounted diffusion."""

    d: int
    d_w: int
    rho: float
    reward: Callable
    drift: Callable
    diffusion: Callable

    def __post_init__(self):
        if self.rho <= 0:
            raise ValueError("ModelSpec: rho must be positive")
        if self.d < 1 or self.d_w < 1:
            raise ValueError("ModelSpec: dimensions must be >= 1")

    def validate_on_grid(self, n: int = 512) -> None:
        """Check that r, b, sigma are finite on a dense grid (1-D only)."""
        if self.d != 1:
            return
        x = wrap(np.linspace(-0.5, 0.5, n, endpoint=False))
        for name, f in (("reward", self.reward), ("drift", self.drift),
                        ("diffusion", self.diffusion)):
            if not np.all(np.isfinite(np.asarray(f(x), dtype=float))):
                raise ValueError(f"ModelSpec: {name} not finite on grid")


def generator_apply(model: ModelSpec, field: ScalarField, x) -> np.ndarray:
    """Apply the generator: rho v - tr((sigma sigma^T / 2) D^2 v) - b . grad v."""
    x = np.asarray(x, dtype=float)
    v = np.asarray(field.value(x), dtype=float)
    g = np.asarray(field.gradient(x), dtype=float)
    h = np.asarray(field.hessian(x), dtype=float)
    b = np.asarray(model.drift(x), dtype=float)
    sig = np.asarray(model.diffusion(x), dtype=float)
    if model.d == 1:
        if g.shape != v.shape or h.shape != v.shape:
            raise ValueError("generator_apply: field evaluators disagree in shape")
        return model.rho * v - 0.5 * sig * sig * h - b * g
    if g.shape[-1] != model.d or h.shape[-2:] != (model.d, model.d):
        raise ValueError("generator_apply: dimension mismatch in field derivatives")
    a = np.einsum("...ij,...kj->...ik", sig, sig)  # sigma sigma^T
    second = 0.5 * np.einsum("...ij,...ij->...", a, h)
    return model.rho * v - second - np.einsum("...i,...i->...", b, g)


@dataclass(frozen=True)
class BenchmarkModel(ModelSpec):
    """The 1-D torus benchmark with gradient drift and every limit in closed form.

    The drift is ``b = U'`` for the potential
    ``U(x) = -(sigma^2/2) ln(2 - cos(2 pi x))`` and the reward is chosen so
    that the exact value function is ``V(x) = sin(2 pi x)``.  The stationary
    density is ``m(x) = sqrt(3) / (2 - cos(2 pi x))`` (independent of sigma),
    with CDF ``F`` and inverse CDF available for i.i.d. sampling.
    """

    sigma2: float = 0.0
    potential: Callable = None
    value: Callable = None
    value_field: ScalarField = None
    stationary_density: Callable = None
    cdf: Callable = None
    inverse_cdf: Callable = None


def benchmark_model(rho: float, sigma2: float) -> BenchmarkModel:
    """Construct the closed-form benchmark (d = d_w = 1, constant diffusion)."""
    if rho <= 0 or sigma2 <= 0:
        raise ValueError("benchmark_model: rho and sigma2 must be positive")
    sig = float(np.sqrt(sigma2))
    two_pi = 2.0 * np.pi

    def denom(x):
        return 2.0 - np.cos(two_pi * x)

    def potential(x):
        return -(sigma2 / 2.0) * np.log(denom(np.asarray(x, dtype=float)))

    def drift(x):
        x = np.asarray(x, dtype=float)
        return -(sigma2 / 2.0) * two_pi * np.sin(two_pi * x) / denom(x)

    def reward(x):
        x = np.asarray(x, dtype=float)
        return (rho + 4.0 * np.pi**2 * sigma2 / denom(x)) * np.sin(two_pi * x)

    def diffusion(x):
        return np.full_like(np.asarray(x, dtype=float), sig)

    def value(x):
        return np.sin(two_pi * np.asarray(x, dtype=float))

    vfield = ScalarField(
        value=value,
        gradient=lambda x: two_pi * np.cos(two_pi * np.asarray(x, dtype=float)),
        hessian=lambda x: -(two_pi**2) * np.sin(two_pi * np.asarray(x, dtype=float)),
    )

    def density(x):
        return np.sqrt(3.0) / denom(np.asarray(x, dtype=float))

    def cdf(x):
        x = np.asarray(x, dtype=float)
        if np.any(x < -0.5) or np.any(x > 0.5):
            raise ValueError("cdf: argument outside the canonical interval")
        return 0.5 + np.arctan(np.sqrt(3.0) * np.tan(np.pi * x)) / np.pi

    def inverse_cdf(z):
        z = np.asarray(z, dtype=float)
        if np.any(z < 0.0) or np.any(z > 1.0):
            raise ValueError("inverse_cdf: argument outside [0, 1]")
        return np.arctan(np.tan(np.pi * (z - 0.5)) / np.sqrt(3.0)) / np.pi

    model = BenchmarkModel(
        d=1,
        d_w=1,
        rho=float(rho),
        reward=reward,
        drift=drift,
        diffusion=diffusion,
        sigma2=float(sigma2),
        potential=potential,
        value=value,
        value_field=vfield,
        stationary_density=density,
        cdf=cdf,
        inverse_cdf=inverse_cdf,
    )
    model.validate_on_grid()
    return model
