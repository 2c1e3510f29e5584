"""Feature maps with spatial derivatives and the linear value parametrisation.

A learnt function is ``v(x, theta) = theta . phi(x)`` for a fixed feature
vector ``phi``.  The TD machinery needs ``grad_x v`` and ``D^2_x v`` at every
step, so each family ships analytic first and second derivatives; nothing in
the hot loop differentiates numerically.

1-D convention: ``eval``, ``jacobian`` and ``hessian`` map positions of any
shape ``(...)`` to ``(..., d_theta)``, the derivative arrays holding d/dx and
d^2/dx^2 of each coordinate function.
"""

import re
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .model import ScalarField

__all__ = [
    "FeatureMap",
    "fourier_features",
    "trig_features",
    "feature_map_from_key",
    "value",
    "value_grad_x",
    "value_hess_x",
    "value_field",
]


@dataclass(frozen=True)
class FeatureMap:
    """Feature vector phi with analytic derivatives (1-D state)."""

    d: int
    d_theta: int
    eval: Callable
    jacobian: Callable
    hessian: Callable
    name: str = "custom"


def trig_features(order: int) -> FeatureMap:
    """Trigonometric polynomial features (1, sin(2pi j x), cos(2pi j x))_{j<=order}.

    d_theta = 2*order + 1.  Frequencies above 1 let experiments place the
    exact value function strictly inside, or outside, the span.
    """
    if order < 1:
        raise ValueError("trig_features: order must be >= 1")
    freqs = 2.0 * np.pi * np.arange(1, order + 1)

    def _eval(x):
        x = np.asarray(x, dtype=float)
        a = freqs * x[..., None]
        out = np.empty(x.shape + (2 * order + 1,))
        out[..., 0] = 1.0
        out[..., 1::2] = np.sin(a)
        out[..., 2::2] = np.cos(a)
        return out

    def _jac(x):
        x = np.asarray(x, dtype=float)
        a = freqs * x[..., None]
        out = np.empty(x.shape + (2 * order + 1,))
        out[..., 0] = 0.0
        out[..., 1::2] = freqs * np.cos(a)
        out[..., 2::2] = -freqs * np.sin(a)
        return out

    def _hess(x):
        x = np.asarray(x, dtype=float)
        a = freqs * x[..., None]
        out = np.empty(x.shape + (2 * order + 1,))
        out[..., 0] = 0.0
        out[..., 1::2] = -(freqs**2) * np.sin(a)
        out[..., 2::2] = -(freqs**2) * np.cos(a)
        return out

    name = "fourier3" if order == 1 else f"trig(order={order})"
    return FeatureMap(d=1, d_theta=2 * order + 1, eval=_eval, jacobian=_jac,
                      hessian=_hess, name=name)


def fourier_features() -> FeatureMap:
    """The 3-feature map (1, sin(2 pi x), cos(2 pi x))."""
    return trig_features(1)


def feature_map_from_key(key: str) -> FeatureMap:
    """Resolve a config key: ``fourier3`` or ``trig(order=n)``."""
    key = key.strip()
    if key == "fourier3":
        return fourier_features()
    m = re.fullmatch(r"trig\(order=(\d+)\)", key)
    if m:
        return trig_features(int(m.group(1)))
    raise ValueError(f"unknown feature family: {key!r}")


def _check_theta(theta, phi: FeatureMap) -> np.ndarray:
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (phi.d_theta,):
        raise ValueError(f"theta has shape {theta.shape}, expected ({phi.d_theta},)")
    return theta


def value(theta, phi: FeatureMap, x):
    """v(x, theta) = theta . phi(x)."""
    theta = _check_theta(theta, phi)
    return np.asarray(phi.eval(x)) @ theta


def value_grad_x(theta, phi: FeatureMap, x):
    """d/dx of v(x, theta)."""
    theta = _check_theta(theta, phi)
    return np.asarray(phi.jacobian(x)) @ theta


def value_hess_x(theta, phi: FeatureMap, x):
    """d^2/dx^2 of v(x, theta)."""
    theta = _check_theta(theta, phi)
    return np.asarray(phi.hessian(x)) @ theta


def value_field(theta, phi: FeatureMap) -> ScalarField:
    """The learnt function as a ScalarField (for the generator, diagnostics)."""
    theta = _check_theta(theta, phi)
    return ScalarField(
        value=lambda x: np.asarray(phi.eval(x)) @ theta,
        gradient=lambda x: np.asarray(phi.jacobian(x)) @ theta,
        hessian=lambda x: np.asarray(phi.hessian(x)) @ theta,
    )
