"""Grid quadrature of the closed-form limits for 1-D models with a known
stationary density.

For smooth periodic integrands the midpoint rule on a uniform grid converges
spectrally, so these values are exact to near machine precision and serve as
the deterministic counterpart of the Monte-Carlo estimators in
:mod:`ctpe.oracle` (reference vectors for experiments, oracles for tests).
"""

from dataclasses import dataclass

import numpy as np

from .features import FeatureMap
from .model import ModelSpec

__all__ = ["GridLimits", "grid_limits", "grid_ell_matrix", "grid_rg_limits",
           "grid_nodes"]


def grid_nodes(model: ModelSpec, n: int = 8192):
    """Midpoint nodes on [-0.5, 0.5) and stationary-density weights."""
    if model.d != 1:
        raise ValueError("quadrature: only 1-D models supported")
    density = getattr(model, "stationary_density", None)
    if density is None:
        raise ValueError("quadrature: model has no stationary density")
    x = -0.5 + (np.arange(n) + 0.5) / n
    w = np.asarray(density(x), dtype=float) / n
    w = w / w.sum()  # kill the residual normalisation error
    return x, w


def _l_phi(model: ModelSpec, phi: FeatureMap, x):
    """Generator applied to each feature: rho phi - (sigma^2/2) phi'' - b phi'."""
    p = np.asarray(phi.eval(x))
    pj = np.asarray(phi.jacobian(x))
    ph = np.asarray(phi.hessian(x))
    sig = np.asarray(model.diffusion(x), dtype=float)
    b = np.asarray(model.drift(x), dtype=float)
    return model.rho * p - 0.5 * (sig**2)[..., None] * ph - b[..., None] * pj


@dataclass(frozen=True)
class GridLimits:
    """Quadrature values of H, b-vector, their split and the TD(0) limits."""

    H: np.ndarray
    b_vec: np.ndarray
    S: np.ndarray
    A: np.ndarray
    theta_star: np.ndarray

    def theta_star_mu(self, mu: float) -> np.ndarray:
        d = self.H.shape[0]
        return np.linalg.solve(mu * np.eye(d) + self.H, self.b_vec)


def grid_limits(model: ModelSpec, phi: FeatureMap, n: int = 8192) -> GridLimits:
    """H = E_m[phi (L phi)^T], b = E_m[r phi], and theta* solving H theta = b."""
    x, w = grid_nodes(model, n)
    p = np.asarray(phi.eval(x))
    lp = _l_phi(model, phi, x)
    H = p.T @ (lp * w[:, None])
    b_vec = (np.asarray(model.reward(x)) * w) @ p
    S = (H + H.T) / 2.0
    A = (H - H.T) / 2.0
    theta_star = np.linalg.solve(H, b_vec)
    return GridLimits(H=H, b_vec=b_vec, S=S, A=A, theta_star=theta_star)


def grid_ell_matrix(model: ModelSpec, phi: FeatureMap, n: int = 8192) -> np.ndarray:
    """Quadratic form of the ell-loss: rho E[phi phi^T] + (1/2) E[phi' sigma^2 phi'^T]."""
    x, w = grid_nodes(model, n)
    p = np.asarray(phi.eval(x))
    pj = np.asarray(phi.jacobian(x))
    sig2 = np.asarray(model.diffusion(x), dtype=float) ** 2
    return model.rho * p.T @ (p * w[:, None]) + 0.5 * pj.T @ (pj * (sig2 * w)[:, None])


def grid_rg_limits(model: ModelSpec, phi: FeatureMap, mu: float, n: int = 8192):
    """Minimisers targeted by the residual-gradient family.

    Returns ``(theta_rg, theta_rg_tilde)``: the fixed point of the
    mu-regularised stochastic RG update, i.e. the minimiser of

        E[(L v - r)^2] + (1/2) E[tr((sigma sigma^T D^2 v)^2)] + mu |theta|^2,

    and the minimiser without the Hessian term (the limit the multistep,
    mini-batch, vanishing-viscosity and Rademacher variants aim at).
    """
    x, w = grid_nodes(model, n)
    lp = _l_phi(model, phi, x)
    ph = np.asarray(phi.hessian(x))
    sig2 = np.asarray(model.diffusion(x), dtype=float) ** 2
    r = np.asarray(model.reward(x))
    G_L = lp.T @ (lp * w[:, None])
    c_L = (r * w) @ lp
    G_hess = ph.T @ (ph * (sig2**2 * w)[:, None])
    d = phi.d_theta
    theta_rg = np.linalg.solve(G_L + 0.5 * G_hess + mu * np.eye(d), c_L)
    theta_tilde = np.linalg.solve(G_L + mu * np.eye(d), c_L)
    return theta_rg, theta_tilde
