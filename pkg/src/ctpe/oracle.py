"""Monte-Carlo estimation of the closed-form limits and moment diagnostics.

Everything here averages over i.i.d. stationary states (exact inverse-CDF
sampling when the model provides it), so discretisation bias never enters the
oracle quantities and any gap seen by a learner is attributable to the
algorithm.  Standard errors come from 100 batch means and are reported next
to every estimate.
"""

import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .features import FeatureMap, value_field
from .model import ModelSpec, generator_apply
from .observe import StationaryEnsemble
from .streams import RngStream
from .torus import displacement, wrap

__all__ = [
    "RunningMoments",
    "LimitSolution",
    "MomentReport",
    "estimate_limits",
    "ell_matrix_mc",
    "ell_loss",
    "conditional_moments",
    "RgLimits",
    "rg_limits",
    "TraceReport",
    "trace_diagnostics",
]

N_BATCHES = 100


class RunningMoments:
    """Welford accumulator for mean and variance, mergeable across chunks."""

    def __init__(self):
        self.n = 0
        self.mean = 0.0
        self.m2 = 0.0

    def update(self, values: np.ndarray) -> None:
        values = np.asarray(values, dtype=float).ravel()
        n_b = values.size
        if n_b == 0:
            return
        mean_b = float(values.mean())
        m2_b = float(((values - mean_b) ** 2).sum())
        delta = mean_b - self.mean
        n = self.n + n_b
        self.mean += delta * n_b / n
        self.m2 += m2_b + delta * delta * self.n * n_b / n
        self.n = n

    @property
    def variance(self) -> float:
        return self.m2 / (self.n - 1) if self.n > 1 else float("nan")

    @property
    def se_mean(self) -> float:
        return math.sqrt(self.variance / self.n) if self.n > 1 else float("nan")


def _stationary_batch(model: ModelSpec, stream: RngStream, n: int) -> np.ndarray:
    inverse_cdf = getattr(model, "inverse_cdf", None)
    if inverse_cdf is not None:
        return np.asarray(inverse_cdf(stream.generator().uniform(size=n)))
    return StationaryEnsemble(model, stream).draw(n)


@dataclass(frozen=True)
class LimitSolution:
    """Monte-Carlo estimates of H, the b-vector, their split and theta*."""

    H: np.ndarray
    b_vec: np.ndarray
    S: np.ndarray
    A: np.ndarray
    theta_star: np.ndarray
    n_samples: int
    se_H: np.ndarray
    se_b: np.ndarray
    se_theta: np.ndarray

    def theta_star_mu(self, mu: float) -> np.ndarray:
        d = self.H.shape[0]
        return np.linalg.solve(mu * np.eye(d) + self.H, self.b_vec)


def estimate_limits(model: ModelSpec, phi: FeatureMap, n_samples: int,
                    stream: RngStream) -> LimitSolution:
    """Estimate H = E_m[phi (L phi)^T] and b = E_m[r phi]; solve H theta* = b.

    The linear solve is checked against the residual tolerance
    ``|H theta - b| <= 1e-10 |b|``; a near-singular H raises with the
    smallest singular value in the message.
    """
    if n_samples < 1000:
        raise ValueError("estimate_limits: need at least 1000 samples")
    x = _stationary_batch(model, stream, n_samples)
    p = np.asarray(phi.eval(x))
    pj = np.asarray(phi.jacobian(x))
    ph = np.asarray(phi.hessian(x))
    sig = np.asarray(model.diffusion(x), dtype=float)
    b = np.asarray(model.drift(x), dtype=float)
    lp = model.rho * p - 0.5 * (sig**2)[:, None] * ph - b[:, None] * pj
    r = np.asarray(model.reward(x))

    # batch means for standard errors
    nb = N_BATCHES
    m = (n_samples // nb) * nb
    d = phi.d_theta
    Hb = np.einsum("bni,bnj->bij", p[:m].reshape(nb, -1, d), lp[:m].reshape(nb, -1, d))
    Hb /= m // nb
    bb = np.einsum("bn,bni->bi", r[:m].reshape(nb, -1), p[:m].reshape(nb, -1, d))
    bb /= m // nb
    H = p.T @ lp / n_samples
    b_vec = r @ p / n_samples
    se_H = Hb.std(axis=0, ddof=1) / math.sqrt(nb)
    se_b = bb.std(axis=0, ddof=1) / math.sqrt(nb)

    svals = np.linalg.svd(H, compute_uv=False)
    if svals[-1] < 1e-8 * svals[0]:
        raise np.linalg.LinAlgError(
            f"estimate_limits: H is numerically singular "
            f"(smallest singular value {svals[-1]:.3e})")
    theta_star = np.linalg.solve(H, b_vec)
    resid = np.linalg.norm(H @ theta_star - b_vec)
    if resid > 1e-10 * max(np.linalg.norm(b_vec), 1e-30):
        raise np.linalg.LinAlgError(f"estimate_limits: solve residual {resid:.3e}")
    theta_b = np.stack([np.linalg.solve(Hb[i], bb[i]) for i in range(nb)])
    se_theta = theta_b.std(axis=0, ddof=1) / math.sqrt(nb)
    return LimitSolution(H=H, b_vec=b_vec, S=(H + H.T) / 2, A=(H - H.T) / 2,
                         theta_star=theta_star, n_samples=n_samples,
                         se_H=se_H, se_b=se_b, se_theta=se_theta)


def ell_matrix_mc(model: ModelSpec, phi: FeatureMap, n_samples: int,
                  stream: RngStream) -> np.ndarray:
    """Monte-Carlo quadratic form of the ell-loss (see :func:`ell_loss`)."""
    x = _stationary_batch(model, stream, n_samples)
    p = np.asarray(phi.eval(x))
    pj = np.asarray(phi.jacobian(x))
    sig2 = np.asarray(model.diffusion(x), dtype=float) ** 2
    return (model.rho * p.T @ p + 0.5 * pj.T @ (pj * sig2[:, None])) / n_samples


def ell_loss(theta, theta_ref, model: ModelSpec, phi: FeatureMap,
             n_samples: int, stream: RngStream) -> float:
    """The loss rho (v - w)^2 + (1/2)|sigma grad(v - w)|^2 averaged over m.

    For linear features this is the quadratic form
    ``(theta - theta_ref)^T S_ell (theta - theta_ref)`` with
    ``S_ell = rho E[phi phi^T] + (1/2) E[phi' sigma^2 phi'^T]``.
    """
    s_ell = ell_matrix_mc(model, phi, n_samples, stream)
    diff = np.asarray(theta, dtype=float) - np.asarray(theta_ref, dtype=float)
    return float(diff @ s_ell @ diff)


@dataclass(frozen=True)
class MomentReport:
    """Conditional mean/variance of both TDs at fixed (x, theta) per dt.

    ``analytic_limits`` holds the dt -> 0 targets
    (L v - r,  |sigma grad v|^2,  (1/2) tr((sigma sigma^T D^2 v)^2)); the
    standard TD's variance is reported premultiplied by nothing, so compare
    ``dt * var_std`` against the second entry.
    """

    x: float
    theta: np.ndarray
    dt_grid: tuple
    mean_std: np.ndarray
    var_std: np.ndarray
    mean_stoch: np.ndarray
    var_stoch: np.ndarray
    se_mean_std: np.ndarray
    se_mean_stoch: np.ndarray
    analytic_limits: tuple
    n_samples: int


def conditional_moments(model: ModelSpec, phi: FeatureMap, theta, x: float,
                        dt_grid, n_samples: int, mode: str, stream: RngStream,
                        n_sub: int = 32) -> MomentReport:
    """Monte-Carlo conditional moments of delta and delta~ at a fixed state.

    Vectorised over draws; Welford accumulation keeps the variance stable at
    n = 10^6.  ``mode`` selects simulator or real-world observations.
    """
    if n_samples < 10**4:
        raise ValueError("conditional_moments: need at least 1e4 samples")
    if mode not in ("simulator", "realworld"):
        raise ValueError(f"conditional_moments: unknown mode {mode!r}")
    theta = np.asarray(theta, dtype=float)
    vf = value_field(theta, phi)
    x = float(x)
    b_x = float(model.drift(np.asarray(x)))
    sig_x = float(model.diffusion(np.asarray(x)))
    r_x = float(model.reward(np.asarray(x)))
    v_x = float(vf.value(np.asarray(x)))
    dv_x = float(vf.gradient(np.asarray(x)))
    d2v_x = float(vf.hessian(np.asarray(x)))

    gen = stream.generator()
    ms, vs, mt, vt = [], [], [], []
    ses, set_ = [], []
    chunk = 1 << 17
    for dt in dt_grid:
        gam = math.exp(-model.rho * dt)
        acc_std, acc_sto = RunningMoments(), RunningMoments()
        left = n_samples
        while left > 0:
            n = min(chunk, left)
            left -= n
            if mode == "simulator":
                z = gen.standard_normal(n)
                xp = wrap(x + dt * b_x + math.sqrt(dt) * sig_x * z)
                rwd = r_x
            else:
                h = dt / n_sub
                xp = np.full(n, x)
                rsum = np.zeros(n)
                for _ in range(n_sub):
                    rsum += np.asarray(model.reward(xp))
                    z = gen.standard_normal(n)
                    xp = wrap(xp + h * np.asarray(model.drift(xp))
                              + math.sqrt(h) * np.asarray(model.diffusion(xp)) * z)
                rwd = rsum / n_sub
            v_xp = np.asarray(vf.value(xp))
            delta = (v_x - gam * v_xp) / dt - rwd
            inc = displacement(x, xp) - dt * b_x
            dtil = delta + inc * dv_x / dt
            acc_std.update(delta)
            acc_sto.update(dtil)
        ms.append(acc_std.mean)
        vs.append(acc_std.variance)
        mt.append(acc_sto.mean)
        vt.append(acc_sto.variance)
        ses.append(acc_std.se_mean)
        set_.append(acc_sto.se_mean)

    bellman = float(generator_apply(model, vf, np.asarray(x))) - r_x
    lim_var_std = (sig_x * dv_x) ** 2
    lim_var_sto = 0.5 * (sig_x**2 * d2v_x) ** 2
    return MomentReport(
        x=x, theta=theta, dt_grid=tuple(dt_grid),
        mean_std=np.array(ms), var_std=np.array(vs),
        mean_stoch=np.array(mt), var_stoch=np.array(vt),
        se_mean_std=np.array(ses), se_mean_stoch=np.array(set_),
        analytic_limits=(bellman, lim_var_std, lim_var_sto),
        n_samples=n_samples,
    )


@dataclass(frozen=True)
class RgLimits:
    """Minimisers of the residual-gradient objectives, with standard errors."""

    theta_star_rg: np.ndarray
    theta_star_tilde: np.ndarray
    G_L: np.ndarray
    c_L: np.ndarray
    G_hess: np.ndarray
    mu: float
    n_samples: int
    se_theta_rg: np.ndarray
    se_theta_tilde: np.ndarray


def rg_limits(model: ModelSpec, phi: FeatureMap, mu: float, n_samples: int,
              stream: RngStream) -> RgLimits:
    """Monte-Carlo minimiser of the residual-gradient cost.

    The regularised stochastic RG update has mean field
    (1/2) grad of ``E[(L v - r)^2] + (1/2) E[tr((sigma sigma^T D^2 v)^2)]
    + mu |theta|^2``; its minimiser solves
    ``(G_L + G_hess/2 + mu I) theta = c_L``.  The companion
    ``theta_star_tilde`` omits the Hessian term (the target of the
    variance-killing extension variants).
    """
    if n_samples < 1000:
        raise ValueError("rg_limits: need at least 1000 samples")
    x = _stationary_batch(model, stream, n_samples)
    p = np.asarray(phi.eval(x))
    pj = np.asarray(phi.jacobian(x))
    ph = np.asarray(phi.hessian(x))
    sig = np.asarray(model.diffusion(x), dtype=float)
    b = np.asarray(model.drift(x), dtype=float)
    r = np.asarray(model.reward(x))
    lp = model.rho * p - 0.5 * (sig**2)[:, None] * ph - b[:, None] * pj
    d = phi.d_theta

    def solve(lp_, ph_, sig_, r_, n_):
        G_L = lp_.T @ lp_ / n_
        c_L = r_ @ lp_ / n_
        G_hess = ph_.T @ (ph_ * (sig_**4)[:, None]) / n_
        A_full = G_L + 0.5 * G_hess + mu * np.eye(d)
        A_tilde = G_L + mu * np.eye(d)
        evals = np.linalg.eigvalsh((A_full + A_full.T) / 2)
        if evals[0] <= 0:
            raise np.linalg.LinAlgError(
                f"rg_limits: indefinite quadratic form (min eig {evals[0]:.3e})")
        return (np.linalg.solve(A_full, c_L), np.linalg.solve(A_tilde, c_L),
                G_L, c_L, G_hess)

    th_rg, th_tilde, G_L, c_L, G_hess = solve(lp, ph, sig, r, n_samples)
    nb = N_BATCHES
    m = (n_samples // nb) * nb
    size = m // nb
    rg_b, tl_b = [], []
    for i in range(nb):
        sl = slice(i * size, (i + 1) * size)
        a, t, *_ = solve(lp[sl], ph[sl], sig[sl], r[sl], size)
        rg_b.append(a)
        tl_b.append(t)
    se_rg = np.stack(rg_b).std(axis=0, ddof=1) / math.sqrt(nb)
    se_tl = np.stack(tl_b).std(axis=0, ddof=1) / math.sqrt(nb)
    return RgLimits(theta_star_rg=th_rg, theta_star_tilde=th_tilde, G_L=G_L,
                    c_L=c_L, G_hess=G_hess, mu=mu, n_samples=n_samples,
                    se_theta_rg=se_rg, se_theta_tilde=se_tl)


@dataclass(frozen=True)
class TraceReport:
    """Spectral diagnostics of the limit matrices."""

    tr_h_hinv_t: float
    tr_s: float
    spectrum_s: np.ndarray
    eig_h: np.ndarray
    spectral_bound: Optional[float]
    spectral_ok: Optional[bool]


def trace_diagnostics(limits, model: Optional[ModelSpec] = None,
                      n_grid: int = 4096) -> TraceReport:
    """tr(H H^-T), tr(S), spectrum of S, and the eigenvalue cone check.

    When the model has a closed-form density, eigenvalues of H are checked
    against ``|Im l| <= sqrt(2/(rho sigma^2)) sup|b + (sigma^2/2) d ln m| Re l``.
    """
    H, S = limits.H, limits.S
    svals = np.linalg.svd(H, compute_uv=False)
    if svals[-1] < 1e-12 * svals[0]:
        raise np.linalg.LinAlgError("trace_diagnostics: H is singular")
    tr_h = float(np.trace(H @ np.linalg.inv(H.T)))
    eig_h = np.linalg.eigvals(H)
    bound = None
    ok = None
    density = getattr(model, "stationary_density", None) if model is not None else None
    if density is not None and model.d == 1:
        x = -0.5 + (np.arange(n_grid) + 0.5) / n_grid
        m_x = np.asarray(density(x), dtype=float)
        dlogm = np.gradient(np.log(m_x), x)
        sig2 = float(np.mean(np.asarray(model.diffusion(x)) ** 2))
        sup = float(np.max(np.abs(np.asarray(model.drift(x)) + 0.5 * sig2 * dlogm)))
        bound = math.sqrt(2.0 / (model.rho * sig2)) * sup
        ok = bool(np.all(np.abs(eig_h.imag) <= bound * eig_h.real + 1e-9))
    return TraceReport(tr_h_hinv_t=tr_h, tr_s=float(np.trace(S)),
                       spectrum_s=np.linalg.eigvalsh(S), eig_h=eig_h,
                       spectral_bound=bound, spectral_ok=ok)
