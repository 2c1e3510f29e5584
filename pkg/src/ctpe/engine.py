"""Vectorised multi-seed sweep engine (1-D models).

Runs many independent learners in lockstep, vectorising every per-iteration
quantity across seeds and precomputing all theta-independent quantities in
chunks of iterations.  Each seed owns two private substreams (state draws and
transition noise) derived from the master stream, so a sweep is bitwise
reproducible and running seed s alone through :func:`ctpe.learn.train`
retraces column s of the sweep draw for draw.

Seeds that blow up are flagged with the iteration of first detection and
their columns carry NaN from there on; the remaining seeds keep running.
"""

import math
from dataclasses import dataclass

import numpy as np

from .features import FeatureMap
from .learn import DIVERGENCE_RADIUS, LearnerConfig, log_grid
from .model import ModelSpec
from .observe import Schedule, StationaryEnsemble
from .streams import PURPOSE_NOISE, PURPOSE_STATE, RngStream
from .torus import wrap

__all__ = ["SweepResult", "sweep_paths", "curve_from_sweep"]

_CHECK_EVERY = 32


@dataclass
class SweepResult:
    """Per-seed iterate snapshots on the logging grid."""

    ks: np.ndarray            # (n_log,)
    theta: np.ndarray         # (n_log, n_seeds, d_theta)
    theta_bar: np.ndarray     # (n_log, n_seeds, d_theta)
    diverged_at: np.ndarray   # (n_seeds,) iteration of first detection, -1 if none
    k_max: int
    averaging: bool


def _chunk_size(mode, ext_kind, d_theta):
    if mode == "realworld" or ext_kind in ("multistep", "minibatch"):
        return 512
    return max(512, min(8192, 2_000_000 // max(1, 3 * d_theta)))


def sweep_paths(model: ModelSpec, phi: FeatureMap, cfg: LearnerConfig,
                dt_schedule: Schedule, mode: str, master_stream: RngStream,
                n_seeds: int, k_max: int, n_sub: int = 32, theta0=None,
                seed_offset: int = 0, burn_in: int = 20000) -> SweepResult:
    """Run ``n_seeds`` learners for ``k_max`` iterations; snapshot on the log grid."""
    if model.d != 1:
        raise ValueError("sweep_paths: only 1-D models are supported")
    if mode not in ("simulator", "realworld"):
        raise ValueError(f"sweep_paths: unknown mode {mode!r}")
    if k_max < 1:
        raise ValueError("sweep_paths: k_max must be >= 1")
    ext = cfg.rg_extension
    ext_kind = ext.kind if ext is not None else None
    if ext_kind is not None and mode != "simulator":
        raise ValueError("sweep_paths: rg extensions are defined for simulator mode")

    F = phi.d_theta
    th0 = np.zeros(F) if theta0 is None else np.asarray(theta0, dtype=float)
    th = np.tile(th0, (n_seeds, 1))
    thbar = th.copy()

    state_gens = [master_stream.child(seed_offset + s, PURPOSE_STATE).generator()
                  for s in range(n_seeds)]
    noise_gens = [master_stream.child(seed_offset + s, PURPOSE_NOISE).generator()
                  for s in range(n_seeds)]
    inverse_cdf = getattr(model, "inverse_cdf", None)
    ensembles = None
    if inverse_cdf is None:
        ensembles = [StationaryEnsemble(
            model, master_stream.child(seed_offset + s, PURPOSE_STATE),
            burn_in=burn_in)
            for s in range(n_seeds)]

    logks = log_grid(k_max)
    snaps_th = np.empty((len(logks), n_seeds, F))
    snaps_tb = np.empty((len(logks), n_seeds, F))
    diverged_at = np.full(n_seeds, -1, dtype=int)
    li = 0

    mu = cfg.mu
    M = cfg.ball_radius
    rg = cfg.algorithm == "rg"
    stochastic = cfg.variant == "stochastic"
    averaging = cfg.averaging
    rho = model.rho
    K0 = _chunk_size(mode, ext_kind, F)

    def check_divergence(kk):
        norm2 = np.einsum("sf,sf->s", th, th)
        bad = ~np.isfinite(norm2) | (norm2 > DIVERGENCE_RADIUS**2)
        fresh = bad & (diverged_at < 0)
        if fresh.any():
            diverged_at[fresh] = kk

    with np.errstate(over="ignore", invalid="ignore"):
        k = 0
        while k < k_max:
            K = min(K0, k_max - k)
            ks = np.arange(k, k + K)
            dt = dt_schedule.array(ks)
            al = cfg.lr.array(ks)
            gam = np.exp(-rho * dt)
            invdt = 1.0 / dt

            if inverse_cdf is not None:
                U = np.stack([g.uniform(size=K) for g in state_gens])
                X = np.asarray(inverse_cdf(U))
            else:
                X = np.stack([ens.draw(K) for ens in ensembles])
            B = np.asarray(model.drift(X))
            RWD = np.asarray(model.reward(X))
            PHI_X = np.asarray(phi.eval(X)).transpose(1, 0, 2)    # (K, S, F)
            PHIP_X = np.asarray(phi.jacobian(X)).transpose(1, 0, 2)

            if ext_kind in ("multistep", "minibatch"):
                counts = ext.counts(ks)
                total = int(counts.sum())
                Z = np.stack([g.standard_normal(total) for g in noise_gens])
                offs = np.concatenate([[0], np.cumsum(counts)])
                for j in range(K):
                    kk = k + j
                    if averaging:
                        thbar += (th - thbar) / (kk + 1.0)
                    zblk = Z[:, offs[j]:offs[j + 1]]
                    dtil, grad = _aggregate_td(
                        model, phi, th, X[:, j], dt[j], zblk, ext_kind,
                        gam[j], invdt[j])
                    direction = dtil[:, None] * grad
                    if mu:
                        direction += mu * th
                    th = th - al[j] * direction
                    if M is not None:
                        th = _project(th, M)
                    if (kk + 1) % _CHECK_EVERY == 0:
                        check_divergence(kk)
                    if li < len(logks) and kk + 1 == logks[li]:
                        check_divergence(kk)
                        snaps_th[li] = th
                        snaps_tb[li] = thbar
                        li += 1
                k += K
                continue

            # fast path: simulator / realworld / sigma-schedule / rademacher
            if ext_kind == "rademacher":
                U2 = np.stack([g.uniform(size=K) for g in noise_gens])
                Z = np.where(U2 < 0.5, -1.0, 1.0)
            elif mode == "simulator":
                Z = np.stack([g.standard_normal(K) for g in noise_gens])
            if ext_kind == "sigma":
                SIG = np.broadcast_to(ext.sigmas(ks), (n_seeds, K))
            else:
                SIG = np.asarray(model.diffusion(X))

            if mode == "simulator" or ext_kind == "rademacher":
                XP = wrap(X + dt * B + np.sqrt(dt) * SIG * Z)
                RW = RWD
            else:
                h = dt / n_sub
                sqh = np.sqrt(h)
                Zsub = np.stack([g.standard_normal(K * n_sub) for g in noise_gens])
                Zsub = Zsub.reshape(n_seeds, K, n_sub)
                XP = X.copy()
                RSUM = np.zeros_like(X)
                for i in range(n_sub):
                    RSUM += np.asarray(model.reward(XP))
                    XP = wrap(XP + h * np.asarray(model.drift(XP))
                              + sqh * np.asarray(model.diffusion(XP)) * Zsub[:, :, i])
                RW = RSUM / n_sub
            PHI_XP = np.asarray(phi.eval(XP)).transpose(1, 0, 2)
            INC = (((XP - X + 0.5) % 1.0 - 0.5) - dt * B) * invdt

            for j in range(K):
                kk = k + j
                if averaging:
                    thbar += (th - thbar) / (kk + 1.0)
                px = PHI_X[j]
                vx = np.einsum("sf,sf->s", th, px)
                vp = np.einsum("sf,sf->s", th, PHI_XP[j])
                delta = vx * invdt[j] - vp * (gam[j] * invdt[j]) - RW[:, j]
                if stochastic or rg:
                    vpx = np.einsum("sf,sf->s", th, PHIP_X[j])
                    dtil = delta + INC[:, j] * vpx
                d_use = dtil if stochastic else delta
                if rg:
                    grad = (px - gam[j] * PHI_XP[j]) * invdt[j]
                    if stochastic:
                        grad = grad + PHIP_X[j] * INC[:, j, None]
                    direction = d_use[:, None] * grad
                else:
                    direction = d_use[:, None] * px
                if mu:
                    direction += mu * th
                th = th - al[j] * direction
                if M is not None:
                    th = _project(th, M)
                if (kk + 1) % _CHECK_EVERY == 0:
                    check_divergence(kk)
                if li < len(logks) and kk + 1 == logks[li]:
                    check_divergence(kk)
                    snaps_th[li] = th
                    snaps_tb[li] = thbar
                    li += 1
            k += K

    # blank out snapshots from the first detected divergence onward
    for s in np.nonzero(diverged_at >= 0)[0]:
        mask = np.asarray(logks) > diverged_at[s]
        snaps_th[mask, s, :] = np.nan
        snaps_tb[mask, s, :] = np.nan
    return SweepResult(ks=np.asarray(logks), theta=snaps_th, theta_bar=snaps_tb,
                       diverged_at=diverged_at, k_max=k_max, averaging=averaging)


def _project(th, radius):
    norm2 = np.einsum("sf,sf->s", th, th)
    over = norm2 > radius * radius
    if over.any():
        th = th.copy()
        th[over] *= (radius / np.sqrt(norm2[over]))[:, None]
    return th


def _aggregate_td(model, phi, th, x, dt, zblk, kind, gam, invdt):
    """Mean stochastic TD and mean theta-gradient over a noise block.

    multistep: consecutive Euler steps from x; minibatch: independent steps
    at the same x.  Vectorised across seeds; loops over the block.
    """
    n = zblk.shape[1]
    S = th.shape[0]
    sqdt = math.sqrt(dt)
    dsum = np.zeros(S)
    gsum = np.zeros_like(th)
    xt = x
    for i in range(n):
        b = np.asarray(model.drift(xt))
        sig = np.asarray(model.diffusion(xt))
        rw = np.asarray(model.reward(xt))
        xp = wrap(xt + dt * b + sqdt * sig * zblk[:, i])
        px = np.asarray(phi.eval(xt))
        pxp = np.asarray(phi.eval(xp))
        ppx = np.asarray(phi.jacobian(xt))
        inc = (((xp - xt + 0.5) % 1.0 - 0.5) - dt * b) * invdt
        vx = np.einsum("sf,sf->s", th, px)
        vp = np.einsum("sf,sf->s", th, pxp)
        vpx = np.einsum("sf,sf->s", th, ppx)
        dsum += vx * invdt - vp * (gam * invdt) - rw + inc * vpx
        gsum += (px - gam * pxp) * invdt + ppx * inc[:, None]
        if kind == "multistep":
            xt = xp
    return dsum / n, gsum / n


def curve_from_sweep(result: SweepResult, metric: str, theta_ref=None,
                     ell_matrix=None, on: str = "auto"):
    """Reduce snapshots to an error curve: rows (k, mean, std, n_ok_seeds).

    ``metric`` is ``param_mse`` (|theta - ref|^2) or ``ell_loss`` (the
    quadratic form ``ell_matrix``).  ``on`` selects the iterate: ``theta``,
    ``theta_bar``, or ``auto`` (the average when averaging was on).
    """
    if metric not in ("param_mse", "ell_loss"):
        raise ValueError(f"curve_from_sweep: unknown metric {metric!r}")
    if theta_ref is None:
        raise ValueError("curve_from_sweep: a reference vector is required")
    if on == "auto":
        on = "theta_bar" if result.averaging else "theta"
    snaps = result.theta_bar if on == "theta_bar" else result.theta
    ref = np.asarray(theta_ref, dtype=float)
    diff = snaps - ref
    if metric == "param_mse":
        vals = np.einsum("ksf,ksf->ks", diff, diff)
    else:
        if ell_matrix is None:
            raise ValueError("curve_from_sweep: ell_loss needs ell_matrix")
        vals = np.einsum("ksi,ij,ksj->ks", diff, np.asarray(ell_matrix), diff)
    rows = []
    for i, kk in enumerate(result.ks):
        v = vals[i]
        ok = np.isfinite(v)
        n_ok = int(ok.sum())
        if n_ok:
            mean = float(v[ok].mean())
            std = float(v[ok].std(ddof=1)) if n_ok > 1 else 0.0
        else:
            mean, std = float("nan"), float("nan")
        rows.append((int(kk), mean, std, n_ok))
    return rows
