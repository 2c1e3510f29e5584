"""Experiment harness: multi-seed sweeps, CSV emission, references, rate fits.

``run_experiment`` executes the configured number of independent seeds (in
blocks across a bounded worker pool, sized by the ``CTPE_THREADS`` variable),
aggregates them in deterministic seed order, and emits the error curve as
``k,metric_mean,metric_std,n_ok_seeds`` rows.  Identical config plus master
seed gives byte-identical CSV output.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .config import ExperimentConfig, _parse_vector
from .engine import SweepResult, curve_from_sweep, sweep_paths
from .features import FeatureMap, feature_map_from_key
from .model import BenchmarkModel, benchmark_model
from .quadrature import grid_ell_matrix, grid_limits, grid_rg_limits
from .ratefit import RateFit, fit_rate
from .streams import RngStream

__all__ = ["CSV_HEADER", "ExperimentResult", "build_experiment",
           "run_experiment", "write_curve_csv", "read_curve_csv", "worker_count"]

CSV_HEADER = "k,metric_mean,metric_std,n_ok_seeds"


def worker_count() -> int:
    env = os.environ.get("CTPE_THREADS", "").strip()
    if env:
        n = int(env)
        if n < 1:
            raise ValueError("CTPE_THREADS must be a positive integer")
        return n
    return min(4, os.cpu_count() or 1)


@dataclass(frozen=True)
class ExperimentResult:
    rows: list                    # (k, metric_mean, metric_std, n_ok_seeds)
    fit: Optional[RateFit]
    n_seeds: int
    n_diverged: int
    theta_ref: np.ndarray
    sweep: SweepResult


def build_experiment(cfg: ExperimentConfig):
    """Materialise (model, features, learner config, references) from a config."""
    model = benchmark_model(cfg.rho, cfg.sigma2)
    phi = feature_map_from_key(cfg.features)
    lcfg = cfg.learner_config()
    refs = _references(cfg, model, phi)
    return model, phi, lcfg, refs


def _references(cfg: ExperimentConfig, model: BenchmarkModel, phi: FeatureMap):
    """Reference vector and ell-matrix for the configured metric.

    Benchmark-class models have a closed-form density, so references come
    from grid quadrature (exact); an explicit ``theta_ref`` overrides.
    """
    lim = grid_limits(model, phi)
    if cfg.theta_ref != "auto":
        ref = _parse_vector(cfg.theta_ref)
        if ref.shape != (phi.d_theta,):
            raise ValueError("config: theta_ref has the wrong length")
    elif cfg.algorithm == "rg":
        ref, _ = grid_rg_limits(model, phi, cfg.mu)
    elif cfg.mu > 0:
        ref = lim.theta_star_mu(cfg.mu)
    else:
        ref = lim.theta_star
    ell = grid_ell_matrix(model, phi) if cfg.metric == "ell_loss" else None
    theta0 = {"zeros": np.zeros(phi.d_theta), "star": lim.theta_star}.get(cfg.theta0)
    if theta0 is None:
        theta0 = _parse_vector(cfg.theta0)
        if theta0.shape != (phi.d_theta,):
            raise ValueError("config: theta0 has the wrong length")
    return ref, ell, theta0


def run_experiment(cfg: ExperimentConfig) -> ExperimentResult:
    """Run the configured sweep; optionally write CSV; fit the rate window."""
    model, phi, lcfg, (theta_ref, ell, theta0) = build_experiment(cfg)
    master = RngStream(cfg.master_seed)
    n_workers = min(worker_count(), cfg.seeds)
    blocks = _seed_blocks(cfg.seeds, n_workers)

    def run_block(block):
        offset, count = block
        return sweep_paths(model, phi, lcfg, cfg.dt, cfg.mode, master,
                           n_seeds=count, k_max=cfg.k_max, n_sub=cfg.n_sub,
                           theta0=theta0, seed_offset=offset,
                           burn_in=cfg.burn_in)

    if len(blocks) == 1:
        parts = [run_block(blocks[0])]
    else:
        with ThreadPoolExecutor(max_workers=n_workers) as pool:
            parts = list(pool.map(run_block, blocks))
    sweep = _merge_sweeps(parts)
    rows = curve_from_sweep(sweep, cfg.metric, theta_ref=theta_ref, ell_matrix=ell)
    if any(r[3] == 0 for r in rows):
        raise RuntimeError("run_experiment: all seeds diverged")
    fit = None
    window = None
    if cfg.fit_k_lo is not None or cfg.fit_k_hi is not None:
        window = (cfg.fit_k_lo if cfg.fit_k_lo is not None else cfg.k_max / 100.0,
                  cfg.fit_k_hi if cfg.fit_k_hi is not None else float(cfg.k_max))
    try:
        fit = fit_rate([r[0] for r in rows], [r[1] for r in rows], window)
    except ValueError:
        fit = None  # short runs may not have enough points; the curve stands
    if cfg.out_csv:
        write_curve_csv(rows, cfg.out_csv)
    return ExperimentResult(rows=rows, fit=fit, n_seeds=cfg.seeds,
                            n_diverged=int((sweep.diverged_at >= 0).sum()),
                            theta_ref=np.asarray(theta_ref), sweep=sweep)


def _seed_blocks(n_seeds: int, n_workers: int):
    per = (n_seeds + n_workers - 1) // n_workers
    blocks = []
    start = 0
    while start < n_seeds:
        blocks.append((start, min(per, n_seeds - start)))
        start += per
    return blocks


def _merge_sweeps(parts):
    first = parts[0]
    if len(parts) == 1:
        return first
    return SweepResult(
        ks=first.ks,
        theta=np.concatenate([p.theta for p in parts], axis=1),
        theta_bar=np.concatenate([p.theta_bar for p in parts], axis=1),
        diverged_at=np.concatenate([p.diverged_at for p in parts]),
        k_max=first.k_max,
        averaging=first.averaging,
    )


def write_curve_csv(rows, path: str) -> None:
    """Write the curve with the stable schema; floats use shortest repr."""
    with open(path, "w", newline="\n") as fh:
        fh.write(CSV_HEADER + "\n")
        for k, mean, std, n_ok in rows:
            fh.write(f"{k},{mean!r},{std!r},{n_ok}\n")


def read_curve_csv(path: str):
    """Read a curve CSV; raises with the offending line number on bad input."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    if not lines:
        raise ValueError(f"{path}: empty file")
    if lines[0] != CSV_HEADER:
        raise ValueError(f"{path}:1: expected header {CSV_HEADER!r}")
    rows = []
    for lineno, line in enumerate(lines[1:], start=2):
        if not line.strip():
            continue
        parts = line.split(",")
        if len(parts) != 4:
            raise ValueError(f"{path}:{lineno}: expected 4 fields, got {len(parts)}")
        try:
            rows.append((int(parts[0]), float(parts[1]), float(parts[2]),
                         int(parts[3])))
        except ValueError as exc:
            raise ValueError(f"{path}:{lineno}: {exc}") from None
    if not rows:
        raise ValueError(f"{path}: no data rows")
    return rows
