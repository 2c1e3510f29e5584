"""Named diagnostic suites comparing Monte-Carlo estimates to analytic targets.

Each suite returns a :class:`CheckReport` whose lines carry the observed
value, the target, and a pass flag; the CLI prints them as a table.  Failures
are report content, not errors.
"""

from dataclasses import dataclass

import numpy as np

from .features import FeatureMap, fourier_features
from .model import BenchmarkModel
from .oracle import conditional_moments, estimate_limits, rg_limits
from .quadrature import grid_limits, grid_rg_limits
from .streams import RngStream, rademacher_rotated

__all__ = ["CheckLine", "CheckReport", "check_variances", "check_limits",
           "check_moments", "check_rg", "run_suite", "SUITES"]


@dataclass(frozen=True)
class CheckLine:
    name: str
    observed: float
    target: str
    passed: bool


@dataclass(frozen=True)
class CheckReport:
    suite: str
    lines: list

    @property
    def passed(self) -> bool:
        return all(line.passed for line in self.lines)

    def __str__(self) -> str:
        width = max(len(line.name) for line in self.lines)
        out = [f"suite {self.suite}:"]
        for line in self.lines:
            flag = "PASS" if line.passed else "FAIL"
            out.append(f"  [{flag}] {line.name:<{width}}  "
                       f"observed {line.observed: .6g}  target {line.target}")
        out.append(f"  => {'PASS' if self.passed else 'FAIL'}")
        return "\n".join(out)


def check_variances(stream: RngStream, n_samples: int = 10**6,
                    n_pairs: int = 10) -> CheckReport:
    """Gaussian quadratic-form identities and their Rademacher suppression.

    For Gaussian xi: Var(xi . g) = |g|^2 and Var(xi^T A xi - tr A) = 2 tr(A^2)
    for symmetric A, checked to 2%.  With the rotated-Rademacher noise the
    quadratic form equals tr A identically, so its variance vanishes.
    """
    lines = []
    gen = stream.child(0).generator()
    for i in range(n_pairs):
        d = 1 + i % 4
        g = gen.standard_normal(d)
        a = gen.standard_normal((d, d))
        a = (a + a.T) / 2.0
        xi = stream.child(1, i).generator().standard_normal((n_samples, d))
        lin = xi @ g
        var_lin = float(lin.var(ddof=1))
        target_lin = float(g @ g)
        lines.append(CheckLine(
            name=f"var(xi.g) pair {i} (d={d})", observed=var_lin,
            target=f"{target_lin:.6g} +-2%",
            passed=abs(var_lin - target_lin) <= 0.02 * target_lin))
        quad = np.einsum("ni,ij,nj->n", xi, a, xi) - np.trace(a)
        var_quad = float(quad.var(ddof=1))
        target_quad = 2.0 * float(np.trace(a @ a))
        lines.append(CheckLine(
            name=f"var(xi'Axi - trA) pair {i}", observed=var_quad,
            target=f"{target_quad:.6g} +-2%",
            passed=abs(var_quad - target_quad) <= 0.02 * target_quad))
        quad_rot = []
        for j in range(256):
            xi_r = rademacher_rotated(a, stream.child(2, i, j))
            quad_rot.append(xi_r @ a @ xi_r)
        var_rot = float((np.array(quad_rot) - np.trace(a)).var(ddof=1))
        lines.append(CheckLine(
            name=f"rademacher var pair {i}", observed=var_rot,
            target="0 (exact)", passed=var_rot < 1e-20))
    return CheckReport(suite="variances", lines=lines)


def check_limits(model: BenchmarkModel, phi: FeatureMap, stream: RngStream,
                 n_samples: int = 10**6) -> CheckReport:
    """TD(0) limit recovery against quadrature, and the regularisation bias."""
    lim = estimate_limits(model, phi, n_samples, stream.child(0))
    ref = grid_limits(model, phi)
    lines = []
    err = float(np.max(np.abs(lim.theta_star - ref.theta_star)))
    lines.append(CheckLine("max|theta* - theta*_quad|", err, "<= 2e-2",
                           err <= 2e-2))
    mineig = float(np.linalg.eigvalsh(lim.S)[0])
    lines.append(CheckLine("min eig(S)", mineig, ">= 0.45", mineig >= 0.45))
    resid = float(np.linalg.norm(lim.H @ lim.theta_star - lim.b_vec))
    tol = 1e-10 * float(np.linalg.norm(lim.b_vec))
    lines.append(CheckLine("|H theta* - b|", resid, f"<= {tol:.3g}", resid <= tol))
    ratios = []
    for mu in (0.05, 0.1, 0.2, 0.4):
        th_mu = lim.theta_star_mu(mu)
        ratios.append(float(np.linalg.norm(lim.theta_star - th_mu)) / mu)
    mono = all(ratios[i + 1] <= ratios[i] + 1e-9 for i in range(len(ratios) - 1))
    lines.append(CheckLine("bias ratio |th*-th*_mu|/mu nonincreasing in mu",
                           ratios[0], f"{[round(r, 4) for r in ratios]}", mono))
    return CheckReport(suite="limits", lines=lines)


def check_moments(model: BenchmarkModel, phi: FeatureMap, stream: RngStream,
                  n_samples: int = 10**6, x: float = 0.2) -> CheckReport:
    """Conditional-moment limits of both TDs at a fixed state.

    Targets: mean -> L v - r (zero at theta = theta*), dt * Var(delta|X) ->
    |sigma v'|^2, Var(delta~|X) -> (1/2) (sigma^2 v'')^2, each to 5% at the
    smallest dt, the standard-TD error decreasing along the dt grid.
    """
    theta = np.zeros(phi.d_theta)
    theta[1] = 1.0  # the benchmark value function within the feature span
    dt_grid = (1e-2, 1e-3, 1e-4)
    rep = conditional_moments(model, phi, theta, x, dt_grid, n_samples,
                              "simulator", stream.child(0))
    bellman, lim_std, lim_sto = rep.analytic_limits
    lines = []
    rel = np.abs(np.array(dt_grid) * rep.var_std - lim_std) / lim_std
    lines.append(CheckLine("dt*var(delta|X) rel err at dt=1e-4", float(rel[-1]),
                           "<= 5%", rel[-1] <= 0.05))
    lines.append(CheckLine("dt*var(delta|X) rel err decreasing", float(rel[0]),
                           f"{[round(float(r), 4) for r in rel]}",
                           bool(np.all(np.diff(rel) < 0))))
    rel_sto = abs(rep.var_stoch[-1] - lim_sto) / lim_sto
    lines.append(CheckLine("var(delta~|X) rel err at dt=1e-4", float(rel_sto),
                           f"limit {lim_sto:.6g}, <= 5%", rel_sto <= 0.05))
    z_std = abs(rep.mean_std[-1] - bellman) / rep.se_mean_std[-1]
    z_sto = abs(rep.mean_stoch[-1] - bellman) / rep.se_mean_stoch[-1]
    lines.append(CheckLine("mean(delta|X) z-score at dt=1e-4", float(z_std),
                           "<= 3", z_std <= 3.0))
    lines.append(CheckLine("mean(delta~|X) z-score at dt=1e-4", float(z_sto),
                           "<= 3", z_sto <= 3.0))
    return CheckReport(suite="moments", lines=lines)


def check_rg(model: BenchmarkModel, phi: FeatureMap, stream: RngStream,
             n_samples: int = 10**6, mu: float = 0.5) -> CheckReport:
    """Residual-gradient limits: the Hessian-term bias and its absence in F~."""
    lim = rg_limits(model, phi, mu, n_samples, stream.child(0))
    quad = grid_limits(model, phi)
    rg_quad, _tilde_quad = grid_rg_limits(model, phi, mu)
    lines = []
    se = float(np.max(lim.se_theta_rg))
    gap = float(np.linalg.norm(lim.theta_star_rg - quad.theta_star))
    lines.append(CheckLine("|theta*_rg - theta*| / se", gap / se, "> 5",
                           gap > 5 * se))
    agree = float(np.max(np.abs(lim.theta_star_rg - rg_quad)))
    tol = 5 * se
    lines.append(CheckLine("max|theta*_rg - quadrature|", agree,
                           f"<= {tol:.3g}", agree <= tol))
    lim0 = rg_limits(model, phi, 0.0, n_samples, stream.child(1))
    # when the exact value function sits in the span, the sampled normal
    # equations solve to theta* identically and only roundoff remains
    tol0 = max(5 * float(np.max(lim0.se_theta_tilde)), 1e-10)
    err0 = float(np.max(np.abs(lim0.theta_star_tilde - quad.theta_star)))
    lines.append(CheckLine("F~_0 minimiser vs theta*", err0,
                           f"<= {tol0:.3g}", err0 <= tol0))
    lim_big = rg_limits(model, phi, 1e6, 10**4, stream.child(2))
    big = float(np.linalg.norm(lim_big.theta_star_rg))
    lines.append(CheckLine("mu -> inf minimiser -> 0", big, "<= 1e-4",
                           big <= 1e-4))
    return CheckReport(suite="rg", lines=lines)


def run_suite(name: str, model: BenchmarkModel, phi: FeatureMap = None,
              stream: RngStream = None, n_samples: int = 10**6) -> CheckReport:
    phi = phi if phi is not None else fourier_features()
    stream = stream if stream is not None else RngStream(0, (905,))
    if name == "variances":
        return check_variances(stream, n_samples)
    if name == "limits":
        return check_limits(model, phi, stream, n_samples)
    if name == "moments":
        return check_moments(model, phi, stream, n_samples)
    if name == "rg":
        return check_rg(model, phi, stream, n_samples)
    raise ValueError(f"unknown check suite {name!r}; "
                     f"choose from {sorted(SUITES)}")


SUITES = ("moments", "limits", "variances", "rg")
