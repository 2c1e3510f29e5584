import math
from types import SimpleNamespace

import numpy as np
import pytest

from ctpe import (RngStream, conditional_moments, ell_loss, ell_matrix_mc,
                  estimate_limits, rg_limits, trace_diagnostics, value,
                  value_grad_x)
from ctpe.features import FeatureMap, fourier_features
from ctpe.oracle import RunningMoments
from ctpe.quadrature import grid_ell_matrix, grid_limits, grid_rg_limits

from test_td import exact_conditional_moments

# quadrature values for the benchmark (rho = 1, sigma^2 = 0.1), frozen from
# the spectrally-accurate grid rule; H is symmetric for this gradient-drift
# constant-diffusion model
H_QUAD = np.array([
    [1.0, 0.0, 0.2679491924311244],
    [0.0, 1.5219226266923775, 0.0],
    [0.2679491924311244, 0.0, 1.4519982535255030],
])
B_QUAD = np.array([0.0, 1.5219226266923740, 0.0])
THETA_STAR = np.array([0.0, 1.0, 0.0])
MIN_EIG_S = 0.8754675660980746


def test_grid_limits_frozen_values(benchmark, fourier):
    lim = grid_limits(benchmark, fourier)
    np.testing.assert_allclose(lim.H, H_QUAD, atol=1e-12)
    np.testing.assert_allclose(lim.b_vec, B_QUAD, atol=1e-12)
    np.testing.assert_allclose(lim.theta_star, THETA_STAR, atol=1e-12)
    assert np.linalg.eigvalsh(lim.S)[0] == pytest.approx(MIN_EIG_S, abs=1e-12)
    np.testing.assert_allclose(lim.A, np.zeros((3, 3)), atol=1e-12)
    # analytic cross-check: E_m[cos(2 pi x)] = 2 - sqrt(3) appears in H[0, 2]
    assert lim.H[0, 2] == pytest.approx(2.0 - math.sqrt(3.0), abs=1e-13)


def test_estimate_limits_against_quadrature(benchmark, fourier):
    lim = estimate_limits(benchmark, fourier, 2 * 10**5, RngStream(70, (0,)))
    assert np.max(np.abs(lim.theta_star - THETA_STAR)) < 2e-2
    np.testing.assert_array_less(np.abs(lim.H - H_QUAD), 5 * lim.se_H + 1e-12)
    np.testing.assert_array_less(np.abs(lim.b_vec - B_QUAD), 5 * lim.se_b + 1e-12)
    # exact split and solver residual
    np.testing.assert_allclose(lim.S, (lim.H + lim.H.T) / 2, atol=0)
    np.testing.assert_allclose(lim.A, (lim.H - lim.H.T) / 2, atol=0)
    resid = np.linalg.norm(lim.H @ lim.theta_star - lim.b_vec)
    assert resid <= 1e-10 * np.linalg.norm(lim.b_vec)
    assert np.linalg.eigvalsh(lim.S)[0] > 0.45


def test_estimate_limits_deterministic(benchmark, fourier):
    a = estimate_limits(benchmark, fourier, 10**4, RngStream(71, (0,)))
    b = estimate_limits(benchmark, fourier, 10**4, RngStream(71, (0,)))
    np.testing.assert_array_equal(a.H, b.H)
    np.testing.assert_array_equal(a.theta_star, b.theta_star)


def test_estimate_limits_se_scaling(benchmark, fourier):
    # doubling the sample count shrinks standard errors by about sqrt(2)
    a = estimate_limits(benchmark, fourier, 10**5, RngStream(72, (0,)))
    b = estimate_limits(benchmark, fourier, 2 * 10**5, RngStream(72, (1,)))
    se_a = np.concatenate([a.se_H.ravel(), a.se_b])
    se_b_ = np.concatenate([b.se_H.ravel(), b.se_b])
    nz = se_b_ > 0  # the constant-feature H entry is deterministic
    ratios = se_a[nz] / se_b_[nz]
    assert np.mean(ratios) == pytest.approx(math.sqrt(2.0), rel=0.10)


def test_estimate_limits_bias_ratio_monotone(benchmark, fourier):
    lim = estimate_limits(benchmark, fourier, 2 * 10**5, RngStream(73, (0,)))
    mus = (0.05, 0.1, 0.2, 0.4)
    ratios = [np.linalg.norm(lim.theta_star - lim.theta_star_mu(mu)) / mu
              for mu in mus]
    assert all(np.isfinite(ratios))
    assert all(ratios[i + 1] <= ratios[i] + 1e-9 for i in range(len(mus) - 1))


def _degenerate_features():
    base = fourier_features()

    def dup(f):
        def inner(x):
            out = np.asarray(f(x)).copy()
            out[..., 2] = out[..., 1]
            return out
        return inner

    return FeatureMap(d=1, d_theta=3, eval=dup(base.eval),
                      jacobian=dup(base.jacobian), hessian=dup(base.hessian),
                      name="degenerate")


def test_estimate_limits_singular_features(benchmark):
    with pytest.raises(np.linalg.LinAlgError, match="singular value"):
        estimate_limits(benchmark, _degenerate_features(), 10**4,
                        RngStream(74, (0,)))


def test_ell_loss_zero_and_homogeneity(benchmark, fourier):
    theta_ref = np.array([0.1, 0.8, -0.3])
    assert ell_loss(theta_ref, theta_ref, benchmark, fourier, 10**4,
                    RngStream(75, (0,))) == 0.0
    u = np.array([0.2, -0.1, 0.4])
    l1 = ell_loss(theta_ref + u, theta_ref, benchmark, fourier, 10**4,
                  RngStream(75, (1,)))
    l2 = ell_loss(theta_ref + 2 * u, theta_ref, benchmark, fourier, 10**4,
                  RngStream(75, (1,)))
    assert l2 == pytest.approx(4 * l1, rel=1e-12)


def test_ell_loss_two_estimator_agreement(benchmark, fourier):
    # quadratic-form route vs direct Monte Carlo of the defining expectation
    theta, theta_ref = np.zeros(3), THETA_STAR
    n = 2 * 10**5
    val_form = ell_loss(theta, theta_ref, benchmark, fourier, n,
                        RngStream(76, (0,)))
    x = np.asarray(benchmark.inverse_cdf(RngStream(76, (1,)).uniform(n)))
    diff_v = value(theta, fourier, x) - value(theta_ref, fourier, x)
    diff_g = value_grad_x(theta, fourier, x) - value_grad_x(theta_ref, fourier, x)
    sig = np.asarray(benchmark.diffusion(x))
    direct = benchmark.rho * diff_v**2 + 0.5 * (sig * diff_g) ** 2
    se_direct = direct.std(ddof=1) / math.sqrt(n)
    # the two estimators share the integrand's variance scale
    assert abs(val_form - direct.mean()) < 3 * se_direct
    # both sit near the quadrature value e2' S_ell e2
    s_ell = grid_ell_matrix(benchmark, fourier)
    target = float(theta_ref @ s_ell @ theta_ref)
    assert val_form == pytest.approx(target, rel=0.02)


def test_ell_matrix_matches_quadrature(benchmark, fourier):
    mc = ell_matrix_mc(benchmark, fourier, 2 * 10**5, RngStream(77, (0,)))
    np.testing.assert_allclose(mc, grid_ell_matrix(benchmark, fourier), atol=2e-2)


def test_conditional_moments_against_closed_form(benchmark, fourier):
    theta = np.array([0.3, 1.2, -0.7])
    x = 0.2
    dt_grid = (1e-2, 1e-3)
    rep = conditional_moments(benchmark, fourier, theta, x, dt_grid, 2 * 10**5,
                              "simulator", RngStream(78, (0,)))
    for i, dt in enumerate(dt_grid):
        mean_e, var_std_e, var_sto_e = exact_conditional_moments(
            benchmark, theta, x, dt)
        assert abs(rep.mean_std[i] - mean_e) < 5 * rep.se_mean_std[i]
        assert abs(rep.mean_stoch[i] - mean_e) < 5 * rep.se_mean_stoch[i]
        assert rep.var_std[i] == pytest.approx(var_std_e, rel=0.03)
        assert rep.var_stoch[i] == pytest.approx(var_sto_e, rel=0.03)


def test_conditional_moments_analytic_limits(benchmark, fourier):
    theta = np.array([0.0, 1.0, 0.0])
    x = 0.2
    rep = conditional_moments(benchmark, fourier, theta, x, (1e-3,), 10**4,
                              "simulator", RngStream(79, (0,)))
    bellman, lim_std, lim_sto = rep.analytic_limits
    w = 2 * np.pi
    assert bellman == pytest.approx(0.0, abs=1e-12)  # L V = r
    assert lim_std == pytest.approx(0.1 * (w * math.cos(w * x)) ** 2, rel=1e-12)
    assert lim_sto == pytest.approx(
        0.5 * (0.1 * w**2 * math.sin(w * x)) ** 2, rel=1e-12)


def test_conditional_moments_variance_limits(benchmark, fourier):
    # dt Var(delta|X) -> |sigma v'|^2 with shrinking relative error, and
    # Var(delta~|X) stays bounded at its quadratic-form limit
    theta = np.array([0.0, 1.0, 0.0])
    dt_grid = (1e-2, 1e-3, 1e-4)
    rep = conditional_moments(benchmark, fourier, theta, 0.2, dt_grid, 2 * 10**5,
                              "simulator", RngStream(80, (0,)))
    _, lim_std, lim_sto = rep.analytic_limits
    rel = np.abs(np.array(dt_grid) * rep.var_std - lim_std) / lim_std
    assert np.all(np.diff(rel) < 0)
    assert rel[-1] < 0.05
    assert rep.var_stoch[-1] == pytest.approx(lim_sto, rel=0.05)


def test_rg_limits_against_quadrature(benchmark, fourier):
    mu = 0.5
    mc = rg_limits(benchmark, fourier, mu, 2 * 10**5, RngStream(81, (0,)))
    rg_q, tilde_q = grid_rg_limits(benchmark, fourier, mu)
    assert rg_q[1] == pytest.approx(0.5570641975068674, abs=1e-12)
    assert tilde_q[1] == pytest.approx(0.9119302676409990, abs=1e-12)
    np.testing.assert_array_less(np.abs(mc.theta_star_rg - rg_q),
                                 5 * mc.se_theta_rg + 1e-12)
    np.testing.assert_array_less(np.abs(mc.theta_star_tilde - tilde_q),
                                 5 * mc.se_theta_tilde + 1e-12)
    # the Hessian term biases the minimiser away from theta*
    gap = np.linalg.norm(mc.theta_star_rg - THETA_STAR)
    assert gap > 5 * np.max(mc.se_theta_rg)


def test_rg_limits_unregularised_tilde_recovers_theta_star(benchmark, fourier):
    mc = rg_limits(benchmark, fourier, 0.0, 2 * 10**5, RngStream(82, (0,)))
    np.testing.assert_array_less(np.abs(mc.theta_star_tilde - THETA_STAR),
                                 5 * mc.se_theta_tilde + 1e-12)


def test_rg_limits_large_mu(benchmark, fourier):
    mc = rg_limits(benchmark, fourier, 1e6, 10**4, RngStream(83, (0,)))
    assert np.linalg.norm(mc.theta_star_rg) < 1e-4


def test_rg_limits_degenerate_features(benchmark):
    with pytest.raises(np.linalg.LinAlgError):
        rg_limits(benchmark, _degenerate_features(), 0.0, 10**4,
                  RngStream(84, (0,)))


def test_trace_diagnostics_identity():
    lim = SimpleNamespace(H=np.eye(3), S=np.eye(3))
    rep = trace_diagnostics(lim)
    assert rep.tr_h_hinv_t == pytest.approx(3.0)
    assert rep.tr_s == pytest.approx(3.0)
    np.testing.assert_allclose(rep.spectrum_s, [1.0, 1.0, 1.0])


def test_trace_diagnostics_symmetric_h_gives_dimension(benchmark, fourier):
    lim = grid_limits(benchmark, fourier)
    rep = trace_diagnostics(lim, model=benchmark)
    assert rep.tr_h_hinv_t == pytest.approx(3.0, abs=1e-9)
    assert np.all(rep.eig_h.real > 0)
    assert rep.spectral_ok is True
    # benchmark closed forms: b + (sigma^2/2) d(ln m)/dx = 2 b
    x = np.linspace(-0.5, 0.5, 4096, endpoint=False)
    sup = 2 * np.max(np.abs(benchmark.drift(x)))
    bound = math.sqrt(2.0 / (benchmark.rho * 0.1)) * sup
    assert rep.spectral_bound == pytest.approx(bound, rel=1e-3)


def test_trace_diagnostics_singular():
    lim = SimpleNamespace(H=np.zeros((2, 2)), S=np.zeros((2, 2)))
    with pytest.raises(np.linalg.LinAlgError):
        trace_diagnostics(lim)


def test_running_moments_matches_numpy():
    gen = np.random.default_rng(0)
    chunks = [gen.standard_normal(n) * 3.0 + 1.0 for n in (7, 100, 1, 55)]
    acc = RunningMoments()
    for c in chunks:
        acc.update(c)
    full = np.concatenate(chunks)
    assert acc.n == full.size
    assert acc.mean == pytest.approx(full.mean(), abs=1e-12)
    assert acc.variance == pytest.approx(full.var(ddof=1), rel=1e-12)
