import numpy as np
import pytest

from ctpe.config import ExperimentConfig
from ctpe.experiment import (CSV_HEADER, build_experiment, read_curve_csv,
                             run_experiment, write_curve_csv)
from ctpe.learn import log_grid
from ctpe.quadrature import grid_limits, grid_rg_limits

BASE = {
    "model.rho": "1.0", "model.sigma2": "0.1",
    "variant": "stochastic", "lr.c": "2.0", "lr.a": "1.0",
    "dt.c": "1.4142135623730951", "dt.a": "0.5",
    "k_max": "2000", "seeds": "6", "master_seed": "11",
}


def _cfg(**overrides):
    return ExperimentConfig.from_mapping({**BASE, **overrides})


def test_run_experiment_rows_follow_log_grid(tmp_path):
    cfg = _cfg(**{"out.csv": str(tmp_path / "c.csv")})
    res = run_experiment(cfg)
    assert [r[0] for r in res.rows] == log_grid(2000)
    assert all(r[3] == 6 for r in res.rows)
    assert (tmp_path / "c.csv").exists()


def test_csv_schema_and_roundtrip(tmp_path):
    cfg = _cfg()
    res = run_experiment(cfg)
    path = tmp_path / "curve.csv"
    write_curve_csv(res.rows, str(path))
    text = path.read_text().splitlines()
    assert text[0] == CSV_HEADER == "k,metric_mean,metric_std,n_ok_seeds"
    back = read_curve_csv(str(path))
    assert back == [(k, m, s, n) for k, m, s, n in res.rows]


def test_sweep_determinism_bytes(tmp_path):
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    run_experiment(_cfg(**{"out.csv": str(p1)}))
    run_experiment(_cfg(**{"out.csv": str(p2)}))
    assert p1.read_bytes() == p2.read_bytes()


def test_sweep_thread_invariance(tmp_path, monkeypatch):
    p1, p2 = tmp_path / "a.csv", tmp_path / "b.csv"
    monkeypatch.setenv("CTPE_THREADS", "1")
    run_experiment(_cfg(**{"out.csv": str(p1)}))
    monkeypatch.setenv("CTPE_THREADS", "5")
    run_experiment(_cfg(**{"out.csv": str(p2)}))
    assert p1.read_bytes() == p2.read_bytes()


def test_fit_window_from_config():
    cfg = _cfg(**{"fit.k_lo": "100", "fit.k_hi": "2000"})
    res = run_experiment(cfg)
    assert res.fit is not None
    assert res.fit.window == (100.0, 2000.0)


def test_all_diverged_is_an_error():
    cfg = _cfg(variant="standard",
               **{"lr.family": "constant", "lr.c": "0.1",
                  "dt.family": "constant", "dt.c": "0.001",
                  "k_max": "2000", "seeds": "3"})
    with pytest.raises(RuntimeError, match="all seeds diverged"):
        run_experiment(cfg)


def test_partial_divergence_reported():
    cfg = _cfg(variant="standard",
               **{"lr.family": "constant", "lr.c": "0.02",
                  "dt.family": "constant", "dt.c": "0.001",
                  "k_max": "150", "seeds": "8", "master_seed": "99"})
    res = run_experiment(cfg)
    assert 0 < res.n_diverged < 8
    assert res.rows[-1][3] == 8 - res.n_diverged


def test_references_resolution(benchmark, fourier):
    lim = grid_limits(benchmark, fourier)
    # td0, mu = 0: theta* itself
    _, _, _, (ref, ell, theta0) = build_experiment(_cfg())
    np.testing.assert_allclose(ref, lim.theta_star, atol=1e-12)
    assert ell is None
    np.testing.assert_array_equal(theta0, np.zeros(3))
    # mu > 0: the regularised limit
    _, _, _, (ref, _, _) = build_experiment(_cfg(mu="0.25"))
    np.testing.assert_allclose(ref, lim.theta_star_mu(0.25), atol=1e-12)
    # rg: the residual-gradient minimiser
    _, _, _, (ref, _, _) = build_experiment(_cfg(algorithm="rg", mu="0.5"))
    rg_ref, _ = grid_rg_limits(benchmark, fourier, 0.5)
    np.testing.assert_allclose(ref, rg_ref, atol=1e-12)
    # explicit override and star start
    cfg = _cfg(theta_ref="0,1,0", theta0="star", metric="ell_loss",
               averaging="on")
    _, _, _, (ref, ell, theta0) = build_experiment(cfg)
    np.testing.assert_array_equal(ref, [0.0, 1.0, 0.0])
    assert ell is not None
    np.testing.assert_allclose(theta0, lim.theta_star, atol=1e-12)


def test_read_curve_csv_errors(tmp_path):
    p = tmp_path / "bad.csv"
    p.write_text("")
    with pytest.raises(ValueError, match="empty"):
        read_curve_csv(str(p))
    p.write_text("k,metric\n")
    with pytest.raises(ValueError, match=":1"):
        read_curve_csv(str(p))
    p.write_text(CSV_HEADER + "\n")
    with pytest.raises(ValueError, match="no data rows"):
        read_curve_csv(str(p))
    p.write_text(CSV_HEADER + "\n1,0.5,0.1\n")
    with pytest.raises(ValueError, match=":2"):
        read_curve_csv(str(p))
    p.write_text(CSV_HEADER + "\n1,abc,0.1,4\n")
    with pytest.raises(ValueError, match=":2"):
        read_curve_csv(str(p))
