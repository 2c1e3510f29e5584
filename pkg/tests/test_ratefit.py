import math

import numpy as np
import pytest

from ctpe import fit_rate
from ctpe.learn import log_grid


def test_exact_inverse_power_law():
    ks = np.array(log_grid(10**5), dtype=float)
    fit = fit_rate(ks, 7.0 / ks)
    assert fit.slope == pytest.approx(-1.0, abs=1e-9)
    assert fit.intercept == pytest.approx(math.log(7.0), abs=1e-9)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12)


def test_exact_two_thirds_law():
    ks = np.array(log_grid(10**4), dtype=float)
    fit = fit_rate(ks, 3.0 * ks ** (-2.0 / 3.0))
    assert fit.slope == pytest.approx(-2.0 / 3.0, abs=1e-9)


def test_constant_curve_has_zero_slope():
    ks = np.array(log_grid(1000), dtype=float)
    fit = fit_rate(ks, np.full_like(ks, 0.37))
    assert fit.slope == pytest.approx(0.0, abs=1e-12)


def test_window_selects_points():
    ks = np.array(log_grid(10**4), dtype=float)
    # different laws inside and outside the window
    means = np.where(ks < 100, 5.0 / ks**2, 2.0 / ks)
    fit = fit_rate(ks, means, window=(100, 10**4))
    assert fit.slope == pytest.approx(-1.0, abs=1e-9)
    assert fit.window == (100.0, 10**4)
    assert fit.n_points == int(((ks >= 100) & (ks <= 10**4)).sum())


def test_default_window_is_last_two_decades():
    ks = np.array(log_grid(10**4), dtype=float)
    fit = fit_rate(ks, 1.0 / ks)
    assert fit.window == (100.0, 10**4)


def test_too_few_points():
    with pytest.raises(ValueError, match="need at least 5"):
        fit_rate([1, 10, 100], [1.0, 0.1, 0.01])


def test_nonpositive_values_rejected():
    ks = np.array(log_grid(1000), dtype=float)
    means = 1.0 / ks
    means[3] = 0.0
    with pytest.raises(ValueError, match="nonpositive"):
        fit_rate(ks, means, window=(1, 1000))


def test_shape_mismatch():
    with pytest.raises(ValueError):
        fit_rate([1, 2, 3], [1.0, 2.0])
