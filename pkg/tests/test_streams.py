import itertools

import numpy as np
import pytest

from ctpe import RngStream, rademacher_rotated


def test_same_seed_path_reproduces():
    a = RngStream(1, (0,)).gaussian(16)
    b = RngStream(1, (0,)).gaussian(16)
    np.testing.assert_array_equal(a, b)


def test_different_paths_differ():
    a = RngStream(1, (0,)).gaussian(16)
    b = RngStream(1, (1,)).gaussian(16)
    c = RngStream(2, (0,)).gaussian(16)
    assert not np.array_equal(a, b)
    assert not np.array_equal(a, c)


def test_child_extends_path():
    s = RngStream(7).child(3, 1)
    assert s.path == (3, 1)
    np.testing.assert_array_equal(s.uniform(4), RngStream(7, (3, 1)).uniform(4))


def test_gaussian_moments():
    # CLT bounds: mean within 3/sqrt(N), variance within ~1%
    z = RngStream(5, (0,)).gaussian(10**6)
    assert abs(z.mean()) < 0.005
    assert abs(z.var() - 1.0) < 0.01


def test_draw_size_validation():
    s = RngStream(0)
    for fn in (s.gaussian, s.uniform, s.rademacher):
        with pytest.raises(ValueError):
            fn(0)


def test_rademacher_values():
    r = RngStream(3, (0,)).rademacher(1000)
    assert set(np.unique(r)) == {-1.0, 1.0}
    assert abs(r.mean()) < 0.1


def test_rademacher_rotated_1d():
    h = np.array([[-3.0]])
    for i in range(20):
        xi = rademacher_rotated(h, RngStream(0, (i,)))
        assert xi[0] in (-1.0, 1.0)
        assert xi @ h @ xi == -3.0


def test_rademacher_rotated_zero_matrix():
    h = np.zeros((3, 3))
    xi = rademacher_rotated(h, RngStream(0, (0,)))
    assert xi @ h @ xi == 0.0


def test_rademacher_rotated_diagonal_quadratic_form():
    # brute force over the 4 sign patterns: xi' diag(2,5) xi = 7 always
    h = np.diag([2.0, 5.0])
    for signs in itertools.product((-1.0, 1.0), repeat=2):
        z = np.array(signs)
        assert z @ h @ z == pytest.approx(7.0)
    for i in range(50):
        xi = rademacher_rotated(h, RngStream(1, (i,)))
        assert xi @ h @ xi == pytest.approx(7.0, abs=1e-12)


def test_rademacher_rotated_general_symmetric():
    gen = np.random.default_rng(0)
    a = gen.standard_normal((4, 4))
    h = (a + a.T) / 2
    tr = np.trace(h)
    vals = [rademacher_rotated(h, RngStream(2, (i,))) @ h
            @ rademacher_rotated(h, RngStream(2, (i,))) for i in range(200)]
    np.testing.assert_allclose(vals, tr, atol=1e-10)
    # identity covariance of the rotated noise
    xis = np.stack([rademacher_rotated(h, RngStream(3, (i,))) for i in range(4000)])
    cov = xis.T @ xis / len(xis)
    np.testing.assert_allclose(cov, np.eye(4), atol=0.1)


def test_rademacher_rotated_rejects_non_symmetric():
    with pytest.raises(ValueError):
        rademacher_rotated(np.array([[0.0, 1.0], [0.0, 0.0]]), RngStream(0))
    with pytest.raises(ValueError):
        rademacher_rotated(np.ones((2, 3)), RngStream(0))


def test_gaussian_quadratic_form_identities():
    # Var(xi.g) = |g|^2 and Var(xi'Axi - trA) = 2 tr(A^2), to 2% at N = 1e6
    gen = np.random.default_rng(7)
    g = gen.standard_normal(3)
    a = gen.standard_normal((3, 3))
    a = (a + a.T) / 2
    xi = RngStream(11, (0,)).generator().standard_normal((10**6, 3))
    var_lin = (xi @ g).var(ddof=1)
    assert abs(var_lin - g @ g) <= 0.02 * (g @ g)
    quad = np.einsum("ni,ij,nj->n", xi, a, xi) - np.trace(a)
    target = 2 * np.trace(a @ a)
    assert abs(quad.var(ddof=1) - target) <= 0.02 * target
