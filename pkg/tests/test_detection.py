import numpy as np
import pytest
from scipy import integrate

from lsfm.detection import (MeasurementSet, cumulative_attenuation, detection_weight, measure_all,
                            measure_height, measure_line)
from lsfm.excitation import PencilBeam, excitation_field
from lsfm.grid import make_grid
from lsfm.phantom import CoefficientMaps, PhantomSpec, make_phantom


def test_cumulative_attenuation_constant():
    g = make_grid(9)
    D = cumulative_attenuation(np.ones(g.shape), g)
    assert np.allclose(D, (np.arange(1, 10) * g.tau_y)[:, None] * np.ones(9))
    assert not cumulative_attenuation(np.zeros(g.shape), g).any()


def test_cumulative_attenuation_telescopes(rng):
    g = make_grid(12)
    a = rng.random(g.shape)
    D = cumulative_attenuation(a, g)
    assert np.allclose(np.diff(D, axis=0), a[1:] * g.tau_y)
    assert np.allclose(D[0], a[0] * g.tau_y)


def test_unweighted_convention(rng):
    g = make_grid(12)
    a = rng.random(g.shape)
    assert np.allclose(cumulative_attenuation(a, g, weighted=False), np.cumsum(a, axis=0))


def test_measure_line_direct_sum(small_grid, small_phantom):
    g = small_grid
    maps, mask = small_phantom
    f = excitation_field(maps, mask, 16, "left", g)
    D = cumulative_attenuation(maps.a, g)
    for k in (5, 16, 25):
        direct = sum(maps.mu[i, k] * f.v[i, k] * np.exp(-D[i, k]) * g.tau_y for i in range(g.N))
        assert measure_line(maps.mu, f, D, k, g) == pytest.approx(direct, rel=1e-13)


def test_measure_line_zero_density(small_grid, small_phantom):
    maps, mask = small_phantom
    f = excitation_field(maps, mask, 16, "left", small_grid)
    D = cumulative_attenuation(maps.a, small_grid)
    assert measure_line(np.zeros(small_grid.shape), f, D, 10, small_grid) == 0


def test_measure_line_normalization():
    # a = 0, mu = 1, lambda = 0: the reading is the column mass of the beam
    g = make_grid(65)
    mask = np.ones(g.shape, bool)
    z = np.zeros(g.shape)
    maps = CoefficientMaps(mu=np.ones(g.shape), lam=z, a=z, psi=np.full(g.shape, 0.01))
    f = excitation_field(maps, mask, 32, "left", g)
    D = cumulative_attenuation(maps.a, g)
    for k in range(g.N):
        p = measure_line(maps.mu, f, D, k, g)
        assert p == pytest.approx(np.sum(f.v[:, k]) * g.tau_y, rel=1e-14)
        assert p == pytest.approx(1.0, abs=1e-3)


def _smooth_maps(g):
    X, Y = g.meshgrid()
    lam = 0.5 + 0.3 * np.sin(X) * (1 + 0.2 * Y)
    mu = 1.0 + 0.5 * np.cos(2 * Y) * np.sin(X)
    return CoefficientMaps.proportional(mu, lam, c_hat=0.8, c_tilde=0.6)


def _continuous_reading(s, h):
    lam = lambda x, y: 0.5 + 0.3 * np.sin(x) * (1 + 0.2 * y)
    mu = lambda x, y: 1.0 + 0.5 * np.cos(2 * y) * np.sin(x)
    beam = PencilBeam(lambda x: 0.6 * lam(x, h), lambda x: lam(x, h), x_entry=0.0, h=h)
    a2, la = beam.alpha_sq(s), beam.log_attenuation(s)

    def integrand(y):
        att = integrate.quad(lambda t: 0.8 * lam(s, t), y, 1.0, epsabs=1e-14)[0]
        v = np.exp(-la) * np.exp(-((y - h) ** 2) / (2 * a2)) / np.sqrt(2 * np.pi * a2)
        return mu(s, y) * v * np.exp(-att)

    return integrate.quad(integrand, -1, 1, points=[h], epsabs=1e-13, limit=200)[0]


def test_discrete_vs_continuous_first_order():
    s, h = 1.0, 0.0
    exact = _continuous_reading(s, h)
    errs = []
    for N in (33, 65, 129):
        g = make_grid(N)
        maps = _smooth_maps(g)
        mask = np.ones(g.shape, bool)
        row = measure_height(maps, mask, g.row_of(h), "left", g)
        errs.append(abs(row[g.column_of(s)] - exact) / exact)
    assert errs[2] < errs[1] < errs[0]
    assert errs[2] < 3 * make_grid(129).tau
    assert errs[1] / errs[2] > 1.5


def test_measure_all_matches_per_height(small_grid, small_phantom):
    g = small_grid
    maps, mask = small_phantom
    meas = measure_all(maps, mask, g)
    for l in (3, 16, 29):
        assert np.allclose(meas.left[l], measure_height(maps, mask, l, "left", g), rtol=1e-12, atol=1e-15)
        assert np.allclose(meas.right[l], measure_height(maps, mask, l, "right", g), rtol=1e-12, atol=1e-15)


def test_symmetric_phantom_right_mirrors_left():
    g = make_grid(33)
    maps, mask = make_phantom(PhantomSpec(name="uniform_disk", lambda_bg=0.7), g)
    # uniform density and attenuation are left-right symmetric, detection is not affected
    meas = measure_all(maps, mask, g)
    assert np.allclose(meas.right, meas.left[:, ::-1], rtol=1e-12, atol=1e-14)


def test_zero_density(small_grid, small_phantom):
    maps, mask = small_phantom
    meas = measure_all(maps.with_mu(np.zeros(small_grid.shape)), mask, small_grid)
    assert not meas.left.any() and not meas.right.any()


def test_activation_constant_scales(small_grid, small_phantom):
    maps, mask = small_phantom
    from dataclasses import replace
    m1 = measure_all(maps, mask, small_grid)
    m2 = measure_all(replace(maps, c=2.0), mask, small_grid)
    assert np.array_equal(m2.left, 2 * m1.left)
    assert np.array_equal(m2.right, 2 * m1.right)


def test_linearity_in_density(small_grid, small_phantom, rng):
    maps, mask = small_phantom
    mu1, mu2 = rng.random(small_grid.shape), rng.random(small_grid.shape)
    a = measure_all(maps, mask, small_grid, mu=mu1)
    b = measure_all(maps, mask, small_grid, mu=mu2)
    c = measure_all(maps, mask, small_grid, mu=mu1 + mu2)
    assert np.allclose(c.left, a.left + b.left, rtol=1e-13, atol=1e-15)
    assert np.allclose(c.right, a.right + b.right, rtol=1e-13, atol=1e-15)


def test_more_absorption_never_brightens(small_grid, small_phantom, rng):
    from dataclasses import replace
    maps, mask = small_phantom
    base = measure_all(maps, mask, small_grid)
    for _ in range(5):
        i, j = rng.integers(0, small_grid.N, 2)
        a = maps.a.copy()
        a[i, j] += 0.5
        more = measure_all(replace(maps, a=a), mask, small_grid)
        assert np.all(more.left <= base.left + 1e-15)
        assert np.all(more.right <= base.right + 1e-15)


def test_nonnegative_and_threaded(small_grid, small_phantom):
    maps, mask = small_phantom
    serial = measure_all(maps, mask, small_grid)
    threaded = measure_all(maps, mask, small_grid, workers=2)
    assert serial.left.min() >= 0 and serial.right.min() >= 0
    assert np.array_equal(serial.left, threaded.left)
    assert np.array_equal(serial.right, threaded.right)


def test_bad_density_shape(small_grid, small_phantom):
    maps, mask = small_phantom
    with pytest.raises(ValueError):
        measure_all(maps, mask, small_grid, mu=np.ones((4, 4)))


def test_measurement_set_shapes():
    with pytest.raises(ValueError):
        MeasurementSet(np.zeros((3, 3)), np.zeros((4, 4)))


def test_detection_weight(small_grid, small_phantom):
    maps, _ = small_phantom
    W = detection_weight(maps, small_grid)
    D = cumulative_attenuation(maps.a, small_grid)
    assert np.allclose(W, np.exp(-D) * small_grid.tau_y)
