import numpy as np
import pytest
from scipy.stats import norm

from lsfm import _kernels_py, kernels

BACKENDS = ["python"] + (["cython"] if kernels.BACKEND == "cython" else [])


@pytest.mark.parametrize("backend", BACKENDS)
def test_cell_average_matches_cdf(backend, rng):
    mod = kernels.backend_module(backend)
    tau = 0.05
    dist = rng.uniform(-0.4, 0.4, 200)
    sigma = rng.uniform(1e-3, 0.3, 200)
    expect = (norm.cdf(dist + tau / 2, scale=sigma) - norm.cdf(dist - tau / 2, scale=sigma)) / tau
    got = np.asarray(mod.cell_average(dist, sigma, tau))
    assert np.allclose(got, expect, rtol=1e-10, atol=1e-12)


@pytest.mark.parametrize("backend", BACKENDS)
def test_cell_average_delta(backend):
    mod = kernels.backend_module(backend)
    tau = 0.1
    got = np.asarray(mod.cell_average(np.array([0.0, 0.1, 0.2]), np.zeros(3), tau))
    assert np.allclose(got, [10.0, 0.0, 0.0])


@pytest.mark.parametrize("backend", BACKENDS)
def test_cell_average_unit_mass(backend):
    mod = kernels.backend_module(backend)
    tau = 0.02
    offs = np.arange(-400, 401) * tau
    for s in (0.0, 1e-4, 0.01, 0.5):
        mass = np.sum(mod.cell_average(offs, np.full(offs.size, s), tau)) * tau
        assert mass == pytest.approx(1.0, abs=1e-12)


def test_unknown_backend():
    with pytest.raises(ValueError):
        kernels.backend_module("fortran")


@pytest.mark.skipif(kernels.BACKEND != "cython", reason="compiled kernels not built")
def test_backends_agree(rng):
    N, tau = 40, 2 / 41
    sigma = np.abs(rng.normal(0, 0.05, (N, N)))
    att = rng.uniform(0, 1, (N, N))
    att[:, :5] = 0.0
    weight = rng.uniform(0, 1, (N, N))
    fast = kernels.backend_module("cython")
    for l in (0, 7, N - 1):
        a = _kernels_py.field_values(sigma[l], att[l], l, N, tau, 6.0)
        b = np.asarray(fast.field_values(sigma[l], att[l], l, N, tau, 6.0))
        assert np.allclose(a, b, rtol=1e-13, atol=1e-15)
    pa = _kernels_py.assemble_side(sigma, att, weight, tau, 6.0)
    pb = fast.assemble_side(sigma, att, weight, tau, 6.0)
    assert np.array_equal(pa[1], np.asarray(pb[1]))
    assert np.array_equal(pa[2], np.asarray(pb[2]))
    assert np.allclose(pa[0], np.asarray(pb[0]), rtol=1e-13)


def test_field_values_unreached_row():
    v = _kernels_py.field_values(np.zeros(5), np.zeros(5), 2, 5, 0.3, 6.0)
    assert not v.any()
