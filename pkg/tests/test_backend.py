"""The compiled kernels and the numpy fallback must agree.

Decision bits must match exactly; floating-point aggregates may differ by
rounding in the summation order only.
"""

import numpy as np
import pytest

from glanceauth import _kernels_py, backend

compiled = pytest.importorskip(
    "glanceauth._kernels", reason="compiled kernels were not built"
)


def test_active_backend_reported():
    assert backend.BACKEND in ("compiled", "python")


def test_resample_matches_fallback(rng):
    for _ in range(200):
        k = int(rng.integers(1, 12))
        times = np.unique(np.concatenate([[0.0], np.sort(rng.random(k)) * 0.4]))
        values = rng.standard_normal(times.size)
        fast = compiled.resample_grid(times, values, 30, 0.01)
        slow = _kernels_py.resample_grid(times, values, 30, 0.01)
        assert np.array_equal(fast, slow)


def test_resample_exact_at_grid_nodes(rng):
    times = np.arange(8) * 0.01
    values = rng.standard_normal(8)
    out = compiled.resample_grid(times, values, 30, 0.01)
    assert np.array_equal(out[:8], values)
    assert np.all(out[8:] == 0.0)


def test_moments_match_fallback_and_numpy(rng):
    for _ in range(60):
        s = int(rng.integers(2, 40))
        m = int(rng.integers(1, 31))
        x = np.ascontiguousarray(rng.standard_normal((s, m)) * rng.uniform(0.1, 50))
        fast_means, fast_cov = compiled.moments(x)
        slow_means, slow_cov = _kernels_py.moments(x)
        np.testing.assert_allclose(fast_means, slow_means, rtol=1e-12, atol=1e-12)
        np.testing.assert_allclose(fast_cov, slow_cov, rtol=1e-9, atol=1e-11)
        assert np.array_equal(fast_cov, fast_cov.T)
        reference = np.cov(x, rowvar=False, ddof=1).reshape(m, m)
        np.testing.assert_allclose(fast_cov, reference, rtol=1e-9, atol=1e-11)


def test_sweep_bits_identical(rng):
    for _ in range(200):
        f = int(rng.integers(1, 32))
        devs = np.abs(rng.standard_normal(f))
        sigmas = np.abs(rng.standard_normal(f))
        rhos = np.ascontiguousarray(rng.uniform(0.05, 1.2, 19))
        n = float(rng.integers(1, 26))
        assert np.array_equal(
            compiled.sweep_bits(devs, sigmas, n, rhos),
            _kernels_py.sweep_bits(devs, sigmas, n, rhos),
        )


def test_sweep_bits_strict_at_the_boundary():
    devs = np.array([1.0])
    sigmas = np.array([2.0])
    rhos = np.array([1.0])
    # tau = 2 / sqrt(4 * 1) = 1: equality must reject
    for impl in (compiled, _kernels_py):
        assert impl.sweep_bits(devs, sigmas, 4.0, rhos)[0, 0] == 0
