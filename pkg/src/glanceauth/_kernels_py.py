"""Pure-numpy implementations of the hot numeric kernels.

These are the reference semantics; glanceauth._kernels is a compiled drop-in
replacement built at install time when a C toolchain is available. Callers
go through glanceauth.backend, which picks one of the two at import.
"""

import numpy as np


def resample_grid(times, values, m, t_int):
    """Sample the polyline (times, values) at t = k*t_int for k = 0..m-1.

    Times must be strictly increasing and rebased so times[0] == 0. Grid
    points past the last input time map to 0.
    """
    grid = np.arange(m, dtype=np.float64) * t_int
    return np.interp(grid, times, values, right=0.0)


def moments(x):
    """Column means and unbiased covariance of the rows of x, shape (s, m), s >= 2.

    The covariance is symmetrized so cov == cov.T holds exactly.
    """
    x = np.asarray(x, dtype=np.float64)
    s = x.shape[0]
    means = x.mean(axis=0)
    xc = x - means
    cov = xc.T @ xc / (s - 1)
    return means, (cov + cov.T) / 2.0


def sweep_bits(devs, sigmas, n, rhos):
    """Per-feature accept bits at each rho.

    bits[r, f] = 1 iff devs[f] < sigmas[f] / sqrt(n * rhos[r]), strictly.
    Returns a uint8 array of shape (len(rhos), len(devs)).
    """
    taus = sigmas[None, :] / np.sqrt(n * np.asarray(rhos, dtype=np.float64))[:, None]
    return (np.asarray(devs, dtype=np.float64)[None, :] < taus).astype(np.uint8)
