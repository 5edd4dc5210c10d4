"""Compiled numeric kernels: grid resampling, moment fitting, threshold sweeps.

Semantics mirror glanceauth._kernels_py exactly; keep the two in sync.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport sqrt

cnp.import_array()


def resample_grid(double[::1] times, double[::1] values, Py_ssize_t m, double t_int):
    cdef cnp.ndarray[cnp.float64_t, ndim=1] out = np.zeros(m, dtype=np.float64)
    cdef double[::1] o = out
    cdef Py_ssize_t k, j = 0
    cdef Py_ssize_t last = times.shape[0] - 1
    cdef double t, slope
    for k in range(m):
        t = k * t_int
        if t > times[last]:
            o[k] = 0.0
            continue
        while j < last and times[j + 1] <= t:
            j += 1
        if t == times[j] or j == last:
            o[k] = values[j]
        else:
            slope = (values[j + 1] - values[j]) / (times[j + 1] - times[j])
            o[k] = slope * (t - times[j]) + values[j]
    return out


def moments(x):
    arr = np.ascontiguousarray(x, dtype=np.float64)
    if arr.shape[0] >= 32:
        # BLAS beats the explicit loop once the row count amortizes the
        # numpy call overhead
        s = arr.shape[0]
        means = arr.mean(axis=0)
        xc = arr - means
        cov = xc.T @ xc / (s - 1)
        return means, (cov + cov.T) / 2.0
    return _loop_moments(arr)


cdef _loop_moments(double[:, ::1] x):
    cdef Py_ssize_t s = x.shape[0]
    cdef Py_ssize_t m = x.shape[1]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] means = np.zeros(m, dtype=np.float64)
    cdef cnp.ndarray[cnp.float64_t, ndim=2] cov = np.zeros((m, m), dtype=np.float64)
    cdef double[::1] mu = means
    cdef double[:, ::1] c = cov
    cdef Py_ssize_t i, j, k
    cdef double acc, denom = s - 1
    for j in range(m):
        acc = 0.0
        for i in range(s):
            acc += x[i, j]
        mu[j] = acc / s
    for j in range(m):
        for k in range(j, m):
            acc = 0.0
            for i in range(s):
                acc += (x[i, j] - mu[j]) * (x[i, k] - mu[k])
            acc /= denom
            c[j, k] = acc
            c[k, j] = acc
    return means, cov


def sweep_bits(double[::1] devs, double[::1] sigmas, double n, double[::1] rhos):
    cdef Py_ssize_t nr = rhos.shape[0]
    cdef Py_ssize_t nf = devs.shape[0]
    cdef cnp.ndarray[cnp.uint8_t, ndim=2] bits = np.zeros((nr, nf), dtype=np.uint8)
    cdef cnp.uint8_t[:, ::1] b = bits
    cdef Py_ssize_t r, f
    cdef double root
    for r in range(nr):
        root = sqrt(n * rhos[r])
        for f in range(nf):
            if devs[f] < sigmas[f] / root:
                b[r, f] = 1
    return bits
