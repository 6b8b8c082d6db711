# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled hot loops: nonuniform Fourier sums and sequential variance
recursions. Semantics mirror _kernels_py exactly."""

import numpy as np

cimport numpy as cnp
from libc.math cimport cos, sin, sqrt

cnp.import_array()


def nudft_coeffs(double[::1] tau, double[::1] dx, Py_ssize_t n_freq):
    """c[u] = sum_l dx[l] * exp(-1j*u*tau[l]) for u = 0..n_freq.

    Phase powers are built by recurrence (one complex multiply per
    frequency per observation); relative error grows like n_freq * eps.
    """
    cdef Py_ssize_t n = tau.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] re = np.zeros(n_freq + 1)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] im = np.zeros(n_freq + 1)
    cdef double[::1] ar = re
    cdef double[::1] ai = im
    cdef Py_ssize_t l, u
    cdef double wr, wi, pr, pi, tr
    for l in range(n):
        wr = cos(tau[l])
        wi = -sin(tau[l])
        pr = dx[l]
        pi = 0.0
        for u in range(n_freq + 1):
            ar[u] += pr
            ai[u] += pi
            tr = pr * wr - pi * wi
            pi = pr * wi + pi * wr
            pr = tr
    return re + 1j * im


def volterra_variance(double[::1] kvec, double dt, double theta, double gam,
                      double nu, double v0, double[::1] dz):
    """Variance path of the power-kernel Volterra scheme.

    v[i] = v0 + sum_{j<i} kvec[i-1-j] * f[j],
    f[j] = (theta - gam*max(v[j],0))*dt + nu*sqrt(max(v[j],0))*dz[j],
    where kvec[m] = K((m+1)*dt) and dz holds Brownian increments.
    Returns (v, number of negative-variance truncations).
    """
    cdef Py_ssize_t n = dz.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] v = np.empty(n + 1)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] f = np.empty(n if n > 0 else 1)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] krev = np.ascontiguousarray(np.asarray(kvec)[::-1])
    cdef double[::1] vv = v
    cdef double[::1] ff = f
    cdef double[::1] kr = krev
    cdef Py_ssize_t i, j, base, m
    cdef double vp, a0, a1, a2, a3
    cdef long trunc = 0
    vv[0] = v0
    for i in range(n):
        vp = vv[i]
        if vp < 0.0:
            vp = 0.0
            trunc += 1
        ff[i] = (theta - gam * vp) * dt + nu * sqrt(vp) * dz[i]
        # dot of ff[0..i] with kvec reversed; unrolled for pipelining
        base = n - 1 - i
        a0 = 0.0; a1 = 0.0; a2 = 0.0; a3 = 0.0
        m = (i + 1) - ((i + 1) & 3)
        for j in range(0, m, 4):
            a0 += kr[base + j] * ff[j]
            a1 += kr[base + j + 1] * ff[j + 1]
            a2 += kr[base + j + 2] * ff[j + 2]
            a3 += kr[base + j + 3] * ff[j + 3]
        for j in range(m, i + 1):
            a0 += kr[base + j] * ff[j]
        vv[i + 1] = v0 + ((a0 + a1) + (a2 + a3))
    return v, trunc


def heston_core(double[::1] dw, double[::1] dz, double dt, double mu,
                double gam, double theta, double nu, double v0):
    """Euler log-price/variance recursion with full truncation.

    dw, dz are Brownian increments. Returns (x, v, truncations) with
    x[0] = 0; the caller shifts to the desired initial log-price.
    """
    cdef Py_ssize_t n = dw.shape[0]
    cdef cnp.ndarray[cnp.float64_t, ndim=1] x = np.empty(n + 1)
    cdef cnp.ndarray[cnp.float64_t, ndim=1] v = np.empty(n + 1)
    cdef double[::1] xx = x
    cdef double[::1] vv = v
    cdef Py_ssize_t i
    cdef double vp, s
    cdef long trunc = 0
    xx[0] = 0.0
    vv[0] = v0
    for i in range(n):
        vp = vv[i]
        if vp < 0.0:
            vp = 0.0
            trunc += 1
        s = sqrt(vp)
        xx[i + 1] = xx[i] + (mu - 0.5 * vp) * dt + s * dw[i]
        vv[i + 1] = vv[i] + gam * (theta - vp) * dt + nu * s * dz[i]
    return x, v, trunc
