"""Pure-NumPy fallbacks for the compiled kernels.

Same call signatures and semantics as ``_kernels.pyx``; selected at import
time by :mod:`fourierspot.kernels` when the extension is unavailable.
"""

from __future__ import annotations

import numpy as np

# frequencies are processed in blocks to bound the (block x n) phase matrix
_FREQ_BLOCK = 256


def nudft_coeffs(tau, dx, n_freq):
    """c[u] = sum_l dx[l] * exp(-1j*u*tau[l]) for u = 0..n_freq."""
    tau = np.asarray(tau, dtype=float)
    dx = np.asarray(dx, dtype=float)
    out = np.empty(n_freq + 1, dtype=np.complex128)
    for lo in range(0, n_freq + 1, _FREQ_BLOCK):
        hi = min(lo + _FREQ_BLOCK, n_freq + 1)
        u = np.arange(lo, hi)
        out[lo:hi] = np.exp(-1j * u[:, None] * tau[None, :]) @ dx
    return out


def volterra_variance(kvec, dt, theta, gam, nu, v0, dz):
    """Sequential Volterra variance recursion; see the compiled twin."""
    kvec = np.asarray(kvec, dtype=float)
    dz = np.asarray(dz, dtype=float)
    n = dz.shape[0]
    v = np.empty(n + 1)
    f = np.empty(max(n, 1))
    krev = np.ascontiguousarray(kvec[::-1])
    v[0] = v0
    trunc = 0
    for i in range(n):
        vp = v[i]
        if vp < 0.0:
            vp = 0.0
            trunc += 1
        f[i] = (theta - gam * vp) * dt + nu * np.sqrt(vp) * dz[i]
        v[i + 1] = v0 + np.dot(krev[n - 1 - i:n], f[: i + 1])
    return v, trunc


def heston_core(dw, dz, dt, mu, gam, theta, nu, v0):
    """Euler log-price/variance recursion with full truncation."""
    dw = np.asarray(dw, dtype=float)
    dz = np.asarray(dz, dtype=float)
    n = dw.shape[0]
    x = np.empty(n + 1)
    v = np.empty(n + 1)
    x[0] = 0.0
    v[0] = v0
    trunc = 0
    for i in range(n):
        vp = v[i]
        if vp < 0.0:
            vp = 0.0
            trunc += 1
        s = np.sqrt(vp)
        x[i + 1] = x[i] + (mu - 0.5 * vp) * dt + s * dw[i]
        v[i + 1] = v[i] + gam * (theta - vp) * dt + nu * s * dz[i]
    return x, v, trunc
