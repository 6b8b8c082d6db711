"""Spot covariance estimation from asynchronous tick series.

Three estimators share one coefficient pipeline:

``estimate_pdf``
    The production estimator. For each evaluation time it forms the
    d x (2N+1) matrix ``F`` of per-asset return Fourier sums and returns
    the quadratic form ``F C F^H`` with a positive semi-definite Toeplitz
    weight ``C[u, u'] = c(u - u')``, which makes every estimate symmetric
    positive semi-definite by construction.

``estimate_classical``
    The Fejer/Dirichlet convolution estimator it improves on: fast, but
    with no positivity guarantee on asynchronous designs.

``estimate_reference_oracle``
    A literal index-set summation (frequencies enumerated pairwise over
    the sets ``S(k)``) used to validate ``estimate_pdf`` on small inputs.

Times are affinely rescaled to [0, 2pi] internally; outputs are variance
per unit of the *input* time scale (the overall normalization is
``1 / (window_length * (2N + 1))``). Feeding times in day fractions hence
yields variance per day.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import List, Optional, Sequence, Tuple

import numpy as np
import scipy.fft
import scipy.linalg

from . import kernels
from .errors import ConfigurationError, NumericalError
from .sampling import TickSeries

TWO_PI = 2.0 * math.pi

# residue / PSD tolerances, relative to max(trace, 1)
IMAG_TOL = 1e-10
PSD_TOL = 1e-10

# Toeplitz weights at most this order are applied as dense matrices;
# larger ones go through FFT convolution
_DENSE_MAX = 700


# ---------------------------------------------------------------------------
# frequency selection
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class FreqParams:
    """Cutting frequency ``N`` and localization ``M`` (Gaussian bandwidth),
    with the selection-rule exponents kept for provenance."""

    N: int
    M: float
    alpha: Optional[float] = None
    beta: Optional[float] = None
    n_ref: Optional[int] = None

    def __post_init__(self):
        if self.N < 0:
            raise ValueError("N must be nonnegative")
        if self.M <= 0:
            raise ValueError("M must be positive")
        if self.alpha is not None and self.n_ref is not None and self.N > self.n_ref / 2:
            raise ValueError(f"N={self.N} exceeds the Nyquist bound n/2={self.n_ref / 2}")


def select_freq(n: int, alpha: Optional[float] = None, beta: Optional[float] = None,
                noise_present: bool = False) -> FreqParams:
    """Rule-based parameters: N = floor(n^alpha / 2), M = N^beta.

    Defaults: alpha = 3/4 on clean data, 2/3 under microstructure noise;
    beta = 4/9.
    """
    if n < 4:
        raise ValueError(f"need at least 4 observations, got {n}")
    if alpha is None:
        alpha = 2.0 / 3.0 if noise_present else 0.75
    if beta is None:
        beta = 4.0 / 9.0
    if not 0.0 < alpha <= 1.0:
        raise ValueError(f"alpha must lie in (0, 1], got {alpha}")
    if not 0.0 < beta <= 1.0:
        raise ValueError(f"beta must lie in (0, 1], got {beta}")
    # nudge guards against pow() undershooting exact integers
    N = max(1, math.floor(n**alpha / 2.0 + 1e-9))
    M = float(N) ** beta
    return FreqParams(N=N, M=M, alpha=alpha, beta=beta, n_ref=n)


# ---------------------------------------------------------------------------
# positive semi-definite weights
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class PsdWeight:
    """Even weight function c(k) whose Toeplitz matrix is PSD.

    ``gaussian`` and ``fejer`` kinds are positive semi-definite
    analytically; ``custom`` tables are eigenvalue-checked when used.
    """

    kind: str
    param: float = 0.0
    table: Optional[Tuple[float, ...]] = None  # custom: c(0), c(1), ...

    @staticmethod
    def gaussian(m_loc: float) -> "PsdWeight":
        if m_loc <= 0:
            raise ValueError("Gaussian localization M must be positive")
        return PsdWeight("gaussian", float(m_loc))

    @staticmethod
    def fejer(m_int: int) -> "PsdWeight":
        if m_int < 0:
            raise ValueError("Fejer order must be nonnegative")
        return PsdWeight("fejer", float(m_int))

    @staticmethod
    def custom(table) -> "PsdWeight":
        vals = tuple(float(v) for v in np.atleast_1d(table))
        if not vals:
            raise ValueError("custom weight table is empty")
        return PsdWeight("custom", 0.0, vals)

    def lag_values(self, kmax: int) -> np.ndarray:
        """c(k) for k = -kmax..kmax."""
        k = np.arange(-kmax, kmax + 1)
        if self.kind == "gaussian":
            return np.exp(-2.0 * math.pi**2 * k.astype(float) ** 2 / self.param)
        if self.kind == "fejer":
            return np.clip(1.0 - np.abs(k) / (self.param + 1.0), 0.0, None)
        if self.kind == "custom":
            if kmax >= len(self.table):
                raise ValueError(
                    f"custom weight table covers |k| < {len(self.table)}, need {kmax}")
            vals = np.asarray(self.table)
            return vals[np.abs(k)]
        raise ValueError(f"unknown weight kind {self.kind!r}")

    def cache_key(self):
        return None if self.kind == "custom" else (self.kind, self.param)

    def check_psd(self, n_freq: int) -> None:
        """Eigenvalue check of the (2N+1)-order Toeplitz matrix; analytic
        kinds are exempt."""
        if self.kind != "custom":
            return
        col = self.lag_values(2 * n_freq)[2 * n_freq:]  # c(0..2N)
        mat = scipy.linalg.toeplitz(col)
        min_eig = float(np.linalg.eigvalsh(mat)[0])
        scale = max(1.0, float(np.max(np.abs(col))))
        if min_eig < -1e-10 * scale:
            raise ConfigurationError(
                f"weight function is not positive semi-definite (min eig {min_eig:.3e})")


@lru_cache(maxsize=4)
def _dense_weight(cache_key, n_freq: int) -> np.ndarray:
    w = PsdWeight(cache_key[0], cache_key[1])
    col = w.lag_values(2 * n_freq)[2 * n_freq:]  # c(0..2N)
    return scipy.linalg.toeplitz(col)


@lru_cache(maxsize=16)
def _fft_weight(cache_key, m: int):
    w = PsdWeight(cache_key[0], cache_key[1])
    ker = w.lag_values(m - 1)  # lags -(m-1)..(m-1)
    length = scipy.fft.next_fast_len(3 * m - 2)
    return length, scipy.fft.fft(ker, length)


def _toeplitz_from(weight: PsdWeight, n_freq: int) -> np.ndarray:
    col = weight.lag_values(2 * n_freq)[2 * n_freq:]
    return scipy.linalg.toeplitz(col)


def _make_weight_applier(weight: PsdWeight, n_freq: int):
    """Returns v (m,) complex -> C v for the order-m Toeplitz weight C.

    Applied one asset vector at a time (not batched) so each column's
    result is independent of the others; combined with the per-pair dot
    products in the quadratic form this makes estimates exactly
    equivariant under asset permutations.
    """
    m = 2 * n_freq + 1
    key = weight.cache_key()
    if key is None or m <= _DENSE_MAX:
        if key is not None and m <= _DENSE_MAX:
            cmat = _dense_weight(key, n_freq)
        else:
            cmat = _toeplitz_from(weight, n_freq)

        def apply_dense(v):
            return cmat @ v.real + 1j * (cmat @ v.imag)

        return apply_dense

    length, kf = _fft_weight(key, m)

    def apply_fft(v):
        spec = scipy.fft.fft(v, length)
        return scipy.fft.ifft(spec * kf)[m - 1:2 * m - 1]

    return apply_fft


# ---------------------------------------------------------------------------
# trigonometric kernels (classical estimator building blocks)
# ---------------------------------------------------------------------------

def dirichlet_kernel(x, n: int):
    """D_N(x) = sum_{|k|<=N} exp(i k x), evaluated real."""
    x = np.asarray(x, dtype=float)
    out = np.empty_like(x)
    near = np.isclose(np.mod(x, TWO_PI), 0.0, atol=1e-12) | np.isclose(
        np.mod(x, TWO_PI), TWO_PI, atol=1e-12)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.sin((n + 0.5) * x) / np.sin(0.5 * x)
    out = np.where(near, 2 * n + 1.0, out)
    return out if out.ndim else float(out)


def fejer_kernel(x, m: int):
    """F_M(x) = sum_{|k|<=M} (1 - |k|/(M+1)) exp(i k x), evaluated real."""
    x = np.asarray(x, dtype=float)
    near = np.isclose(np.mod(x, TWO_PI), 0.0, atol=1e-12) | np.isclose(
        np.mod(x, TWO_PI), TWO_PI, atol=1e-12)
    with np.errstate(invalid="ignore", divide="ignore"):
        out = np.sin(0.5 * (m + 1) * x) ** 2 / ((m + 1) * np.sin(0.5 * x) ** 2)
    out = np.where(near, m + 1.0, out)
    return out if out.ndim else float(out)


# ---------------------------------------------------------------------------
# Fourier coefficients of returns
# ---------------------------------------------------------------------------

@dataclass
class FourierCoeffVector:
    """Per-asset inner sums at one evaluation time:
    ``values[u] = sum_l exp(i u (tau_eval - tau_l)) dX_l`` for u = -N..N
    (index 0 of ``values`` is u = -N)."""

    asset_id: int
    t_eval: float
    n_freq: int
    values: np.ndarray

    def value_at(self, u: int) -> complex:
        return self.values[u + self.n_freq]


def _check_window(ticks: Sequence[TickSeries], window) -> Tuple[float, float]:
    if window is None:
        window = ticks[0].window
    t0, t1 = float(window[0]), float(window[1])
    if not t1 > t0:
        raise ValueError("window must have positive length")
    span = t1 - t0
    for s in ticks:
        if abs(s.times[0] - t0) > 1e-9 * span or abs(s.times[-1] - t1) > 1e-9 * span:
            raise ValueError(
                f"asset {s.asset_id}: tick window {s.window} does not match {(t0, t1)}")
    return t0, t1


def returns_coeffs(ticks: TickSeries, n_freq: int, window) -> np.ndarray:
    """a(u) = sum_l exp(-i u tau_l) dX_l for u = -n_freq..n_freq, with
    times rescaled to [0, 2pi] and increments stamped at their right
    endpoint. Conjugate-symmetric since increments are real."""
    t0, t1 = float(window[0]), float(window[1])
    dx = ticks.increments()
    if dx.size == 0:
        raise ValueError("tick series has no increments")
    tau = (ticks.times[1:] - t0) * (TWO_PI / (t1 - t0))
    pos = kernels.nudft_coeffs(np.ascontiguousarray(tau), np.ascontiguousarray(dx), n_freq)
    return np.concatenate([np.conj(pos[:0:-1]), pos])


def fourier_coeffs(ticks: TickSeries, n_freq: int, t_eval: float,
                   window) -> FourierCoeffVector:
    """Coefficient vector of one asset at one evaluation time."""
    if n_freq < 0:
        raise ValueError("N must be nonnegative")
    t0, t1 = _check_window([ticks], window)
    a = returns_coeffs(ticks, n_freq, (t0, t1))
    u = np.arange(-n_freq, n_freq + 1)
    tau_eval = (t_eval - t0) * (TWO_PI / (t1 - t0))
    return FourierCoeffVector(ticks.asset_id, t_eval, n_freq,
                              np.exp(1j * u * tau_eval) * a)


# ---------------------------------------------------------------------------
# estimates
# ---------------------------------------------------------------------------

@dataclass
class SpotCovEstimate:
    """Covariance trajectory estimate with per-time diagnostics.

    ``matrices`` has shape (T, d, d); ``min_eigs`` holds the smallest
    eigenvalue of the symmetric part and ``sym_residuals`` the largest
    absolute asymmetry of the raw matrix at each time.
    """

    eval_times: np.ndarray
    matrices: np.ndarray
    estimator_tag: str
    freq: FreqParams
    window: Tuple[float, float]
    min_eigs: np.ndarray
    sym_residuals: np.ndarray
    asset_ids: Tuple[int, ...] = ()

    @property
    def d(self) -> int:
        return self.matrices.shape[1]

    def psd_flags(self, tol: float = PSD_TOL) -> np.ndarray:
        """Per-time flags: symmetric PSD within tolerance."""
        traces = np.einsum("tii->t", self.matrices)
        scale = np.maximum(np.abs(self.matrices).max(axis=(1, 2)), 1.0)
        return (self.min_eigs >= -tol * np.maximum(traces, 1.0)) & (
            self.sym_residuals <= 1e-10 * scale)

    def to_csv(self, path) -> None:
        import csv as _csv

        with open(path, "w", newline="") as fh:
            w = _csv.writer(fh)
            w.writerow(["time_s", "j", "jp", "value", "min_eig_at_t"])
            for t_idx, t in enumerate(self.eval_times):
                for j in range(self.d):
                    for jp in range(self.d):
                        w.writerow([repr(float(t)), j, jp,
                                    repr(float(self.matrices[t_idx, j, jp])),
                                    repr(float(self.min_eigs[t_idx]))])


def default_eval_times(window, spacing: float, margin_steps: int = 1) -> np.ndarray:
    """Regular evaluation grid with ``margin_steps`` spacings trimmed from
    each end to limit kernel edge effects."""
    t0, t1 = float(window[0]), float(window[1])
    if spacing <= 0:
        raise ValueError("spacing must be positive")
    pts = np.arange(t0, t1 + 0.5 * spacing, spacing)
    if margin_steps > 0:
        pts = pts[margin_steps:len(pts) - margin_steps]
    if pts.size == 0:
        raise ValueError("evaluation grid is empty; reduce spacing or margin")
    return pts


def _diagnose(raw: np.ndarray) -> Tuple[np.ndarray, float, float]:
    """Symmetrize and report (symmetric matrix, min eig, asymmetry)."""
    sym = 0.5 * (raw + raw.T)
    resid = float(np.max(np.abs(raw - raw.T))) if raw.shape[0] > 1 else 0.0
    min_eig = float(np.linalg.eigvalsh(sym)[0])
    return sym, min_eig, resid


class CoeffPanel:
    """Return coefficients of a panel up to a maximal frequency.

    Computing the coefficients once at ``n_max`` and slicing them per
    cutting frequency lets parameter sweeps reuse the expensive
    nonuniform transform; :func:`estimate_pdf` is the single-use wrapper.
    """

    def __init__(self, ticks: Sequence[TickSeries], n_max: int, window=None):
        if not ticks:
            raise ValueError("need at least one tick series")
        self.window = _check_window(ticks, window)
        self.n_max = int(n_max)
        self.asset_ids = tuple(s.asset_id for s in ticks)
        self.coeffs = np.stack([returns_coeffs(s, self.n_max, self.window)
                                for s in ticks])

    @property
    def d(self) -> int:
        return self.coeffs.shape[0]

    def estimate(self, freq: FreqParams, eval_times,
                 weight: Optional[PsdWeight] = None) -> SpotCovEstimate:
        """PSD quadratic-form estimate at the given frequencies."""
        n_freq = freq.N
        if n_freq > self.n_max:
            raise ValueError(f"N={n_freq} exceeds precomputed maximum {self.n_max}")
        t0, t1 = self.window
        weight = weight if weight is not None else PsdWeight.gaussian(freq.M)
        weight.check_psd(n_freq)
        coeffs = self.coeffs[:, self.n_max - n_freq:self.n_max + n_freq + 1]
        apply_weight = _make_weight_applier(weight, n_freq)
        u = np.arange(-n_freq, n_freq + 1)
        eval_times = np.atleast_1d(np.asarray(eval_times, dtype=float))
        kappa = 1.0 / ((t1 - t0) * (2 * n_freq + 1))

        d = self.d
        mats = np.empty((eval_times.size, d, d))
        min_eigs = np.empty(eval_times.size)
        residuals = np.empty(eval_times.size)
        g = np.empty((d, d), dtype=np.complex128)
        for t_idx, t in enumerate(eval_times):
            tau = (t - t0) * (TWO_PI / (t1 - t0))
            fmat = coeffs * np.exp(1j * u * tau)[None, :]
            weighted = [apply_weight(np.conj(fmat[j])) for j in range(d)]
            for j in range(d):
                for jp in range(d):
                    g[j, jp] = np.dot(fmat[j], weighted[jp])
            g *= kappa
            trace = float(np.trace(g).real)
            imag_resid = float(np.max(np.abs(g.imag)))
            if imag_resid > IMAG_TOL * max(trace, 1.0):
                raise NumericalError(
                    f"imaginary residue {imag_resid:.3e} exceeds tolerance at t={t}")
            sym, min_eig, resid = _diagnose(g.real)
            mats[t_idx] = sym
            min_eigs[t_idx] = min_eig
            residuals[t_idx] = resid
        return SpotCovEstimate(eval_times, mats, "pdf", freq, (t0, t1),
                               min_eigs, residuals, self.asset_ids)


def estimate_pdf(ticks: Sequence[TickSeries], freq: FreqParams,
                 eval_times, weight: Optional[PsdWeight] = None,
                 window=None) -> SpotCovEstimate:
    """Positive semi-definite spot covariance estimate.

    Parameters
    ----------
    ticks : one TickSeries per asset, sharing the observation window.
    freq : cutting frequency N and Gaussian localization M.
    eval_times : times (input units) at which to reconstruct the matrix.
    weight : PSD weight; defaults to the Gaussian kernel with ``freq.M``.
    window : (t0, t_end); inferred from the first series when omitted.

    Returns estimates in variance per unit input time. Raises
    :class:`NumericalError` if the imaginary residue of the Hermitian
    quadratic form exceeds its tolerance (it is discarded otherwise), and
    :class:`ConfigurationError` for weights that fail the PSD check.
    """
    return CoeffPanel(ticks, freq.N, window).estimate(freq, eval_times, weight)


def estimate_classical(ticks: Sequence[TickSeries], n_dirichlet: int,
                       m_fejer: int, eval_times, window=None) -> SpotCovEstimate:
    """Fejer-smoothed Dirichlet convolution estimate (no PSD guarantee).

    ``V^{jj'}(t) = kappa * sum_{|k|<=M} (1-|k|/(M+1)) e^{ik tau(t)}
    sum_{|s|<=N} a_j(k-s) a_{j'}(s)``; entries are real but the matrix is
    generally asymmetric off synchronous designs, so diagnostics are
    computed from the symmetric part while ``matrices`` keeps the raw
    values.
    """
    if n_dirichlet < 1 or m_fejer < 1:
        raise ValueError("Dirichlet and Fejer orders must be positive integers")
    t0, t1 = _check_window(ticks, window)
    d = len(ticks)
    amax = n_dirichlet + m_fejer
    full = [returns_coeffs(s, amax, (t0, t1)) for s in ticks]
    short = [c[m_fejer:m_fejer + 2 * n_dirichlet + 1] for c in full]

    n_modes = 2 * m_fejer + 1
    conv_mid = 2 * n_dirichlet  # zero-lag offset of the valid slice
    b = np.empty((d, d, n_modes), dtype=np.complex128)
    for j in range(d):
        for jp in range(d):
            conv = np.convolve(full[j], short[jp])
            b[j, jp] = conv[conv_mid:conv_mid + n_modes]

    k = np.arange(-m_fejer, m_fejer + 1)
    wk = 1.0 - np.abs(k) / (m_fejer + 1.0)
    kappa = 1.0 / ((t1 - t0) * (2 * n_dirichlet + 1))
    eval_times = np.atleast_1d(np.asarray(eval_times, dtype=float))

    mats = np.empty((eval_times.size, d, d))
    min_eigs = np.empty(eval_times.size)
    residuals = np.empty(eval_times.size)
    for t_idx, t in enumerate(eval_times):
        tau = (t - t0) * (TWO_PI / (t1 - t0))
        phase = wk * np.exp(1j * k * tau)
        raw = (b @ phase) * kappa
        imag_resid = float(np.max(np.abs(raw.imag)))
        trace = float(np.trace(raw).real)
        if imag_resid > IMAG_TOL * max(abs(trace), 1.0):
            raise NumericalError(
                f"imaginary residue {imag_resid:.3e} exceeds tolerance at t={t}")
        raw = raw.real
        _, min_eig, resid = _diagnose(raw)
        mats[t_idx] = raw
        min_eigs[t_idx] = min_eig
        residuals[t_idx] = resid
    freq = FreqParams(N=n_dirichlet, M=float(m_fejer))
    return SpotCovEstimate(eval_times, mats, "classical", freq, (t0, t1),
                           min_eigs, residuals,
                           tuple(s.asset_id for s in ticks))


# size guards for the literal oracle
_ORACLE_MAX_TICKS = 100
_ORACLE_MAX_N = 10


def _index_pairs(n_freq: int, k: int) -> List[Tuple[int, int]]:
    """The pair set S(k): all (s, s') with s + s' = k, |s|, |s'| <= N,
    enumerated exactly by the two defining branches."""
    if k >= 0:
        return [(-n_freq + k + v, n_freq - v) for v in range(2 * n_freq - k + 1)]
    return [(n_freq + k - v, -n_freq + v) for v in range(2 * n_freq + k + 1)]


def estimate_reference_oracle(ticks: Sequence[TickSeries], n_freq: int,
                              weight: PsdWeight, eval_times, window=None,
                              allow_large: bool = False) -> SpotCovEstimate:
    """Literal index-set evaluation of the PSD estimator.

    Sums c(k) e^{ik tau(t)} over k = -2N..2N and over the pair sets S(k),
    with each frequency sum over the ticks recomputed directly. Guarded to
    small instances (n <= 100, N <= 10) unless ``allow_large`` is set;
    exists to validate :func:`estimate_pdf`, which it must equal.
    """
    if not allow_large:
        if n_freq > _ORACLE_MAX_N:
            raise ValueError(f"oracle size guard: N={n_freq} > {_ORACLE_MAX_N}")
        for s in ticks:
            if len(s) > _ORACLE_MAX_TICKS:
                raise ValueError(
                    f"oracle size guard: {len(s)} ticks > {_ORACLE_MAX_TICKS}")
    t0, t1 = _check_window(ticks, window)
    span = t1 - t0
    d = len(ticks)
    weight.check_psd(n_freq)
    cvals = weight.lag_values(2 * n_freq)

    def freq_sum(series: TickSeries, s: int) -> complex:
        tau = (series.times[1:] - t0) * (TWO_PI / span)
        return complex(np.sum(np.exp(-1j * s * tau) * np.diff(series.log_prices)))

    cache: dict = {}

    def a(j: int, s: int) -> complex:
        if (j, s) not in cache:
            cache[(j, s)] = freq_sum(ticks[j], s)
        return cache[(j, s)]

    # t-independent inner sums per k and asset pair
    inner = np.empty((4 * n_freq + 1, d, d), dtype=np.complex128)
    for ki, k in enumerate(range(-2 * n_freq, 2 * n_freq + 1)):
        pairs = _index_pairs(n_freq, k)
        for j in range(d):
            for jp in range(d):
                inner[ki, j, jp] = sum(a(jp, s) * a(j, sp) for s, sp in pairs)

    kappa = 1.0 / (span * (2 * n_freq + 1))
    eval_times = np.atleast_1d(np.asarray(eval_times, dtype=float))
    mats = np.empty((eval_times.size, d, d))
    min_eigs = np.empty(eval_times.size)
    residuals = np.empty(eval_times.size)
    ks = np.arange(-2 * n_freq, 2 * n_freq + 1)
    for t_idx, t in enumerate(eval_times):
        tau = (t - t0) * (TWO_PI / span)
        phase = cvals * np.exp(1j * ks * tau)
        raw = np.tensordot(phase, inner, axes=(0, 0)) * kappa
        sym, min_eig, resid = _diagnose(raw.real)
        mats[t_idx] = sym
        min_eigs[t_idx] = min_eig
        residuals[t_idx] = resid
    return SpotCovEstimate(eval_times, mats, "reference_oracle",
                           FreqParams(N=n_freq, M=1.0), (t0, t1),
                           min_eigs, residuals,
                           tuple(s.asset_id for s in ticks))


def detect_noise(ticks: Sequence[TickSeries], z_threshold: float = 3.0) -> bool:
    """Crude microstructure-noise diagnostic: flags noise when the pooled
    first-order autocorrelation of tick returns is significantly negative
    (additive noise makes adjacent returns negatively correlated)."""
    z_sum = 0.0
    n_assets = 0
    for s in ticks:
        r = s.increments()
        if len(r) < 20:
            continue
        r = r - r.mean()
        denom = float(np.dot(r, r))
        if denom <= 0:
            continue
        rho1 = float(np.dot(r[:-1], r[1:])) / denom
        z_sum += rho1 * math.sqrt(len(r))
        n_assets += 1
    if n_assets == 0:
        return False
    return z_sum / math.sqrt(n_assets) < -z_threshold
