"""Simulation of multivariate efficient log-price paths.

Four stochastic volatility specifications are provided (square-root
variance, one- and two-factor exponential volatility, and a rough
power-kernel Volterra variance), plus a constant-volatility Brownian pair
used by the asynchronicity sensitivity study.

Conventions
-----------
* Grid times and tick times are in seconds. The default grid is a 6.5-hour
  trading day sampled every 2 seconds.
* Model parameters are quoted per trading day (``day_length_s`` seconds of
  wall time = 1 unit of model time); integration uses
  ``dt = step / day_length_s``. Spot variances are therefore variance per
  day, and log-prices are unit-free.
* Cross-asset dependence enters only through the price Brownian drivers
  (pairwise equicorrelation); volatility drivers are independent across
  assets and couple to their own asset's price driver with the model's
  leverage coefficient.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
import scipy.signal

from . import kernels
from .errors import ConfigurationError
from .seeds import rng_from

TRADING_DAY_S = 23400.0  # 6.5 hours

DEFAULT_X0 = math.log(100.0)  # initial log-price, i.e. a 100-unit price level


@dataclass(frozen=True)
class DenseGrid:
    """Equally spaced simulation grid: ``n_steps`` steps of ``step`` seconds."""

    t0: float = 0.0
    step: float = 2.0
    n_steps: int = 11700

    def __post_init__(self):
        if self.step <= 0:
            raise ValueError(f"grid step must be positive, got {self.step}")
        if self.n_steps < 1:
            raise ValueError(f"n_steps must be >= 1, got {self.n_steps}")

    @property
    def t_end(self) -> float:
        return self.t0 + self.step * self.n_steps

    @property
    def n_points(self) -> int:
        return self.n_steps + 1

    def times(self) -> np.ndarray:
        return self.t0 + self.step * np.arange(self.n_points)

    def index_of(self, t: float) -> int:
        """Nearest grid index; ``t`` must lie inside the grid range."""
        if not (self.t0 - 0.5 * self.step <= t <= self.t_end + 0.5 * self.step):
            raise ValueError(f"time {t} outside grid range [{self.t0}, {self.t_end}]")
        return int(min(max(round((t - self.t0) / self.step), 0), self.n_steps))


def one_day_grid(step: float = 2.0, day_length_s: float = TRADING_DAY_S) -> DenseGrid:
    """Grid covering one trading day; ``step`` must divide the day length."""
    n = round(day_length_s / step)
    if abs(n * step - day_length_s) > 1e-9 * day_length_s:
        raise ValueError(f"step {step} does not divide the day length {day_length_s}")
    return DenseGrid(t0=0.0, step=step, n_steps=n)


@dataclass(frozen=True)
class CorrelationSpec:
    """Dependence structure of the Brownian drivers.

    ``cross_asset_rho`` is the pairwise equicorrelation of the price
    drivers. ``leverage_lambda`` overrides the model's own leverage when
    set. ``full_matrix``, when given, replaces the assembled correlation
    matrix entirely (ordering: price drivers first, then one block per
    volatility factor).
    """

    cross_asset_rho: float = 0.312
    leverage_lambda: Optional[float] = None
    full_matrix: Optional[np.ndarray] = None

    def __post_init__(self):
        if not -1.0 <= self.cross_asset_rho <= 1.0:
            raise ValueError(f"cross_asset_rho must lie in [-1, 1], got {self.cross_asset_rho}")

    def driver_matrix(self, d: int, n_vol_factors: int, leverage: float) -> np.ndarray:
        lam = self.leverage_lambda if self.leverage_lambda is not None else leverage
        dim = (1 + n_vol_factors) * d
        if self.full_matrix is not None:
            mat = np.asarray(self.full_matrix, dtype=float)
            if mat.shape != (dim, dim):
                raise ConfigurationError(
                    f"full correlation matrix has shape {mat.shape}, expected {(dim, dim)}"
                )
        else:
            mat = np.eye(dim)
            rho = self.cross_asset_rho
            mat[:d, :d] = rho + (1.0 - rho) * np.eye(d)
            for f in range(n_vol_factors):
                off = (1 + f) * d
                for j in range(d):
                    mat[j, off + j] = lam
                    mat[off + j, j] = lam
        _validate_correlation(mat)
        return mat


def _validate_correlation(mat: np.ndarray) -> None:
    if not np.allclose(mat, mat.T, atol=1e-12):
        raise ConfigurationError("driver correlation matrix is not symmetric")
    if not np.allclose(np.diag(mat), 1.0, atol=1e-12):
        raise ConfigurationError("driver correlation matrix diagonal must be 1")
    min_eig = float(np.linalg.eigvalsh(mat)[0])
    if min_eig < -1e-10:
        raise ConfigurationError(
            f"driver correlation matrix is not positive semi-definite (min eig {min_eig:.3e})"
        )


def _correlation_factor(mat: np.ndarray) -> np.ndarray:
    """Matrix L with L L^T = mat; tolerates PSD-singular inputs (|rho|=1)."""
    try:
        return np.linalg.cholesky(mat)
    except np.linalg.LinAlgError:
        w, v = np.linalg.eigh(mat)
        return v * np.sqrt(np.clip(w, 0.0, None))


# ---------------------------------------------------------------------------
# model parameter sets (per-day units)
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HestonParams:
    """Square-root variance: dX = (mu - v/2) dt + sqrt(v) dW,
    dv = gamma (theta - v) dt + nu sqrt(v) dZ."""

    mu: float = 0.05 / 252
    gamma: float = 5 / 252
    theta: float = 0.1
    nu: float = 0.5 / 252
    lam: float = -0.5
    v0: Optional[float] = None  # defaults to theta

    n_vol_factors = 1
    kind = "heston"

    def validate(self):
        if self.gamma < 0 or self.theta < 0 or self.nu < 0:
            raise ValueError("gamma, theta, nu must be nonnegative")
        if not -1 < self.lam < 1:
            raise ValueError("leverage must lie in (-1, 1)")
        if self.v0 is not None and self.v0 <= 0:
            raise ValueError("initial variance must be positive")

    @property
    def start_variance(self) -> float:
        return self.theta if self.v0 is None else self.v0


@dataclass(frozen=True)
class SV1FParams:
    """One-factor log-linear volatility: sigma = exp(beta0 + beta1 * tau),
    dtau = alpha tau dt + dZ. Default beta0 = beta1 / (2 alpha)."""

    mu: float = 0.03
    beta1: float = 0.125
    alpha: float = -0.025
    beta0: float = field(default=0.125 / (2 * -0.025))
    lam: float = -0.3

    n_vol_factors = 1
    kind = "sv1f"

    def validate(self):
        if not -1 < self.lam < 1:
            raise ValueError("leverage must lie in (-1, 1)")


@dataclass(frozen=True)
class SV2FParams:
    """Two-factor volatility with a spliced exponential and a second factor
    whose diffusion is (1 + beta_v * tau2)."""

    mu: float = 0.03
    beta0: float = -1.1
    beta1: float = 0.04
    beta2: float = 0.3
    beta_v: float = -0.003
    alpha1: float = -0.6
    alpha2: float = 0.25
    lam: float = -0.3

    n_vol_factors = 2
    kind = "sv2f"

    def validate(self):
        if not -1 < self.lam < 1:
            raise ValueError("leverage must lie in (-1, 1)")


@dataclass(frozen=True)
class RoughHestonParams:
    """Volterra variance with power kernel K(t) = c_kernel * t^(H - 1/2);
    price carries the -v/2 log adjustment and no further drift."""

    theta: float = 0.2
    gamma: float = 0.3
    nu: float = 0.2
    lam: float = -0.7
    hurst: float = 0.1
    c_kernel: Optional[float] = None  # defaults to 1 / Gamma(H + 1/2)
    v0: Optional[float] = None  # defaults to theta / gamma

    n_vol_factors = 1
    kind = "rough_heston"

    def validate(self):
        if not 0.0 < self.hurst <= 0.5:
            raise ValueError(f"Hurst index must lie in (0, 1/2], got {self.hurst}")
        if self.gamma < 0 or self.theta < 0 or self.nu < 0:
            raise ValueError("gamma, theta, nu must be nonnegative")
        if self.c_kernel is not None and self.c_kernel <= 0:
            raise ValueError("kernel constant must be positive")
        if not -1 < self.lam < 1:
            raise ValueError("leverage must lie in (-1, 1)")

    @property
    def kernel_constant(self) -> float:
        if self.c_kernel is not None:
            return self.c_kernel
        return 1.0 / math.gamma(self.hurst + 0.5)

    @property
    def start_variance(self) -> float:
        if self.v0 is not None:
            return self.v0
        return self.theta / self.gamma if self.gamma > 0 else self.theta


@dataclass(frozen=True)
class ConstantVolParams:
    """Brownian prices with constant spot variance (dX = mu dt + sigma dW)."""

    sigma2: float = 1.0
    mu: float = 0.0

    n_vol_factors = 0
    kind = "constant"

    def validate(self):
        if self.sigma2 < 0:
            raise ValueError("sigma2 must be nonnegative")


ModelParams = Union[HestonParams, SV1FParams, SV2FParams, RoughHestonParams, ConstantVolParams]


def s_exp(x, threshold: float = math.log(1.5)):
    """Spliced exponential: exp below the threshold, a square-root branch
    with matching value above it."""
    x = np.asarray(x, dtype=float)
    x0 = threshold
    grow = np.minimum(x, x0)  # keep exp() off the large branch
    out = np.exp(grow)
    hi = x > x0
    if np.any(hi):
        out = np.where(hi, math.exp(x0) / math.sqrt(x0) * np.sqrt(x0 - x0**2 + x**2), out)
    return out


# ---------------------------------------------------------------------------
# simulation output
# ---------------------------------------------------------------------------

@dataclass
class PanelBundle:
    """One simulated panel: dense paths plus everything needed downstream.

    ``log_prices`` and ``spot_var`` have shape (d, n_points); variances are
    per day. ``price_shocks`` holds the standardized (correlated) normals
    that drove the price increments, shape (d, n_steps); the microstructure
    module reuses them to build price-correlated noise.
    """

    grid: DenseGrid
    day_length_s: float
    log_prices: np.ndarray
    spot_var: np.ndarray
    price_corr: np.ndarray  # d x d correlation of price drivers
    price_shocks: np.ndarray
    seed: object
    model_kind: str
    neg_var_truncations: np.ndarray  # per asset

    @property
    def d(self) -> int:
        return self.log_prices.shape[0]

    def sigma(self) -> np.ndarray:
        return np.sqrt(self.spot_var)

    def true_spot_cov(self, t: float) -> np.ndarray:
        """True d x d spot covariance at the grid point nearest to ``t``."""
        i = self.grid.index_of(t)
        s = np.sqrt(self.spot_var[:, i])
        return self.price_corr * np.outer(s, s)

    def true_cov_series(self, times) -> np.ndarray:
        """Stacked true covariances, shape (len(times), d, d)."""
        return np.stack([self.true_spot_cov(t) for t in np.atleast_1d(times)])

    def integrated_variance(self) -> np.ndarray:
        """Per-asset integral of spot variance over the window (day units)."""
        dt = self.grid.step / self.day_length_s
        return np.trapezoid(self.spot_var, dx=dt, axis=1)


def true_spot_cov(bundle: PanelBundle, t: float) -> np.ndarray:
    """Module-level alias for :meth:`PanelBundle.true_spot_cov`."""
    return bundle.true_spot_cov(t)


# ---------------------------------------------------------------------------
# simulators
# ---------------------------------------------------------------------------

def _draw_shocks(params, corr: CorrelationSpec, grid: DenseGrid, d: int, seed):
    """Correlated standard normals, shape (n_steps, (1+n_vol)*d)."""
    lam = getattr(params, "lam", 0.0)
    mat = corr.driver_matrix(d, params.n_vol_factors, lam)
    L = _correlation_factor(mat)
    rng = rng_from(seed)
    raw = rng.standard_normal((grid.n_steps, mat.shape[0]))
    return raw @ L.T


def simulate_heston(params: HestonParams, corr: CorrelationSpec, grid: DenseGrid,
                    d: int, seed, *, day_length_s: float = TRADING_DAY_S,
                    x0: float = DEFAULT_X0) -> PanelBundle:
    """Euler panel under the square-root variance model.

    Negative variance states are handled by full truncation: ``max(v, 0)``
    replaces ``v`` in both the drift and the diffusion, the raw state keeps
    integrating, and each truncation is counted. The variance starts at its
    long-run level ``theta`` unless ``params.v0`` overrides it.
    """
    params.validate()
    shocks = _draw_shocks(params, corr, grid, d, seed)
    n = grid.n_steps
    dt = grid.step / day_length_s
    sqdt = math.sqrt(dt)
    log_prices = np.empty((d, n + 1))
    spot_var = np.empty((d, n + 1))
    truncs = np.zeros(d, dtype=int)
    for j in range(d):
        x, v, tr = kernels.heston_core(
            np.ascontiguousarray(shocks[:, j] * sqdt),
            np.ascontiguousarray(shocks[:, d + j] * sqdt),
            dt, params.mu, params.gamma, params.theta, params.nu,
            params.start_variance,
        )
        log_prices[j] = x + x0
        spot_var[j] = np.clip(v, 0.0, None)
        truncs[j] = tr
    return _bundle(params, corr, grid, d, seed, day_length_s,
                   log_prices, spot_var, shocks, truncs)


def simulate_sv1f(params: SV1FParams, corr: CorrelationSpec, grid: DenseGrid,
                  d: int, seed, *, day_length_s: float = TRADING_DAY_S,
                  x0: float = DEFAULT_X0) -> PanelBundle:
    """Panel under the one-factor exponential volatility model."""
    params.validate()
    shocks = _draw_shocks(params, corr, grid, d, seed)
    n = grid.n_steps
    dt = grid.step / day_length_s
    sqdt = math.sqrt(dt)
    dz = shocks[:, d:2 * d] * sqdt  # (n, d) factor increments
    tau = _linear_factor(dz, params.alpha, dt)
    sigma = np.exp(params.beta0 + params.beta1 * tau)  # (n+1, d)
    dx = params.mu * dt + sigma[:-1] * shocks[:, :d] * sqdt
    log_prices = np.vstack([np.full(d, x0), x0 + np.cumsum(dx, axis=0)]).T
    return _bundle(params, corr, grid, d, seed, day_length_s,
                   np.ascontiguousarray(log_prices),
                   np.ascontiguousarray((sigma**2).T),
                   shocks, np.zeros(d, dtype=int))


def simulate_sv2f(params: SV2FParams, corr: CorrelationSpec, grid: DenseGrid,
                  d: int, seed, *, day_length_s: float = TRADING_DAY_S,
                  x0: float = DEFAULT_X0) -> PanelBundle:
    """Panel under the two-factor model with the spliced exponential."""
    params.validate()
    shocks = _draw_shocks(params, corr, grid, d, seed)
    n = grid.n_steps
    dt = grid.step / day_length_s
    sqdt = math.sqrt(dt)
    dz1 = shocks[:, d:2 * d] * sqdt
    dz2 = shocks[:, 2 * d:3 * d] * sqdt
    tau1 = _linear_factor(dz1, params.alpha1, dt)
    tau2 = _state_dependent_factor(dz2, params.alpha2, params.beta_v, dt)
    sigma = s_exp(params.beta0 + params.beta1 * tau1 + params.beta2 * tau2)
    dx = params.mu * dt + sigma[:-1] * shocks[:, :d] * sqdt
    log_prices = np.vstack([np.full(d, x0), x0 + np.cumsum(dx, axis=0)]).T
    return _bundle(params, corr, grid, d, seed, day_length_s,
                   np.ascontiguousarray(log_prices),
                   np.ascontiguousarray((sigma**2).T),
                   shocks, np.zeros(d, dtype=int))


def simulate_rough_heston(params: RoughHestonParams, corr: CorrelationSpec,
                          grid: DenseGrid, d: int, seed, *,
                          day_length_s: float = TRADING_DAY_S,
                          x0: float = DEFAULT_X0) -> PanelBundle:
    """Panel under the rough Volterra variance model.

    The variance solves the discrete convolution
    ``v[i] = v0 + sum_{j<i} K(t_i - t_j) * ((theta - gamma v+[j]) dt
    + nu sqrt(v+[j]) dZ[j])`` with ``K(t) = c * t^(H - 1/2)`` and negative
    parts truncated before taking square roots. At ``H = 1/2, c = 1`` the
    kernel is constant and the scheme coincides with the square-root-model
    Euler recursion on the same shocks.
    """
    params.validate()
    shocks = _draw_shocks(params, corr, grid, d, seed)
    n = grid.n_steps
    dt = grid.step / day_length_s
    sqdt = math.sqrt(dt)
    lags = dt * np.arange(1, n + 1)
    kvec = params.kernel_constant * lags ** (params.hurst - 0.5)
    log_prices = np.empty((d, n + 1))
    spot_var = np.empty((d, n + 1))
    truncs = np.zeros(d, dtype=int)
    v0 = params.start_variance
    for j in range(d):
        v, tr = kernels.volterra_variance(
            kvec, dt, params.theta, params.gamma, params.nu, v0,
            np.ascontiguousarray(shocks[:, d + j] * sqdt),
        )
        vplus = np.clip(v, 0.0, None)
        dx = -0.5 * vplus[:-1] * dt + np.sqrt(vplus[:-1]) * shocks[:, j] * sqdt
        log_prices[j, 0] = x0
        log_prices[j, 1:] = x0 + np.cumsum(dx)
        spot_var[j] = vplus
        truncs[j] = tr
    return _bundle(params, corr, grid, d, seed, day_length_s,
                   log_prices, spot_var, shocks, truncs)


def simulate_constant_vol(params: ConstantVolParams, corr: CorrelationSpec,
                          grid: DenseGrid, d: int, seed, *,
                          day_length_s: float = TRADING_DAY_S,
                          x0: float = 0.0) -> PanelBundle:
    """Correlated Brownian prices with constant variance (no drift
    adjustment; prices are the Brownian motions themselves)."""
    params.validate()
    shocks = _draw_shocks(params, corr, grid, d, seed)
    dt = grid.step / day_length_s
    sig = math.sqrt(params.sigma2)
    dx = params.mu * dt + sig * shocks * math.sqrt(dt)
    log_prices = np.hstack([np.full((d, 1), x0), x0 + np.cumsum(dx, axis=0).T])
    spot_var = np.full((d, grid.n_points), params.sigma2)
    return _bundle(params, corr, grid, d, seed, day_length_s,
                   np.ascontiguousarray(log_prices), spot_var, shocks,
                   np.zeros(d, dtype=int))


_SIMULATORS = {
    "heston": simulate_heston,
    "sv1f": simulate_sv1f,
    "sv2f": simulate_sv2f,
    "rough_heston": simulate_rough_heston,
    "constant": simulate_constant_vol,
}


def simulate(params: ModelParams, corr: CorrelationSpec, grid: DenseGrid,
             d: int, seed, **kwargs) -> PanelBundle:
    """Dispatch to the simulator matching ``params``."""
    return _SIMULATORS[params.kind](params, corr, grid, d, seed, **kwargs)


def _linear_factor(dz: np.ndarray, alpha: float, dt: float) -> np.ndarray:
    """tau[i+1] = (1 + alpha dt) tau[i] + dz[i], tau[0] = 0; shape (n+1, d)."""
    n, d = dz.shape
    x = np.vstack([np.zeros(d), dz])
    return scipy.signal.lfilter([1.0], [1.0, -(1.0 + alpha * dt)], x, axis=0)


def _state_dependent_factor(dz: np.ndarray, alpha: float, beta_v: float,
                            dt: float) -> np.ndarray:
    """tau[i+1] = tau[i] (1 + alpha dt + beta_v dz[i]) + dz[i], tau[0] = 0.

    Solved in closed form through prefix products; falls back to the
    explicit recursion if a multiplier is not positive.
    """
    n, d = dz.shape
    a = 1.0 + alpha * dt + beta_v * dz
    if np.all(a > 0):
        cp = np.vstack([np.ones(d), np.cumprod(a, axis=0)])  # cp[m] = prod_{i<m} a[i]
        s = np.vstack([np.zeros(d), np.cumsum(dz / cp[1:], axis=0)])
        return cp * s
    tau = np.zeros((n + 1, d))
    for i in range(n):
        tau[i + 1] = tau[i] * a[i] + dz[i]
    return tau


def _bundle(params, corr, grid, d, seed, day_length_s, log_prices, spot_var,
            shocks, truncs) -> PanelBundle:
    lam = corr.leverage_lambda if corr.leverage_lambda is not None else getattr(params, "lam", 0.0)
    rho = corr.cross_asset_rho
    if corr.full_matrix is not None:
        price_corr = np.asarray(corr.full_matrix, dtype=float)[:d, :d].copy()
    else:
        price_corr = rho + (1.0 - rho) * np.eye(d)
    return PanelBundle(
        grid=grid,
        day_length_s=day_length_s,
        log_prices=log_prices,
        spot_var=spot_var,
        price_corr=price_corr,
        price_shocks=np.ascontiguousarray(shocks[:, :d].T),
        seed=seed,
        model_kind=params.kind,
        neg_var_truncations=truncs,
    )


def write_panel_csv(bundle: PanelBundle, path, obs_log_prices: Optional[np.ndarray] = None):
    """Dump dense paths: one row per asset and grid point. Adds an
    ``obs_log_price`` column when observed (noisy) prices are supplied."""
    times = bundle.grid.times()
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        header = ["asset", "time_s", "log_price", "spot_var"]
        if obs_log_prices is not None:
            header.append("obs_log_price")
        w.writerow(header)
        for j in range(bundle.d):
            for i, t in enumerate(times):
                row = [j, f"{t:.6f}", repr(float(bundle.log_prices[j, i])),
                       repr(float(bundle.spot_var[j, i]))]
                if obs_log_prices is not None:
                    row.append(repr(float(obs_log_prices[j, i])))
                w.writerow(row)
