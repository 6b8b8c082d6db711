"""Additive market-microstructure noise on top of efficient prices.

Five contamination schemes: price rounding to a tick, i.i.d. Gaussian
noise, autocorrelated (exponentially mean-reverting) noise, noise whose
driver is correlated with the price driver, and a heteroskedastic variant
whose level follows a U-shaped intraday profile. Noise levels are
calibrated per asset and per path against the variance of the efficient
price's 10-second returns, so "ratio 2" means a noise variance of twice
that benchmark.

The mean-reverting noise is simulated with the exact Gaussian transition
(AR(1) with coefficient ``exp(-theta_eta * step)``), not an Euler step: at
``theta_eta`` around 0.3/s on a 2-second grid an Euler step would distort
the stationary variance by over 40% and break the calibration.
``theta_eta`` is a mean-reversion rate per second.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable, Optional, Union

import numpy as np
import scipy.signal

from .errors import ConfigurationError
from .path_sim import PanelBundle
from .seeds import rng_from


@dataclass
class NoisyPanel:
    """Observed (contaminated) panel; ``obs_log_prices`` = base + noise."""

    base: PanelBundle
    obs_log_prices: np.ndarray
    noise_paths: np.ndarray
    spec: "NoiseSpec"

    @property
    def grid(self):
        return self.base.grid

    @property
    def d(self) -> int:
        return self.base.d


def reference_return_variance(base: PanelBundle, gap_s: float = 10.0) -> np.ndarray:
    """Per-asset variance of regularly spaced ``gap_s``-second returns of
    the efficient log-price (the noise-calibration benchmark)."""
    step = base.grid.step
    k = round(gap_s / step)
    if abs(k * step - gap_s) > 1e-9 * gap_s or k < 1:
        raise ValueError(f"grid step {step}s does not divide the reference gap {gap_s}s")
    sub = base.log_prices[:, ::k]
    if sub.shape[1] < 3:
        raise ValueError("need at least 2 reference returns to calibrate noise")
    return np.var(np.diff(sub, axis=1), axis=1)


def apply_rounding(base: PanelBundle, r: float) -> NoisyPanel:
    """Round prices to the tick ``r``: obs = log(round(exp(X)/r) * r).

    Idempotent; the log-price level (default log 100) sets the severity.
    """
    if r <= 0:
        raise ValueError(f"tick size must be positive, got {r}")
    x = base.log_prices
    xmax = float(np.max(x))
    if xmax > 700.0 or math.exp(min(xmax, 700.0)) / r > 2.0**52:
        raise ConfigurationError(
            "price level too large for rounding at this tick size")
    obs = np.log(np.round(np.exp(x) / r) * r)
    return NoisyPanel(base, obs, obs - x, Rounding(r))


def apply_iid_noise(base: PanelBundle, ratio: float, seed,
                    ref_gap_s: float = 10.0) -> NoisyPanel:
    """I.i.d. Gaussian noise at every grid point with variance
    ``ratio * var(10-second efficient returns)``, per asset."""
    if ratio < 0:
        raise ValueError("noise variance ratio must be nonnegative")
    var_ref = reference_return_variance(base, ref_gap_s)
    rng = rng_from(seed)
    eta = rng.standard_normal((base.d, base.grid.n_points))
    eta *= np.sqrt(ratio * var_ref)[:, None]
    return NoisyPanel(base, base.log_prices + eta, eta, IidNoise(ratio))


def heteroskedastic_profile(t, sigma_bar: float):
    """Intraday noise-level profile on normalized day time ``t`` in [0, 1]:
    highest at the open/close, lowest mid-day."""
    return sigma_bar * (0.5 * (np.cos(2 * np.pi * np.asarray(t, dtype=float)) + 1.0) * 0.9 + 0.1)


def apply_ou_noise(base: PanelBundle, theta_eta: float, sigma2_target: Optional[float],
                   rho_eta: float, seed,
                   sigma_profile: Optional[Callable] = None,
                   ref_gap_s: float = 10.0, spec: "NoiseSpec" = None) -> NoisyPanel:
    """Mean-reverting noise, optionally price-correlated and time-varying.

    Parameters
    ----------
    theta_eta : mean-reversion rate per second (>= 0).
    sigma2_target : stationary noise variance as a multiple of the
        10-second reference return variance. Ignored when a profile is
        given.
    rho_eta : correlation between the noise driver's increments and the
        asset's own price-driver increments; must lie in (-1, 0].
    sigma_profile : optional callable on normalized day time returning the
        noise standard deviation in units of the reference return standard
        deviation (e.g. :func:`heteroskedastic_profile`). A constant
        profile reproduces the flat case exactly.

    The path starts in the local stationary distribution and follows the
    exact AR(1) transition, with the innovation variance tracking the
    profile.
    """
    if theta_eta < 0:
        raise ValueError("theta_eta must be nonnegative")
    if not -1.0 < rho_eta <= 0.0:
        raise ValueError(f"rho_eta must lie in (-1, 0], got {rho_eta}")
    if sigma_profile is None and (sigma2_target is None or sigma2_target < 0):
        raise ValueError("sigma2_target must be nonnegative when no profile is given")

    grid = base.grid
    n = grid.n_steps
    var_ref = reference_return_variance(base, ref_gap_s)  # (d,)
    t_norm = (grid.times() - grid.t0) / (grid.t_end - grid.t0)
    if sigma_profile is None:
        prof2 = np.full(n + 1, sigma2_target)
    else:
        prof2 = np.asarray(sigma_profile(t_norm), dtype=float) ** 2
    target_var = var_ref[:, None] * prof2[None, :]  # (d, n+1)

    phi = math.exp(-theta_eta * grid.step)
    rng = rng_from(seed)
    fresh = rng.standard_normal((base.d, n + 1))  # [:, 0] seeds eta(0)
    if rho_eta != 0.0:
        drivers = rho_eta * base.price_shocks + math.sqrt(1 - rho_eta**2) * fresh[:, 1:]
    else:
        drivers = fresh[:, 1:]

    x = np.empty((base.d, n + 1))
    x[:, 0] = np.sqrt(target_var[:, 0]) * fresh[:, 0]
    x[:, 1:] = np.sqrt(target_var[:, 1:] * (1.0 - phi * phi)) * drivers
    eta = scipy.signal.lfilter([1.0], [1.0, -phi], x, axis=1)
    if spec is None:
        spec = (CorrelatedOUNoise(theta_eta, rho_eta, sigma2_target) if rho_eta != 0.0
                else OUNoise(theta_eta, sigma2_target))
    return NoisyPanel(base, base.log_prices + eta, eta, spec)


# ---------------------------------------------------------------------------
# declarative noise specifications
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class NoNoise:
    kind = "none"

    def apply(self, base: PanelBundle, seed=None) -> NoisyPanel:
        return NoisyPanel(base, base.log_prices,
                          np.zeros_like(base.log_prices), self)

    @property
    def tag(self) -> str:
        return "none"


@dataclass(frozen=True)
class Rounding:
    r: float = 0.01
    kind = "rounding"

    def apply(self, base, seed=None):
        return apply_rounding(base, self.r)

    @property
    def tag(self):
        return f"rounding:{self.r:g}"


@dataclass(frozen=True)
class IidNoise:
    ratio: float = 2.0
    kind = "iid"

    def apply(self, base, seed):
        return apply_iid_noise(base, self.ratio, seed)

    @property
    def tag(self):
        return f"iid:{self.ratio:g}"


@dataclass(frozen=True)
class OUNoise:
    theta_eta: float = 0.3
    ratio: float = 2.0
    kind = "ou"

    def apply(self, base, seed):
        return apply_ou_noise(base, self.theta_eta, self.ratio, 0.0, seed)

    @property
    def tag(self):
        return f"ou:{self.theta_eta:g}"


@dataclass(frozen=True)
class CorrelatedOUNoise:
    theta_eta: float = 0.3
    rho_eta: float = -0.3
    ratio: float = 2.0
    kind = "corr"

    def apply(self, base, seed):
        return apply_ou_noise(base, self.theta_eta, self.ratio, self.rho_eta, seed)

    @property
    def tag(self):
        return f"corr:{self.rho_eta:g}"


@dataclass(frozen=True)
class HeteroskedasticNoise:
    sigma_bar: float = 3.0
    theta_eta: float = 0.3
    rho_eta: float = -0.3
    kind = "het"

    def apply(self, base, seed):
        profile = lambda t: heteroskedastic_profile(t, self.sigma_bar)  # noqa: E731
        return apply_ou_noise(base, self.theta_eta, None, self.rho_eta, seed,
                              sigma_profile=profile, spec=self)

    @property
    def tag(self):
        return f"het:{self.sigma_bar:g}"


NoiseSpec = Union[NoNoise, Rounding, IidNoise, OUNoise, CorrelatedOUNoise,
                  HeteroskedasticNoise]
