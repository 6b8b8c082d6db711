"""Irregular, asynchronous observation of dense panels.

Observation times live on the dense simulation grid (prices are read at
grid points, never interpolated): random gaps are quantized to whole grid
steps with a one-step minimum, and the window endpoints are always
included so every series spans the full window.
"""

from __future__ import annotations

import csv
from dataclasses import dataclass
from typing import List, Tuple, Union

import numpy as np

from .errors import InputFileError
from .microstructure import NoisyPanel
from .seeds import as_seed_sequence


@dataclass
class TickSeries:
    """One asset's observations: strictly increasing times (seconds) with
    matching log-prices, pinned to the observation window's endpoints."""

    asset_id: int
    times: np.ndarray
    log_prices: np.ndarray

    def __post_init__(self):
        self.times = np.asarray(self.times, dtype=float)
        self.log_prices = np.asarray(self.log_prices, dtype=float)
        if self.times.ndim != 1 or self.times.shape != self.log_prices.shape:
            raise ValueError("times and log_prices must be 1-d arrays of equal length")
        if len(self.times) < 2:
            raise ValueError("a tick series needs at least 2 observations")
        if np.any(np.diff(self.times) <= 0):
            raise ValueError("tick times must be strictly increasing")

    def __len__(self) -> int:
        return len(self.times)

    @property
    def n_increments(self) -> int:
        return len(self.times) - 1

    def increments(self) -> np.ndarray:
        return np.diff(self.log_prices)

    @property
    def window(self) -> Tuple[float, float]:
        return float(self.times[0]), float(self.times[-1])

    def rescaled(self, factor: float) -> "TickSeries":
        """Same observations with times multiplied by ``factor`` (unit changes)."""
        return TickSeries(self.asset_id, self.times * factor, self.log_prices)


@dataclass(frozen=True)
class PoissonSampling:
    mean_gap_s: float = 10.0
    kind = "poisson"

    @property
    def tag(self):
        return f"poisson:{self.mean_gap_s:g}"


@dataclass(frozen=True)
class RegularSampling:
    gap_s: float = 10.0
    kind = "regular"

    @property
    def tag(self):
        return f"regular:{self.gap_s:g}"


@dataclass(frozen=True)
class ShiftedPairSampling:
    n: int = 500
    shift_fraction: float = 0.5
    kind = "shifted_pair"

    @property
    def tag(self):
        return f"shifted:{self.n}:{self.shift_fraction:g}"


SamplingSpec = Union[PoissonSampling, RegularSampling, ShiftedPairSampling]


def _series_from_indices(panel: NoisyPanel, asset: int, idx: np.ndarray) -> TickSeries:
    times = panel.grid.t0 + panel.grid.step * idx
    return TickSeries(asset, times, panel.obs_log_prices[asset, idx])


def sample_poisson(panel: NoisyPanel, mean_gap_s: float, seed) -> List[TickSeries]:
    """Independent Poisson-style observation times for every asset.

    Inter-arrival gaps are whole numbers of grid steps, geometrically
    distributed with success probability ``step / mean_gap_s`` — the
    grid-quantized Poisson process with mean intensity exactly
    ``1 / mean_gap_s`` (exponential gaps snapped to at least one step).
    Both window endpoints are always observed, and ``mean_gap_s == step``
    saturates the grid.
    """
    step = panel.grid.step
    if mean_gap_s < step:
        raise ValueError(f"mean gap {mean_gap_s}s is below the grid step {step}s")
    p = step / mean_gap_s
    ss = as_seed_sequence(seed)
    out = []
    for asset in range(panel.d):
        rng = np.random.default_rng(
            np.random.SeedSequence(entropy=ss.entropy, spawn_key=ss.spawn_key + (asset,)))
        idx = [0]
        # draw gaps in bulk; top up in the rare case the draws run short
        expect = int(panel.grid.n_steps * p * 1.25) + 16
        while True:
            pos = idx[-1] + np.cumsum(rng.geometric(p, size=expect))
            keep = pos <= panel.grid.n_steps
            idx.extend(pos[keep].tolist())
            if not keep.all() or idx[-1] >= panel.grid.n_steps:
                break
            expect = max(8, expect // 4)
        arr = np.asarray(idx, dtype=np.int64)
        if arr[-1] != panel.grid.n_steps:
            arr = np.append(arr, panel.grid.n_steps)
        out.append(_series_from_indices(panel, asset, arr))
    return out


def resample_regular(panel: NoisyPanel, gap_s: float) -> List[TickSeries]:
    """Every k-th grid point; ``gap_s`` must be a multiple of the step."""
    step = panel.grid.step
    k = round(gap_s / step)
    if k < 1 or abs(k * step - gap_s) > 1e-9 * max(gap_s, step):
        raise ValueError(f"gap {gap_s}s is not a positive multiple of the grid step {step}s")
    idx = np.arange(0, panel.grid.n_steps + 1, k)
    if idx[-1] != panel.grid.n_steps:
        idx = np.append(idx, panel.grid.n_steps)
    return [_series_from_indices(panel, a, idx) for a in range(panel.d)]


def sample_shifted_pair(panel: NoisyPanel, n: int,
                        shift_fraction: float = 0.5) -> Tuple[TickSeries, TickSeries]:
    """Two deliberately misaligned regular designs over the window.

    Asset 0 is observed at fractions i/n of the window (i = 0..n); asset 1
    at (i + shift)/n for i = 1..n-1 with both endpoints pinned, so its
    interior times sit ``shift_fraction`` of a spacing to the right of
    asset 0's. ``shift_fraction = 0`` reproduces the synchronous design.
    Times are snapped to the dense grid, which must resolve the shift.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if not 0.0 <= shift_fraction < 1.0:
        raise ValueError("shift_fraction must lie in [0, 1)")
    if panel.d < 2:
        raise ValueError("shifted-pair sampling needs at least 2 assets")
    grid = panel.grid
    span = grid.t_end - grid.t0
    frac1 = np.arange(n + 1) / n
    frac2 = np.concatenate([[0.0], (np.arange(1, n) + shift_fraction) / n, [1.0]])
    idx1 = np.asarray([grid.index_of(grid.t0 + f * span) for f in frac1])
    idx2 = np.asarray([grid.index_of(grid.t0 + f * span) for f in frac2])
    for idx, label in ((idx1, "asset 0"), (idx2, "asset 1")):
        if np.any(np.diff(idx) <= 0):
            raise ValueError(
                f"dense grid too coarse to resolve the shifted design for {label}")
    return (_series_from_indices(panel, 0, idx1),
            _series_from_indices(panel, 1, idx2))


def sample(panel: NoisyPanel, spec: SamplingSpec, seed) -> List[TickSeries]:
    if spec.kind == "poisson":
        return sample_poisson(panel, spec.mean_gap_s, seed)
    if spec.kind == "regular":
        return resample_regular(panel, spec.gap_s)
    if spec.kind == "shifted_pair":
        return list(sample_shifted_pair(panel, spec.n, spec.shift_fraction))
    raise ValueError(f"unknown sampling spec {spec!r}")


# ---------------------------------------------------------------------------
# tick CSV interchange: asset,time_s,log_price sorted by (asset, time_s)
# ---------------------------------------------------------------------------

def write_ticks_csv(path, series_list: List[TickSeries]) -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["asset", "time_s", "log_price"])
        for s in sorted(series_list, key=lambda s: s.asset_id):
            for t, p in zip(s.times, s.log_prices):
                w.writerow([s.asset_id, repr(float(t)), repr(float(p))])


def read_ticks_csv(path) -> List[TickSeries]:
    by_asset: dict[int, list[tuple[float, float]]] = {}
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:3]] != ["asset", "time_s", "log_price"]:
            raise InputFileError(path, 1, "expected header 'asset,time_s,log_price'")
        for i, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) < 3:
                raise InputFileError(path, i, f"expected 3 columns, got {len(row)}")
            try:
                asset = int(row[0])
                t = float(row[1])
                p = float(row[2])
            except ValueError as exc:
                raise InputFileError(path, i, str(exc)) from None
            by_asset.setdefault(asset, []).append((t, p))
    out = []
    for asset in sorted(by_asset):
        rows = by_asset[asset]
        times = np.asarray([r[0] for r in rows])
        prices = np.asarray([r[1] for r in rows])
        if np.any(np.diff(times) <= 0):
            raise InputFileError(path, 0, f"asset {asset}: times not strictly increasing")
        out.append(TickSeries(asset, times, prices))
    return out
