import numpy as np
import pytest

from fourierspot import TickSeries


@pytest.fixture
def rng():
    return np.random.default_rng(20260809)


def random_ticks(rng, asset_id, n_ticks, window=(0.0, 1.0), scale=0.02):
    """Random strictly increasing times pinned to the window, BM prices."""
    t0, t1 = window
    interior = np.sort(rng.uniform(t0, t1, max(n_ticks - 2, 0)))
    times = np.unique(np.concatenate([[t0], interior, [t1]]))
    prices = np.cumsum(rng.normal(size=len(times))) * scale
    return TickSeries(asset_id, times, prices)


def random_panel_ticks(rng, d, n_ticks, window=(0.0, 1.0)):
    return [random_ticks(rng, j, n_ticks) for j in range(d)]
