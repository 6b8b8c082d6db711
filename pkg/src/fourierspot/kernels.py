"""Kernel dispatch: compiled extension when available, NumPy otherwise.

Set ``FOURIERSPOT_PURE_PYTHON=1`` to force the fallback (used by the
benchmark and the lane-equivalence tests).
"""

from __future__ import annotations

import os

from . import _kernels_py

if os.environ.get("FOURIERSPOT_PURE_PYTHON", "") not in ("", "0"):
    _impl = _kernels_py
    HAVE_COMPILED = False
else:
    try:
        from . import _kernels as _impl  # type: ignore[attr-defined]

        HAVE_COMPILED = True
    except ImportError:
        _impl = _kernels_py
        HAVE_COMPILED = False

nudft_coeffs = _impl.nudft_coeffs
volterra_variance = _impl.volterra_variance
heston_core = _impl.heston_core

__all__ = ["nudft_coeffs", "volterra_variance", "heston_core", "HAVE_COMPILED"]
