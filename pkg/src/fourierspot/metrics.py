"""Scoring of covariance trajectory estimates against the simulated truth.

Integrals over the evaluation grid use the trapezoid rule; path ensembles
are reduced with compensated summation in path order, so results do not
depend on how the paths were scheduled across workers.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from .fourier_estimator import SpotCovEstimate

RMISE_TRUTH_FLOOR = 1e-12  # |V| below this is excluded from relative errors
PSD_EIG_TOL = 1e-10
PSD_SYM_TOL = 1e-10


@dataclass
class ScoreReport:
    """Ensemble accuracy and positivity summary."""

    mise: float
    rmise: float
    psd_rate: float
    psd_rate_by_path: float
    per_entry_mise: np.ndarray
    n_paths: int
    n_rmise_excluded: int = 0
    per_path_mise: Optional[np.ndarray] = None
    bias_curve: Optional[np.ndarray] = None
    mse_curve: Optional[np.ndarray] = None

    def to_dict(self) -> dict:
        out = {
            "mise": self.mise,
            "rmise": self.rmise,
            "psd_rate": self.psd_rate,
            "psd_rate_by_path": self.psd_rate_by_path,
            "per_entry_mise": np.asarray(self.per_entry_mise).tolist(),
            "n_paths": self.n_paths,
            "n_rmise_excluded": self.n_rmise_excluded,
        }
        if self.per_path_mise is not None:
            out["per_path_mise"] = np.asarray(self.per_path_mise).tolist()
        return out

    def to_json(self, path) -> None:
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=2)


def trapezoid_weights(times: np.ndarray) -> np.ndarray:
    times = np.asarray(times, dtype=float)
    if times.size == 1:
        return np.ones(1)
    w = np.empty_like(times)
    w[0] = 0.5 * (times[1] - times[0])
    w[-1] = 0.5 * (times[-1] - times[-2])
    w[1:-1] = 0.5 * (times[2:] - times[:-2])
    return w


def integrated_sq_err(estimate: SpotCovEstimate, truth: np.ndarray,
                      relative: bool = False) -> np.ndarray:
    """Entrywise integral of the (relative) squared error over the
    evaluation grid; shape (d, d). For the relative version, entries where
    the truth is below the floor contribute zero (callers count them)."""
    diff2 = (estimate.matrices - truth) ** 2
    if relative:
        mask = np.abs(truth) >= RMISE_TRUTH_FLOOR
        with np.errstate(divide="ignore", invalid="ignore"):
            diff2 = np.where(mask, diff2 / truth**2, 0.0)
    w = trapezoid_weights(estimate.eval_times)
    return np.tensordot(w, diff2, axes=(0, 0))


def _fsum_mean(values: Sequence[float]) -> float:
    return math.fsum(values) / max(len(values), 1)


def mise(estimates: Sequence[SpotCovEstimate], truths: Sequence[np.ndarray],
         keep_per_path: bool = False) -> ScoreReport:
    """Mean integrated squared error over a path ensemble.

    ``mise`` averages over paths and all d^2 entries; ``rmise`` divides
    entrywise by the squared truth (entries with truth below the floor are
    excluded and counted). Per-entry integrals are averaged over paths
    without the d^2 normalization.
    """
    if len(estimates) == 0:
        raise ValueError("need at least one path")
    if len(estimates) != len(truths):
        raise ValueError("estimates and truths differ in length")
    ref_times = np.asarray(estimates[0].eval_times)
    d = estimates[0].d
    per_path = []
    per_path_rel = []
    entry_acc = [[[] for _ in range(d)] for _ in range(d)]
    n_excluded = 0
    psd_flags_all: List[np.ndarray] = []
    for est, truth in zip(estimates, truths):
        truth = np.asarray(truth, dtype=float)
        if est.matrices.shape != truth.shape:
            raise ValueError(
                f"estimate shape {est.matrices.shape} != truth shape {truth.shape}")
        if est.eval_times.shape != ref_times.shape or np.any(
                np.abs(est.eval_times - ref_times) > 1e-9):
            raise ValueError("evaluation grids differ across paths")
        ent = integrated_sq_err(est, truth)
        rel = integrated_sq_err(est, truth, relative=True)
        n_excluded += int(np.sum(np.abs(truth) < RMISE_TRUTH_FLOOR))
        per_path.append(float(ent.sum()) / d**2)
        per_path_rel.append(float(rel.sum()) / d**2)
        for j in range(d):
            for i in range(d):
                entry_acc[j][i].append(float(ent[j, i]))
        psd_flags_all.append(est.psd_flags())

    per_entry = np.array([[_fsum_mean(entry_acc[j][i]) for i in range(d)]
                          for j in range(d)])
    flags = np.concatenate(psd_flags_all)
    by_path = [bool(np.all(f)) for f in psd_flags_all]
    return ScoreReport(
        mise=_fsum_mean(per_path),
        rmise=_fsum_mean(per_path_rel),
        psd_rate=float(np.mean(flags)),
        psd_rate_by_path=float(np.mean(by_path)),
        per_entry_mise=per_entry,
        n_paths=len(estimates),
        n_rmise_excluded=n_excluded,
        per_path_mise=np.asarray(per_path) if keep_per_path else None,
    )


def psd_rate(estimates: Sequence[SpotCovEstimate]) -> float:
    """Fraction of (path, time) matrices that are symmetric PSD within
    tolerance (eigenvalue floor relative to trace, symmetry residual
    relative to the largest entry)."""
    flags = np.concatenate([est.psd_flags() for est in estimates])
    return float(np.mean(flags))


def psd_rate_by_path(estimates: Sequence[SpotCovEstimate]) -> float:
    """Fraction of paths whose every evaluation time is symmetric PSD."""
    return float(np.mean([bool(np.all(est.psd_flags())) for est in estimates]))


def weighted_selection(mise_var: float, mise_cov: float) -> float:
    """Parameter-selection criterion: 0.1 * variance error + 0.9 *
    covariance error (covariance entries dominate a covariance matrix)."""
    if mise_var < 0 or mise_cov < 0:
        raise ValueError("errors must be nonnegative")
    return 0.1 * mise_var + 0.9 * mise_cov


@dataclass
class BiasMseCurves:
    """Pointwise bias/MSE of a covariance entry against a frequency sweep."""

    n_values: np.ndarray
    bias: np.ndarray
    mse: np.ndarray
    bias_se: np.ndarray
    mse_se: np.ndarray
    relative: bool
    truth: float
    n_paths: int = 0
    per_path_sq_err: Optional[np.ndarray] = None  # (K, len(n_values)), scaled


def bias_mse_vs_n(estimates_by_path: np.ndarray, n_values, truth: float,
                  keep_per_path: bool = False) -> BiasMseCurves:
    """Curves from per-path estimates of one covariance entry at one time.

    ``estimates_by_path`` has shape (K, len(n_values)). When the truth is
    (numerically) zero, absolute errors are reported and flagged instead
    of relative ones.
    """
    vals = np.asarray(estimates_by_path, dtype=float)
    if vals.ndim != 2:
        raise ValueError("expected a (paths, frequencies) array")
    n_paths = vals.shape[0]
    relative = abs(truth) >= RMISE_TRUTH_FLOOR
    scale = truth if relative else 1.0
    err = (vals - truth) / scale
    sq = err**2
    root_k = math.sqrt(max(n_paths, 1))
    return BiasMseCurves(
        n_values=np.asarray(list(n_values)),
        bias=err.mean(axis=0),
        mse=sq.mean(axis=0),
        bias_se=err.std(axis=0, ddof=1) / root_k if n_paths > 1 else np.zeros(vals.shape[1]),
        mse_se=sq.std(axis=0, ddof=1) / root_k if n_paths > 1 else np.zeros(vals.shape[1]),
        relative=relative,
        truth=truth,
        n_paths=n_paths,
        per_path_sq_err=sq if keep_per_path else None,
    )
