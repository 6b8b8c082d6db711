"""Experiment orchestration: scenario sweeps, parameter grid search, the
asynchronicity sensitivity study, estimator comparison, and an append-only
result store.

Everything is deterministic in (config, master_seed): per-path seeds are
derived from the canonical scenario hash and the path index, and ensemble
reductions run in path order with compensated summation, so results are
independent of worker count and scheduling.
"""

from __future__ import annotations

import csv
import dataclasses
import hashlib
import json
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial
from pathlib import Path
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from . import metrics, seeds
from .errors import InputFileError
from .fourier_estimator import (CoeffPanel, FreqParams, SpotCovEstimate,
                                default_eval_times, estimate_classical,
                                estimate_pdf, select_freq)
from .microstructure import (CorrelatedOUNoise, HeteroskedasticNoise, IidNoise,
                             NoNoise, NoiseSpec, OUNoise, Rounding)
from .path_sim import (TRADING_DAY_S, ConstantVolParams, CorrelationSpec,
                       DenseGrid, HestonParams, ModelParams, RoughHestonParams,
                       SV1FParams, SV2FParams, one_day_grid, simulate)
from .sampling import (PoissonSampling, RegularSampling, SamplingSpec,
                       ShiftedPairSampling, sample, sample_shifted_pair)

WORKERS_ENV = "FOURIERSPOT_WORKERS"

MODEL_KINDS = {
    "heston": HestonParams,
    "sv1f": SV1FParams,
    "sv2f": SV2FParams,
    "rough_heston": RoughHestonParams,
    "constant": ConstantVolParams,
}
NOISE_KINDS = {
    "none": NoNoise,
    "rounding": Rounding,
    "iid": IidNoise,
    "ou": OUNoise,
    "corr": CorrelatedOUNoise,
    "het": HeteroskedasticNoise,
}
SAMPLING_KINDS = {
    "poisson": PoissonSampling,
    "regular": RegularSampling,
    "shifted_pair": ShiftedPairSampling,
}


def default_workers() -> int:
    env = os.environ.get(WORKERS_ENV)
    if env:
        return max(1, int(env))
    return os.cpu_count() or 1


def parallel_map(fn, items, workers: Optional[int] = None, chunksize: int = 1):
    """Ordered map, inline for a single worker."""
    workers = default_workers() if workers is None else workers
    items = list(items)
    if workers <= 1 or len(items) <= 1:
        return [fn(x) for x in items]
    with ProcessPoolExecutor(max_workers=min(workers, len(items))) as ex:
        return list(ex.map(fn, items, chunksize=chunksize))


def _spec_to_dict(obj) -> dict:
    out = {"kind": obj.kind}
    for f in dataclasses.fields(obj):
        val = getattr(obj, f.name)
        out[f.name] = None if val is None else (val if not isinstance(val, np.ndarray) else val.tolist())
    return out


def _spec_from_dict(dct: dict, registry: dict):
    kwargs = {k: v for k, v in dct.items() if k != "kind"}
    return registry[dct["kind"]](**kwargs)


@dataclass(frozen=True)
class ScenarioConfig:
    """One cell of the experiment design."""

    model: ModelParams = field(default_factory=HestonParams)
    noise: NoiseSpec = field(default_factory=NoNoise)
    sampling: SamplingSpec = field(default_factory=PoissonSampling)
    d: int = 2
    n_paths: int = 100
    master_seed: int = 20260809
    cross_asset_rho: float = 0.312
    grid_step_s: float = 2.0
    day_length_s: float = TRADING_DAY_S
    eval_grid_minutes: float = 20.0
    eval_margin_steps: int = 1
    alpha: Optional[float] = None
    beta: Optional[float] = None
    freq: Optional[FreqParams] = None

    @property
    def name(self) -> str:
        return f"{self.model.kind}/{self.noise.tag}/{self.sampling.tag}/d{self.d}"

    def to_dict(self) -> dict:
        out = dataclasses.asdict(self)
        out["model"] = _spec_to_dict(self.model)
        out["noise"] = _spec_to_dict(self.noise)
        out["sampling"] = _spec_to_dict(self.sampling)
        out["freq"] = None if self.freq is None else dataclasses.asdict(self.freq)
        return out

    @staticmethod
    def from_dict(dct: dict) -> "ScenarioConfig":
        kwargs = dict(dct)
        kwargs["model"] = _spec_from_dict(dct["model"], MODEL_KINDS)
        kwargs["noise"] = _spec_from_dict(dct["noise"], NOISE_KINDS)
        kwargs["sampling"] = _spec_from_dict(dct["sampling"], SAMPLING_KINDS)
        kwargs["freq"] = None if dct.get("freq") is None else FreqParams(**dct["freq"])
        return ScenarioConfig(**kwargs)

    def canonical_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, separators=(",", ":"))

    def scenario_hash(self) -> str:
        return hashlib.sha256(self.canonical_json().encode()).hexdigest()[:12]

    def seed_key(self) -> int:
        return int(hashlib.sha256(self.canonical_json().encode()).hexdigest()[:15], 16)

    def grid(self) -> DenseGrid:
        return one_day_grid(self.grid_step_s, self.day_length_s)

    def corr(self) -> CorrelationSpec:
        return CorrelationSpec(cross_asset_rho=self.cross_asset_rho)

    def expected_ticks(self) -> int:
        span = self.day_length_s
        if self.sampling.kind == "poisson":
            return max(4, round(span / self.sampling.mean_gap_s))
        if self.sampling.kind == "regular":
            return max(4, round(span / self.sampling.gap_s))
        return self.sampling.n

    def noise_shrinks_frequency(self) -> bool:
        """Whether the rule-based cutting frequency drops to the noisy
        setting (high-frequency contamination beyond rounding/mild i.i.d.)."""
        if self.noise.kind in ("none", "rounding"):
            return False
        if self.noise.kind == "iid":
            return self.noise.ratio >= 2.0
        return True

    def resolve_freq(self) -> FreqParams:
        if self.freq is not None:
            return self.freq
        return select_freq(self.expected_ticks(), alpha=self.alpha, beta=self.beta,
                           noise_present=self.noise_shrinks_frequency())

    def eval_times_day(self) -> np.ndarray:
        spacing = self.eval_grid_minutes * 60.0 / self.day_length_s
        return default_eval_times((0.0, 1.0), spacing, self.eval_margin_steps)


def enumerate_noise_specs() -> List[NoiseSpec]:
    """The 16 contamination settings of the full design: no noise, two
    rounding ticks, four i.i.d. levels, three autocorrelation rates, three
    price correlations, three heteroskedastic intensities."""
    specs: List[NoiseSpec] = [NoNoise()]
    specs += [Rounding(r) for r in (0.01, 0.05)]
    specs += [IidNoise(v) for v in (1.0, 1.5, 2.0, 2.5)]
    specs += [OUNoise(theta_eta=t) for t in (0.2, 0.3, 0.4)]
    specs += [CorrelatedOUNoise(rho_eta=r) for r in (-0.1, -0.3, -0.5)]
    specs += [HeteroskedasticNoise(sigma_bar=s) for s in (3.0, 3.5, 4.0)]
    return specs


DEFAULT_MODELS = ("heston", "sv1f", "sv2f", "rough_heston")


def enumerate_scenarios(models: Sequence[str] = DEFAULT_MODELS,
                        noises: Optional[Sequence[NoiseSpec]] = None,
                        **common) -> List[ScenarioConfig]:
    """Cartesian model x noise design (64 scenarios at the defaults)."""
    noises = enumerate_noise_specs() if noises is None else list(noises)
    return [ScenarioConfig(model=MODEL_KINDS[m](), noise=nz, **common)
            for m in models for nz in noises]


# ---------------------------------------------------------------------------
# scenario runs
# ---------------------------------------------------------------------------

def simulate_scenario_path(cfg: ScenarioConfig, path_index: int):
    """Simulate, contaminate and sample one path; returns (ticks in day
    units, truth matrices on the eval grid, bundle)."""
    key = cfg.seed_key()
    bundle = simulate(cfg.model, cfg.corr(), cfg.grid(), cfg.d,
                      seeds.stream(cfg.master_seed, key, path_index, seeds.PRICE),
                      day_length_s=cfg.day_length_s)
    noisy = cfg.noise.apply(bundle, seeds.stream(cfg.master_seed, key,
                                                 path_index, seeds.NOISE))
    ticks = sample(noisy, cfg.sampling, seeds.stream(cfg.master_seed, key,
                                                     path_index, seeds.SAMPLING))
    day = cfg.day_length_s
    day_ticks = [t.rescaled(1.0 / day) for t in ticks]
    eval_day = cfg.eval_times_day()
    truth = bundle.true_cov_series(eval_day * day)
    return day_ticks, eval_day, truth, bundle


def _classical_orders(freq: FreqParams) -> Tuple[int, int]:
    return freq.N, max(1, math.floor(math.sqrt(freq.N)))


def _scenario_path_task(cfg: ScenarioConfig, estimator: str, path_index: int):
    day_ticks, eval_day, truth, _ = simulate_scenario_path(cfg, path_index)
    freq = cfg.resolve_freq()
    if estimator == "pdf":
        est = estimate_pdf(day_ticks, freq, eval_day, window=(0.0, 1.0))
    elif estimator == "classical":
        n_dir, m_fej = _classical_orders(freq)
        est = estimate_classical(day_ticks, n_dir, m_fej, eval_day, window=(0.0, 1.0))
    else:
        raise ValueError(f"unknown estimator {estimator!r}")
    return est, truth


def run_scenario(cfg: ScenarioConfig, estimator: str = "pdf",
                 workers: Optional[int] = None,
                 keep_estimates: bool = False):
    """Run all paths of one scenario; returns (ScoreReport, details)."""
    task = partial(_scenario_path_task, cfg, estimator)
    results = parallel_map(task, range(cfg.n_paths), workers,
                           chunksize=max(1, cfg.n_paths // (8 * default_workers())))
    estimates = [r[0] for r in results]
    truths = [r[1] for r in results]
    report = metrics.mise(estimates, truths, keep_per_path=True)
    details = {
        "min_eig_ratio": float(min(
            (e.min_eigs / np.maximum(np.einsum("tii->t", e.matrices), 1.0)).min()
            for e in estimates)),
        "freq": cfg.resolve_freq(),
    }
    if keep_estimates:
        details["estimates"] = estimates
        details["truths"] = truths
    return report, details


# ---------------------------------------------------------------------------
# result store
# ---------------------------------------------------------------------------

_INDEX_COLUMNS = ["record_id", "scenario", "model", "noise", "sampling", "d",
                  "estimator", "N", "M", "mise", "rmise", "psd_rate",
                  "psd_rate_by_path", "n_paths", "wall_s", "master_seed", "file"]


class ResultStore:
    """Append-only store: one JSON per record plus an index CSV."""

    def __init__(self, root):
        self.root = Path(root)
        self.records_dir = self.root / "records"
        self.records_dir.mkdir(parents=True, exist_ok=True)
        self.index_path = self.root / "index.csv"
        if not self.index_path.exists():
            with open(self.index_path, "w", newline="") as fh:
                csv.writer(fh).writerow(_INDEX_COLUMNS)

    @staticmethod
    def record_id(cfg: ScenarioConfig, estimator: str, freq: FreqParams) -> str:
        return f"{cfg.scenario_hash()}_{estimator}_N{freq.N}_M{freq.M:g}"

    def path_for(self, record_id: str) -> Path:
        return self.records_dir / f"{record_id}.json"

    def has(self, record_id: str) -> bool:
        return self.path_for(record_id).exists()

    def load(self, record_id: str) -> dict:
        with open(self.path_for(record_id)) as fh:
            return json.load(fh)

    def add(self, cfg: ScenarioConfig, estimator: str, freq: FreqParams,
            report: metrics.ScoreReport, wall_s: float) -> str:
        rid = self.record_id(cfg, estimator, freq)
        payload = {
            "record_id": rid,
            "config": cfg.to_dict(),
            "estimator": estimator,
            "freq": dataclasses.asdict(freq),
            "report": report.to_dict(),
            "wall_s": wall_s,
        }
        with open(self.path_for(rid), "w") as fh:
            json.dump(payload, fh, indent=1)
        with open(self.index_path, "a", newline="") as fh:
            csv.writer(fh).writerow([
                rid, cfg.name, cfg.model.kind, cfg.noise.tag, cfg.sampling.tag,
                cfg.d, estimator, freq.N, f"{freq.M:.6g}",
                f"{report.mise:.8e}", f"{report.rmise:.8e}",
                f"{report.psd_rate:.6f}", f"{report.psd_rate_by_path:.6f}",
                report.n_paths, f"{wall_s:.3f}", cfg.master_seed, rid + ".json",
            ])
        return rid

    def index_rows(self) -> List[dict]:
        with open(self.index_path, newline="") as fh:
            return list(csv.DictReader(fh))


def run_scenarios(configs: Sequence[ScenarioConfig], store: ResultStore,
                  estimators: Sequence[str] = ("pdf",), force: bool = False,
                  workers: Optional[int] = None,
                  progress=None) -> List[str]:
    """One record per (scenario, estimator); existing records are skipped
    unless ``force``. Returns the record ids that were (re)computed."""
    new_records = []
    for cfg in configs:
        for estimator in estimators:
            freq = cfg.resolve_freq()
            rid = store.record_id(cfg, estimator, freq)
            if store.has(rid) and not force:
                continue
            start = time.perf_counter()
            report, _ = run_scenario(cfg, estimator, workers)
            store.add(cfg, estimator, freq, report, time.perf_counter() - start)
            new_records.append(rid)
            if progress is not None:
                progress(rid, report)
    return new_records


# ---------------------------------------------------------------------------
# (N, M) grid search
# ---------------------------------------------------------------------------

GRID_ALPHAS = (1.0, 5 / 6, 0.75, 2 / 3, 0.5, 1 / 3)
GRID_BETAS = (5 / 6, 0.75, 2 / 3, 0.5, 4 / 9)


@dataclass
class GridSearchResult:
    alphas: Tuple[float, ...]
    betas: Tuple[float, ...]
    mise_var: np.ndarray       # (len(alphas), len(betas))
    mise_cov: np.ndarray
    se_var: np.ndarray
    se_cov: np.ndarray
    per_path_cov: np.ndarray   # (K, len(alphas), len(betas))
    per_path_var: np.ndarray
    n_by_alpha: Tuple[int, ...]
    best: Tuple[float, float]

    def weighted(self) -> np.ndarray:
        return 0.1 * self.mise_var + 0.9 * self.mise_cov

    def write_csv(self, path) -> None:
        """Covariance-error grid, rows = alpha, columns = beta."""
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["alpha\\beta"] + [f"{b:g}" for b in self.betas])
            for i, a in enumerate(self.alphas):
                w.writerow([f"{a:g}"] + [f"{v:.6e}" for v in self.mise_cov[i]])


def _grid_path_task(cfg: ScenarioConfig, alphas, betas, path_index: int):
    day_ticks, eval_day, truth, _ = simulate_scenario_path(cfg, path_index)
    n_ref = cfg.expected_ticks()
    n_freqs = [select_freq(n_ref, alpha=a).N for a in alphas]
    panel = CoeffPanel(day_ticks, max(n_freqs), window=(0.0, 1.0))
    e_var = np.empty((len(alphas), len(betas)))
    e_cov = np.empty((len(alphas), len(betas)))
    for ia, n_freq in enumerate(n_freqs):
        for ib, b in enumerate(betas):
            freq = FreqParams(N=n_freq, M=float(max(n_freq, 1)) ** b,
                              alpha=alphas[ia], beta=b, n_ref=n_ref)
            est = panel.estimate(freq, eval_day)
            err = metrics.integrated_sq_err(est, truth)
            e_var[ia, ib] = err[0, 0]
            e_cov[ia, ib] = err[0, 1]
    return e_var, e_cov


def run_grid_search(cfg: ScenarioConfig,
                    alphas: Sequence[float] = GRID_ALPHAS,
                    betas: Sequence[float] = GRID_BETAS,
                    workers: Optional[int] = None) -> GridSearchResult:
    """Exhaustive (alpha, beta) search at d = 2, scored by the integrated
    squared error of the first asset's variance and of the (1,2)
    covariance; the winner minimizes 0.1*var + 0.9*cov."""
    if cfg.d != 2:
        raise ValueError("the grid search design uses d = 2")
    if not alphas or not betas:
        raise ValueError("empty parameter grid")
    task = partial(_grid_path_task, cfg, tuple(alphas), tuple(betas))
    results = parallel_map(task, range(cfg.n_paths), workers, chunksize=4)
    per_var = np.stack([r[0] for r in results])
    per_cov = np.stack([r[1] for r in results])
    k = per_var.shape[0]
    mise_var = np.array([[math.fsum(per_var[:, i, j]) / k for j in range(len(betas))]
                         for i in range(len(alphas))])
    mise_cov = np.array([[math.fsum(per_cov[:, i, j]) / k for j in range(len(betas))]
                         for i in range(len(alphas))])
    se_var = per_var.std(axis=0, ddof=1) / math.sqrt(k)
    se_cov = per_cov.std(axis=0, ddof=1) / math.sqrt(k)
    weighted = 0.1 * mise_var + 0.9 * mise_cov
    flat = int(np.argmin(weighted))
    best = (tuple(alphas)[flat // len(betas)], tuple(betas)[flat % len(betas)])
    n_ref = cfg.expected_ticks()
    return GridSearchResult(tuple(alphas), tuple(betas), mise_var, mise_cov,
                            se_var, se_cov, per_cov, per_var,
                            tuple(select_freq(n_ref, alpha=a).N for a in alphas),
                            best)


# ---------------------------------------------------------------------------
# asynchronicity sensitivity study
# ---------------------------------------------------------------------------

@dataclass
class SensitivityResult:
    rho: float
    n_values: np.ndarray
    sync: metrics.BiasMseCurves
    asyn: metrics.BiasMseCurves

    def write_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["N", "rel_bias_sync", "rel_bias_async",
                        "rel_mse_sync", "rel_mse_async",
                        "mse_se_sync", "mse_se_async"])
            for i, n in enumerate(self.n_values):
                w.writerow([int(n),
                            f"{self.sync.bias[i]:.8e}", f"{self.asyn.bias[i]:.8e}",
                            f"{self.sync.mse[i]:.8e}", f"{self.asyn.mse[i]:.8e}",
                            f"{self.sync.mse_se[i]:.8e}", f"{self.asyn.mse_se[i]:.8e}"])


def _sensitivity_path_task(rho: float, n: int, shift: float, n_values,
                           t_eval: float, beta: float, master_seed: int,
                           day_length_s: float, path_index: int):
    grid = DenseGrid(t0=0.0, step=day_length_s / (2 * n), n_steps=2 * n)
    cfg_key = int(hashlib.sha256(
        f"sensitivity|{rho!r}|{n}|{shift!r}".encode()).hexdigest()[:15], 16)
    bundle = simulate(ConstantVolParams(sigma2=1.0), CorrelationSpec(cross_asset_rho=rho),
                      grid, 2, seeds.stream(master_seed, cfg_key, path_index, seeds.PRICE),
                      day_length_s=day_length_s)
    noisy = NoNoise().apply(bundle)
    pair_async = sample_shifted_pair(noisy, n, shift)
    pair_sync = sample_shifted_pair(noisy, n, 0.0)
    day = day_length_s
    n_max = int(max(n_values))
    out = np.empty((2, len(n_values)))
    for row, pair in enumerate((pair_sync, pair_async)):
        panel = CoeffPanel([t.rescaled(1.0 / day) for t in pair], n_max,
                           window=(0.0, 1.0))
        for i, n_freq in enumerate(n_values):
            n_freq = int(n_freq)
            freq = FreqParams(N=n_freq, M=float(max(n_freq, 1)) ** beta)
            est = panel.estimate(freq, [t_eval])
            out[row, i] = est.matrices[0, 0, 1]
    return out


def run_sensitivity_study(rho: float, n: int = 500, n_paths: int = 1000,
                          n_values: Optional[Sequence[int]] = None,
                          shift: float = 0.5, t_eval: float = 0.5,
                          beta: float = 4 / 9, master_seed: int = 20260809,
                          day_length_s: float = TRADING_DAY_S,
                          workers: Optional[int] = None) -> SensitivityResult:
    """Covariance bias/MSE against the cutting frequency for a correlated
    Brownian pair, observed synchronously vs. on deliberately shifted
    grids (localization fixed at M = N^beta)."""
    if not -1.0 <= rho <= 1.0:
        raise ValueError(f"correlation must lie in [-1, 1], got {rho}")
    if n_values is None:
        n_values = range(0, n + 1)
    n_values = [int(v) for v in n_values]
    if any(v < 0 or v > n for v in n_values):
        raise ValueError("swept frequencies must lie in [0, n]")
    task = partial(_sensitivity_path_task, rho, n, shift, tuple(n_values),
                   t_eval, beta, master_seed, day_length_s)
    results = parallel_map(task, range(n_paths), workers, chunksize=8)
    stacked = np.stack(results)  # (K, 2, len(n_values))
    sync = metrics.bias_mse_vs_n(stacked[:, 0, :], n_values, truth=rho,
                                 keep_per_path=True)
    asyn = metrics.bias_mse_vs_n(stacked[:, 1, :], n_values, truth=rho,
                                 keep_per_path=True)
    return SensitivityResult(rho, np.asarray(n_values), sync, asyn)


# ---------------------------------------------------------------------------
# estimator comparison (internal estimators and external estimate files)
# ---------------------------------------------------------------------------

def load_external_estimates(path, eval_times_s: np.ndarray, d: int,
                            n_paths: int) -> List[np.ndarray]:
    """Read per-path external estimates: CSV ``path,time_s,j,jp,value``
    with values in variance per day on the scenario's evaluation grid."""
    t_index = {round(float(t), 6): i for i, t in enumerate(eval_times_s)}
    mats = np.full((n_paths, len(eval_times_s), d, d), np.nan)
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader, None)
        if header is None or [h.strip() for h in header[:5]] != ["path", "time_s", "j", "jp", "value"]:
            raise InputFileError(path, 1, "expected header 'path,time_s,j,jp,value'")
        for i, row in enumerate(reader, start=2):
            if not row or (len(row) == 1 and not row[0].strip()):
                continue
            if len(row) < 5:
                raise InputFileError(path, i, f"expected 5 columns, got {len(row)}")
            try:
                k = int(row[0]); t = float(row[1]); j = int(row[2]); jp = int(row[3])
                val = float(row[4])
            except ValueError as exc:
                raise InputFileError(path, i, str(exc)) from None
            if not 0 <= k < n_paths:
                raise InputFileError(path, i, f"path index {k} out of range")
            if not (0 <= j < d and 0 <= jp < d):
                raise InputFileError(path, i, f"asset index ({j},{jp}) out of range")
            key = round(t, 6)
            if key not in t_index:
                raise InputFileError(path, i, f"time {t} not on the evaluation grid")
            mats[k, t_index[key], j, jp] = val
    if np.any(np.isnan(mats)):
        raise InputFileError(path, 0, "missing (path, time, entry) combinations")
    return [mats[k] for k in range(n_paths)]


def _external_report(cfg: ScenarioConfig, matrices: List[np.ndarray],
                     workers: Optional[int] = None) -> metrics.ScoreReport:
    truths = parallel_map(partial(_truth_task, cfg), range(cfg.n_paths),
                          workers, chunksize=8)
    eval_day = cfg.eval_times_day()
    estimates = []
    for k, m in enumerate(matrices):
        sym_resid = np.max(np.abs(m - np.transpose(m, (0, 2, 1))), axis=(1, 2))
        min_eigs = np.array([np.linalg.eigvalsh(0.5 * (mm + mm.T))[0] for mm in m])
        estimates.append(SpotCovEstimate(
            eval_day, m, "external", FreqParams(N=1, M=1.0), (0.0, 1.0),
            min_eigs, sym_resid))
    return metrics.mise(estimates, truths)


def _truth_task(cfg: ScenarioConfig, path_index: int) -> np.ndarray:
    _, eval_day, truth, _ = simulate_scenario_path(cfg, path_index)
    return truth


def run_comparison(configs: Sequence[ScenarioConfig], store: ResultStore,
                   estimators: Sequence[str] = ("pdf",),
                   external: Optional[Dict[str, str]] = None,
                   force: bool = False,
                   workers: Optional[int] = None) -> List[dict]:
    """Score every estimator on every scenario; records land in the store
    and a tidy row list is returned. External estimators are supplied as
    estimate files (see :func:`load_external_estimates`) and are scored,
    per scenario, against the same simulated truth."""
    rows = []
    run_scenarios(configs, store, estimators, force=force, workers=workers)
    for cfg in configs:
        for estimator in estimators:
            rid = store.record_id(cfg, estimator, cfg.resolve_freq())
            rec = store.load(rid)
            rows.append(_comparison_row(cfg, estimator, rec["report"]))
        for name, path in (external or {}).items():
            eval_s = cfg.eval_times_day() * cfg.day_length_s
            mats = load_external_estimates(path, eval_s, cfg.d, cfg.n_paths)
            report = _external_report(cfg, mats, workers)
            rows.append(_comparison_row(cfg, f"external:{name}", report.to_dict()))
    return rows


def _comparison_row(cfg: ScenarioConfig, estimator: str, report: dict) -> dict:
    return {
        "scenario": cfg.name,
        "model": cfg.model.kind,
        "noise": cfg.noise.tag,
        "sampling": cfg.sampling.tag,
        "d": cfg.d,
        "estimator": estimator,
        "mise": report["mise"],
        "rmise": report["rmise"],
        "psd_pct": 100.0 * report["psd_rate"],
        "psd_pct_by_path": 100.0 * report["psd_rate_by_path"],
    }


def write_comparison_csv(rows: Sequence[dict], path) -> None:
    cols = ["scenario", "model", "noise", "sampling", "d", "estimator",
            "mise", "rmise", "psd_pct", "psd_pct_by_path"]
    with open(path, "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=cols)
        w.writeheader()
        for row in rows:
            w.writerow({c: row[c] for c in cols})


# ---------------------------------------------------------------------------
# report generation (pure views over the store)
# ---------------------------------------------------------------------------

def write_report_tables(store: ResultStore, out_dir) -> List[Path]:
    """Regenerate summary tables from the index alone: one tidy summary
    plus estimator x scenario pivots of MISE and %PSD per noise family."""
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    rows = store.index_rows()
    written = []
    summary = out_dir / "summary.csv"
    with open(summary, "w", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["scenario", "model", "noise", "sampling", "d", "estimator",
                    "N", "M", "mise", "rmise", "psd_pct", "n_paths"])
        for r in sorted(rows, key=lambda r: (r["model"], r["noise"], int(r["d"]), r["estimator"])):
            w.writerow([r["scenario"], r["model"], r["noise"], r["sampling"],
                        r["d"], r["estimator"], r["N"], r["M"], r["mise"],
                        r["rmise"], f"{100 * float(r['psd_rate']):.2f}", r["n_paths"]])
    written.append(summary)

    families = sorted({r["noise"].split(":")[0] for r in rows})
    for fam in families:
        fam_rows = [r for r in rows if r["noise"].split(":")[0] == fam]
        cols = sorted({(r["model"], r["noise"], int(r["d"])) for r in fam_rows})
        ests = sorted({r["estimator"] for r in fam_rows})
        path = out_dir / f"pivot_{fam}.csv"
        with open(path, "w", newline="") as fh:
            w = csv.writer(fh)
            w.writerow(["estimator", "metric"] + [f"{m}/{nz}/d{d}" for m, nz, d in cols])
            for est in ests:
                by_key = {(r["model"], r["noise"], int(r["d"])): r
                          for r in fam_rows if r["estimator"] == est}
                w.writerow([est, "mise"] + [
                    (f"{float(by_key[c]['mise']):.4e}" if c in by_key else "") for c in cols])
                w.writerow([est, "psd_pct"] + [
                    (f"{100 * float(by_key[c]['psd_rate']):.2f}" if c in by_key else "")
                    for c in cols])
        written.append(path)
    return written


# ---------------------------------------------------------------------------
# YAML experiment configs
# ---------------------------------------------------------------------------

def _parse_noise_tag(tag: str) -> NoiseSpec:
    parts = str(tag).split(":")
    kind = parts[0]
    if kind == "none":
        return NoNoise()
    if kind == "rounding":
        return Rounding(float(parts[1]))
    if kind == "iid":
        return IidNoise(float(parts[1]))
    if kind == "ou":
        return OUNoise(theta_eta=float(parts[1]))
    if kind == "corr":
        return CorrelatedOUNoise(rho_eta=float(parts[1]))
    if kind == "het":
        return HeteroskedasticNoise(sigma_bar=float(parts[1]))
    raise ValueError(f"unknown noise tag {tag!r}")


def _parse_sampling_tag(tag: str) -> SamplingSpec:
    parts = str(tag).split(":")
    kind = parts[0]
    if kind == "poisson":
        return PoissonSampling(float(parts[1]) if len(parts) > 1 else 10.0)
    if kind == "regular":
        return RegularSampling(float(parts[1]) if len(parts) > 1 else 10.0)
    if kind == "shifted":
        n = int(parts[1]) if len(parts) > 1 else 500
        shift = float(parts[2]) if len(parts) > 2 else 0.5
        return ShiftedPairSampling(n, shift)
    raise ValueError(f"unknown sampling tag {tag!r}")


def load_experiment_config(path) -> dict:
    """Parse a YAML experiment file into scenario configs plus options.

    Schema (all keys optional unless noted)::

        master_seed: 20260809
        n_paths: 100
        dims: [2, 5, 10]
        models: [heston, sv1f, sv2f, rough_heston]   # or "all"
        noises: all            # or a list of tags like iid:2.5, corr:-0.3
        sampling: poisson:10
        eval_grid_minutes: 20
        estimators: [pdf]      # pdf | classical
    """
    import yaml

    with open(path) as fh:
        raw = yaml.safe_load(fh) or {}
    models = raw.get("models", "all")
    if models == "all":
        models = list(DEFAULT_MODELS)
    noises_raw = raw.get("noises", "all")
    if noises_raw == "all":
        noises = enumerate_noise_specs()
    else:
        noises = [_parse_noise_tag(t) for t in noises_raw]
    sampling_spec = _parse_sampling_tag(raw.get("sampling", "poisson:10"))
    dims = raw.get("dims", [2])
    common = {}
    for key in ("n_paths", "master_seed", "eval_grid_minutes", "cross_asset_rho",
                "grid_step_s", "day_length_s", "alpha", "beta"):
        if key in raw:
            common[key] = raw[key]
    configs = [
        ScenarioConfig(model=MODEL_KINDS[m](), noise=nz, sampling=sampling_spec,
                       d=int(d), **common)
        for d in np.atleast_1d(dims) for m in models for nz in noises
    ]
    return {
        "configs": configs,
        "estimators": list(raw.get("estimators", ["pdf"])),
    }
