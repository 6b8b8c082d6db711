import numpy as np
import pytest

from fourierspot import (FreqParams, ScoreReport, SpotCovEstimate,
                         bias_mse_vs_n, integrated_sq_err, mise, psd_rate,
                         psd_rate_by_path, weighted_selection)


def _estimate(times, mats, tag="pdf"):
    mats = np.asarray(mats, dtype=float)
    min_eigs = np.array([np.linalg.eigvalsh(0.5 * (m + m.T))[0] for m in mats])
    resid = np.max(np.abs(mats - np.transpose(mats, (0, 2, 1))), axis=(1, 2))
    return SpotCovEstimate(np.asarray(times, dtype=float), mats, tag,
                           FreqParams(N=1, M=1.0), (0.0, 1.0), min_eigs, resid)


def test_mise_zero_when_exact():
    times = np.linspace(0, 1, 5)
    truth = np.stack([np.eye(2) * (1 + t) for t in times])
    est = _estimate(times, truth.copy())
    rep = mise([est], [truth])
    assert rep.mise == 0.0
    assert rep.rmise == 0.0
    assert rep.psd_rate == 1.0


def test_mise_constant_offset_is_c_squared():
    # d = 1, eval grid spanning [0, 1]: integral of c^2 over the window
    times = np.linspace(0, 1, 21)
    truth = np.full((21, 1, 1), 0.3)
    c = 0.07
    est = _estimate(times, truth + c)
    rep = mise([est], [truth])
    assert rep.mise == pytest.approx(c**2, rel=1e-12)
    assert rep.rmise == pytest.approx(c**2 / 0.3**2, rel=1e-12)


def test_mise_matches_independent_quadrature(rng):
    times = np.sort(rng.uniform(0, 1, 9))
    truth = rng.normal(size=(9, 2, 2))
    mats = truth + rng.normal(size=(9, 2, 2)) * 0.1
    est = _estimate(times, mats)
    got = integrated_sq_err(est, truth)
    # independent oracle: interval-average quadrature, entry by entry
    want = np.zeros((2, 2))
    for j in range(2):
        for i in range(2):
            f = (mats[:, j, i] - truth[:, j, i]) ** 2
            acc = 0.0
            for k in range(len(times) - 1):
                acc += 0.5 * (f[k] + f[k + 1]) * (times[k + 1] - times[k])
            want[j, i] = acc
    np.testing.assert_allclose(got, want, rtol=1e-12)
    rep = mise([est], [truth])
    assert rep.mise == pytest.approx(want.sum() / 4, rel=1e-12)


def test_mise_validates_grids(rng):
    times = np.linspace(0, 1, 4)
    truth = np.zeros((4, 1, 1))
    est_a = _estimate(times, np.zeros((4, 1, 1)))
    est_b = _estimate(times + 0.5, np.zeros((4, 1, 1)))
    with pytest.raises(ValueError):
        mise([est_a, est_b], [truth, truth])  # grids differ across paths
    with pytest.raises(ValueError):
        mise([est_a], [np.zeros((4, 2, 2))])  # shape mismatch
    with pytest.raises(ValueError):
        mise([], [])


def test_rmise_excludes_zero_truth():
    times = np.linspace(0, 1, 3)
    truth = np.zeros((3, 1, 1))
    est = _estimate(times, truth + 0.1)
    rep = mise([est], [truth])
    assert rep.mise > 0
    assert rep.rmise == 0.0
    assert rep.n_rmise_excluded == 3


def test_psd_rate_flags_negative_and_asymmetric():
    times = [0.0, 1.0]
    good = np.stack([np.eye(2), np.eye(2)])
    est_good = _estimate(times, good)
    assert psd_rate([est_good]) == 1.0

    negative = np.stack([np.diag([1.0, -0.1]), np.eye(2)])
    est_neg = _estimate(times, negative)
    assert psd_rate([est_neg]) == 0.5
    assert psd_rate_by_path([est_good, est_neg]) == 0.5

    skew = np.stack([np.array([[1.0, 0.3], [0.1, 1.0]]), np.eye(2)])
    est_skew = _estimate(skew_times := times, skew)
    assert psd_rate([est_skew]) == 0.5  # asymmetry alone disqualifies


def test_weighted_selection_values():
    assert weighted_selection(0.0, 0.0) == 0.0
    assert weighted_selection(1.0, 0.0) == pytest.approx(0.1)
    assert weighted_selection(0.5, 0.2) == pytest.approx(0.23)
    assert weighted_selection(1.0, 1.0) < weighted_selection(1.0, 2.0)
    with pytest.raises(ValueError):
        weighted_selection(-1.0, 0.0)


def test_bias_mse_curves(rng):
    vals = 0.3 + rng.normal(size=(400, 3)) * 0.05
    curves = bias_mse_vs_n(vals, [10, 20, 30], truth=0.3)
    assert curves.relative
    assert np.all(np.abs(curves.bias) < 4 * curves.bias_se + 1e-12)
    np.testing.assert_allclose(curves.mse, ((vals - 0.3) / 0.3 ** 1).var(axis=0)
                               + ((vals - 0.3) / 0.3).mean(axis=0) ** 2, rtol=1e-10)

    absolute = bias_mse_vs_n(vals, [1, 2, 3], truth=0.0)
    assert not absolute.relative  # zero truth reported as absolute errors


def test_score_report_roundtrip(tmp_path):
    rep = ScoreReport(mise=1.0, rmise=2.0, psd_rate=1.0, psd_rate_by_path=1.0,
                      per_entry_mise=np.eye(2), n_paths=3)
    out = tmp_path / "report.json"
    rep.to_json(out)
    import json

    back = json.loads(out.read_text())
    assert back["mise"] == 1.0 and back["n_paths"] == 3


def test_psd_rate_invariant_under_permutation(rng):
    times = np.linspace(0, 1, 4)
    mats = rng.normal(size=(4, 3, 3))
    mats = mats + np.transpose(mats, (0, 2, 1))  # symmetric, mixed sign
    est = _estimate(times, mats)
    perm = np.array([2, 0, 1])
    est_p = _estimate(times, mats[:, perm][:, :, perm])
    assert psd_rate([est]) == psd_rate([est_p])
