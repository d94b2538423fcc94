"""Exit criteria. Each test records one PASS/FAIL line shown after the run."""

import os
import time
from pathlib import Path

import numpy as np
import pytest
from scipy import stats

from conftest import record
from oracles import min_segments
from stylized._seeding import child_seeds
from stylized.feature_harness import TWO_SIDED_IDS, evaluate_features, two_sided_pvalue
from stylized.garch_baseline import GarchParams, fit_garch11, simulate_garch_values, unconditional_variance
from stylized.models import fit_decomposition
from stylized.multiscale_vol import (MultiscaleConfig, build_interval_family, calibrate_alpha_n,
                                     estimate_piecewise_vol, segment_count, single_interval_frequency)
from stylized.return_sim import gen_ztilde, inject_sign_acf
from stylized.series_io import ReturnSeries, load_series, to_returns
from stylized.stats_core import (abs_moments, heavy_tail_measure, kuiper_asymmetry, kuiper_distance, sign_acf1)
from stylized.vol_sim import LowFreqModel, explained_fraction, fit_low_freq, low_freq_path

pytestmark = pytest.mark.acceptance

DATA_ENV = "STYLIZED_DATA_DIR"


def brute_kuiper(a, b):
    pts = np.unique(np.concatenate([a, b]))
    grid = np.concatenate([pts, (pts[:-1] + pts[1:]) / 2, [pts[0] - 1, pts[-1] + 1]])
    fa = (a[None, :] <= grid[:, None]).mean(axis=1)
    fb = (b[None, :] <= grid[:, None]).mean(axis=1)
    return max(0.0, (fa - fb).max()) + max(0.0, (fb - fa).max())


def test_criterion_01_heavy_tail_reference_values():
    t0 = time.perf_counter()
    n = 23000
    u = np.arange(1, n + 1) / (n + 1)
    got = {nu: heavy_tail_measure(stats.t.ppf(u, nu)) for nu in (2, 3)}
    elapsed = time.perf_counter() - t0
    target = {2: 0.451, 3: 0.226}
    ok = all(abs(got[nu] - target[nu]) <= 0.01 for nu in (2, 3)) and elapsed < 1
    record(1, ok, f"nu=2: {got[2]:.4f} (target 0.451), nu=3: {got[3]:.4f} (target 0.226), {elapsed:.2f}s")
    assert ok


def test_criterion_02_ztilde_unit_variance():
    t0 = time.perf_counter()
    vs = {rho: float(np.var(gen_ztilde(1_000_000, rho, seed=200 + k))) for k, rho in enumerate((0.0, 0.2, 0.5, 1.0))}
    elapsed = time.perf_counter() - t0
    ok = all(0.995 <= v <= 1.005 for v in vs.values()) and elapsed < 10
    record(2, ok, ", ".join(f"rho={r}: {v:.4f}" for r, v in vs.items()) + f", {elapsed:.1f}s")
    assert ok


def test_criterion_03_calibration_self_consistency():
    t0 = time.perf_counter()
    a_n = calibrate_alpha_n(500, 0.9, nsim=10_000, seed=301)
    freq = single_interval_frequency(500, a_n, 2000, seed=302)
    elapsed = time.perf_counter() - t0
    ok = 0.88 <= freq <= 0.92 and elapsed < 120
    record(3, ok, f"alpha_n={a_n:.8f}, single-interval frequency {freq:.4f} over 2000 fresh runs, {elapsed:.1f}s")
    assert ok


def test_criterion_04_segmentation_minimality_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(401)
    mismatches = 0
    for _ in range(200):
        n = int(rng.integers(2, 13))
        x = rng.standard_normal(n) * np.exp(rng.normal(0, 1.5, n))
        a = float(rng.uniform(0.4, 0.999))
        fam = build_interval_family(n, "singleton_full")
        k = len(estimate_piecewise_vol(x, MultiscaleConfig(alpha_n=a), fam))
        mismatches += k != min_segments(x, a, "singleton_full")
    elapsed = time.perf_counter() - t0
    ok = mismatches == 0 and elapsed < 30
    record(4, ok, f"{200 - mismatches}/200 counts equal the exhaustive minimum, {elapsed:.1f}s")
    assert ok


def test_criterion_05_kuiper_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(501)
    bad = 0
    for _ in range(500):
        a = rng.normal(size=int(rng.integers(1, 15)))
        b = rng.normal(size=int(rng.integers(1, 15)))
        if rng.random() < 0.3:  # include ties
            a, b = np.round(a, 1), np.round(b, 1)
        bad += kuiper_distance(a, b) != brute_kuiper(a, b)
    elapsed = time.perf_counter() - t0
    ok = bad == 0 and elapsed < 5
    record(5, ok, f"{500 - bad}/500 exact matches, {elapsed:.2f}s")
    assert ok


def test_criterion_06_garch_recovery_and_variance():
    t0 = time.perf_counter()
    true = GarchParams(1e-6, 0.05, 0.90)
    x, _ = simulate_garch_values(true, 50_000, seed=601)
    est = fit_garch11(x)
    rel = {k: getattr(est, k) / getattr(true, k) - 1 for k in ("a0", "a1", "b1")}
    recovered = all(abs(v) <= 0.15 for v in rel.values())
    v = unconditional_variance(GarchParams(8.32e-07, 0.9106, 0.08543))
    three_digits = float(f"{v:.3g}")
    variance_ok = three_digits == 0.000207
    elapsed = time.perf_counter() - t0
    ok = recovered and variance_ok and elapsed < 60
    record(6, ok, "recovery " + ", ".join(f"{k} {100 * e:+.1f}%" for k, e in rel.items())
           + f" ({'ok' if recovered else 'fail'}); unconditional variance {v:.5g} -> {three_digits} vs 0.000207"
           + f" ({'ok' if variance_ok else 'fail'}), {elapsed:.1f}s")
    assert ok


@pytest.mark.slow
def test_criterion_07_harness_uniformity():
    t0 = time.perf_counter()
    n, nsim, runs, lag = 2000, 200, 100, 500
    workers = int(os.environ.get("STYLIZED_WORKERS", os.cpu_count() or 1))
    source, _ = simulate_garch_values(GarchParams(2e-6, 0.08, 0.9), n, seed=701)
    model = fit_decomposition(ReturnSeries(source), alpha_n=0.998)
    alpha_n = calibrate_alpha_n(n, 0.9, 1000, seed=702)
    data_seeds = child_seeds(703, runs, 9)
    pvals = np.empty((runs, 11))
    for k in range(runs):
        data = model.simulate(n, data_seeds[k])
        rep = evaluate_features(data, model, nsim=nsim, max_lag=lag, master_seed=704 + k, alpha_n=alpha_n,
                                workers=workers)
        pvals[k] = rep.p_values()
    elapsed = time.perf_counter() - t0
    frac = {fid: float(np.mean(pvals[:, fid - 1] < 0.05)) for fid in TWO_SIDED_IDS}
    ok = all(f <= 0.15 for f in frac.values())
    note = "" if elapsed < 900 else f" (runtime target 15 min with 8 workers; ran with {workers})"
    record(7, ok, "fraction p<0.05: " + ", ".join(f"{fid}*={f:.2f}" for fid, f in frac.items())
           + f", {elapsed / 60:.1f} min{note}")
    assert ok


def test_criterion_08_sign_acf_injection():
    t0 = time.perf_counter()
    vals = []
    for s in child_seeds(801, 1000):
        rng = np.random.default_rng(s)
        signs = rng.choice([-1.0, 1.0], 22381)
        vals.append(sign_acf1(inject_sign_acf(signs, 0.0577, rng)))
    m = float(np.mean(vals))
    elapsed = time.perf_counter() - t0
    ok = abs(m - 0.0577) <= 0.005 and elapsed < 120
    record(8, ok, f"mean sign ACF {m:.5f} (target 0.0577), {elapsed:.1f}s")
    assert ok


def _component_energy(m, j):
    single = LowFreqModel(m.n, m.freqs[j:j + 1], m.a[j:j + 1], m.b[j:j + 1])
    path = low_freq_path(single)
    return float(path @ path)


def test_criterion_09_low_frequency_round_trip():
    t0 = time.perf_counter()
    rng = np.random.default_rng(901)
    inputs = [rng.standard_normal(n) for n in (4, 5, 64, 999, 1000)]
    inputs += [np.cumsum(rng.standard_normal(2048)), np.repeat(rng.normal(size=30), 17), np.arange(10.0) ** 2]
    worst = 0.0
    for x in inputs:
        m = fit_low_freq(x, 1.0)
        worst = max(worst, float(np.max(np.abs(m.mlv + low_freq_path(m) - x))))
    thresholds_ok = True
    for x in inputs[2:]:
        for p in (0.5, 0.8, 0.95):
            m = fit_low_freq(x, p)
            # J - 1 in energy order drops the weakest selected frequency
            keep = np.delete(np.arange(m.J), np.argmin([_component_energy(m, j) for j in range(m.J)]))
            fewer = LowFreqModel(m.n, m.freqs[keep], m.a[keep], m.b[keep], m.mlv)
            thresholds_ok &= explained_fraction(x, m) >= p - 1e-12 and explained_fraction(x, fewer) < p
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-9 and thresholds_ok and elapsed < 5
    record(9, ok, f"max reconstruction error {worst:.2e}, explained-variance thresholds "
                  f"{'ok' if thresholds_ok else 'violated'}, {elapsed:.2f}s")
    assert ok


def _data_file():
    d = os.environ.get(DATA_ENV)
    if not d:
        return None
    for name in ("sp500.csv", "SP500.csv", "sp500_returns.csv"):
        if (Path(d) / name).is_file():
            return Path(d) / name
    return None


def test_criterion_10_data_gated():
    path = _data_file()
    if path is None:
        record(10, None, f"no S+P 500 file (set {DATA_ENV} to a directory containing sp500.csv)")
        pytest.skip(f"S+P 500 data file not present; set {DATA_ENV}")
    s = load_series(path)
    if not isinstance(s, ReturnSeries):
        s = to_returns(s)
    checks = {}
    checks["sign_acf1"] = (sign_acf1(s), abs(sign_acf1(s) - 0.0577) <= 0.0005)
    d = kuiper_asymmetry(s)[0]
    checks["kuiper"] = (d, abs(d - 0.0412) <= 0.001)
    h = heavy_tail_measure(s)
    checks["heavy_tail"] = (h, abs(h - 0.316) <= 0.005)
    m2 = abs_moments(s)[1]
    checks["mean_sq"] = (m2, abs(m2 / 0.000135 - 1) <= 0.02)
    g = fit_garch11(s)
    sims = np.array([abs_moments(simulate_garch_values(g, len(s), seed)[0])[1] for seed in child_seeds(1001, 1000)])
    q05, q95 = np.quantile(sims, [0.05, 0.95])
    checks["garch_band"] = ((q05, q95), abs(q05 / 0.000130 - 1) <= 0.1 and abs(q95 / 0.000345 - 1) <= 0.1)
    p = two_sided_pvalue(m2, sims)
    checks["garch_p"] = (p, abs(p - 0.079) <= 0.03)
    c76 = segment_count(s, 0.9999993)
    c283 = segment_count(s, 0.998)
    checks["segments"] = ((c76, c283), abs(c76 / 76 - 1) <= 0.1 and abs(c283 / 283 - 1) <= 0.1)
    ok = all(v[1] for v in checks.values())
    record(10, ok, "; ".join(f"{k}={v[0]}" for k, v in checks.items()))
    assert ok
