import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from stylized._seeding import child_seeds
from stylized.feature_harness import (FEATURES, ONE_SIDED_IDS, TWO_SIDED_IDS, FeatureReport, FeatureValue,
                                      HarnessError, evaluate_features, one_sided_pvalue, render_report,
                                      two_sided_pvalue)
from stylized.garch_baseline import GarchParams
from stylized.models import GarchModel, ResampleModel
from stylized.multiscale_vol import segment_count
from stylized.stats_core import (abs_moments, end_return, heavy_tail_measure, kuiper_asymmetry, lag1_acf,
                                 sign_acf1)

N, LAG, ALPHA_N = 600, 100, 0.9999


@pytest.fixture(scope="module")
def model():
    return GarchModel(GarchParams(2e-6, 0.08, 0.9), label="g")


@pytest.fixture(scope="module")
def data(model):
    return model.simulate(N, 12345)


@pytest.fixture(scope="module")
def report(data, model):
    return evaluate_features(data, model, nsim=100, max_lag=LAG, master_seed=7, alpha_n=ALPHA_N)


class Recorder:
    """Model wrapper that remembers every seed it was asked for."""

    def __init__(self, inner):
        self.inner, self.label, self.seen = inner, "rec", []

    def simulate(self, n, seed):
        self.seen.append(tuple(seed.spawn_key))
        return self.inner.simulate(n, seed)


class Failing:
    label = "failing"

    def simulate(self, n, seed):
        if seed.spawn_key[-1] == 3:
            raise RuntimeError("boom")
        return np.random.default_rng(seed).standard_normal(n)


# -- p-values --------------------------------------------------------------------

def test_two_sided_examples():
    assert two_sided_pvalue(5, np.arange(1, 11)) == 0.5
    assert two_sided_pvalue(0, np.arange(1, 11)) == 0
    assert two_sided_pvalue(11, np.arange(1, 11)) == 0
    assert two_sided_pvalue(50, np.arange(1, 102)) == pytest.approx(0.5, abs=0.01)


def test_one_sided_examples():
    assert one_sided_pvalue(0, np.arange(1, 11)) == 1
    assert one_sided_pvalue(11, np.arange(1, 11)) == 0
    assert one_sided_pvalue(8, np.arange(1, 11)) == 0.3


def test_pvalue_errors():
    with pytest.raises(ValueError):
        two_sided_pvalue(1.0, [])
    with pytest.raises(ValueError):
        one_sided_pvalue(1.0, [])


@settings(max_examples=100, deadline=None)
@given(st.lists(st.integers(-5, 5), min_size=1, max_size=30), st.integers(-6, 6), st.randoms())
def test_pvalue_permutation_invariant_and_bounded(sims, e, rnd):
    shuffled = list(sims)
    rnd.shuffle(shuffled)
    p2 = two_sided_pvalue(e, sims)
    assert 0 <= p2 <= 0.5 and p2 == two_sided_pvalue(e, shuffled)
    p1 = one_sided_pvalue(e, sims)
    assert 0 <= p1 <= 1 and p1 == one_sided_pvalue(e, shuffled)


# -- report structure ------------------------------------------------------------

def test_feature_table():
    assert [f[0] for f in FEATURES] == list(range(1, 12))
    assert TWO_SIDED_IDS == (1, 2, 3, 4, 6, 7, 8, 9) and ONE_SIDED_IDS == (5, 10, 11)


def test_report_shape(report):
    assert [f.id for f in report.features] == list(range(1, 12))
    for f in report.features:
        assert f.q05 <= f.mean <= f.q95 or f.q05 == f.q95
        assert 0 <= f.p_value <= (0.5 if f.sided == "two" else 1.0)
    assert report.nsim == 100 and report.alpha_n == ALPHA_N and report.model_label == "g"


def test_report_invariants():
    fv = [FeatureValue(i, n, 0, 0, 0, 0, 0, 0.5, s) for i, n, s in FEATURES]
    with pytest.raises(ValueError):
        FeatureReport(fv[:10], "m", 100, 100, 0, 0.9, 10)
    bad = list(fv)
    bad[4] = FeatureValue(5, "x", 0, 0, 0, 0, 0, 0.5, "two")
    with pytest.raises(ValueError):
        FeatureReport(bad, "m", 100, 100, 0, 0.9, 10)


def test_empirical_features_match_standalone(report, data):
    emp = {f.id: f.empirical for f in report.features}
    assert emp[1] == sign_acf1(data)
    assert emp[2] == heavy_tail_measure(data)
    assert emp[3] == kuiper_asymmetry(data)[0]
    assert emp[4] == segment_count(data, ALPHA_N)
    assert emp[6] == lag1_acf(np.abs(data))
    assert emp[7] == end_return(data)
    assert (emp[8], emp[9]) == abs_moments(data)


def test_degenerate_resampler(data):
    rep = evaluate_features(data, ResampleModel(data), nsim=100, max_lag=LAG, master_seed=1, alpha_n=ALPHA_N)
    for f in rep.features:
        assert f.p_value == (0.5 if f.sided == "two" else 1.0)


def test_reproducible_and_worker_independent(report, data, model):
    again = evaluate_features(data, model, nsim=100, max_lag=LAG, master_seed=7, alpha_n=ALPHA_N, workers=2)
    assert again.to_dict() == report.to_dict()
    other = evaluate_features(data, model, nsim=100, max_lag=LAG, master_seed=8, alpha_n=ALPHA_N)
    assert other.to_dict() != report.to_dict()


def test_batches_are_disjoint(data, model):
    rec = Recorder(model)
    evaluate_features(data, rec, nsim=100, nsim_ref=120, max_lag=LAG, master_seed=3, alpha_n=ALPHA_N)
    assert len(rec.seen) == 220 and len(set(rec.seen)) == 220
    ref = {s for s in rec.seen if s[0] == 1}
    dist = {s for s in rec.seen if s[0] == 2}
    assert len(ref) == 120 and len(dist) == 100
    assert {tuple(s.spawn_key) for s in child_seeds(3, 120, 1)} == ref


def test_model_failure_reports_seed(data):
    with pytest.raises(HarnessError, match="index 3"):
        evaluate_features(data, Failing(), nsim=100, max_lag=LAG, master_seed=1, alpha_n=ALPHA_N)


def test_preconditions(data, model):
    with pytest.raises(ValueError):
        evaluate_features(data, model, nsim=50, max_lag=LAG, alpha_n=ALPHA_N)
    with pytest.raises(ValueError):
        evaluate_features(data, model, nsim=100, max_lag=N, alpha_n=ALPHA_N)


def test_calibrated_alpha_n_default(data, model):
    rep = evaluate_features(data, model, nsim=100, max_lag=LAG, master_seed=2, calibration_nsim=200)
    assert 0.99 < rep.alpha_n < 1


# -- rendering -------------------------------------------------------------------

def test_render_text(report):
    text = render_report(report)
    head = text.splitlines()[0].split()
    assert head == ["1*", "2*", "3*", "4*", "5", "6*", "7*", "8*", "9*", "10", "11"]
    row = text.splitlines()[2].split()
    assert row[0] == "g" and len(row) == 12
    assert all(len(c.split(".")[1]) == 2 for c in row[1:])


def test_render_json_round_trip(report):
    back = FeatureReport.from_dict(json.loads(render_report(report, "json")))
    assert back == report
    for a, b in zip(back.features, report.features):
        assert a.sim_quantiles == b.sim_quantiles


def test_render_csv_and_rows(report):
    lines = render_report(report, "csv", rows=[report]).splitlines()
    assert lines[0].startswith("model,id,name") and len(lines) == 23
    assert len(render_report(report, rows=[report]).splitlines()) == 4


def test_render_guards(report):
    with pytest.raises(ValueError):
        render_report(None)
    with pytest.raises(ValueError):
        render_report(report, "xml")
