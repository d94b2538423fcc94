"""Monte-Carlo p-values for eleven quantified stylized facts.

Features (two-sided unless noted):

1. lag-1 autocorrelation of the signs
2. heavy-tail measure
3. Kuiper distance between positive and absolute negative returns
4. number of constant-volatility segments
5. distance of the |r| ACF to the model's mean ACF (one-sided)
6. lag-1 autocorrelation of |r|
7. end return
8. mean |r|
9. mean r^2
10. mean absolute deviation of order statistics from the model mean (one-sided)
11. Kuiper distance of the returns to the model mean order statistics (one-sided)

The model's mean ACF and mean order statistics come from a first batch of
simulations; the reference distributions of all features come from a
second, independent batch.
"""

from __future__ import annotations

import csv
import io
import json
import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from ._seeding import child_seeds
from .multiscale_vol import build_interval_family, calibrate_alpha_n, segment_count
from .series_io import ReturnSeries
from .stats_core import (abs_moments, acf_values, d_acf, end_return, heavy_tail_measure, kuiper_asymmetry,
                         kuiper_distance, lag1_acf, quantile_mad, sign_acf1)

log = logging.getLogger(__name__)

FEATURES = (
    (1, "sign_acf1", "two"),
    (2, "heavy_tails", "two"),
    (3, "asymmetry_kuiper", "two"),
    (4, "vol_segments", "two"),
    (5, "abs_acf_distance", "one"),
    (6, "abs_acf1", "two"),
    (7, "end_return", "two"),
    (8, "mean_abs", "two"),
    (9, "mean_sq", "two"),
    (10, "quantile_mad", "one"),
    (11, "quantile_kuiper", "one"),
)
TWO_SIDED_IDS = tuple(i for i, _, s in FEATURES if s == "two")
ONE_SIDED_IDS = tuple(i for i, _, s in FEATURES if s == "one")


class HarnessError(RuntimeError):
    pass


def two_sided_pvalue(empirical: float, sims) -> float:
    """``min(#{sims <= e}, #{sims >= e}) / nsim``, capped at 0.5.

    Ties count on both sides, so with ties the raw minimum can exceed one
    half; the cap keeps the two-sided scale at ``[0, 0.5]``.
    """
    s = np.asarray(sims, dtype=np.float64)
    if s.size == 0:
        raise ValueError("no simulated values")
    p1 = np.count_nonzero(s <= empirical) / s.size
    p2 = np.count_nonzero(s >= empirical) / s.size
    return float(min(p1, p2, 0.5))


def one_sided_pvalue(empirical: float, sims) -> float:
    """Fraction of simulated values at least as large as the empirical one."""
    s = np.asarray(sims, dtype=np.float64)
    if s.size == 0:
        raise ValueError("no simulated values")
    return float(np.count_nonzero(s >= empirical) / s.size)


@dataclass
class FeatureValue:
    id: int
    name: str
    empirical: float
    q05: float
    mean: float
    q95: float
    sd: float
    p_value: float
    sided: str

    @property
    def sim_quantiles(self) -> tuple[float, float, float, float]:
        return self.q05, self.mean, self.q95, self.sd


@dataclass
class FeatureReport:
    features: list
    model_label: str
    nsim: int
    nsim_ref: int
    master_seed: int
    alpha_n: float
    max_lag: int
    data_label: str = ""
    simulated: dict = field(default_factory=dict, repr=False)  # id -> array, optional

    def __post_init__(self):
        ids = [f.id for f in self.features]
        if sorted(ids) != list(range(1, 12)):
            raise ValueError(f"a report needs exactly features 1..11, got {ids}")
        for f in self.features:
            expected = "two" if f.id in TWO_SIDED_IDS else "one"
            if f.sided != expected:
                raise ValueError(f"feature {f.id} must be {expected}-sided")

    def p_values(self) -> np.ndarray:
        return np.array([f.p_value for f in sorted(self.features, key=lambda f: f.id)])

    def min_p(self) -> float:
        return float(self.p_values().min())

    def to_dict(self) -> dict:
        d = {k: getattr(self, k) for k in ("model_label", "nsim", "nsim_ref", "master_seed", "alpha_n",
                                          "max_lag", "data_label")}
        d["features"] = [asdict(f) for f in self.features]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "FeatureReport":
        feats = [FeatureValue(**f) for f in d["features"]]
        return cls(feats, d["model_label"], d["nsim"], d["nsim_ref"], d["master_seed"], d["alpha_n"],
                   d["max_lag"], d.get("data_label", ""))


# -- per-series computations -----------------------------------------------------

@dataclass(frozen=True)
class _Context:
    n: int
    alpha_n: float
    max_lag: int
    method: str
    mean_acf: np.ndarray | None = None
    qm: np.ndarray | None = None


_WORKER_CTX: _Context | None = None


def _init_worker(ctx):
    global _WORKER_CTX
    _WORKER_CTX = ctx


def series_features(x, ctx: _Context) -> np.ndarray:
    """All eleven features of one series (index 0 is feature 1)."""
    x = np.asarray(x, dtype=np.float64)
    ax = np.abs(x)
    out = np.empty(11)
    out[0] = sign_acf1(x)
    out[1] = heavy_tail_measure(x)
    out[2] = kuiper_asymmetry(x)[0]
    out[3] = segment_count(x, ctx.alpha_n, _family(ctx.n))
    out[4] = d_acf(acf_values(ax, ctx.max_lag), ctx.mean_acf)
    out[5] = lag1_acf(ax)
    out[6] = end_return(x, ctx.method)
    out[7], out[8] = abs_moments(x)
    xs = np.sort(x)
    out[9] = quantile_mad(xs, ctx.qm)
    out[10] = kuiper_distance(xs, ctx.qm)
    return out


_FAMILIES: dict = {}


def _family(n):
    if n not in _FAMILIES:
        _FAMILIES[n] = build_interval_family(n)
    return _FAMILIES[n]


def _draw(model, n, seed, where):
    try:
        x = np.asarray(model.simulate(n, seed), dtype=np.float64)
    except Exception as exc:
        raise HarnessError(f"model {getattr(model, 'label', model)!r} failed at {where}: {exc}") from exc
    if x.shape != (n,) or not np.all(np.isfinite(x)):
        raise HarnessError(f"model returned an invalid path at {where}")
    return x


def _reference_job(job):
    model, seed, where = job
    ctx = _WORKER_CTX
    x = _draw(model, ctx.n, seed, where)
    return acf_values(np.abs(x), ctx.max_lag), np.sort(x)


def _feature_job(job):
    model, seed, where = job
    x = _draw(model, _WORKER_CTX.n, seed, where)
    try:
        return series_features(x, _WORKER_CTX)
    except Exception as exc:
        raise HarnessError(f"feature computation failed at {where}: {exc}") from exc


def _run(fn, jobs, ctx, workers):
    if workers <= 1:
        _init_worker(ctx)
        return [fn(j) for j in jobs]
    with ProcessPoolExecutor(workers, initializer=_init_worker, initargs=(ctx,)) as ex:
        return list(ex.map(fn, jobs, chunksize=max(1, len(jobs) // (8 * workers))))


def evaluate_features(data, model, nsim: int = 1000, max_lag: int = 1500, master_seed: int = 0,
                      alpha_n: float | None = None, nsim_ref: int | None = None, workers: int = 1,
                      keep_simulations: bool = False, calibration_nsim: int = 1000) -> FeatureReport:
    """Score ``data`` against ``model`` on the eleven features.

    ``alpha_n`` for the segment count defaults to the value calibrated at
    ``alpha = 0.9`` for the data length; the same value is used for the
    data and every simulation. Simulation seeds are derived from
    ``(master_seed, batch, index)``, so results do not depend on ``workers``.
    """
    x = data.values if isinstance(data, ReturnSeries) else np.asarray(data, dtype=np.float64)
    method = data.method if isinstance(data, ReturnSeries) else getattr(model, "method", "simple")
    n = x.size
    nsim_ref = nsim if nsim_ref is None else nsim_ref
    if nsim < 100 or nsim_ref < 100:
        raise ValueError("nsim must be at least 100")
    if max_lag >= n:
        raise ValueError(f"max_lag={max_lag} must be below the series length {n}")
    if alpha_n is None:
        alpha_n = calibrate_alpha_n(n, 0.9, calibration_nsim, seed=child_seeds(master_seed, 1, 0)[0])
        log.info("calibrated alpha_n=%.10f for n=%d", alpha_n, n)

    ctx = _Context(n, alpha_n, max_lag, method)
    ref_jobs = [(model, s, f"reference batch, index {k}") for k, s in enumerate(child_seeds(master_seed, nsim_ref, 1))]
    acf_sum = np.zeros(max_lag)
    q_sum = np.zeros(n)
    for a, q in _run(_reference_job, ref_jobs, ctx, workers):
        acf_sum += a
        q_sum += q
    ctx = _Context(n, alpha_n, max_lag, method, acf_sum / nsim_ref, q_sum / nsim_ref)

    emp = series_features(x, ctx)
    dist_jobs = [(model, s, f"distribution batch, index {k}") for k, s in enumerate(child_seeds(master_seed, nsim, 2))]
    sims = np.array(_run(_feature_job, dist_jobs, ctx, workers))

    feats = []
    for k, (fid, name, sided) in enumerate(FEATURES):
        col = sims[:, k]
        p = two_sided_pvalue(emp[k], col) if sided == "two" else one_sided_pvalue(emp[k], col)
        feats.append(FeatureValue(fid, name, float(emp[k]), float(np.quantile(col, 0.05)), float(col.mean()),
                                  float(np.quantile(col, 0.95)), float(col.std(ddof=1)), p, sided))
    label = data.source_label if isinstance(data, ReturnSeries) else ""
    report = FeatureReport(feats, getattr(model, "label", type(model).__name__), nsim, nsim_ref,
                           int(master_seed) if not isinstance(master_seed, np.random.SeedSequence) else -1,
                           float(alpha_n), max_lag, label)
    if keep_simulations:
        report.simulated = {fid: sims[:, k] for k, (fid, _, _) in enumerate(FEATURES)}
        report.simulated["mean_acf"] = ctx.mean_acf
    return report


# -- rendering -------------------------------------------------------------------

def _header_cell(fid):
    return f"{fid}*" if fid in TWO_SIDED_IDS else str(fid)


def render_report(report: FeatureReport, format: str = "text", rows=None) -> str:
    """Render one report (or several as extra ``rows``) as text, JSON or CSV.

    The text form is a table with one column per feature, starred where the
    p-value is two-sided, and two-decimal p-values.
    """
    reports = [report] + list(rows or [])
    for r in reports:
        if r is None or not getattr(r, "features", None):
            raise ValueError("nothing to render: empty report")
    if format == "json":
        if len(reports) == 1:
            return json.dumps(report.to_dict(), indent=2)
        return json.dumps([r.to_dict() for r in reports], indent=2)
    if format == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["model", "id", "name", "sided", "empirical", "q05", "mean", "q95", "sd", "p_value"])
        for r in reports:
            for f in sorted(r.features, key=lambda f: f.id):
                w.writerow([r.model_label, f.id, f.name, f.sided, repr(f.empirical), repr(f.q05), repr(f.mean),
                            repr(f.q95), repr(f.sd), repr(f.p_value)])
        return buf.getvalue()
    if format != "text":
        raise ValueError(f"unknown format {format!r}")
    width = max(10, *(len(r.model_label) for r in reports))
    head = " " * width + "".join(f"{_header_cell(fid):>6}" for fid, _, _ in FEATURES)
    lines = [head, "-" * len(head)]
    for r in reports:
        ps = r.p_values()
        lines.append(f"{r.model_label:<{width}}" + "".join(f"{_fmt(p):>6}" for p in ps))
    return "\n".join(lines) + "\n"


def _fmt(p: float) -> str:
    return "  nan" if math.isnan(p) else f"{p:.2f}"
