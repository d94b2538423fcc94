"""Deterministic statistics for quantifying stylized facts of returns.

Every function here accepts either a :class:`~stylized.series_io.ReturnSeries`
or a plain array where that makes sense.
"""

from __future__ import annotations

import functools
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .series_io import ReturnSeries


def _values(r) -> np.ndarray:
    if isinstance(r, ReturnSeries):
        return r.values
    return np.asarray(r, dtype=np.float64)


@dataclass(frozen=True)
class AcfCurve:
    values: np.ndarray

    @property
    def lags(self) -> np.ndarray:
        return np.arange(1, self.values.size + 1)

    def __len__(self):
        return self.values.size


@dataclass(frozen=True)
class GainLossCurve:
    bin_centers: np.ndarray
    pos_frequency: np.ndarray
    counts: np.ndarray
    correlation: float


def acf_values(x, max_lag: int) -> np.ndarray:
    """Sample autocorrelations at lags ``1..max_lag`` via FFT.

    Mean-centred, normalised by the lag-0 sum of squares.
    """
    x = np.asarray(x, dtype=np.float64)
    n = x.size
    if max_lag < 1 or n <= max_lag:
        raise ValueError(f"need len(x) > max_lag >= 1, got n={n}, max_lag={max_lag}")
    d = x - x.mean()
    c0 = d @ d
    if c0 == 0:
        raise ValueError("constant input has no autocorrelation")
    nfft = 1 << int(np.ceil(np.log2(2 * n - 1)))
    f = np.fft.rfft(d, nfft)
    cov = np.fft.irfft(f * np.conj(f), nfft)[1:max_lag + 1]
    return np.clip(cov / c0, -1.0, 1.0)


def acf(x, max_lag: int) -> AcfCurve:
    return AcfCurve(acf_values(_values(x), max_lag))


def lag1_acf(x) -> float:
    """Lag-1 autocorrelation computed directly (no FFT)."""
    x = np.asarray(x, dtype=np.float64)
    d = x - x.mean()
    c0 = d @ d
    if c0 == 0:
        raise ValueError("constant input has no autocorrelation")
    return float(d[:-1] @ d[1:] / c0)


def sign_acf1(r) -> float:
    """Lag-1 autocorrelation of the return signs."""
    v = _values(r)
    if v.size < 3:
        raise ValueError("need at least 3 returns")
    s = np.sign(v)
    if np.all(s == s[0]):
        raise ValueError("all signs equal; sign autocorrelation undefined")
    return lag1_acf(s)


@functools.lru_cache(maxsize=32)
def _normal_abs_reference(n: int) -> np.ndarray:
    q = np.sort(np.abs(stats.norm.ppf(np.arange(1, n + 1) / (n + 1))))
    q /= np.median(q)
    q.setflags(write=False)
    return q


def heavy_tail_measure(r) -> float:
    """Mean gap between median-scaled ordered |r| and the normal reference.

    The reference takes the standard normal quantiles at ``i/(n+1)``,
    ``i = 1..n``, in absolute value, sorted and divided by their median.
    Zero for exactly normal quantiles, positive for heavier tails.
    """
    v = _values(r)
    n = v.size
    if n < 100:
        raise ValueError("heavy_tail_measure needs at least 100 observations")
    a = np.sort(np.abs(v))
    med = np.median(a)
    if med <= 0:
        raise ValueError("median absolute return is zero")
    return float(np.mean(a / med - _normal_abs_reference(n)))


def kurtosis(x) -> float:
    """Moment ratio m4 / m2**2 about the mean (not excess, not bias-corrected)."""
    x = np.asarray(_values(x), dtype=np.float64)
    if x.size < 4:
        raise ValueError("kurtosis needs at least 4 observations")
    d = x - x.mean()
    m2 = np.mean(d * d)
    if m2 == 0:
        raise ValueError("zero variance")
    return float(np.mean(d ** 4) / m2 ** 2)


def kuiper_parts(a, b) -> tuple[float, float]:
    """Return ``(D+, D-)`` for the empirical CDFs of ``a`` and ``b``.

    ``D+ = sup(F_a - F_b)`` and ``D- = sup(F_b - F_a)``; both are at least
    zero since the CDFs agree at minus infinity. Evaluated exactly at the
    pooled order statistics.
    """
    a = np.sort(np.asarray(a, dtype=np.float64))
    b = np.sort(np.asarray(b, dtype=np.float64))
    if a.size == 0 or b.size == 0:
        raise ValueError("empty sample")
    pooled = np.concatenate([a, b])
    fa = np.searchsorted(a, pooled, side="right") / a.size
    fb = np.searchsorted(b, pooled, side="right") / b.size
    diff = fa - fb
    return max(0.0, float(diff.max())), max(0.0, float(-diff.min()))


def kuiper_distance(a, b) -> float:
    dp, dm = kuiper_parts(a, b)
    return dp + dm


def kuiper_sf(lam: float, tol: float = 1e-10) -> float:
    """Survival function of the limiting Kuiper distribution.

    Terms of the alternating series below ``tol`` are dropped. The series
    is not usable for small ``lam``, where the survival function is 1 to
    within machine precision anyway.
    """
    if lam < 0.4:
        return 1.0
    j = np.arange(1, 101)
    j2l2 = (j * lam) ** 2
    terms = 2.0 * (4.0 * j2l2 - 1.0) * np.exp(-2.0 * j2l2)
    terms = terms[np.abs(terms) >= tol]
    return float(min(1.0, max(0.0, terms.sum())))


def kuiper_asymmetry(r) -> tuple[float, float]:
    """Kuiper distance between positive returns and absolute negative returns.

    Returns ``(distance, asymptotic p-value)``, the latter with effective
    sample size ``n+ n- / (n+ + n-)``.
    """
    v = _values(r)
    pos = v[v > 0]
    neg = -v[v < 0]
    if pos.size == 0 or neg.size == 0:
        raise ValueError("need both positive and negative returns")
    d = kuiper_distance(pos, neg)
    ne = pos.size * neg.size / (pos.size + neg.size)
    return d, kuiper_sf(np.sqrt(ne) * d)


def gain_loss_curve(r, q_lo: float = 0.02, q_hi: float = 0.98, bins: int = 50) -> GainLossCurve:
    """Fraction of positive returns as a function of |r|.

    Absolute returns between the ``q_lo`` and ``q_hi`` quantiles are cut
    into ``bins`` equal-count bins (sizes differ by at most one). The bin
    centre is the median |r| in the bin.
    """
    v = _values(r)
    if bins < 2:
        raise ValueError("need at least 2 bins")
    if v.size < 10 * bins:
        raise ValueError(f"need at least {10 * bins} observations for {bins} bins")
    a = np.abs(v)
    lo, hi = np.quantile(a, [q_lo, q_hi])
    keep = (a >= lo) & (a <= hi)
    order = np.argsort(a[keep], kind="stable")
    mags = a[keep][order]
    pos = (v[keep] > 0)[order]
    if mags.size // bins < 5:
        raise ValueError("fewer than 5 observations per bin")
    centers, freqs, counts = [], [], []
    for m, p in zip(np.array_split(mags, bins), np.array_split(pos, bins)):
        centers.append(np.median(m))
        freqs.append(p.mean())
        counts.append(m.size)
    centers = np.array(centers)
    freqs = np.array(freqs)
    if np.ptp(freqs) == 0 or np.ptp(centers) == 0:
        corr = 0.0
    else:
        corr = float(np.corrcoef(centers, freqs)[0, 1])
    return GainLossCurve(centers, freqs, np.array(counts), corr)


def d_acf(a1, a2) -> float:
    """Average absolute difference of two ACF curves over their lags."""
    x = a1.values if isinstance(a1, AcfCurve) else np.asarray(a1, dtype=np.float64)
    y = a2.values if isinstance(a2, AcfCurve) else np.asarray(a2, dtype=np.float64)
    if x.shape != y.shape:
        raise ValueError(f"ACF length mismatch: {x.size} vs {y.size}")
    return float(np.mean(np.abs(x - y)))


def end_return(r, method: str | None = None) -> float:
    """Terminal value of one unit compounded through the returns."""
    v = _values(r)
    if v.size == 0:
        raise ValueError("empty series")
    if method is None:
        method = r.method if isinstance(r, ReturnSeries) else "simple"
    if method == "log":
        return float(np.exp(v.sum()))
    if np.any(v <= -1):
        raise ValueError("simple return <= -1 wipes out the position")
    return float(np.prod(1.0 + v))


def abs_moments(r) -> tuple[float, float]:
    v = _values(r)
    if v.size == 0:
        raise ValueError("empty series")
    return float(np.mean(np.abs(v))), float(np.mean(v * v))


def quantile_mad(sorted_a, sorted_b) -> float:
    """Mean absolute componentwise difference of two sorted samples."""
    a = np.asarray(sorted_a, dtype=np.float64)
    b = np.asarray(sorted_b, dtype=np.float64)
    if a.shape != b.shape:
        raise ValueError(f"length mismatch: {a.size} vs {b.size}")
    if np.any(np.diff(a) < 0) or np.any(np.diff(b) < 0):
        raise ValueError("inputs must be sorted ascending")
    return float(np.mean(np.abs(a - b)))
