"""Piecewise-constant volatility under chi-squared multiscale bounds.

Model: ``r_t = sigma_t z_t`` with Gaussian ``z``. For every interval
``[i, j]`` of a multiscale family the normalised sum of squares
``sum r_t^2 / sigma_t^2`` must lie between the ``(1 - alpha_n)/2`` and
``(1 + alpha_n)/2`` quantiles of chi-squared with ``j - i + 1`` degrees of
freedom. Among segmentations whose levels are the empirical (root mean
square) volatilities of their segments, the one with the fewest segments
is returned.

Interval families are described by *scales*: pairs ``(length, step)``
meaning all intervals of that length whose 0-based start is a multiple of
``step``. Indices are 0-based and intervals inclusive throughout.
"""

from __future__ import annotations

import logging
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass

import numba
import numpy as np
from scipy import stats

from ._seeding import child_seeds
from .series_io import ReturnSeries

log = logging.getLogger(__name__)

# Below this alpha_n even a singleton segment fails its own bound, since
# P(chi2_1 <= 1) = 0.6827.
MIN_FEASIBLE_ALPHA_N = 2 * stats.chi2.cdf(1.0, 1) - 1


class InfeasibleError(RuntimeError):
    pass


@dataclass(frozen=True)
class IntervalFamily:
    n: int
    lengths: np.ndarray
    steps: np.ndarray
    scheme_label: str = "dyadic"

    def __post_init__(self):
        order = np.argsort(self.lengths, kind="stable")
        object.__setattr__(self, "lengths", np.asarray(self.lengths, dtype=np.int64)[order])
        object.__setattr__(self, "steps", np.asarray(self.steps, dtype=np.int64)[order])

    def intervals(self) -> tuple[np.ndarray, np.ndarray]:
        """All member intervals as ``(starts, ends)``, inclusive, 0-based."""
        starts, ends = [], []
        for length, step in zip(self.lengths, self.steps):
            s = np.arange(0, self.n - length + 1, step, dtype=np.int64)
            starts.append(s)
            ends.append(s + length - 1)
        return np.concatenate(starts), np.concatenate(ends)

    def __len__(self):
        return int(sum((self.n - L) // s + 1 for L, s in zip(self.lengths, self.steps) if L <= self.n))


def build_interval_family(n: int, scheme: str = "dyadic") -> IntervalFamily:
    """Half-overlapping dyadic family: all singletons, and for every
    ``2**k <= n`` the intervals of length ``2**k`` starting at multiples of
    ``2**(k-1)``.

    ``scheme="singleton_full"`` gives the singletons plus ``[0, n-1]``.
    """
    if n < 2:
        raise ValueError("n must be at least 2")
    if scheme == "dyadic":
        lengths, steps = [1], [1]
        k = 1
        while 2 ** k <= n:
            lengths.append(2 ** k)
            steps.append(2 ** (k - 1))
            k += 1
    elif scheme == "singleton_full":
        lengths, steps = [1, n], [1, n]
    else:
        raise ValueError(f"unknown interval scheme {scheme!r}")
    return IntervalFamily(n, np.array(lengths), np.array(steps), scheme)


@dataclass(frozen=True)
class MultiscaleConfig:
    alpha_n: float = 0.9999993
    alpha: float = 0.9
    noise: str = "gaussian"
    scheme: str = "dyadic"

    def __post_init__(self):
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if not 0 < self.alpha_n < 1:
            raise ValueError("alpha_n must lie in (0, 1)")
        if self.noise != "gaussian":
            raise ValueError("only Gaussian noise is supported in the constraint system")


@dataclass(frozen=True)
class PiecewiseVolatility:
    breakpoints: np.ndarray  # 0-based start of each segment; first is 0
    levels: np.ndarray
    n: int
    alpha_n: float

    def __post_init__(self):
        b = np.asarray(self.breakpoints, dtype=np.int64)
        lv = np.asarray(self.levels, dtype=np.float64)
        if b.size == 0 or b[0] != 0 or np.any(np.diff(b) <= 0) or b[-1] >= self.n:
            raise ValueError("breakpoints must be increasing, start at 0 and lie below n")
        if lv.shape != b.shape or np.any(lv <= 0):
            raise ValueError("need one positive level per segment")
        object.__setattr__(self, "breakpoints", b)
        object.__setattr__(self, "levels", lv)

    def __len__(self):
        return self.breakpoints.size

    @property
    def ends(self) -> np.ndarray:
        return np.append(self.breakpoints[1:], self.n) - 1

    @property
    def lengths(self) -> np.ndarray:
        return np.diff(np.append(self.breakpoints, self.n))

    def expand(self) -> np.ndarray:
        """Per-day volatility step function of length ``n``."""
        return np.repeat(self.levels, self.lengths)


def _squares(r) -> np.ndarray:
    v = r.values if isinstance(r, ReturnSeries) else np.asarray(r, dtype=np.float64)
    return v * v


def chi2_band(lengths, alpha_n: float) -> tuple[np.ndarray, np.ndarray]:
    lengths = np.asarray(lengths, dtype=np.float64)
    lo = stats.chi2.ppf((1 - alpha_n) / 2, lengths)
    hi = stats.chi2.isf((1 - alpha_n) / 2, lengths)
    return lo, hi


def bounds_satisfied(r, vol: PiecewiseVolatility, fam: IntervalFamily, alpha_n: float | None = None):
    """Check every family interval against its chi-squared band.

    Returns ``(ok, first_violation)`` where ``first_violation`` is
    ``(start, end)`` of the violated interval with the smallest start (ties
    broken by length), or ``None``.
    """
    x2 = _squares(r)
    if vol.n != x2.size or fam.n != x2.size:
        raise ValueError(f"dimension mismatch: series {x2.size}, volatility {vol.n}, family {fam.n}")
    alpha_n = vol.alpha_n if alpha_n is None else alpha_n
    sig2 = vol.expand() ** 2
    cum = np.concatenate([[0.0], np.cumsum(x2 / sig2)])
    qlo, qhi = chi2_band(fam.lengths, alpha_n)
    found = []
    for L, step, lo, hi in zip(fam.lengths, fam.steps, qlo, qhi):
        starts = np.arange(0, x2.size - L + 1, step)
        stat = cum[starts + L] - cum[starts]
        # relative slack for rounding in the cumulative sums
        bad = (stat < lo * (1 - 1e-12)) | (stat > hi * (1 + 1e-12))
        if bad.any():
            st = int(starts[np.argmax(bad)])
            found.append((st, L))
    if not found:
        return True, None
    st, L = min(found)
    return False, (st, st + int(L) - 1)


@numba.njit(cache=True)
def _min_partition(cum, a, b, lengths, steps, qlo, qhi, best, cost, choice):
    """Backward dynamic programme over segments inside ``[a, b]``.

    A segment ``[s, e]`` is admissible when its empirical variance lies in
    ``[max lo_I, min hi_I]`` over family intervals ``I`` inside it, with
    ``lo_I = S_I / qhi`` and ``hi_I = S_I / qlo``. The running bounds only
    tighten as ``e`` grows, so the scan stops once they cross. Among
    partitions with the fewest segments the one with the largest Gaussian
    likelihood (smallest ``sum L log v``) wins, which puts breakpoints
    where the level actually changes.
    """
    big = 1 << 60
    K = lengths.size
    best[b + 1] = 0
    cost[b + 1] = 0.0
    for s in range(b, a - 1, -1):
        maxlo = 0.0
        minhi = np.inf
        bestval = big
        bestcost = np.inf
        bestend = -1
        for e in range(s, b + 1):
            for k in range(K):
                L = lengths[k]
                st = e - L + 1
                if st < s:
                    break
                if st % steps[k] != 0:
                    continue
                S = cum[e + 1] - cum[st]
                lo = S / qhi[k]
                if lo > maxlo:
                    maxlo = lo
                if qlo[k] > 0.0:
                    hi = S / qlo[k]
                    if hi < minhi:
                        minhi = hi
            if maxlo > minhi:
                break
            v = (cum[e + 1] - cum[s]) / (e - s + 1)
            if v >= maxlo * (1 - 1e-12) and v <= minhi * (1 + 1e-12) and best[e + 1] < big:
                cand = best[e + 1] + 1
                ccost = cost[e + 1] + (e - s + 1) * np.log(v)
                if cand < bestval or (cand == bestval and ccost < bestcost):
                    bestval = cand
                    bestcost = ccost
                    bestend = e
        best[s] = bestval
        cost[s] = bestcost
        choice[s] = bestend


def _whole_feasible(cum, a, b, lengths, steps, qlo, qhi) -> bool:
    v = (cum[b + 1] - cum[a]) / (b - a + 1)
    for L, st, ql, qh in zip(lengths, steps, qlo, qhi):
        first = -(-a // st) * st
        starts = np.arange(first, b - L + 2, st)
        if starts.size == 0:
            continue
        S = cum[starts + L] - cum[starts]
        if v < S.max() / qh * (1 - 1e-12):
            return False
        if ql > 0 and v > S.min() / ql * (1 + 1e-12):
            return False
    return True


class _Segmenter:
    def __init__(self, x2, fam, alpha_n):
        self.cum = np.concatenate([[0.0], np.cumsum(x2)])
        self.fam = fam
        self.qlo, self.qhi = chi2_band(fam.lengths, alpha_n)
        self.best = np.zeros(x2.size + 1, dtype=np.int64)
        self.cost = np.zeros(x2.size + 1)
        self.choice = np.zeros(x2.size + 1, dtype=np.int64)

    def segment(self, a, b) -> list[int]:
        """Minimal admissible partition of ``[a, b]``; returns segment starts."""
        f = self.fam
        if _whole_feasible(self.cum, a, b, f.lengths, f.steps, self.qlo, self.qhi):
            return [a]
        _min_partition(self.cum, a, b, f.lengths, f.steps, self.qlo, self.qhi, self.best, self.cost, self.choice)
        if self.best[a] >= 1 << 60:
            raise InfeasibleError(f"no admissible segmentation of [{a}, {b}]")
        out, s = [], a
        while s <= b:
            out.append(s)
            s = int(self.choice[s]) + 1
        return out


def _levels(x2, breaks, n):
    lengths = np.diff(np.append(breaks, n))
    return np.sqrt(np.add.reduceat(x2, breaks) / lengths)


def estimate_piecewise_vol(r, cfg: MultiscaleConfig | None = None, fam: IntervalFamily | None = None,
                           max_repairs: int = 10_000) -> PiecewiseVolatility:
    """Fewest-segment piecewise-constant volatility satisfying the bounds.

    Segments are chosen by an exact minimum-count dynamic programme over
    segments that are admissible on their own. Intervals straddling a
    breakpoint are then checked; a violated one forces breakpoints at its
    ends and the touched segments are re-partitioned, until no violation
    remains.
    """
    cfg = cfg or MultiscaleConfig()
    x2 = _squares(r)
    n = x2.size
    if n < 2:
        raise ValueError("need at least 2 returns")
    if np.any(x2 == 0):
        raise ValueError("zero returns must be removed first")
    if cfg.alpha_n < MIN_FEASIBLE_ALPHA_N:
        raise InfeasibleError(f"alpha_n={cfg.alpha_n} is below {MIN_FEASIBLE_ALPHA_N:.4f}; "
                              "even singleton segments violate their bounds")
    fam = fam or build_interval_family(n, cfg.scheme)
    seg = _Segmenter(x2, fam, cfg.alpha_n)
    breaks = seg.segment(0, n - 1)

    for _ in range(max_repairs):
        b = np.array(breaks, dtype=np.int64)
        vol = PiecewiseVolatility(b, _levels(x2, b, n), n, cfg.alpha_n)
        if len(b) == 1:
            return vol
        ok, viol = bounds_satisfied(x2 ** 0.5, vol, fam)
        if ok:
            return vol
        new = {p for p in (viol[0], viol[1] + 1) if 0 < p < n and p not in breaks}
        if not new:
            raise InfeasibleError(f"interval {viol} violates its bound with no segment to split")
        log.debug("straddling violation at %s; forcing breaks %s", viol, sorted(new))
        # re-partition every segment that now contains a forced break
        bounds = sorted(set(breaks) | {n})
        rebuilt = []
        for s, e in zip(bounds[:-1], bounds[1:]):
            cuts = sorted(p for p in new if s < p < e)
            if not cuts:
                rebuilt.append(s)
                continue
            edges = [s] + cuts + [e]
            for lo, hi in zip(edges[:-1], edges[1:]):
                rebuilt.extend(seg.segment(lo, hi - 1))
        breaks = rebuilt
    raise InfeasibleError("repair loop did not converge")


def segment_count(x, alpha_n: float, fam: IntervalFamily | None = None) -> int:
    return len(estimate_piecewise_vol(x, MultiscaleConfig(alpha_n=alpha_n), fam))


# -- calibration ---------------------------------------------------------------

def single_interval_tail(x, fam: IntervalFamily) -> float:
    """Smallest two-sided tail ``1 - alpha_n`` at which ``x`` is one segment.

    The whole series is a single admissible segment exactly when
    ``1 - alpha_n <= min_I 2 min(F(stat_I), 1 - F(stat_I))``, where ``F`` is
    the chi-squared CDF with ``|I|`` degrees of freedom and
    ``stat_I = S_I / mean(x^2)``; that minimum is returned.
    """
    x2 = np.asarray(x, dtype=np.float64) ** 2
    cum = np.concatenate([[0.0], np.cumsum(x2)])
    v = cum[-1] / x2.size
    tail = 1.0
    for L, st in zip(fam.lengths, fam.steps):
        starts = np.arange(0, x2.size - L + 1, st)
        if starts.size == 0:
            continue
        S = (cum[starts + L] - cum[starts]) / v
        # only the extremes at each scale can attain the minimum
        lo_t = stats.chi2.cdf(S.min(), L)
        hi_t = stats.chi2.sf(S.max(), L)
        tail = min(tail, 2 * lo_t, 2 * hi_t)
    return float(tail)


def _tail_worker(args):
    n, seed_seq, scheme = args
    fam = build_interval_family(n, scheme)
    rng = np.random.default_rng(seed_seq)
    return single_interval_tail(rng.standard_normal(n), fam)


def white_noise_tails(n: int, nsim: int, seed=None, scheme: str = "dyadic", workers: int = 1) -> np.ndarray:
    """Per-replication critical tails on standard Gaussian white noise."""
    jobs = [(n, s, scheme) for s in child_seeds(seed, nsim)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as ex:
            return np.array(list(ex.map(_tail_worker, jobs, chunksize=max(1, nsim // (4 * workers)))))
    return np.array([_tail_worker(j) for j in jobs])


def calibrate_alpha_n(n: int, alpha: float = 0.9, nsim: int = 1000, seed=None,
                      scheme: str = "dyadic", workers: int = 1) -> float:
    """Smallest ``alpha_n`` giving one segment on white noise with frequency >= ``alpha``.

    The single-segment frequency is a step function of ``alpha_n`` that
    jumps at each replication's critical value, so the smallest ``alpha_n``
    reaching ``alpha`` is an order statistic of those critical values; it
    is what a bisection on the Monte-Carlo frequency converges to.
    """
    if nsim < 100:
        raise ValueError("nsim must be at least 100")
    if not 0 < alpha < 1:
        raise ValueError("alpha must lie in (0, 1)")
    tails = np.sort(white_noise_tails(n, nsim, seed, scheme, workers))[::-1]
    k = math.ceil(alpha * nsim)
    tail = tails[k - 1]
    return float(1.0 - tail)


def single_interval_frequency(n: int, alpha_n: float, nsim: int, seed=None, scheme: str = "dyadic") -> float:
    """Fraction of white-noise replications segmented into one interval."""
    fam = build_interval_family(n, scheme)
    cfg = MultiscaleConfig(alpha_n=alpha_n, scheme=scheme)
    hits = 0
    for s in child_seeds(seed, nsim):
        z = np.random.default_rng(s).standard_normal(n)
        hits += len(estimate_piecewise_vol(z, cfg, fam)) == 1
    return hits / nsim


# -- diagnostics ---------------------------------------------------------------

@dataclass(frozen=True)
class ResidualDiagnostics:
    residuals: np.ndarray
    kurtosis: float
    reference_kurtosis: float


def residual_diagnostics(r, vol: PiecewiseVolatility, noise: str = "gaussian", nu: float | None = None):
    """Standardised residuals ``r_t / sigma_t`` and their sample kurtosis.

    ``reference_kurtosis`` is the population value for the named noise:
    3 for Gaussian and ``3 (nu - 2) / (nu - 4)`` for Student t (infinite
    for ``nu <= 4``).
    """
    from .stats_core import kurtosis

    v = r.values if isinstance(r, ReturnSeries) else np.asarray(r, dtype=np.float64)
    if v.size != vol.n:
        raise ValueError(f"dimension mismatch: series {v.size}, volatility {vol.n}")
    z = v / vol.expand()
    if noise == "gaussian":
        ref = 3.0
    elif noise == "t":
        if nu is None:
            raise ValueError("t noise needs nu")
        ref = 3.0 * (nu - 2) / (nu - 4) if nu > 4 else math.inf
    else:
        raise ValueError(f"unknown noise {noise!r}")
    return ResidualDiagnostics(z, kurtosis(z), ref)


def sojourn_curve(vol: PiecewiseVolatility) -> list[tuple[float, int]]:
    """One ``(level, length in days)`` pair per segment."""
    return [(float(lv), int(L)) for lv, L in zip(vol.levels, vol.lengths)]
