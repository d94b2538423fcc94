"""GARCH(1,1) comparison model: Gaussian quasi-MLE and simulation.

Naming follows the usual convention, ``sigma2_t = a0 + a1 eps_{t-1}^2 +
b1 sigma2_{t-1}``, with zero-mean returns. Stationarity is not imposed
when fitting.
"""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass
from typing import Optional

import numba
import numpy as np
from scipy import optimize, signal

from ._seeding import child_seeds
from .return_sim import SignModel, assign_signs, inject_sign_acf
from .series_io import ReturnSeries

log = logging.getLogger(__name__)


class GarchFitError(RuntimeError):
    pass


@dataclass(frozen=True)
class GarchParams:
    a0: float
    a1: float
    b1: float
    loglik: float = float("nan")

    def __post_init__(self):
        if self.a0 <= 0:
            raise ValueError("a0 must be positive")
        if self.a1 < 0 or self.b1 < 0:
            raise ValueError("a1 and b1 must be nonnegative")

    @property
    def persistence(self) -> float:
        return self.a1 + self.b1

    @property
    def stationary(self) -> bool:
        return self.persistence < 1

    def to_dict(self) -> dict:
        return {**asdict(self), "stationary": self.stationary}

    @classmethod
    def from_dict(cls, d: dict) -> "GarchParams":
        return cls(float(d["a0"]), float(d["a1"]), float(d["b1"]), float(d.get("loglik", float("nan"))))


NONSTATIONARY = "nonstationary"


def unconditional_variance(p: GarchParams):
    """``a0 / (1 - a1 - b1)``, or the string ``"nonstationary"``."""
    if not p.stationary:
        return NONSTATIONARY
    return p.a0 / (1.0 - p.a1 - p.b1)


def conditional_variance(r, a0, a1, b1, sigma2_0=None) -> np.ndarray:
    """Variance recursion started at ``sigma2_0`` (default: mean of r^2)."""
    r = np.asarray(r, dtype=np.float64)
    r2 = r * r
    s0 = r2.mean() if sigma2_0 is None else sigma2_0
    u = a0 + a1 * r2[:-1]
    rest, _ = signal.lfilter([1.0], [1.0, -b1], u, zi=[b1 * s0])
    return np.concatenate([[s0], rest])


def garch_loglik(r, a0, a1, b1) -> float:
    r = np.asarray(r, dtype=np.float64)
    s2 = conditional_variance(r, a0, a1, b1)
    if np.any(s2 <= 0) or not np.all(np.isfinite(s2)):
        return -np.inf
    return float(-0.5 * np.sum(np.log(2 * np.pi) + np.log(s2) + r * r / s2))


def fit_garch11(r, starts=((0.05, 0.90), (0.10, 0.80), (0.20, 0.60), (0.05, 0.94))) -> GarchParams:
    """Gaussian quasi-maximum likelihood fit of a zero-mean GARCH(1,1).

    ``a0`` is optimised on the scale of the sample variance. Several
    starting points are tried and the best converged optimum is kept.
    Raises :class:`GarchFitError` when no start converges.
    """
    v = r.values if isinstance(r, ReturnSeries) else np.asarray(r, dtype=np.float64)
    if v.size < 100:
        raise ValueError("need at least 100 returns")
    var = float(np.mean(v * v))
    x = v / np.sqrt(var)  # unit-variance scale keeps a0 near 1 - a1 - b1

    def nll(theta):
        a0, a1, b1 = theta
        ll = garch_loglik(x, a0, a1, b1)
        return 1e10 if not np.isfinite(ll) else -ll / x.size

    bounds = [(1e-10, 10.0), (0.0, 2.0), (0.0, 2.0)]
    best, failures = None, []
    for a1, b1 in starts:
        a0 = max(1e-6, 1.0 - a1 - b1)
        res = optimize.minimize(nll, np.array([a0, a1, b1]), method="L-BFGS-B", bounds=bounds,
                                options={"maxiter": 2000, "ftol": 1e-14, "gtol": 1e-9})
        if not res.success:
            failures.append(res.message)
        if np.isfinite(res.fun) and (best is None or res.fun < best.fun):
            best = res
    if best is None:
        raise GarchFitError(f"GARCH optimisation failed from all starts: {failures}")
    if not best.success:
        log.warning("GARCH optimiser reported: %s", best.message)
    a0, a1, b1 = best.x
    a0 *= var
    return GarchParams(float(a0), float(a1), float(b1), garch_loglik(v, a0, a1, b1))


@numba.njit(cache=True)
def _garch_path(z, a0, a1, b1, s0):
    n = z.size
    out = np.empty(n)
    s2 = s0
    for t in range(n):
        e = np.sqrt(s2) * z[t]
        out[t] = e
        s2 = a0 + a1 * e * e + b1 * s2
        if not np.isfinite(s2) or not np.isfinite(e):
            return out[: t + 1], t + 1
    return out, n


def simulate_garch_values(p: GarchParams, n: int, seed=None, burn_in: int = 1000,
                          sign: Optional[tuple[SignModel, float, float]] = None):
    """Simulate ``n`` returns after ``burn_in`` discarded steps.

    Returns ``(values, overflowed)``. ``sign = (model, gamma, eacf1)``
    re-signs the magnitudes as in the decomposition simulator; the
    magnitudes themselves do not change.
    """
    if n < 1:
        raise ValueError("n must be positive")
    s_z, s_sign, s_acf = child_seeds(seed, 3)
    z = np.random.default_rng(s_z).standard_normal(n + burn_in)
    s0 = unconditional_variance(p)
    if s0 == NONSTATIONARY:
        s0 = p.a0
    path, m = _garch_path(z, p.a0, p.a1, p.b1, float(s0))
    overflowed = m < n + burn_in or not np.isfinite(path[-1])
    if overflowed:
        path = path[np.isfinite(path)]
        log.warning("GARCH path overflowed after %d steps; truncated", path.size)
    x = path[burn_in:]
    if sign is not None and x.size:
        model, gamma, eacf1 = sign
        x = assign_signs(np.abs(x), model, gamma, s_sign)
        if x.size >= 2:
            x = inject_sign_acf(x, eacf1, s_acf)
    return x, overflowed


def simulate_garch11(p: GarchParams, n: int, sign=None, seed=None, burn_in: int = 1000,
                     method: str = "simple") -> ReturnSeries:
    x, overflowed = simulate_garch_values(p, n, seed, burn_in, sign)
    if x.size < 2:
        raise FloatingPointError(f"GARCH path overflowed with {x.size} usable values")
    return ReturnSeries.from_values(x, source_label="garch11", method=method, meta={"overflow": overflowed})
