"""Turn a volatility path into returns: magnitudes, tails and signs."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from ._seeding import child_seeds
from .series_io import ReturnSeries
from .vol_sim import VolSimParams, simulate_volatility

_ABS_NORMAL_MEAN = np.sqrt(2.0 / np.pi)


@dataclass(frozen=True)
class SignModel:
    """Positive-sign frequency ``p`` per magnitude bin with upper edges ``eqa``."""

    eqa: np.ndarray
    p: np.ndarray

    def __post_init__(self):
        eqa = np.asarray(self.eqa, dtype=np.float64)
        p = np.asarray(self.p, dtype=np.float64)
        if eqa.shape != p.shape or eqa.ndim != 1 or eqa.size == 0:
            raise ValueError("eqa and p must be equal-length vectors")
        if np.any(np.diff(eqa) <= 0):
            raise ValueError("bin edges must be strictly increasing")
        if np.any((p < 0) | (p > 1)):
            raise ValueError("frequencies must lie in [0, 1]")
        object.__setattr__(self, "eqa", eqa)
        object.__setattr__(self, "p", p)

    @property
    def nu_bins(self) -> int:
        return self.eqa.size

    @classmethod
    def fair(cls) -> "SignModel":
        return cls(np.array([np.inf]), np.array([0.5]))

    def to_dict(self) -> dict:
        return {"nu_bins": self.nu_bins, "eqa": self.eqa.tolist(), "p": self.p.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "SignModel":
        return cls(np.array(d["eqa"], dtype=float), np.array(d["p"], dtype=float))


@dataclass(frozen=True)
class ReturnSimParams:
    rho: float = 0.0
    eta: float = 0.0
    gamma: float = 1.0
    eacf1: float = 0.0
    sign_model: SignModel = field(default_factory=SignModel.fair)
    allow_negative_rho: bool = False

    def __post_init__(self):
        if self.rho < 0 and not self.allow_negative_rho:
            raise ValueError("rho must be nonnegative unless allow_negative_rho is set")
        if not 0 <= self.gamma <= 1:
            raise ValueError("gamma must lie in [0, 1]")
        if not -1 < self.eacf1 < 1:
            raise ValueError("eacf1 must lie in (-1, 1)")

    def to_dict(self) -> dict:
        return {"rho": self.rho, "eta": self.eta, "gamma": self.gamma, "eacf1": self.eacf1,
                "allow_negative_rho": self.allow_negative_rho, "sign_model": self.sign_model.to_dict()}

    @classmethod
    def from_dict(cls, d: dict) -> "ReturnSimParams":
        sm = SignModel.from_dict(d["sign_model"]) if "sign_model" in d else SignModel.fair()
        return cls(rho=float(d.get("rho", 0.0)), eta=float(d.get("eta", 0.0)), gamma=float(d.get("gamma", 1.0)),
                   eacf1=float(d.get("eacf1", 0.0)), sign_model=sm,
                   allow_negative_rho=bool(d.get("allow_negative_rho", False)))


def ztilde_from(zhat: np.ndarray, rho: float) -> np.ndarray:
    """Apply the magnitude-feedback transform to given normals.

    ``Zt_t = (rho |Zh_{t-1}| + 1) Zh_t / sqrt(1 + 2 rho sqrt(2/pi) + rho^2)``
    for ``t >= 2``; the first value passes through unchanged.
    """
    out = np.array(zhat, dtype=np.float64, copy=True)
    if rho == 0 or out.size < 2:
        return out
    norm = np.sqrt(1.0 + 2.0 * rho * _ABS_NORMAL_MEAN + rho * rho)
    out[1:] = (rho * np.abs(zhat[:-1]) + 1.0) * zhat[1:] / norm
    return out


def gen_ztilde(n: int, rho: float, seed=None) -> np.ndarray:
    if n < 2:
        raise ValueError("n must be at least 2")
    return ztilde_from(np.random.default_rng(seed).standard_normal(n), rho)


def abs_return(sigma, ztilde, eta: float = 0.0):
    """``sigma |z| (1 + |z|)^eta``; works elementwise on arrays."""
    az = np.abs(ztilde)
    return sigma * az * (1.0 + az) ** eta


def fit_sign_model(r, nu_bins: int = 50) -> SignModel:
    """Positive-return frequency in each of ``nu_bins`` |r|-quantile bins.

    Bin ``i`` collects returns with ``eqa(i-1) < |r| <= eqa(i)``, where
    ``eqa(i)`` is the ``i/nu_bins`` quantile of |r|. If quantiles repeat,
    the number of bins is reduced with a warning.
    """
    v = r.values if isinstance(r, ReturnSeries) else np.asarray(r, dtype=np.float64)
    if v.size < 10 * nu_bins:
        raise ValueError(f"need at least {10 * nu_bins} returns for {nu_bins} bins")
    a = np.abs(v)
    k = nu_bins
    while True:
        eqa = np.quantile(a, np.arange(1, k + 1) / k)
        if np.all(np.diff(eqa) > 0) or k == 1:
            break
        k -= 1
    if k != nu_bins:
        warnings.warn(f"repeated quantile edges; using {k} bins instead of {nu_bins}", RuntimeWarning)
    idx = np.minimum(np.searchsorted(eqa, a, side="left"), k - 1)
    counts = np.bincount(idx, minlength=k)
    pos = np.bincount(idx, weights=(v > 0).astype(float), minlength=k)
    p = np.divide(pos, counts, out=np.full(k, 0.5), where=counts > 0)
    return SignModel(eqa, p)


def positive_probability(abs_returns, model: SignModel, gamma: float) -> np.ndarray:
    """Per-magnitude probability ``gamma p(i) + (1 - gamma)/2`` (bins clamped)."""
    idx = np.searchsorted(model.eqa, abs_returns, side="left")
    idx = np.minimum(idx, model.nu_bins - 1)
    return gamma * model.p[idx] + (1.0 - gamma) / 2.0


def assign_signs(abs_returns, model: SignModel, gamma: float = 1.0, seed=None) -> np.ndarray:
    a = np.asarray(abs_returns, dtype=np.float64)
    if np.any(a < 0):
        raise ValueError("magnitudes must be nonnegative")
    u = np.random.default_rng(seed).random(a.size)
    return np.where(u < positive_probability(a, model, gamma), a, -a)


def inject_sign_acf(signed_returns, eacf1: float, seed=None) -> np.ndarray:
    """Overwrite each sign, with probability ``|eacf1|``, by the previous final sign.

    For negative ``eacf1`` the opposite of the previous final sign is used.
    Magnitudes are left alone.
    """
    x = np.asarray(signed_returns, dtype=np.float64)
    if x.size < 2:
        raise ValueError("need at least 2 returns")
    if eacf1 == 0:
        return x.copy()
    u = np.random.default_rng(seed).random(x.size - 1)
    overwrite = np.concatenate([[False], u < abs(eacf1)])
    idx = np.arange(x.size)
    # position of the last sign that was kept as drawn
    anchor = np.maximum.accumulate(np.where(overwrite, 0, idx))
    sign = np.sign(x[anchor])
    if eacf1 < 0:
        sign = sign * np.where((idx - anchor) % 2 == 0, 1.0, -1.0)
    return np.abs(x) * sign


def simulate_return_values(vol_params: VolSimParams, ret_params: ReturnSimParams, n: int | None = None,
                           seed=None) -> np.ndarray:
    s_vol, s_z, s_sign, s_acf = child_seeds(seed, 4)
    n = vol_params.low.n if n is None else n
    sigma = simulate_volatility(vol_params, n, s_vol)
    z = gen_ztilde(n, ret_params.rho, s_z)
    mags = abs_return(sigma, z, ret_params.eta)
    signed = assign_signs(mags, ret_params.sign_model, ret_params.gamma, s_sign)
    return inject_sign_acf(signed, ret_params.eacf1, s_acf)


def simulate_returns(vol_params: VolSimParams, ret_params: ReturnSimParams, n: int | None = None,
                     seed=None, method: str = "simple") -> ReturnSeries:
    """Full pipeline: volatility, feedback noise, tail shaping, signs, sign ACF."""
    v = simulate_return_values(vol_params, ret_params, n, seed)
    return ReturnSeries.from_values(v, source_label="simulated", method=method)


def rho_grid_search(target: float, vol_params: VolSimParams, ret_params: ReturnSimParams,
                    grid=np.linspace(0.0, 2.0, 21), n: int | None = None, nsim: int = 50, seed=None):
    """Pick the rho whose mean simulated lag-1 ACF of |r| is closest to ``target``.

    Returns ``(best_rho, grid, mean_acf1)``. A convenience for hand-tuning.
    """
    from .stats_core import lag1_acf

    seeds = child_seeds(seed, nsim)  # common random numbers across the grid
    means = []
    for rho in grid:
        rp = ReturnSimParams(rho=float(rho), eta=ret_params.eta, gamma=ret_params.gamma,
                             eacf1=ret_params.eacf1, sign_model=ret_params.sign_model,
                             allow_negative_rho=ret_params.allow_negative_rho)
        means.append(np.mean([lag1_acf(np.abs(simulate_return_values(vol_params, rp, n, s))) for s in seeds]))
    means = np.array(means)
    return float(grid[np.argmin(np.abs(means - target))]), np.asarray(grid), means
