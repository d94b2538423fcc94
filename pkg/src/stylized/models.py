"""Return-generating models and the JSON parameter file.

A model is any picklable object with ``label`` and
``simulate(n, seed) -> ndarray``. Two are provided: the volatility
decomposition simulator and the (optionally re-signed) GARCH(1,1).
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional, Protocol

import numpy as np

from . import series_io
from .garch_baseline import GarchParams, fit_garch11, simulate_garch_values
from .multiscale_vol import MultiscaleConfig, estimate_piecewise_vol
from .return_sim import ReturnSimParams, SignModel, fit_sign_model, simulate_return_values
from .series_io import ReturnSeries
from .stats_core import sign_acf1
from .vol_sim import HighFreqParams, LowFreqModel, VolSimParams, fit_low_freq

PARAM_FORMAT_VERSION = 1


class ReturnModel(Protocol):
    label: str

    def simulate(self, n: int, seed) -> np.ndarray: ...


class ModelError(ValueError):
    """Invalid or unreadable model parameters."""


@dataclass(frozen=True)
class DecompositionModel:
    vol: VolSimParams
    ret: ReturnSimParams
    label: str = "decomposition"
    method: str = "simple"
    fit_info: dict = field(default_factory=dict, compare=False)

    def simulate(self, n: int, seed) -> np.ndarray:
        return simulate_return_values(self.vol, self.ret, n, seed)

    def to_dict(self) -> dict:
        return {"model_type": "decomposition", "version": PARAM_FORMAT_VERSION, "label": self.label,
                "method": self.method, "vol": self.vol.to_dict(), "ret": self.ret.to_dict(),
                "fit_info": self.fit_info}


@dataclass(frozen=True)
class GarchModel:
    params: GarchParams
    sign_model: Optional[SignModel] = None
    gamma: float = 1.0
    eacf1: float = 0.0
    burn_in: int = 1000
    label: str = "garch11"
    method: str = "simple"

    def simulate(self, n: int, seed) -> np.ndarray:
        sign = None if self.sign_model is None else (self.sign_model, self.gamma, self.eacf1)
        x, overflowed = simulate_garch_values(self.params, n, seed, self.burn_in, sign)
        if overflowed or x.size != n:
            raise FloatingPointError(f"GARCH path overflowed (got {x.size} of {n} values)")
        return x

    def to_dict(self) -> dict:
        d = {"model_type": "garch", "version": PARAM_FORMAT_VERSION, "label": self.label, "method": self.method,
             "garch": self.params.to_dict(), "burn_in": self.burn_in}
        if self.sign_model is not None:
            d["sign"] = {"gamma": self.gamma, "eacf1": self.eacf1, "sign_model": self.sign_model.to_dict()}
        return d


@dataclass(frozen=True)
class ResampleModel:
    """Returns the stored data every time; the degenerate reference model."""

    data: np.ndarray
    label: str = "resample"

    def simulate(self, n: int, seed) -> np.ndarray:
        if n != self.data.size:
            raise ValueError("resample model only reproduces its own length")
        return np.array(self.data, copy=True)


def model_from_dict(d: dict):
    kind = d.get("model_type")
    try:
        if kind == "decomposition":
            return DecompositionModel(VolSimParams.from_dict(d["vol"]), ReturnSimParams.from_dict(d["ret"]),
                                      label=d.get("label", "decomposition"), method=d.get("method", "simple"),
                                      fit_info=d.get("fit_info", {}))
        if kind == "garch":
            sign = d.get("sign")
            return GarchModel(GarchParams.from_dict(d["garch"]),
                              sign_model=SignModel.from_dict(sign["sign_model"]) if sign else None,
                              gamma=float(sign["gamma"]) if sign else 1.0,
                              eacf1=float(sign["eacf1"]) if sign else 0.0,
                              burn_in=int(d.get("burn_in", 1000)), label=d.get("label", "garch11"),
                              method=d.get("method", "simple"))
    except (KeyError, TypeError, ValueError) as exc:
        raise ModelError(f"bad {kind} parameters: {exc}") from exc
    raise ModelError(f"unknown model_type {kind!r}")


def save_model(model, path) -> None:
    series_io.dump_json(model.to_dict(), path)


def load_model(path):
    try:
        d = series_io.load_json(path)
    except (OSError, ValueError) as exc:
        raise ModelError(f"cannot read parameter file {path}: {exc}") from exc
    return model_from_dict(d)


def fit_decomposition(r: ReturnSeries, alpha_n: float = 0.998, pow: float = 0.8, order: str = "energy",
                      high: HighFreqParams = HighFreqParams(), delta: float = 0.2, rho: float = 0.0,
                      eta: float = 0.0, gamma: float = 1.0, nu_bins: int = 50, eacf1: float | None = None,
                      label: str = "decomposition") -> DecompositionModel:
    """Fit every data-driven part of the decomposition model.

    The fine segmentation at ``alpha_n`` gives a daily log-volatility whose
    trigonometric approximation explains ``pow`` of its variance. The sign
    model is binned from the data and ``eacf1`` defaults to the data's
    lag-1 sign autocorrelation. The remaining screws are taken as given.
    """
    vol = estimate_piecewise_vol(r, MultiscaleConfig(alpha_n=alpha_n))
    log_vol = np.log(vol.expand())
    info = {"alpha_n": alpha_n, "segments": len(vol), "n": len(r), "source": r.source_label}
    if np.ptp(log_vol) == 0:
        # a single segment: nothing for the trigonometric part to explain
        low = LowFreqModel(n=len(r), freqs=np.array([], dtype=np.int64), a=np.array([]), b=np.array([]),
                           mlv=float(log_vol[0]), pow=pow, order=order, explained=1.0)
    else:
        low = fit_low_freq(log_vol, pow, order)
    info["J"] = low.J
    eacf1 = sign_acf1(r) if eacf1 is None else eacf1
    ret = ReturnSimParams(rho=rho, eta=eta, gamma=gamma, eacf1=eacf1, sign_model=fit_sign_model(r, nu_bins))
    return DecompositionModel(VolSimParams(low, high, delta), ret, label=label, method=r.method, fit_info=info)


def fit_garch_model(r: ReturnSeries, resign: bool = True, gamma: float = 1.0, nu_bins: int = 50,
                    label: str = "garch11") -> GarchModel:
    """GARCH(1,1) fit, optionally with the magnitude-dependent sign scheme."""
    p = fit_garch11(r)
    if not resign:
        return GarchModel(p, label=label, method=r.method)
    return GarchModel(p, fit_sign_model(r, nu_bins), gamma, sign_acf1(r), label=label, method=r.method)
