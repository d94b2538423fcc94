"""Randomised log-volatility paths.

The centred log of a piecewise-constant volatility is split into a
low-frequency trigonometric polynomial and a high-frequency remainder.
Simulation multiplies every trigonometric coefficient by an independent
standard normal, replaces the remainder with an alternating-regime noise
process and shifts the mean level by a uniform amount.
"""

from __future__ import annotations

from dataclasses import asdict, dataclass, field

import numpy as np

from ._seeding import child_seeds


@dataclass(frozen=True)
class LowFreqModel:
    """Selected frequencies ``freqs`` with sine/cosine coefficients ``a``, ``b``.

    The path is ``sum_j a_j sin(2 pi f_j k / n) + b_j cos(2 pi f_j k / n)``
    for ``k = 1..n``. ``mlv`` is the mean removed before fitting.
    """

    n: int
    freqs: np.ndarray
    a: np.ndarray
    b: np.ndarray
    mlv: float = 0.0
    pow: float = 0.8
    order: str = "energy"
    explained: float = 0.0

    def __post_init__(self):
        for name in ("freqs", "a", "b"):
            object.__setattr__(self, name, np.atleast_1d(np.asarray(getattr(self, name))))
        object.__setattr__(self, "freqs", self.freqs.astype(np.int64))
        if not (self.freqs.shape == self.a.shape == self.b.shape):
            raise ValueError("freqs, a and b must have equal length")
        if np.any(self.freqs < 1) or np.any(2 * self.freqs > self.n):
            raise ValueError("frequencies must lie in 1..n/2")

    @property
    def J(self) -> int:
        return int(self.freqs.size)

    def to_dict(self) -> dict:
        return {"n": self.n, "mlv": self.mlv, "pow": self.pow, "order": self.order,
                "explained": self.explained, "freqs": self.freqs.tolist(),
                "a": self.a.tolist(), "b": self.b.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "LowFreqModel":
        return cls(n=int(d["n"]), freqs=np.array(d["freqs"], dtype=np.int64), a=np.array(d["a"], dtype=float),
                   b=np.array(d["b"], dtype=float), mlv=float(d["mlv"]), pow=float(d.get("pow", 0.8)),
                   order=d.get("order", "energy"), explained=float(d.get("explained", 0.0)))


@dataclass(frozen=True)
class HighFreqParams:
    lambda1: float = 200.0
    sigma1: float = 0.0
    lambda2: float = 20.0
    sigma2: float = 0.4
    nu_t: float = 15.0

    def __post_init__(self):
        if self.lambda1 <= 0 or self.lambda2 <= 0:
            raise ValueError("mean regime lengths must be positive")
        if self.sigma1 < 0 or self.sigma2 < 0:
            raise ValueError("regime scales must be nonnegative")
        if self.nu_t <= 2:
            raise ValueError("t degrees of freedom must exceed 2")


@dataclass(frozen=True)
class VolSimParams:
    low: LowFreqModel
    high: HighFreqParams = field(default_factory=HighFreqParams)
    delta: float = 0.2

    def __post_init__(self):
        if self.delta < 0:
            raise ValueError("delta must be nonnegative")

    def to_dict(self) -> dict:
        return {"low": self.low.to_dict(), "high": asdict(self.high), "delta": self.delta}

    @classmethod
    def from_dict(cls, d: dict) -> "VolSimParams":
        return cls(LowFreqModel.from_dict(d["low"]), HighFreqParams(**d.get("high", {})),
                   float(d.get("delta", 0.2)))


def _spectrum(y: np.ndarray):
    """Least-squares sine/cosine coefficients of ``y`` at ``k = 1..n``.

    The basis is orthogonal on the full grid, so the coefficients come
    straight from the FFT of the series re-indexed to ``k mod n``.
    Returns ``freqs, a, b, energy`` with ``energy`` the sum of squares each
    frequency explains.
    """
    n = y.size
    Y = np.fft.rfft(np.roll(y, 1))  # position 0 holds k = n
    freqs = np.arange(1, n // 2 + 1)
    Yj = Y[1:]
    a = -2.0 / n * Yj.imag
    b = 2.0 / n * Yj.real
    energy = n / 2.0 * (a * a + b * b)
    if n % 2 == 0:
        a[-1] = 0.0
        b[-1] = Yj[-1].real / n
        energy[-1] = n * b[-1] ** 2
    return freqs, a, b, energy


def fit_low_freq(log_vol, pow: float = 0.8, order: str = "energy") -> LowFreqModel:
    """Fit the smallest trigonometric polynomial explaining ``pow`` of the variance.

    ``order="energy"`` adds frequencies by decreasing explained variance;
    ``order="index"`` adds them from the lowest frequency up.
    """
    x = np.asarray(log_vol, dtype=np.float64)
    if x.size < 4:
        raise ValueError("need at least 4 points")
    if not 0 < pow <= 1:
        raise ValueError("pow must lie in (0, 1]")
    mlv = float(x.mean())
    y = x - mlv
    total = float(y @ y)
    if total <= 1e-300 * x.size:
        raise ValueError("constant log-volatility has no variance to explain")
    freqs, a, b, energy = _spectrum(y)
    if order == "energy":
        idx = np.argsort(-energy, kind="stable")
    elif order == "index":
        idx = np.arange(freqs.size)
    else:
        raise ValueError(f"unknown order {order!r}")
    # energies sum to ``total`` up to rounding; normalise so pow = 1 is reachable
    frac = np.cumsum(energy[idx]) / energy.sum()
    J = int(np.searchsorted(frac, pow - 1e-12)) + 1
    J = min(J, idx.size)
    sel = np.sort(idx[:J])
    return LowFreqModel(n=x.size, freqs=freqs[sel], a=a[sel], b=b[sel], mlv=mlv, pow=pow,
                        order=order, explained=float(frac[J - 1]))


def explained_fraction(log_vol, model: LowFreqModel) -> float:
    y = np.asarray(log_vol, dtype=np.float64) - model.mlv
    resid = y - low_freq_path(model)
    return 1.0 - float(resid @ resid) / float(y @ y)


def _evaluate(n: int, freqs, a, b, length: int | None = None) -> np.ndarray:
    Y = np.zeros(n // 2 + 1, dtype=np.complex128)
    Y[freqs] = n / 2.0 * (b - 1j * a)
    if n % 2 == 0:
        nyq = freqs == n // 2
        if nyq.any():
            Y[n // 2] = n * b[nyq][0]
    y = np.roll(np.fft.irfft(Y, n), -1)  # back to k = 1..n
    if length is None or length == n:
        return y
    return np.resize(y, length)  # periodic extension


def low_freq_path(model: LowFreqModel, length: int | None = None) -> np.ndarray:
    """Evaluate the trigonometric polynomial at ``k = 1..length`` (default ``n``)."""
    return _evaluate(model.n, model.freqs, model.a, model.b, length)


def randomize_low_freq(model: LowFreqModel, seed=None, length: int | None = None) -> np.ndarray:
    """Path with each coefficient scaled by its own standard normal draw."""
    rng = np.random.default_rng(seed)
    z = rng.standard_normal((2, model.J))
    return _evaluate(model.n, model.freqs, z[0] * model.a, z[1] * model.b, length)


def simulate_high_freq(n: int, p: HighFreqParams = HighFreqParams(), seed=None,
                       start_regime: int = 1) -> np.ndarray:
    """Alternating-regime high-frequency log-volatility.

    Regime lengths are ``ceil`` of exponentials with means ``lambda1`` and
    ``lambda2`` (at least one day), alternating and starting with regime
    ``start_regime``. Long regimes are ``N(0, sigma1^2)``, short regimes
    ``sigma2 * T_nu`` with a raw (unscaled) t variate.
    """
    if n < 1:
        raise ValueError("n must be positive")
    rng = np.random.default_rng(seed)
    out = np.empty(n)
    pos = 0
    regime = start_regime
    while pos < n:
        mean = p.lambda1 if regime == 1 else p.lambda2
        length = max(1, int(np.ceil(rng.exponential(mean))))
        length = min(length, n - pos)
        if regime == 1:
            out[pos:pos + length] = p.sigma1 * rng.standard_normal(length)
        else:
            out[pos:pos + length] = p.sigma2 * rng.standard_t(p.nu_t, length)
        pos += length
        regime = 3 - regime
    return out


def simulate_volatility(params: VolSimParams, n: int | None = None, seed=None) -> np.ndarray:
    """One randomised volatility path ``exp(mlv + Delta + low + high)``.

    ``Delta ~ U[-delta, delta]`` is drawn once per path.
    """
    n = params.low.n if n is None else n
    s_low, s_high, s_level = child_seeds(seed, 3)
    low = randomize_low_freq(params.low, s_low, n)
    high = simulate_high_freq(n, params.high, s_high)
    shift = np.random.default_rng(s_level).uniform(-params.delta, params.delta) if params.delta > 0 else 0.0
    return np.exp(params.low.mlv + shift + low + high)
