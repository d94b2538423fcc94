"""Stylized facts of a daily return series.

Run with ``python demos/01_stylized_facts.py``. Figures go to
``demos/output``.
"""

# %% A return series
import matplotlib.pyplot as plt
import numpy as np

from _common import OUT, market_like
from stylized.stats_core import acf_values, gain_loss_curve, heavy_tail_measure, kuiper_asymmetry, sign_acf1

r = market_like()
print(f"{len(r)} returns, mean square {np.mean(r.values ** 2):.3g}")

# %% Signs are nearly uncorrelated
print(f"lag-1 sign autocorrelation: {sign_acf1(r):+.4f}")

# %% Heavy tails relative to a Gaussian of the same scale
print(f"heavy-tail measure: {heavy_tail_measure(r):.3f} (0 for Gaussian returns)")

# %% Gains and losses of equal size are not equally frequent
d, p = kuiper_asymmetry(r)
print(f"Kuiper distance between gains and |losses|: {d:.4f}, asymptotic p = {p:.3f}")
gl = gain_loss_curve(r)
print(f"correlation of |r| with the positive fraction: {gl.correlation:+.3f}")

# %% Volatility clustering: the ACF of |r| decays slowly
lags = 500
a = acf_values(np.abs(r.values), lags)
print("ACF of |r| at lags 1, 10, 100, 500:", np.round(a[[0, 9, 99, 499]], 3))

fig, axes = plt.subplots(1, 2, figsize=(10, 4))
axes[0].plot(np.arange(1, lags + 1), a, color="k", lw=0.8)
axes[0].set(xlabel="lag", ylabel="ACF of |r|")
axes[1].plot(gl.bin_centers, gl.pos_frequency, "o-", ms=3, color="k")
axes[1].axhline(0.5, ls=":", color="0.5")
axes[1].set(xlabel="|r|", ylabel="fraction positive")
fig.tight_layout()
fig.savefig(OUT / "facts.svg")
print("wrote", OUT / "facts.svg")
