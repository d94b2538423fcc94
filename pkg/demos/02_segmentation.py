"""Piecewise-constant volatility from multiscale constraints.

The segmentation level ``alpha_n`` is calibrated so that Gaussian white
noise of the same length is a single segment with frequency 0.9.
"""

# %% Calibrate and segment
import matplotlib.pyplot as plt
import numpy as np
from scipy import stats

from _common import OUT, market_like
from stylized import MultiscaleConfig, calibrate_alpha_n, estimate_piecewise_vol
from stylized.multiscale_vol import residual_diagnostics, segment_count, sojourn_curve

r = market_like()
alpha_n = calibrate_alpha_n(len(r), alpha=0.9, nsim=500, seed=7)
vol = estimate_piecewise_vol(r, MultiscaleConfig(alpha_n=alpha_n))
print(f"alpha_n = {alpha_n:.8f}: {len(vol)} segments, median length {np.median(vol.lengths):.0f} days")

# %% Finer resolution at a lower level
for a in (0.99, 0.998, alpha_n):
    print(f"alpha_n = {a:.7f} -> {segment_count(r, a)} segments")

# %% Returns divided by the fitted volatility are close to Gaussian
diag = residual_diagnostics(r, vol)
print(f"kurtosis of r: {np.mean(r.values ** 4) / np.mean(r.values ** 2) ** 2:.2f}, "
      f"of residuals: {diag.kurtosis:.2f}")

# %% Long quiet stretches, short turbulent ones
soj = np.array(sojourn_curve(vol))
print(f"rank correlation of segment level and length: {stats.spearmanr(soj[:, 0], soj[:, 1])[0]:+.3f}")

fig, ax = plt.subplots(figsize=(10, 4))
t = np.arange(1, len(r) + 1)
ax.plot(t, np.abs(r.values), lw=0.3, color="0.6", label="|r|")
ax.step(t, vol.expand(), where="post", color="k", label="volatility")
ax.set(xlabel="day")
ax.legend(frameon=False)
fig.tight_layout()
fig.savefig(OUT / "segments.svg")
print("wrote", OUT / "segments.svg")
