"""Simulate returns from a fitted volatility decomposition.

Low-frequency log-volatility is a trigonometric fit of the segmented
volatility; high-frequency regimes and re-signed noise complete the model.
"""

# %% Fit
import matplotlib.pyplot as plt
import numpy as np

from _common import OUT, market_like
from stylized import fit_decomposition, simulate_volatility
from stylized.stats_core import heavy_tail_measure, lag1_acf, sign_acf1

r = market_like()
model = fit_decomposition(r, alpha_n=0.998, pow=0.8)
print(f"{model.fit_info['segments']} segments, {model.fit_info['J']} frequencies explain 80% of log-volatility variance")

# %% Volatility and returns
sigma = simulate_volatility(model.vol, seed=1)
x = model.simulate(len(r), seed=1)
for name, s in (("data", r.values), ("simulated", x)):
    print(f"{name:>9}: sign ACF {sign_acf1(s):+.3f}, |r| lag-1 ACF {lag1_acf(np.abs(s)):.3f}, "
          f"heavy tail {heavy_tail_measure(s):.3f}, mean |r| {np.mean(np.abs(s)):.4f}")

# %% Screws: rho controls the short-range |r| correlation
from dataclasses import replace  # noqa: E402

for rho in (0.0, 0.5, 1.0):
    m = replace(model, ret=replace(model.ret, rho=rho))
    acf1 = np.mean([lag1_acf(np.abs(m.simulate(len(r), seed=s))) for s in range(20)])
    print(f"rho = {rho}: mean |r| lag-1 ACF {acf1:.3f}")

fig, axes = plt.subplots(2, 1, figsize=(10, 5), sharex=True)
axes[0].plot(sigma, color="k", lw=0.6)
axes[0].set(ylabel="volatility")
axes[1].plot(x, color="k", lw=0.3)
axes[1].set(xlabel="day", ylabel="return")
fig.tight_layout()
fig.savefig(OUT / "simulation.svg")
print("wrote", OUT / "simulation.svg")
