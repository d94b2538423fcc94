"""Score models on eleven stylized facts with Monte-Carlo p-values.

Starred columns are two-sided. Small batches keep the demo quick; use
``nsim=1000`` for real comparisons.
"""

# %% Two models for the same data
import os

from _common import market_like
from stylized import evaluate_features, fit_decomposition, fit_garch_model, render_report

r = market_like(n=3000)
models = [fit_decomposition(r, alpha_n=0.998), fit_garch_model(r)]

# %% Evaluate
workers = int(os.environ.get("STYLIZED_WORKERS", "1"))
reports = [evaluate_features(r, m, nsim=100, max_lag=500, master_seed=5, workers=workers) for m in models]
print(render_report(reports[0], rows=reports[1:]))
# this particular path is unusually symmetric (Kuiper asymptotic p near 1),
# so feature 3 rejects both models even though the data came from a GARCH

# %% Details for one feature
f = reports[0].features[1]
print(f"{f.name}: data {f.empirical:.3f}, simulated 5%/mean/95% {f.q05:.3f}/{f.mean:.3f}/{f.q95:.3f}, p = {f.p_value:.2f}")
