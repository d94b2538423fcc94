"""GARCH(1,1) as a comparison model."""

# %% Fit
import numpy as np

from _common import market_like
from stylized import fit_garch11, unconditional_variance
from stylized._seeding import child_seeds
from stylized.feature_harness import two_sided_pvalue
from stylized.garch_baseline import simulate_garch_values

r = market_like()
p = fit_garch11(r)
print(f"a0 = {p.a0:.3g}, a1 = {p.a1:.3f}, b1 = {p.b1:.3f}, persistence {p.persistence:.4f}")
print(f"unconditional variance {unconditional_variance(p)}, sample mean square {np.mean(r.values ** 2):.3g}")

# %% The sample mean square against its distribution under the fit
sims = np.array([np.mean(simulate_garch_values(p, len(r), s)[0] ** 2) for s in child_seeds(11, 500)])
lo, hi = np.quantile(sims, [0.05, 0.95])
print(f"90% band of mean r^2 under the fit: ({lo:.3g}, {hi:.3g}); two-sided p = "
      f"{two_sided_pvalue(np.mean(r.values ** 2), sims):.3f}")
