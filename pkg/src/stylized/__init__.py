"""Long-range daily return simulation and Monte-Carlo scoring of stylized facts."""

from .feature_harness import FeatureReport, FeatureValue, evaluate_features, render_report
from .garch_baseline import GarchParams, fit_garch11, simulate_garch11, unconditional_variance
from .models import (DecompositionModel, GarchModel, ResampleModel, fit_decomposition, fit_garch_model,
                     load_model, save_model)
from .multiscale_vol import (MultiscaleConfig, PiecewiseVolatility, build_interval_family, calibrate_alpha_n,
                             estimate_piecewise_vol)
from .return_sim import ReturnSimParams, SignModel, simulate_returns
from .series_io import PriceSeries, ReturnSeries, load_series, to_returns
from .vol_sim import HighFreqParams, LowFreqModel, VolSimParams, fit_low_freq, simulate_volatility

__version__ = "0.1.0"
