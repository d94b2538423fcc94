"""Shared helpers for the demo scripts."""

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

from stylized import GarchParams, simulate_garch11  # noqa: E402

OUT = Path(__file__).with_name("output")
OUT.mkdir(exist_ok=True)


def market_like(n=5000, seed=2024):
    """A GARCH path standing in for daily index returns."""
    return simulate_garch11(GarchParams(1.5e-6, 0.08, 0.91), n, seed=seed)
