"""
Plotting Module for mce.

Deterministic SVG figures: a fixed hash salt, text kept as text and no
date metadata, so the same data always yields the same bytes.
"""

import logging
import math
from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

from matplotlib import rc_context  # noqa: E402
from matplotlib.backends.backend_agg import FigureCanvasAgg  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402

logger = logging.getLogger(__name__)

SVG_RC = {"svg.hashsalt": "mce", "svg.fonttype": "none", "path.simplify": False}
GOLDEN_RATIO = (math.sqrt(5) - 1.0) / 2.0


def _figure(width: float = 6.0) -> Figure:
    fig = Figure(figsize=(width, width * GOLDEN_RATIO), facecolor="w")
    FigureCanvasAgg(fig)
    return fig


def plot_curve(
    path: str,
    x: Sequence[float],
    y: Sequence[float],
    low: Optional[Sequence[float]] = None,
    high: Optional[Sequence[float]] = None,
    xlabel: str = "tau",
    ylabel: str = "H",
    title: str = "",
    logx: bool = True,
    reference: Optional[float] = None,
) -> None:
    """Line plot of y against x with an optional error band and horizontal reference line."""
    with rc_context(SVG_RC):
        fig = _figure()
        ax = fig.add_subplot(1, 1, 1)
        ax.plot(list(x), list(y), marker="o", markersize=3, linewidth=1.2, color="C0", label=ylabel)
        if low is not None and high is not None:
            finite_high = [h if math.isfinite(h) else yv for h, yv in zip(high, y)]
            ax.fill_between(list(x), list(low), finite_high, color="C0", alpha=0.2, linewidth=0)
        if reference is not None and math.isfinite(reference):
            ax.axhline(reference, color="C3", linestyle="--", linewidth=1.0, label="EAVR")
            ax.legend(loc="best", frameon=False)
        if logx:
            ax.set_xscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        if title:
            ax.set_title(title)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
    logger.info(f"Wrote plot to {path}")
