from __future__ import annotations

from pathlib import Path
from typing import Sequence

import numpy as np

try:  # pragma: no cover - dependency availability is environment specific
    import matplotlib

    matplotlib.use("Agg")
    from matplotlib import pyplot as plt
except Exception:  # pragma: no cover - handled at runtime
    matplotlib = None
    plt = None

LINE_COLORS = ["#009FE3", "#E4572E", "#4C9F38", "#7E57C2", "#F2A541", "#303030"]
SVG_HASH_SALT = "thz-absorption"


def create_line_plot(
    x: np.ndarray,
    series: Sequence[tuple[str, np.ndarray]],
    *,
    xlabel: str,
    ylabel: str,
    title: str = "",
    log_y: bool = False,
) -> plt.Figure:
    if not series:
        raise ValueError("create_line_plot requires at least one series")
    if plt is None:
        raise RuntimeError("matplotlib is required to create plots")

    fig, ax = plt.subplots(figsize=(10, 5))
    for index, (label, values) in enumerate(series):
        y = np.asarray(values, dtype=float)
        if log_y:
            # Log axes cannot show non-positive values.
            y = np.where(y > 0, y, np.nan)
        ax.plot(x, y, label=label, color=LINE_COLORS[index % len(LINE_COLORS)], linewidth=1.2)

    if log_y:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel, fontsize=13, color="#202020")
    ax.set_ylabel(ylabel, fontsize=13, color="#202020")
    for spine in ("top", "right"):
        ax.spines[spine].set_visible(False)
    ax.yaxis.grid(True, color="#B7D9F2", linestyle=":", linewidth=0.8, alpha=0.6)
    ax.margins(x=0.01)
    if len(series) > 1:
        ax.legend(frameon=False, fontsize=10)
    if title:
        ax.set_title(title, fontsize=14, color="#202020")
    fig.tight_layout()
    return fig


def save_svg(fig: plt.Figure, path: Path) -> Path:
    """Write ``fig`` as a reproducible SVG and close it."""

    if plt is None:
        raise RuntimeError("matplotlib is required to save plots")
    with matplotlib.rc_context({"svg.hashsalt": SVG_HASH_SALT}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
    return path
