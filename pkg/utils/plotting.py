"""
Six-panel SVG rendering of a trajectory table.
"""
import io
import logging

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import pandas as pd  # noqa: E402

from models.saiqh import COMPARTMENT_LABELS, COMPARTMENTS  # noqa: E402
from utils.reporting import atomic_write  # noqa: E402

logger = logging.getLogger(__name__)

_STYLE = {
    "svg.fonttype": "none",
    "svg.hashsalt": "saiqh",
    "font.size": 9,
    "axes.spines.top": False,
    "axes.spines.right": False,
}


def render_trajectory_svg(frame: pd.DataFrame) -> bytes:
    """One panel per compartment, titled x1..x6; a single row draws a marker."""
    with plt.rc_context(_STYLE):
        fig, axes = plt.subplots(2, 3, figsize=(12, 6.5), sharex=True)
        t = frame["t"].to_numpy(dtype=float)
        for ax, name, label in zip(axes.flat, COMPARTMENTS, COMPARTMENT_LABELS):
            y = frame[name].to_numpy(dtype=float)
            if len(t) == 1:
                ax.plot(t, y, marker="o", linestyle="none", color="tab:blue")
            else:
                ax.plot(t, y, linewidth=1.2, color="tab:blue")
            ax.set_title(name)
            ax.set_ylabel(label)
            ax.grid(alpha=0.3)
        for ax in axes[1]:
            ax.set_xlabel("t")
        fig.tight_layout()

        buffer = io.BytesIO()
        fig.savefig(buffer, format="svg", metadata={"Date": None})
        plt.close(fig)
    return buffer.getvalue()


def write_trajectory_svg(frame: pd.DataFrame, path: str) -> None:
    atomic_write(path, render_trajectory_svg(frame))
    logger.info(f"Wrote six-panel plot to {path}")
