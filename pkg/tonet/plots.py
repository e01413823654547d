"""
Contour Plots

Estimate (points) over reference (line) on a log-frequency axis, written
as SVG. Unvoiced estimate frames sit on a baseline row below the pitch
range, so the estimate group holds one marker per frame.
"""

import logging
from pathlib import Path
from typing import Optional, Union

import matplotlib

matplotlib.use("Agg")

import numpy as np
from matplotlib import pyplot as plt

from .data.labels import F_MIN, PitchContour

logger = logging.getLogger(__name__)

UNVOICED_ROW = F_MIN * 0.75
Y_LIMITS = (F_MIN * 0.6, 2200.0)


def plot_contours(
    est: PitchContour,
    ref: PitchContour,
    save_path: Union[str, Path],
    title: Optional[str] = None,
) -> Path:
    """Render an estimate/reference pair to an SVG file."""
    save_path = Path(save_path)
    save_path.parent.mkdir(parents=True, exist_ok=True)

    with plt.rc_context({"svg.hashsalt": "tonet", "svg.fonttype": "none", "font.size": 10}):
        fig, ax = plt.subplots(figsize=(10, 4))
        ref_line = np.where(ref.voiced, ref.freqs, np.nan)
        ax.plot(ref.times, ref_line, color="black", linewidth=1.2, label="reference", gid="reference")
        est_points = np.where(est.voiced, est.freqs, UNVOICED_ROW)
        ax.plot(
            est.times,
            est_points,
            linestyle="none",
            marker="o",
            markersize=2,
            color="tab:red",
            label="estimate",
            gid="estimate",
        )
        ax.set_yscale("log", base=2)
        ax.set_ylim(*Y_LIMITS)
        end = max(est.times[-1] if len(est) else 0.0, ref.times[-1] if len(ref) else 0.0)
        ax.set_xlim(0.0, end + 0.01)
        ax.set_xlabel("Time (s)")
        ax.set_ylabel("Frequency (Hz)")
        if title:
            ax.set_title(title)
        ax.legend(loc="upper right")
        ax.grid(True, which="major", alpha=0.3)
        fig.tight_layout()
        fig.savefig(save_path, format="svg", metadata={"Date": None})
        plt.close(fig)

    logger.info("Contour plot saved to %s", save_path)
    return save_path
