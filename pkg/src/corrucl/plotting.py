"""Matplotlib rendering of cumulative-regret curves.

Figures are written with fixed metadata so repeated runs produce identical
files.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.figsize": (6.4, 4.0),
    "font.size": 10,
    "axes.labelsize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "svg.hashsalt": "corrucl",
    "svg.fonttype": "none",
}

COLORS = {
    "uninformative": "#444444",
    "uncorrelated": "#1f77b4",
    "correlated": "#d62728",
}


def _metadata(path: Path):
    ext = path.suffix.lower()
    if ext == ".svg":
        return {"Date": None}
    if ext == ".pdf":
        return {"CreationDate": None, "ModDate": None}
    if ext == ".png":
        return {"Software": None}
    return None


def regret_figure(path, t, series, lower_bound=None, title=None):
    """Plot mean cumulative regret with +-1 SEM bands.

    ``series`` maps a label to ``(mean, sem)`` arrays over ``t``.
    """
    path = Path(path)
    t = np.asarray(t)
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots()
        for label, (mean, sem) in series.items():
            color = COLORS.get(label)
            ax.plot(t, mean, label=label, color=color, lw=1.4)
            if sem is not None and np.any(sem > 0):
                ax.fill_between(t, mean - sem, mean + sem, color=color, alpha=0.2, lw=0)
        if lower_bound is not None:
            ax.plot(t, lower_bound, "k--", lw=1.0, label="Lai-Robbins bound")
        ax.set_xlabel("t")
        ax.set_ylabel("mean cumulative regret")
        ax.set_xlim(t[0], t[-1])
        ax.set_ylim(bottom=0)
        if title:
            ax.set_title(title)
        ax.legend(frameon=False, loc="upper left")
        fig.tight_layout()
        fig.savefig(path, metadata=_metadata(path))
        plt.close(fig)
    return path
