"""Static scan figure: mixture log-likelihood against the fraction of incompatible data."""
from __future__ import annotations

from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .io import FitReport  # noqa: E402

STYLE = {
    "font.size": 9,
    "axes.labelsize": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "svg.hashsalt": "cbn-scan",
    "svg.fonttype": "none",
    "path.simplify": False,
}


def plot_scan(reports: Sequence[FitReport], path, title: str | None = None) -> None:
    """Write the scan scatter to ``path`` (format from the suffix).

    Points with bootstrap summaries get an interquartile bar and thin
    min-max whiskers.  Output is reproducible: no timestamps, fixed ids.
    """
    xs = [1 - r.lambda_hat for r in reports]
    ys = [r.log_lik for r in reports]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 3.4))
        for x, r in zip(xs, reports):
            b = r.bootstrap
            if not b:
                continue
            ax.vlines(x, b["min"], b["max"], colors="0.6", linewidth=0.6)
            ax.vlines(x, b["q1"], b["q3"], colors="black", linewidth=2.0)
        ax.plot(xs, ys, "o", color="black", markersize=4, zorder=3)
        ax.set_xlabel("fraction of incompatible genotypes")
        ax.set_ylabel("mixture log-likelihood")
        if title:
            ax.set_title(title)
        fig.tight_layout()
        fig.savefig(path, metadata={"Date": None} if str(path).endswith(".svg") else None)
        plt.close(fig)
