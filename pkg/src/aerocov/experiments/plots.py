"""Static SVG line charts with byte-stable output."""
from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

_STYLE = {
    "svg.hashsalt": "aerocov",
    "svg.fonttype": "none",
    "path.simplify": False,
}


def _series(curves, xaxis):
    for c in curves:
        label = c.meta.get("label", c.method)
        if xaxis == "T_db":
            yield label, c.method, c.t_db, c.p_cov
        else:
            for t in np.unique(c.t_db):
                sel = c.t_db == t
                yield f"T={t:g} dB {label}", c.method, c.sweep_values[sel], c.p_cov[sel]


def emit_plots(curves, path, xaxis: str = "T_db", vlines=(), title: str = "") -> Path:
    """Coverage vs threshold (``xaxis="T_db"``) or vs the sweep variable.

    Monte-Carlo series are drawn as lines, analytic ones as markers.
    """
    curves = list(curves)
    if not curves:
        raise ValueError("no curves to plot")
    path = Path(path)
    with plt.rc_context(_STYLE):
        fig, ax = plt.subplots(figsize=(7, 4.5))
        for label, method, x, y in _series(curves, xaxis):
            if len(x) == 1 or method != "monte_carlo":
                ax.plot(x, y, linestyle="none" if method != "monte_carlo" else "-", marker="o",
                        markersize=3.5, label=label)
            else:
                ax.plot(x, y, "-", linewidth=1.2, label=label)
        for v in vlines:
            ax.axvline(v, color="0.5", linestyle=":", linewidth=0.8)
        ax.set_xlabel("SINR threshold T (dB)" if xaxis == "T_db" else curves[0].sweep_variable)
        ax.set_ylabel("coverage probability")
        ax.set_ylim(-0.02, 1.02)
        ax.grid(True, alpha=0.3)
        if title:
            ax.set_title(title)
        ax.legend(fontsize=6, ncol=2)
        fig.tight_layout()
        fig.savefig(path, format="svg", metadata={"Date": None})
        plt.close(fig)
    return path
