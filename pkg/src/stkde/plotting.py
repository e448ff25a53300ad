"""PAI and hit-rate curve figures."""
from __future__ import annotations

from pathlib import Path
from typing import Mapping

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .evaluation import PAICurve  # noqa: E402

STYLE = {
    "stkde": dict(color="#c0392b", label="STKDE"),
    "skde": dict(color="#2c7fb8", label="SKDE"),
    "promap": dict(color="#7f7f7f", label="ProMap"),
}

RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "svg.hashsalt": "stkde",
}


def plot_pai_curves(curves: Mapping[str, PAICurve], path, title: str = "") -> Path:
    """Consolidated PAI (left) and hit-rate (right) curves, one line per method.

    Infeasible scales are left as gaps.  PNG metadata is stripped so that
    identical inputs give identical files.
    """
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with plt.rc_context(RC):
        fig, (ax_pai, ax_hit) = plt.subplots(1, 2, figsize=(7.5, 3.2), constrained_layout=True)
        for method, curve in curves.items():
            style = STYLE.get(method, dict(label=method))
            ax_pai.plot(curve.scales, curve.pai_values(), lw=1.2, **style)
            ax_hit.plot(curve.scales, curve.hit_rates() * 100, lw=1.2, **style)
        ax_pai.axhline(1.0, color="k", lw=0.6, ls=":")
        ax_pai.set_xlabel("Hotspot area (% of study area)")
        ax_pai.set_ylabel("PAI")
        ax_hit.set_xlabel("Hotspot area (% of study area)")
        ax_hit.set_ylabel("Hit rate (%)")
        ax_pai.legend(frameon=False)
        if title:
            fig.suptitle(title)
        fig.savefig(path, dpi=150, metadata={"Software": None})
        plt.close(fig)
    return path
