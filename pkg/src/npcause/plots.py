"""Figure rendering for the report path.

Every plot goes straight to a file next to the delimited output; nothing is
shown interactively.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def save_effect_plot(path, curves, cause_name: str, target_name: str,
                     oracle=None) -> None:
    """Render the per-DAG effect curves for one cause/target pair.

    ``curves`` is a list of CausalEffectCurve; bootstrap bands (+-1.96 sd)
    are drawn dashed where available, and ``oracle`` may supply an exact
    (grid, values) overlay.
    """
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for curve in curves:
        line, = ax.plot(curve.grid, curve.values, lw=1.5,
                        label=f"DAG {curve.dag_id}")
        if curve.sd is not None:
            half = 1.96 * np.asarray(curve.sd)
            ax.plot(curve.grid, curve.values + half, ls="--", lw=0.8,
                    color=line.get_color())
            ax.plot(curve.grid, curve.values - half, ls="--", lw=0.8,
                    color=line.get_color())
    if oracle is not None:
        ax.plot(oracle[0], oracle[1], color="black", lw=1.2, label="exact")
    ax.axhline(0.0, color="grey", lw=0.6)
    ax.set_xlabel(cause_name)
    ax.set_ylabel(f"effect on {target_name}")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)


def save_curve_plot(path, grid, values, xlabel: str, ylabel: str) -> None:
    """Render a single function of x (used for the quadrature oracle)."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    ax.plot(grid, values, color="black", lw=1.5)
    ax.axhline(0.0, color="grey", lw=0.6)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    fig.tight_layout()
    fig.savefig(path, dpi=120)
    plt.close(fig)
