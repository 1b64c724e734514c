"""Figure rendering for sweep reports and field snapshots (headless backend)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

#: expected decay rate per order token, used to pick reference guide lines
_EXPECTED_RATE = {0: 1, 1: 2, 2: 3, "macro2": 3}


def convergence_figure(report, path, dpi=150):
    """Log-log error-vs-eta plot of an ErrorReport with slope guide lines."""
    fig, ax = plt.subplots(figsize=(6.4, 4.8))
    etas = np.asarray(report.etas, dtype=float)
    for order in report.orders:
        errs = np.asarray(report.errors[order], dtype=float)
        slope = report.slopes[order]
        label = f"order {order}"
        if slope is not None:
            label += f" (slope {slope:.2f})"
        ax.loglog(etas, errs, marker="o", linewidth=1.2, label=label)

    drawn = set()
    for order in report.orders:
        p = _EXPECTED_RATE.get(order)
        if p is None or p in drawn or report.slopes[order] is None:
            continue
        drawn.add(p)
        errs = np.asarray(report.errors[order], dtype=float)
        anchor = 1.6 * errs[-1] / etas[-1] ** p
        ax.loglog(etas, anchor * etas ** p, linestyle="--", linewidth=0.9,
                  color="0.55", label=rf"$\eta^{p}$")

    ax.set_xlabel(r"modulation period $\eta$")
    ax.set_ylabel(r"$L^2(0,T;L^2)$ error")
    ax.set_title(f"{report.case} case")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.savefig(path, dpi=dpi, bbox_inches="tight")
    plt.close(fig)
    return path


def field_snapshot(grid, fields, t, path, dpi=150):
    """Plot named physical-space fields over the domain at one time.

    fields: mapping label -> real array on grid.x."""
    fig, ax = plt.subplots(figsize=(6.4, 4.0))
    for label, values in fields.items():
        ax.plot(grid.x, np.asarray(values, dtype=float), linewidth=1.0,
                label=label)
    ax.set_xlabel("x")
    ax.set_ylabel("field")
    ax.set_title(f"t = {t:g}")
    ax.grid(True, alpha=0.3)
    ax.legend(fontsize=8)
    fig.savefig(path, dpi=dpi, bbox_inches="tight")
    plt.close(fig)
    return path
