"""Static PNG figures for experiment reports (Agg backend, no display)."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def plot_errors(report, path) -> None:
    """log-log errors against eps, with slack * reference and the fitted line."""
    eps = report.eps
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    ax.loglog(eps, report.errors, "o-", label="error")
    ax.loglog(eps, report.slack * report.reference, "--", label=f"{report.slack:g} x {report.reference_name}")
    fit = np.exp(report.intercept) * eps ** report.slope
    ax.loglog(eps, fit, ":", color="gray", label=f"fit, slope {report.slope:.3f}")
    for name, col in report.extra_columns.items():
        if name.startswith("error_"):
            ax.loglog(eps, col, "s-", ms=3, label=name)
    ax.set_xlabel("eps")
    ax.set_ylabel("error")
    ax.set_title(f"{report.experiment}: {'pass' if report.passed else 'FAIL'}")
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def plot_trajectory(traj, path, title: str = "", line=None) -> None:
    """State components against t (1-D) or the planar path (2-D and up, first two axes)."""
    t = np.linspace(traj.t0, traj.t1, 4001)
    X = traj(t)
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    if traj.dim == 1:
        ax.plot(t, X[:, 0], lw=0.8, label="X_eps")
        if line is not None:
            ax.plot(t, line(t), "--", lw=0.8, label="limit")
        ax.set_xlabel("t")
        ax.set_ylabel("x")
    else:
        ax.plot(X[:, 0], X[:, 1], lw=0.8, label="X_eps")
        if line is not None:
            L = line(t)
            ax.plot(L[:, 0], L[:, 1], "--", lw=0.8, label="limit")
        ax.set_xlabel("x1")
        ax.set_ylabel("x2")
        ax.set_aspect("equal", adjustable="datalim")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)


def plot_snapshot(x, v_eps, v_ref, path, title: str = "") -> None:
    fig, ax = plt.subplots(figsize=(5.5, 4.0))
    ax.plot(x, v_eps, lw=0.8, label="v_eps")
    ax.plot(x, v_ref, "--", lw=0.8, label="homogenized")
    ax.set_xlabel("x")
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
