"""Figure rendering for the CLI report paths.

Figures are written next to the delimited outputs with a non-interactive
backend and stripped metadata so repeated runs produce identical bytes.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .model import State  # noqa: E402

_SAVE_KW = {"dpi": 150, "metadata": {"Software": None}}


def save_profile_figure(path, u: State, title: str = "") -> None:
    fig, ax = plt.subplots(figsize=(6.0, 3.8), constrained_layout=True)
    r = u.grid.nodes
    for j in range(u.N):
        ax.plot(r, u.values[j], lw=1.4, label=f"u{j + 1}")
    ax.set_xlabel("r")
    ax.set_ylabel("u(r)")
    ax.grid(alpha=0.3)
    ax.legend(frameon=False)
    if title:
        ax.set_title(title)
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_pair_sweep_figure(path, rows) -> None:
    """rows: sequence of (mu1, mu2, beta, a1, a2, rho, energy)."""
    fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8.0, 3.6), constrained_layout=True)
    beta = [row[2] for row in rows]
    ax1.plot(beta, [row[3] for row in rows], "o", ms=4, label="a1")
    ax1.plot(beta, [row[4] for row in rows], "s", ms=4, mfc="none", label="a2")
    ax1.set_xlabel("beta")
    ax1.set_ylabel("amplitude")
    ax1.grid(alpha=0.3)
    ax1.legend(frameon=False)
    ax2.plot(beta, [row[5] for row in rows], "o", ms=4, label="rho")
    ax2.plot(beta, [row[6] for row in rows], "s", ms=4, mfc="none", label="energy")
    ax2.set_xlabel("beta")
    ax2.grid(alpha=0.3)
    ax2.legend(frameon=False)
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_continuation_figure(path, eps_values, residuals, energies, dist,
                             min_components) -> None:
    fig, axes = plt.subplots(2, 2, figsize=(8.0, 6.0), constrained_layout=True)
    ax = axes[0, 0]
    ax.semilogy(eps_values, [max(x, 1e-17) for x in residuals], "o-", ms=3)
    ax.set_ylabel("residual norm")
    ax = axes[0, 1]
    ax.plot(eps_values, energies, "o-", ms=3)
    ax.set_ylabel("energy")
    ax = axes[1, 0]
    ax.plot(eps_values, dist, "o-", ms=3)
    ax.set_ylabel("distance to eps=0 state")
    ax.set_xlabel("eps")
    ax = axes[1, 1]
    mins = list(zip(*min_components))
    for j, mj in enumerate(mins):
        ax.plot(eps_values, mj, "o-", ms=3, label=f"min u{j + 1}")
    ax.set_ylabel("component minima")
    ax.set_xlabel("eps")
    ax.legend(frameon=False, fontsize=8)
    for a in axes.flat:
        a.grid(alpha=0.3)
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
