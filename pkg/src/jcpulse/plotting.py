"""Figure rendering for the command-line report paths.

Everything draws through the Agg backend and writes straight to files;
nothing here opens a window. Functions take plain data (records, saved
trajectories, restart traces) so they stay usable outside the CLI.
"""

from __future__ import annotations

from typing import Optional, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402  (backend must be set first)
import numpy as np  # noqa: E402

from .dynamics import Trajectory  # noqa: E402

# population curves below this peak are noise in a crowded legend
_LEGEND_FLOOR = 0.02


def plot_transition_families(records: Sequence[dict], path) -> None:
    """Transition frequencies of the four drive families versus level."""
    ns = [r["n"] for r in records]
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for key, marker in (
        ("w_up", "^"),
        ("w_plus", "o"),
        ("w_minus", "s"),
        ("w_down", "v"),
    ):
        ax.plot(ns, [r[key] for r in records], marker=marker, label=key)
    ax.set_xlabel("level n")
    ax.set_ylabel("transition frequency (MHz)")
    ax.set_title("drive transition families")
    ax.legend(loc="best", fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_populations(
    trajectories: Sequence[Trajectory], path, title: Optional[str] = None
) -> None:
    """Populations versus time, stages concatenated end to end."""
    trajectories = list(trajectories)
    if not trajectories:
        raise ValueError("nothing to plot")
    labels = [str(lab) for lab in trajectories[0].labels]
    times = []
    pops = []
    offset = 0.0
    marks = []
    for traj in trajectories:
        times.append(np.asarray(traj.times) + offset)
        pops.append(traj.populations)
        offset += float(traj.times[-1])
        marks.append(offset)
    t = np.concatenate(times)
    p = np.vstack(pops)

    fig, ax = plt.subplots(figsize=(7.0, 4.0))
    for i, lab in enumerate(labels):
        if float(np.max(p[:, i])) < _LEGEND_FLOOR:
            continue
        ax.plot(t, p[:, i], label=lab)
    for mark in marks[:-1]:
        ax.axvline(mark, color="gray", linestyle=":", linewidth=0.8)
    ax.set_xlabel("time (ns)")
    ax.set_ylabel("population")
    ax.set_ylim(-0.02, 1.02)
    if title:
        ax.set_title(title)
    ax.legend(loc="center right", fontsize=8)
    ax.grid(True, alpha=0.3)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def plot_search_progress(per_restart: Sequence, path) -> None:
    """Best objective so far versus iteration, one line per restart.

    Accepts the optimizer's restart records; aborted restarts (no trace)
    are skipped.
    """
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    drew = False
    for rec in per_restart:
        if not rec.trace:
            continue
        its = [it for it, _ in rec.trace]
        objs = [max(f, 1e-16) for _, f in rec.trace]
        ax.step(its, objs, where="post", label=f"restart {rec.index}")
        drew = True
    ax.set_yscale("log")
    ax.set_xlabel("iteration")
    ax.set_ylabel("best objective")
    ax.set_title("search progress")
    if drew:
        ax.legend(loc="best", fontsize=7)
    ax.grid(True, alpha=0.3, which="both")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
