"""Matplotlib rendering of the report artifacts.

Figures are rendered with the Agg backend and written without varying
metadata so repeated runs produce identical bytes.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .model import ModelSpec  # noqa: E402
from .trace import SessionTrace  # noqa: E402

_DPI = 120


def _save(fig, path: Path) -> None:
    fig.savefig(path, dpi=_DPI, metadata={"Software": None})
    plt.close(fig)


def save_timeseries_figure(trace: SessionTrace, spec: ModelSpec, path: str | Path,
                           title: str = "") -> None:
    """States and chosen inputs over measurement steps, puzzle boundaries marked."""
    steps = np.arange(len(trace.records))
    answers = trace.answer_matrix()
    puzzles = np.array([rec.puzzle for rec in trace.records])
    difficulty = np.array([rec.rld.difficulty for rec in trace.records])
    reward = np.array([rec.rld.reward_given for rec in trace.records])
    boundaries = steps[np.r_[False, puzzles[1:] != puzzles[:-1]]] if len(steps) else []

    fig, axes = plt.subplots(3, 1, sharex=True, figsize=(9, 7),
                             gridspec_kw={"height_ratios": [2, 2, 1]})
    names = spec.belief_vars + spec.goal_vars + spec.emotion_vars
    nb, ng = len(spec.belief_vars), len(spec.goal_vars)
    for i in range(nb + ng):
        axes[0].plot(steps, answers[:, i], marker=".", label=names[i])
    axes[0].set_ylabel("beliefs / goals")
    axes[0].set_ylim(-1.05, 1.05)
    axes[0].legend(fontsize=7, ncol=2, loc="upper right")
    for i in range(nb + ng, len(names)):
        axes[1].plot(steps, answers[:, i], marker=".", label=names[i])
    axes[1].set_ylabel("emotions")
    axes[1].set_ylim(-1.05, 1.05)
    axes[1].legend(fontsize=7, loc="upper right")
    axes[2].step(steps, difficulty, where="post", label="difficulty")
    if reward.any():
        axes[2].plot(steps[reward], difficulty[reward], "k^", markersize=5, label="reward")
    axes[2].set_ylabel("input")
    axes[2].set_xlabel("measurement step")
    axes[2].set_ylim(-0.3, 5.5)
    axes[2].legend(fontsize=7, loc="upper right")
    for ax in axes:
        for b in boundaries:
            ax.axvline(b - 0.5, color="0.85", linewidth=0.6, zorder=0)
    if title:
        axes[0].set_title(title, fontsize=10)
    fig.align_ylabels(axes)
    fig.tight_layout()
    _save(fig, Path(path))


def save_comparison_figure(details_csv: str | Path, path: str | Path) -> None:
    """Per-participant averages per variable under each controller arm."""
    lines = Path(details_csv).read_text().splitlines()
    header = lines[0].split(",")
    rows = [line.split(",") for line in lines[1:]]
    variables = [h[len("mbc_"):] for h in header if h.startswith("mbc_")]

    fig, axes = plt.subplots(1, len(variables), figsize=(3 * len(variables), 3.2), sharey=True)
    if len(variables) == 1:
        axes = [axes]
    for ax, var in zip(axes, variables):
        mbc = np.array([float(r[header.index(f"mbc_{var}")]) for r in rows])
        rbc = np.array([float(r[header.index(f"rbc_{var}")]) for r in rows])
        for a, b in zip(mbc, rbc):
            ax.plot([0, 1], [a, b], color="0.8", linewidth=0.8, zorder=1)
        ax.scatter(np.zeros(len(mbc)), mbc, s=18, zorder=2, label="MBC")
        ax.scatter(np.ones(len(rbc)), rbc, s=18, zorder=2, label="RBC")
        ax.hlines([mbc.mean(), rbc.mean()], [-0.2, 0.8], [0.2, 1.2],
                  linestyles="dotted", colors="k")
        ax.set_xticks([0, 1], ["MBC", "RBC"])
        ax.set_title(var, fontsize=9)
        ax.set_ylim(-1.05, 1.05)
    axes[0].set_ylabel("average reported value")
    fig.tight_layout()
    _save(fig, Path(path))
