"""PNG figures for reports, rendered off-screen."""

from __future__ import annotations

from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_META = {"Software": None}


def _save(fig, path: Path) -> Path:
    fig.tight_layout()
    fig.savefig(path, dpi=110, metadata=_META)
    plt.close(fig)
    return path


def tv_curve(path: Path, times: Sequence[float], tv: Sequence[float], eps: float, t_mix: float | None = None,
             title: str = "") -> Path:
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.plot(times, tv, marker=".", lw=1)
    ax.axhline(eps, color="grey", ls="--", lw=0.8)
    if t_mix is not None:
        ax.axvline(t_mix, color="tab:red", ls=":", lw=0.8)
    ax.set_xlabel("t")
    ax.set_ylabel("worst-start TV distance")
    ax.set_title(title)
    return _save(fig, path)


def statistic_trace(path: Path, T: Sequence[int], mean: Sequence[float], ref_mean: float,
                    tv_lower: Sequence[float], eps: float) -> Path:
    fig, (a1, a2) = plt.subplots(1, 2, figsize=(8, 3.2))
    a1.plot(T, mean, marker=".")
    a1.axhline(ref_mean, color="grey", ls="--", lw=0.8)
    a1.set_xlabel("steps")
    a1.set_ylabel("mean diagonal count")
    a2.plot(T, tv_lower, marker=".")
    a2.axhline(eps, color="grey", ls="--", lw=0.8)
    a2.set_xlabel("steps")
    a2.set_ylabel("TV lower bound")
    return _save(fig, path)


def mixing_fit(path: Path, ns: Sequence[int], ts: Sequence[float], a: float) -> Path:
    import numpy as np
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.plot(ns, ts, "o", label="measured")
    grid = np.linspace(min(ns), max(ns), 100)
    ax.plot(grid, a * grid * np.log(grid), label=f"{a:.3g} n log n")
    ax.set_xlabel("n")
    ax.set_ylabel("steps to TV ≤ ε")
    ax.legend()
    return _save(fig, path)


def histogram(path: Path, values: Sequence[float], xlabel: str, bins: int = 50, log: bool = True) -> Path:
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.hist(values, bins=bins, log=log)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("count")
    return _save(fig, path)


def series(path: Path, xs: Sequence[float], ys: Sequence[float], xlabel: str, ylabel: str,
           hline: float | None = None) -> Path:
    fig, ax = plt.subplots(figsize=(5, 3.4))
    ax.plot(xs, ys, marker="o")
    if hline is not None:
        ax.axhline(hline, color="grey", ls="--", lw=0.8)
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    return _save(fig, path)
