"""PNG rendering of plot-data tables (matplotlib, Agg backend)."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402


def _save(fig, path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.tight_layout()
    fig.savefig(path, dpi=110)
    plt.close(fig)
    return path


def plot_sequences(rows: list[dict], path, x="lambda", y="value", group="probe", title="", logy=False) -> Path:
    """One line per group of y against x on log-x axes."""
    fig, ax = plt.subplots(figsize=(6, 4))
    groups = sorted({r[group] for r in rows}, key=str)
    for gname in groups:
        sel = [r for r in rows if r[group] == gname]
        xs = np.array([float(r[x]) for r in sel])
        ys = np.array([float(r[y]) for r in sel])
        if logy:
            ys = np.maximum(np.abs(ys), 1e-300)
        ax.plot(xs, ys, marker="o", ms=3, label=str(gname))
    ax.set_xscale("log")
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(x)
    ax.set_ylabel(y)
    ax.set_title(title)
    if len(groups) <= 12:
        ax.legend(fontsize=7, title=group)
    return _save(fig, path)


def plot_slope_table(rows: list[dict], path, title="") -> Path:
    """Polar-style picture of the maximal cone slope per direction (first two components)."""
    fig, ax = plt.subplots(figsize=(5, 5))
    d0 = np.array([float(r["d0"]) for r in rows])
    d1 = np.array([float(r.get("d1", 0.0)) for r in rows])
    sl = np.array([float(r["max_slope"]) for r in rows])
    sc = ax.scatter(d0, d1, c=np.log10(np.maximum(sl, 1e-3)), s=8, cmap="viridis")
    fig.colorbar(sc, ax=ax, label="log10 max slope")
    ax.set_aspect("equal")
    ax.set_xlabel("d0")
    ax.set_ylabel("d1")
    ax.set_title(title)
    return _save(fig, path)


def plot_ratio(rows: list[dict], path, title="") -> Path:
    """SLC ratio R against gamma for each beta."""
    fig, ax = plt.subplots(figsize=(6, 4))
    for beta in sorted({r["beta"] for r in rows}):
        sel = [r for r in rows if r["beta"] == beta]
        ax.plot([r["gamma"] for r in sel], [r["R"] for r in sel], "o", ms=4, label=f"beta={beta:.4g}")
    ax.axhline(1.0, color="k", lw=0.6)
    ax.set_xlabel("gamma")
    ax.set_ylabel("R")
    ax.set_title(title)
    ax.legend(fontsize=7)
    return _save(fig, path)
