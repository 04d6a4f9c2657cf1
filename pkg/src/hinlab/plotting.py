"""Figures rendered from the CSV outputs (never from in-memory results)."""
from __future__ import annotations

import csv
import math
from collections import defaultdict
from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

_DPI = 150
_STYLE = {
    "font.size": 9,
    "axes.labelsize": 9,
    "legend.fontsize": 7,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "axes.spines.top": False,
    "axes.spines.right": False,
}


def _save(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    # fixed metadata keeps PNG bytes reproducible
    fig.savefig(path, dpi=_DPI, bbox_inches="tight", metadata={"Software": None})
    plt.close(fig)
    return path


def _read(path):
    with open(path, newline="", encoding="utf-8") as f:
        return list(csv.DictReader(f))


def grid_figure(csv_path, out_path):
    """F1, mean individual and collective diversity against list size, one line per alpha."""
    rows = [r for r in _read(csv_path) if int(r["replicate"]) == 0]
    series = defaultdict(list)
    for r in rows:
        series[float(r["alpha"])].append(r)
    panels = [("f1", "F1"), ("mi_diversity", "MI diversity"), ("col_diversity", "Col diversity")]
    with plt.rc_context(_STYLE):
        fig, axes = plt.subplots(1, 3, figsize=(9, 2.8))
        cmap = plt.get_cmap("viridis")
        alphas = sorted(series, reverse=True)
        for k, alpha in enumerate(alphas):
            pts = sorted(series[alpha], key=lambda r: int(r["list_size"]))
            xs = [int(r["list_size"]) for r in pts]
            color = cmap(k / max(1, len(alphas) - 1))
            for ax, (key, _) in zip(axes, panels):
                ax.plot(xs, [float(r[key]) for r in pts], marker="o", ms=3, color=color,
                        label=f"α={alpha:g}")
        for ax, (_, label) in zip(axes, panels):
            ax.set_xlabel("list size")
            ax.set_ylabel(label)
        axes[0].legend(frameon=False)
        if rows:
            fig.suptitle(f"X={rows[0]['x']}  Y={rows[0]['y']}", fontsize=9)
        fig.tight_layout()
        return _save(fig, out_path)


def study_figure(csv_path, out_path):
    """Replicate quantile bands (shaded) against the original network (markers)."""
    rows = _read(csv_path)
    lo_key, hi_key = [k for k in rows[0] if k.startswith("q")] if rows else ("q10", "q90")
    metrics = list(dict.fromkeys(r["metric"] for r in rows))
    alphas = sorted({float(r["alpha"]) for r in rows}, reverse=True)
    with plt.rc_context(_STYLE):
        fig, axes = plt.subplots(len(metrics), len(alphas),
                                 figsize=(1.8 * max(1, len(alphas)), 1.7 * max(1, len(metrics))),
                                 squeeze=False, sharex=True)
        for i, metric in enumerate(metrics):
            for j, alpha in enumerate(alphas):
                ax = axes[i][j]
                pts = sorted((r for r in rows if r["metric"] == metric and float(r["alpha"]) == alpha),
                             key=lambda r: int(r["list_size"]))
                xs = [int(r["list_size"]) for r in pts]
                ax.fill_between(xs, [float(r[lo_key]) for r in pts], [float(r[hi_key]) for r in pts],
                                color="0.8", lw=0)
                ax.plot(xs, [float(r["median"]) for r in pts], color="0.5", lw=0.8)
                ax.plot(xs, [float(r["original"]) for r in pts], "o", ms=3, color="C3")
                if i == 0:
                    ax.set_title(f"α={alpha:g}", fontsize=8)
                if j == 0:
                    ax.set_ylabel(metric)
                if i == len(metrics) - 1:
                    ax.set_xlabel("list size")
        fig.tight_layout()
        return _save(fig, out_path)


def mosaic_figure(csv_path, out_path):
    """Heat map of log mean individual diversity: sources in rows, targets in columns."""
    rows = _read(csv_path)
    middles = list(dict.fromkeys(r["middle_relation"] for r in rows))
    sources = list(dict.fromkeys(r["source_group"] for r in rows))
    targets = list(dict.fromkeys(r["target_group"] for r in rows))
    values = {(r["source_group"], r["middle_relation"], r["target_group"]): float(r["value"]) for r in rows}
    finite = [v for v in values.values() if v > 0 and math.isfinite(v)]
    vmax = math.log10(max(finite)) if finite else 1.0
    with plt.rc_context(_STYLE):
        fig, axes = plt.subplots(1, max(1, len(middles)),
                                 figsize=(1.2 + 1.1 * len(targets) * max(1, len(middles)), 0.5 + 0.4 * len(sources)),
                                 squeeze=False)
        image = None
        for k, (ax, mid) in enumerate(zip(axes[0], middles)):
            grid = [[math.log10(values.get((s, mid, t), float("nan")))
                     if values.get((s, mid, t), 0) > 0 else float("nan") for t in targets] for s in sources]
            image = ax.imshow(grid, cmap="magma", vmin=0.0, vmax=vmax, aspect="auto")
            for a, s in enumerate(sources):
                for b, t in enumerate(targets):
                    v = values.get((s, mid, t))
                    if v is not None:
                        light = v > 0 and math.log10(v) > 0.6 * vmax
                        ax.text(b, a, f"{v:.2f}", ha="center", va="center", fontsize=6,
                                color="k" if light else "w")
            ax.set_xticks(range(len(targets)), targets)
            ax.set_yticks(range(len(sources)), sources if k == 0 else [])
            ax.set_title(mid, fontsize=8)
        if image is not None:
            fig.colorbar(image, ax=list(axes[0]), label="log10 MI diversity", shrink=0.8)
        return _save(fig, out_path)


FIGURES = {"grid": grid_figure, "study": study_figure, "mosaic": mosaic_figure}


def plot_script(jobs) -> str:
    """Source of a script that re-renders ``jobs`` = [(kind, csv path, png path)]."""
    lines = ["# Re-render figures from the CSV outputs.", "from hinlab import plotting", ""]
    for kind, csv_path, png_path in jobs:
        lines.append(f"plotting.{FIGURES[kind].__name__}({str(csv_path)!r}, {str(png_path)!r})")
    return "\n".join(lines) + "\n"
