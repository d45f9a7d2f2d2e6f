"""
SVG charts: correlation / p-value heatmaps and the significant-feature t-statistic bar chart.

Heatmap cells are one mesh; undefined and below-alpha cells are overlaid as
separate collections. Every bar is its own group with a stable id.
"""
import io
import logging
import math

import matplotlib
import numpy as np

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
from matplotlib.collections import PatchCollection  # noqa: E402
from matplotlib import colors as mcolors  # noqa: E402
from matplotlib.cm import ScalarMappable  # noqa: E402
from matplotlib.patches import Rectangle  # noqa: E402

from src.utils.file_utils import atomic_write_text  # noqa: E402

logger = logging.getLogger(__name__)

SVG_RC = {
    "svg.hashsalt": "liwc-bias-audit",
    "svg.fonttype": "none",
    "font.family": "DejaVu Sans",
}
SVG_METADATA = {"Date": None}

SCALES = {
    # name: (colormap, vmin, vmax, colorbar label)
    "r": ("RdBu_r", -1.0, 1.0, "Pearson r"),
    "p": ("viridis_r", 0.0, 1.0, "p-value"),
}
UNDEFINED_FILL = "#d9d9d9"
VARIANT_COLORS = ["#4d4d4d", "#1b9e77", "#d95f02", "#7570b3", "#e7298a", "#66a61e"]


def _undefined(value):
    return value is None or (isinstance(value, float) and math.isnan(value))


def _save_svg(fig, path):
    buffer = io.BytesIO()
    fig.savefig(buffer, format="svg", metadata=SVG_METADATA)
    plt.close(fig)
    atomic_write_text(path, buffer.getvalue().decode("utf-8"))
    return path


def emit_heatmap(matrix, row_labels, col_labels, path, scale="r", alpha=0.05, title=None,
                 significance=None):
    """
    Render a numeric grid as an SVG heatmap.

    Args:
        matrix: rows of numbers; NaN/None cells are drawn hatched (gid "nan-cells")
        scale: 'r' (diverging, [-1, 1]) or 'p' (sequential, [0, 1])
        significance: optional grid of p-values used to outline cells below alpha
            on an r heatmap (gid "sig-cells"); a p heatmap outlines its own cells below alpha

    Returns:
        dict: cell (i, j) -> {'value', 'state', 'color'} where state is
        'nan', 'sig' or 'plain'
    """
    rows = len(matrix)
    cols = len(matrix[0]) if rows else 0
    if any(len(row) != cols for row in matrix):
        raise ValueError("heatmap grid must be rectangular")
    cmap_name, vmin, vmax, label = SCALES[scale]
    cmap = matplotlib.colormaps[cmap_name].with_extremes(bad=(0.0, 0.0, 0.0, 0.0))
    norm = mcolors.Normalize(vmin=vmin, vmax=vmax)
    if significance is None and scale == "p":
        significance = matrix

    grid = np.array(
        [[math.nan if _undefined(v) else float(v) for v in row] for row in matrix],
        dtype=float,
    ).reshape(rows, cols)
    cells = {}
    nan_rects, sig_rects = [], []
    for i in range(rows):
        for j in range(cols):
            value = matrix[i][j]
            if _undefined(value):
                cells[(i, j)] = {"value": value, "state": "nan", "color": UNDEFINED_FILL}
                nan_rects.append(Rectangle((j, i), 1, 1))
                continue
            p_value = significance[i][j] if significance is not None else None
            sig = not _undefined(p_value) and p_value < alpha
            if sig:
                sig_rects.append(Rectangle((j, i), 1, 1))
            cells[(i, j)] = {
                "value": value,
                "state": "sig" if sig else "plain",
                "color": mcolors.to_hex(cmap(norm(value))),
            }

    with plt.rc_context(SVG_RC):
        size = max(4.0, 0.3 * max(rows, cols) + 2.5)
        fig, ax = plt.subplots(figsize=(size + 1.2, size))
        mesh = ax.pcolormesh(
            np.ma.masked_invalid(grid), cmap=cmap, norm=norm,
            edgecolors="white", linewidth=0.3,
        )
        mesh.set_gid("cells")
        if nan_rects:
            ax.add_collection(PatchCollection(
                nan_rects, facecolor=UNDEFINED_FILL, edgecolor="#7f7f7f",
                hatch="///", linewidth=0.3, gid="nan-cells",
            ))
        if sig_rects:
            ax.add_collection(PatchCollection(
                sig_rects, facecolor="none", edgecolor="black", linewidth=1.2, gid="sig-cells",
            ))

        ax.set_xlim(0, cols)
        ax.set_ylim(rows, 0)
        ax.set_aspect("equal")
        ax.set_xticks([j + 0.5 for j in range(cols)])
        ax.set_xticklabels(col_labels, rotation=90, fontsize=7)
        ax.set_yticks([i + 0.5 for i in range(rows)])
        ax.set_yticklabels(row_labels, fontsize=7)
        if title:
            ax.set_title(title, fontsize=10)
        mappable = ScalarMappable(norm=norm, cmap=cmap)
        colorbar = fig.colorbar(mappable, ax=ax, shrink=0.6, pad=0.02)
        colorbar.set_label(label)
        if scale == "p":
            colorbar.ax.axhline(alpha, color="red", linewidth=1.5, gid="alpha-marker")
        fig.tight_layout()
        _save_svg(fig, path)

    logger.debug(f"🖼️ Heatmap {rows}x{cols} written to {path}")
    return cells


def significant_features(results, alpha):
    """Features significant (p < alpha) in at least one variant, in schema order."""
    selected = []
    for variant_results in results.values():
        for result in variant_results:
            significant = not _undefined(result.p) and result.p < alpha
            if significant and result.feature not in selected:
                selected.append(result.feature)
    order = [r.feature for r in next(iter(results.values()))] if results else []
    return [f for f in order if f in selected]


def emit_significant_t_barchart(results, alpha, path, title=None):
    """
    Grouped bars of t-statistics for features significant in any variant.

    Every variant gets a bar in every selected group, significant or not.
    An empty selection gives an empty chart with a note.

    Returns:
        dict: 'features' (selected, in order) and 'bars' mapping (feature, variant)
        to {'t', 'top', 'bottom'}
    """
    features = significant_features(results, alpha)
    variants = list(results)
    by_variant = {v: {r.feature: r for r in results[v]} for v in variants}
    bars = {}

    with plt.rc_context(SVG_RC):
        fig, ax = plt.subplots(figsize=(max(6.0, 0.9 * len(features) + 3.0), 4.5))
        ax.axhline(0.0, color="black", linewidth=0.8, gid="zero-line")
        width = 0.8 / max(1, len(variants))
        for v_index, variant in enumerate(variants):
            for f_index, feature in enumerate(features):
                result = by_variant[variant].get(feature)
                t = result.t if result is not None else math.nan
                height = 0.0 if _undefined(t) else t
                x = f_index - 0.4 + width * (v_index + 0.5)
                extra = {"label": variant} if f_index == 0 else {}
                container = ax.bar(
                    x, height, width=width,
                    color=VARIANT_COLORS[v_index % len(VARIANT_COLORS)],
                    **extra,
                )
                rect = container.patches[0]
                suffix = "-nan" if _undefined(t) else ""
                rect.set_gid(f"bar-{feature}-{variant}{suffix}")
                bottom = min(rect.get_y(), rect.get_y() + rect.get_height())
                top = max(rect.get_y(), rect.get_y() + rect.get_height())
                bars[(feature, variant)] = {"t": t, "top": top, "bottom": bottom}

        if features:
            ax.set_xticks(range(len(features)))
            ax.set_xticklabels(features, rotation=45, ha="right", fontsize=8)
            ax.legend(fontsize=8, frameon=False)
        else:
            ax.set_xticks([])
            ax.text(0.5, 0.5, f"No feature reached significance at alpha = {alpha:g}",
                    ha="center", va="center", transform=ax.transAxes, gid="empty-note")
        ax.set_ylabel("t-statistic (male - female)")
        ax.set_title(title or "t-statistics of significant features", fontsize=10)
        fig.tight_layout()
        _save_svg(fig, path)

    logger.debug(f"📊 Bar chart with {len(features)} feature group(s) written to {path}")
    return {"features": features, "bars": bars}


__all__ = ['emit_heatmap', 'emit_significant_t_barchart', 'significant_features']
