"""Matplotlib rendering of dataset embeddings."""

from __future__ import annotations

import io
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402

from .asymmetry import DISPLAY, METRICS, DatasetEmbedding, dimension_index, scatter_csv  # noqa: E402

DEFAULT_PAIRS = (("direction", "information"), ("volume", "information"), ("repetition", "information"))

# fixed hash salt and no date metadata -> byte-identical SVG across runs
_SVG_RC = {"svg.hashsalt": "convoshape", "svg.fonttype": "none"}


def scatter_figure(embeddings: Sequence[DatasetEmbedding], x: str, y: str):
    xi, yi = dimension_index(x), dimension_index(y)
    xname, yname = METRICS[xi], METRICS[yi]
    with plt.rc_context(_SVG_RC):
        fig, ax = plt.subplots(figsize=(6, 6))
        ax.axhline(0.0, color="0.4", linewidth=0.8)
        ax.axvline(0.0, color="0.4", linewidth=0.8)
        xs = [e.vector[xi] for e in embeddings]
        ys = [e.vector[yi] for e in embeddings]
        ax.scatter(xs, ys, color="#1F77B4", zorder=3)
        for e, px, py in zip(embeddings, xs, ys):
            ax.annotate(e.name, (px, py), textcoords="offset points", xytext=(5, 5), fontsize=9)
        ax.set_xlim(-1.1, 1.1)
        ax.set_ylim(-1.1, 1.1)
        ax.set_xlabel(DISPLAY[xname])
        ax.set_ylabel(DISPLAY[yname])
        ax.set_title(f"{DISPLAY[xname]} vs {DISPLAY[yname]}")
        ax.grid(True, linestyle=":", linewidth=0.5)
    return fig


def render_svg(fig) -> str:
    buf = io.StringIO()
    with plt.rc_context(_SVG_RC):
        fig.savefig(buf, format="svg", metadata={"Date": None}, bbox_inches="tight")
    plt.close(fig)
    return buf.getvalue()


def emit_scatter(embeddings: Sequence[DatasetEmbedding], x: str, y: str) -> tuple[str, str]:
    """Return (SVG text, CSV text with name,x,y rows) for one dimension pair."""
    csv_text = scatter_csv(embeddings, x, y)
    return render_svg(scatter_figure(embeddings, x, y)), csv_text
