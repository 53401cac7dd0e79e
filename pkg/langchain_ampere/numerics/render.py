"""Static SVG rendering of grid functions, section polygons and sweep curves.

Output is byte-stable: fixed figure size, no date metadata and a fixed id salt.
"""

from __future__ import annotations

import io
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence, Union

import matplotlib

matplotlib.use("Agg")

import numpy as np  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402

from langchain_ampere.errors import EmptyArtifactError  # noqa: E402
from langchain_ampere.numerics.geometry import FloatArray  # noqa: E402
from langchain_ampere.numerics.grid import GridFunction  # noqa: E402

_RC = {
    "svg.hashsalt": "langchain-ampere",
    "svg.fonttype": "none",
    "path.simplify": False,
}
_SIZE = (5.0, 5.0)


@dataclass(frozen=True)
class ContourFigure:
    grid: GridFunction
    title: str = ""
    levels: int = 12


@dataclass(frozen=True)
class PolygonFigure:
    """Filled polygons drawn back to front (largest first)."""

    polygons: Sequence[FloatArray]
    title: str = ""
    labels: Sequence[str] = field(default_factory=tuple)


@dataclass(frozen=True)
class SweepFigure:
    x: Sequence[float]
    series: dict[str, Sequence[float]]
    title: str = ""
    xlabel: str = ""
    ylabel: str = ""
    loglog: bool = True


Artifact = Union[ContourFigure, PolygonFigure, SweepFigure]


def _contour(fig: Figure, art: ContourFigure) -> None:
    grid = art.grid
    if not np.any(grid.in_domain):
        raise EmptyArtifactError("Grid function has no domain nodes.")
    ax = fig.add_subplot(1, 1, 1)
    values = np.ma.masked_array(grid.values, mask=~grid.in_domain)
    xx, yy = grid.coords
    if float(np.ptp(values.compressed())) > 0:
        ax.contour(xx, yy, values, levels=art.levels, linewidths=0.8, colors="black")
    ax.set_aspect("equal")
    ax.set_title(art.title)


def _polygons(fig: Figure, art: PolygonFigure) -> None:
    polys = [np.asarray(p, dtype=float).reshape(-1, 2) for p in art.polygons]
    polys = [p for p in polys if len(p) >= 3]
    if not polys:
        raise EmptyArtifactError("No polygon with at least three vertices to draw.")
    ax = fig.add_subplot(1, 1, 1)

    def area(p: FloatArray) -> float:
        x, y = p[:, 0], p[:, 1]
        return 0.5 * abs(float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1))))

    order = sorted(range(len(polys)), key=lambda k: -area(polys[k]))
    shades = np.linspace(0.85, 0.35, len(polys))
    for rank, k in enumerate(order):
        p = polys[k]
        label = art.labels[k] if k < len(art.labels) else None
        ax.fill(p[:, 0], p[:, 1], color=str(shades[rank]), edgecolor="black", linewidth=0.6,
                label=label)
    if art.labels:
        ax.legend(loc="upper right", fontsize="small")
    ax.set_aspect("equal")
    ax.set_title(art.title)


def _sweep(fig: Figure, art: SweepFigure) -> None:
    x = np.asarray(art.x, dtype=float)
    if x.size == 0 or not art.series:
        raise EmptyArtifactError("Sweep has no samples.")
    ax = fig.add_subplot(1, 1, 1)
    for name in sorted(art.series):
        y = np.asarray(art.series[name], dtype=float)
        if art.loglog:
            ax.loglog(x, np.abs(y), marker="o", markersize=3, label=name)
        else:
            ax.plot(x, y, marker="o", markersize=3, label=name)
    ax.set_xlabel(art.xlabel)
    ax.set_ylabel(art.ylabel)
    ax.grid(True, alpha=0.3)
    ax.legend(loc="best", fontsize="small")
    ax.set_title(art.title)


def svg_text(artifact: Artifact) -> str:
    """Render an artifact to SVG markup.

    Raises:
        EmptyArtifactError: If there is nothing to draw.
    """
    with matplotlib.rc_context(_RC):
        fig = Figure(figsize=_SIZE)
        if isinstance(artifact, ContourFigure):
            _contour(fig, artifact)
        elif isinstance(artifact, PolygonFigure):
            _polygons(fig, artifact)
        elif isinstance(artifact, SweepFigure):
            _sweep(fig, artifact)
        else:
            raise EmptyArtifactError(f"Cannot render {type(artifact).__name__}.")
        buf = io.StringIO()
        fig.savefig(buf, format="svg", metadata={"Date": None})
    return buf.getvalue()


def render_svg(artifact: Artifact, path: Union[str, Path]) -> Path:
    target = Path(path)
    target.parent.mkdir(parents=True, exist_ok=True)
    target.write_text(svg_text(artifact), encoding="utf-8")
    return target
