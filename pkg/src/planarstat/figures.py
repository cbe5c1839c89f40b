"""Matplotlib renderings: Schlegel diagrams, class thumbnails, section histograms.

Artists carry ``gid`` attributes (``vertex-3``, ``edge-0-11``, ...) so the
emitted SVG can be inspected structurally.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .geometry import SolidModel, indices_of, popcount  # noqa: E402
from .planes import enumerate_planes, plane_metric_signature, supporting_planes  # noqa: E402
from .sections import SectionDistribution, plane_frame  # noqa: E402
from .stats import PlanarStatistic  # noqa: E402

plt.rcParams.update({
    "svg.hashsalt": "planarstat",
    "svg.fonttype": "none",
    "font.size": 9,
    "axes.linewidth": 0.6,
})

HIGHLIGHT = "#c0392b"
PLAIN = "#ffffff"
EDGE = "#34495e"


def _save(fig, path: Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, metadata={"Date": None}, bbox_inches="tight")
    plt.close(fig)
    return path


def schlegel_layout(model: SolidModel, height: float = 0.45) -> np.ndarray:
    """2D positions from a central projection through the facet nearest +z.

    The eye sits on that facet's outward normal at ``height`` times the
    largest distance that keeps it beneath every other facet plane, so all
    remaining vertices land inside the facet's image.
    """
    P = model.float_vertices
    facets = []
    for f in supporting_planes(model, enumerate_planes(model)):
        n = np.array(f.normal.to_floats())
        d = float(f.offset)
        if d < 0:
            n, d = -n, -d
        k = np.linalg.norm(n)
        facets.append((f, n / k, d / k))
    face, n, _ = max(facets, key=lambda t: (round(t[1][2], 12), -t[0].incidence))
    centre = P[indices_of(face.incidence)].mean(axis=0)
    # with no facet leaning over the chosen one (tetrahedron) any height works
    limit = min(((dg - ng @ centre) / (ng @ n) for f, ng, dg in facets if f is not face and ng @ n > 1e-12),
                default=2 * float(np.linalg.norm(centre)))
    eye = centre + height * limit * n
    u, w = plane_frame(n)
    rel = P - eye
    depth = -(rel @ n)
    xy = np.column_stack([rel @ u, rel @ w]) / depth[:, None]
    xy /= np.abs(xy).max()
    return np.round(xy, 6)


def draw_schlegel(ax, model: SolidModel, highlight: int = 0, labels: bool = True, title: str | None = None):
    xy = schlegel_layout(model)
    for i, j in model.edges:
        (line,) = ax.plot(*xy[[i, j]].T, color=EDGE, lw=0.9, zorder=1)
        line.set_gid(f"edge-{i}-{j}")
    for v in range(model.n):
        on = bool(highlight >> v & 1)
        dot = ax.scatter(*xy[v], s=150, zorder=2, edgecolors=EDGE, linewidths=0.8,
                         color=HIGHLIGHT if on else PLAIN)
        dot.set_gid(f"vertex-{v}")
        if labels:
            t = ax.text(*xy[v], str(v), ha="center", va="center", fontsize=6, zorder=3,
                        color="white" if on else "black")
            t.set_gid(f"label-{v}")
    ax.set_aspect("equal")
    ax.axis("off")
    if title:
        ax.set_title(title)


def schlegel_figure(model: SolidModel, path: Path, highlight: int = 0) -> Path:
    fig, ax = plt.subplots(figsize=(4.5, 4.5))
    draw_schlegel(ax, model, highlight)
    return _save(fig, path)


def subsets_figure(model: SolidModel, path: Path, subsets: Sequence[tuple[str, int]]) -> Path:
    fig, axes = plt.subplots(1, len(subsets), figsize=(4.2 * len(subsets), 4.2))
    for ax, (name, mask) in zip(np.atleast_1d(axes), subsets):
        draw_schlegel(ax, model, mask, title=f"{name} = {{{', '.join(map(str, indices_of(mask)))}}}")
    return _save(fig, path)


def _plane_coords(model: SolidModel, mask: int) -> tuple[list[int], np.ndarray, np.ndarray, float]:
    idx = indices_of(mask)
    P = model.float_vertices[idx]
    c = P.mean(axis=0)
    _, _, vt = np.linalg.svd(P - c)
    n = vt[2]
    u, w = plane_frame(n)
    return idx, np.column_stack([(P - c) @ u, (P - c) @ w]), n, float(c @ n)


def _is_square(model: SolidModel, mask: int) -> bool:
    if popcount(mask) != 4:
        return False
    sig = plane_metric_signature(model, mask)
    return sig[0] == sig[3] and sig[4] == sig[5] and sig[4] == sig[0] * 2


def roof(model: SolidModel, mask: int) -> list[tuple[int, np.ndarray, list[int]]]:
    """Off-plane vertices adjacent to two or more square vertices on the
    outer side, with their in-plane projections and square neighbours."""
    idx, _, n, d = _plane_coords(model, mask)
    P = model.float_vertices
    c = P[idx].mean(axis=0)
    u, w = plane_frame(n)
    heights = P @ n - d
    outer = 1.0 if np.sum(heights > 1e-9) < np.sum(heights < -1e-9) else -1.0
    out = []
    for v in range(model.n):
        if v in idx or heights[v] * outer <= 1e-9:
            continue
        nbrs = sorted(model.adjacency[v] & set(idx))
        if len(nbrs) >= 2:
            out.append((v, np.array([(P[v] - c) @ u, (P[v] - c) @ w]), nbrs))
    return out


def draw_class(ax, model: SolidModel, p: int, z: int, count: int | None = None):
    idx, xy, _, _ = _plane_coords(model, p)
    centre = xy.mean(axis=0)
    order = np.argsort(np.arctan2(xy[:, 1] - centre[1], xy[:, 0] - centre[0]))
    hull = xy[order]
    ax.fill(*hull.T, color="#ecf0f1", ec=EDGE, lw=0.8, zorder=1)
    if _is_square(model, p):
        pos = {v: xy[k] for k, v in enumerate(idx)}
        for v, q, nbrs in roof(model, p):
            for a in nbrs:
                ax.plot(*np.array([q, pos[a]]).T, ls="--", color="#7f8c8d", lw=0.7, zorder=1)
            ax.scatter(*q, s=10, color="#7f8c8d", zorder=2)
    for k, v in enumerate(idx):
        on = bool(z >> v & 1)
        ax.scatter(*xy[k], s=40, zorder=3, edgecolors=EDGE, linewidths=0.8,
                   color=HIGHLIGHT if on else PLAIN)
    label = f"({popcount(p)},{popcount(z)})"
    if count is not None:
        label += f"  {count}"
    ax.set_title(label, fontsize=8)
    ax.set_aspect("equal")
    ax.margins(0.15)
    ax.axis("off")


def class_thumbnails(model: SolidModel, ps: PlanarStatistic, directory: Path) -> list[Path]:
    """One SVG per class of the statistic, ordered by (|P|, |Z|, key)."""
    directory = Path(directory)
    items = sorted(ps.counts.items(), key=lambda kv: (popcount(kv[0][0]), popcount(kv[0][1]), kv[0]))
    paths = []
    for k, ((p, z), c) in enumerate(items):
        fig, ax = plt.subplots(figsize=(1.6, 1.8))
        draw_class(ax, model, p, z, c)
        fig.axes[0].set_gid(f"class-{k}")
        paths.append(_save(fig, directory / f"class_{k:03d}.svg"))
    return paths


def class_table(model: SolidModel, ps: PlanarStatistic, path: Path, columns: int = 8) -> Path:
    items = sorted(ps.counts.items(), key=lambda kv: (popcount(kv[0][0]), popcount(kv[0][1]), kv[0]))
    rows = math.ceil(len(items) / columns)
    fig, axes = plt.subplots(rows, columns, figsize=(1.5 * columns, 1.7 * rows))
    flat = np.atleast_1d(axes).ravel()
    for ax, ((p, z), c) in zip(flat, items):
        draw_class(ax, model, p, z, c)
    for ax in flat[len(items):]:
        ax.axis("off")
    return _save(fig, path)


def sections_figure(dists: Sequence[tuple[str, SectionDistribution]], path: Path) -> Path:
    """Stratum masses and per-stratum vertex-count histograms side by side."""
    fig, (ax0, ax1) = plt.subplots(1, 2, figsize=(9, 3.4))
    width = 0.8 / len(dists)
    for k, (name, d) in enumerate(dists):
        ms = sorted(d.strata)
        ax0.bar(np.array(ms) + k * width, [d.strata[m] / d.n_samples for m in ms], width, label=name)
        vc: dict[int, int] = {}
        for (m, v, _, _), c in d.hist.items():
            if m >= 2 and v > 0:
                vc[v] = vc.get(v, 0) + c
        vs = sorted(vc)
        ax1.bar(np.array(vs) + k * width, [vc[v] / d.n_samples for v in vs], width, label=name)
    ax0.set_yscale("log")
    ax0.set_xlabel("stratum m (vertex balls met)")
    ax0.set_ylabel("fraction of planes")
    ax1.set_xlabel("section vertex count (m >= 2)")
    ax1.set_ylabel("fraction of planes")
    ax1.legend(frameon=False)
    fig.tight_layout()
    return _save(fig, path)
