"""Marching-squares level curves of a pseudospectrum grid."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from ..pseudospectra import PseudospectrumGrid

__all__ = ["ContourSet", "extract_contours", "default_levels"]


def default_levels(count: int = 8) -> list[float]:
    """``epsilon = 10**(-0.75 j)`` for ``j = 1 .. count`` (descending)."""
    return [10.0 ** (-0.75 * j) for j in range(1, count + 1)]


@dataclass(frozen=True, eq=False)
class ContourSet:
    """``paths[k]`` holds the polylines (complex arrays) of the level ``levels[k]``."""

    levels: list[float]
    paths: list[list[np.ndarray]]

    def __iter__(self):
        return iter(zip(self.levels, self.paths))


# corner order: 0 = (i, j), 1 = (i+1, j), 2 = (i+1, j+1), 3 = (i, j+1)
# edge e joins corners EDGE_CORNERS[e]; a corner touches edges CORNER_EDGES[c]
_EDGE_CORNERS = ((0, 1), (1, 2), (3, 2), (0, 3))
_CORNER_EDGES = ((0, 3), (0, 1), (1, 2), (2, 3))


def _edge_key(i, j, e):
    return (("h", i, j), ("v", i + 1, j), ("h", i, j + 1), ("v", i, j))[e]


def _cell_segments(inside, center_inside):
    crossed = [e for e, (a, b) in enumerate(_EDGE_CORNERS) if inside[a] != inside[b]]
    if len(crossed) == 2:
        return [tuple(crossed)]
    if len(crossed) == 4:
        # saddle: the cell centre decides which diagonal pair is connected
        lonely = (1, 3) if center_inside == inside[0] else (0, 2)
        return [_CORNER_EDGES[c] for c in lonely]
    return []


def _trace(segments: dict, points: dict) -> list[np.ndarray]:
    """Join segments that share edge keys into polylines; closed loops repeat their start."""
    adj: dict = {}
    for sid, (a, b) in segments.items():
        adj.setdefault(a, []).append(sid)
        adj.setdefault(b, []).append(sid)
    used = set()
    lines = []
    # open chains start at edge keys used once (grid boundary); loops afterwards
    starts = sorted(k for k, v in adj.items() if len(v) == 1) + sorted(adj)
    for start in starts:
        free = [s for s in adj[start] if s not in used]
        if not free:
            continue
        chain = [start]
        key, sid = start, free[0]
        while sid is not None:
            used.add(sid)
            a, b = segments[sid]
            key = b if a == key else a
            chain.append(key)
            nxt = [s for s in adj[key] if s not in used]
            sid = nxt[0] if nxt else None
        lines.append(np.array([points[k] for k in chain]))
    return lines


def extract_contours(grid: PseudospectrumGrid, levels) -> ContourSet:
    """Curves ``s_min(z I - A) = epsilon`` for each ``epsilon`` in ``levels``.

    Vertices are linearly interpolated on cell edges in ``log10`` space;
    ``-inf`` nodes (exact eigenvalues) are treated as a value well below the
    finite minimum.
    """
    levels = [float(e) for e in levels]
    if any(not e > 0 for e in levels):
        raise ValueError("contour levels must be positive")
    if any(b > a for a, b in zip(levels, levels[1:])):
        raise ValueError("contour levels must be sorted descending")
    v = np.array(grid.values, dtype=float)
    finite = v[np.isfinite(v)]
    floor = (finite.min() if finite.size else 0.0) - 10.0
    v[np.isneginf(v)] = floor
    re, im = grid.re, grid.im

    paths = []
    for eps in levels:
        lv = math.log10(eps)
        below = v < lv
        segments: dict = {}
        points: dict = {}
        sid = 0
        count = (below[:-1, :-1].astype(int) + below[1:, :-1] + below[1:, 1:] + below[:-1, 1:])
        for i, j in np.argwhere((count > 0) & (count < 4)):
            i, j = int(i), int(j)
            corners = ((i, j), (i + 1, j), (i + 1, j + 1), (i, j + 1))
            inside = [bool(below[c]) for c in corners]
            center = 0.25 * sum(v[c] for c in corners) < lv
            for ea, eb in _cell_segments(inside, center):
                for e in (ea, eb):
                    key = _edge_key(i, j, e)
                    if key not in points:
                        ca, cb = (corners[k] for k in _EDGE_CORNERS[e])
                        va, vb = v[ca], v[cb]
                        t = (lv - va) / (vb - va)
                        za = complex(re[ca[0]], im[ca[1]])
                        zb = complex(re[cb[0]], im[cb[1]])
                        points[key] = za + t * (zb - za)
                segments[sid] = (_edge_key(i, j, ea), _edge_key(i, j, eb))
                sid += 1
        paths.append(_trace(segments, points))
    return ContourSet(levels, paths)
