"""Cost surfaces over (N, p), their differences and zero isolines.

A surface stores one value per lattice node; rows follow the rate axis
``p_axis`` and columns the population axis ``n_axis``. Values between nodes
are bilinear. The zero isoline is traced with marching squares, crossing
points placed by linear interpolation along cell edges, so every vertex
evaluates to zero under the bilinear surface.
"""

from __future__ import annotations

import csv
import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from scipy.interpolate import RegularGridInterpolator


class AxisMismatchError(ValueError):
    pass


def _check_axis(name: str, axis) -> np.ndarray:
    axis = np.asarray(axis, dtype=float)
    if axis.ndim != 1 or axis.size == 0:
        raise ValueError(f"{name} must be a non-empty 1-D sequence")
    if axis.size > 1 and not np.all(np.diff(axis) > 0):
        raise ValueError(f"{name} must be strictly increasing")
    return axis


@dataclass
class SurfaceData:
    n_axis: np.ndarray
    p_axis: np.ndarray
    cells: np.ndarray
    name: str = ""
    provenance: dict = field(default_factory=dict)

    def __post_init__(self):
        self.n_axis = _check_axis("n_axis", self.n_axis)
        self.p_axis = _check_axis("p_axis", self.p_axis)
        self.cells = np.asarray(self.cells, dtype=float)
        expected = (self.p_axis.size, self.n_axis.size)
        if self.cells.shape != expected:
            raise ValueError(f"cells have shape {self.cells.shape}, axes need {expected}")

    def same_axes(self, other: "SurfaceData") -> bool:
        return (self.n_axis.shape == other.n_axis.shape
                and self.p_axis.shape == other.p_axis.shape
                and np.array_equal(self.n_axis, other.n_axis)
                and np.array_equal(self.p_axis, other.p_axis))

    def at(self, N: float, p: float) -> float:
        """Bilinear value at an arbitrary point inside the lattice."""
        return float(bilinear(self, np.array([[N, p]]))[0])


def bilinear(surface: SurfaceData, points: np.ndarray) -> np.ndarray:
    """Evaluate the bilinear interpolant at ``points`` given as (N, p) rows."""
    points = np.atleast_2d(np.asarray(points, dtype=float))
    interp = RegularGridInterpolator((surface.p_axis, surface.n_axis), surface.cells,
                                     method="linear", bounds_error=True)
    return interp(points[:, ::-1])


def diff_surface(a: SurfaceData, b: SurfaceData, name: str = "") -> SurfaceData:
    """Cellwise ``a - b``."""
    if not a.same_axes(b):
        raise AxisMismatchError("surfaces are defined on different axes")
    return SurfaceData(a.n_axis.copy(), a.p_axis.copy(), a.cells - b.cells,
                       name=name or f"{a.name}-{b.name}".strip("-"),
                       provenance={"minuend": a.provenance, "subtrahend": b.provenance})


def response_surface(samples: Iterable[Sequence[float]],
                     n_axis: Sequence[float] | None = None,
                     p_axis: Sequence[float] | None = None,
                     name: str = "") -> SurfaceData:
    """Fit sampled ``(N, p, value)`` triples onto a regular grid.

    The samples must cover a full rectangular lattice (every sampled N with
    every sampled p); repeated nodes are merged by their median. The result
    is the bilinear interpolant of that lattice evaluated on the requested
    axes, which default to the lattice itself.
    """
    pts = np.asarray([tuple(s) for s in samples], dtype=float)
    if pts.ndim != 2 or pts.shape[0] < 4 or pts.shape[1] != 3:
        raise ValueError("need at least 4 (N, p, value) samples")
    ns = np.unique(pts[:, 0])
    ps = np.unique(pts[:, 1])
    if ns.size < 2 or ps.size < 2:
        raise ValueError("samples must span at least two values of N and of p")
    lattice = np.full((ps.size, ns.size), np.nan)
    buckets: dict[tuple[int, int], list[float]] = {}
    for N, p, v in pts:
        key = (int(np.searchsorted(ps, p)), int(np.searchsorted(ns, N)))
        buckets.setdefault(key, []).append(v)
    for (i, j), vals in buckets.items():
        lattice[i, j] = float(np.median(vals))
    if np.isnan(lattice).any():
        missing = [(ns[j], ps[i]) for i, j in zip(*np.nonzero(np.isnan(lattice)))]
        raise ValueError(f"samples do not form a full lattice; missing (N, p) {missing[:5]}")
    base = SurfaceData(ns, ps, lattice, name=name)
    if n_axis is None and p_axis is None:
        return base
    target_n = _check_axis("n_axis", ns if n_axis is None else n_axis)
    target_p = _check_axis("p_axis", ps if p_axis is None else p_axis)
    if (target_n[0] < ns[0] or target_n[-1] > ns[-1]
            or target_p[0] < ps[0] or target_p[-1] > ps[-1]):
        raise ValueError("requested axes reach outside the sampled lattice")
    grid_n, grid_p = np.meshgrid(target_n, target_p)
    values = bilinear(base, np.column_stack([grid_n.ravel(), grid_p.ravel()]))
    return SurfaceData(target_n, target_p, values.reshape(grid_p.shape), name=name)


# -- marching squares ------------------------------------------------------

def _edge_point(surface: SurfaceData, key) -> tuple[float, float]:
    kind, i, j = key
    v = surface.cells
    if kind == "h":   # between (i, j) and (i, j + 1): varies along N
        a, b = v[i, j], v[i, j + 1]
        t = a / (a - b)
        n0, n1 = surface.n_axis[j], surface.n_axis[j + 1]
        return (n0 + t * (n1 - n0), surface.p_axis[i])
    a, b = v[i, j], v[i + 1, j]  # "v": between (i, j) and (i + 1, j)
    t = a / (a - b)
    p0, p1 = surface.p_axis[i], surface.p_axis[i + 1]
    return (surface.n_axis[j], p0 + t * (p1 - p0))


def zero_isoline(surface: SurfaceData) -> list[np.ndarray]:
    """Polylines, as arrays of (N, p) vertices, where the surface crosses 0.

    Nodes are split into "positive" (> 0) and "non-positive"; an all-zero or
    one-signed surface has no crossing and yields an empty list.
    """
    v = surface.cells
    if v.size == 0:
        raise ValueError("empty surface")
    pos = v > 0
    rows, cols = v.shape

    if rows == 1 or cols == 1:
        # a single row or column has no cells, only edges
        out = []
        flat_pos = pos.ravel()
        for k in range(flat_pos.size - 1):
            if flat_pos[k] != flat_pos[k + 1]:
                key = ("h", 0, k) if rows == 1 else ("v", k, 0)
                out.append(np.array([_edge_point(surface, key)]))
        return out

    neighbours: dict[tuple, list[tuple]] = {}

    def link(e1, e2):
        neighbours.setdefault(e1, []).append(e2)
        neighbours.setdefault(e2, []).append(e1)

    for i in range(rows - 1):
        for j in range(cols - 1):
            c00, c01, c11, c10 = pos[i, j], pos[i, j + 1], pos[i + 1, j + 1], pos[i + 1, j]
            bottom, right = ("h", i, j), ("v", i, j + 1)
            top, left = ("h", i + 1, j), ("v", i, j)
            crossing = [e for e, hit in ((bottom, c00 != c01), (right, c01 != c11),
                                         (top, c11 != c10), (left, c10 != c00)) if hit]
            if len(crossing) == 2:
                link(*crossing)
            elif len(crossing) == 4:
                centre_pos = (v[i, j] + v[i, j + 1] + v[i + 1, j + 1] + v[i + 1, j]) / 4 > 0
                if centre_pos == c00:
                    # c00 and c11 joined through the centre; cut off the other two
                    link(bottom, right)
                    link(top, left)
                else:
                    link(left, bottom)
                    link(right, top)

    polylines = []
    seen: set[tuple] = set()

    def walk(start):
        chain = [start]
        seen.add(start)
        prev, cur = None, start
        while True:
            nxt = [e for e in neighbours[cur] if e != prev and e not in seen]
            if not nxt:
                # close loops explicitly
                if prev is not None and start in neighbours[cur] and len(chain) > 2:
                    chain.append(start)
                return chain
            prev, cur = cur, nxt[0]
            seen.add(cur)
            chain.append(cur)

    # open chains start at boundary edges (one neighbour), then the loops
    for key in sorted(neighbours, key=lambda e: len(neighbours[e])):
        if key in seen:
            continue
        chain = walk(key)
        pts = [_edge_point(surface, e) for e in chain]
        dedup = [pts[0]] + [q for prev_q, q in zip(pts, pts[1:]) if q != prev_q]
        polylines.append(np.array(dedup))
    return polylines


# -- file formats ----------------------------------------------------------

def _fmt(x: float) -> str:
    return repr(float(x)) if not float(x).is_integer() else str(int(x))


def write_matrix_csv(path, n_axis, p_axis, matrix, corner: str = "p\\N") -> None:
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow([corner] + [_fmt(n) for n in n_axis])
        for p, row in zip(p_axis, matrix):
            w.writerow([_fmt(p)] + [c if isinstance(c, str) else repr(float(c)) for c in row])


def read_matrix_csv(path):
    with open(path, newline="") as fh:
        rows = [r for r in csv.reader(fh) if r]
    n_axis = [float(c) for c in rows[0][1:]]
    p_axis = [float(r[0]) for r in rows[1:]]
    body = [r[1:] for r in rows[1:]]
    return n_axis, p_axis, body


def save_surface(surface: SurfaceData, path) -> None:
    """Write ``.csv`` (matrix) or ``.json`` depending on the suffix."""
    path = Path(path)
    if path.suffix == ".json":
        doc = {"kind": "surface", "name": surface.name,
               "n_axis": surface.n_axis.tolist(), "p_axis": surface.p_axis.tolist(),
               "cells": surface.cells.tolist(), "provenance": surface.provenance}
        path.write_text(json.dumps(doc, indent=2))
    elif path.suffix == ".dat":
        write_gnuplot_surface(surface, path)
    else:
        write_matrix_csv(path, surface.n_axis, surface.p_axis, surface.cells)


def load_surface(path) -> SurfaceData:
    path = Path(path)
    if path.suffix == ".json":
        doc = json.loads(path.read_text())
        if doc.get("kind") != "surface":
            raise ValueError(f"{path} does not hold a surface")
        return SurfaceData(doc["n_axis"], doc["p_axis"], doc["cells"],
                           name=doc.get("name", ""), provenance=doc.get("provenance", {}))
    n_axis, p_axis, body = read_matrix_csv(path)
    return SurfaceData(n_axis, p_axis, [[float(c) for c in row] for row in body],
                       name=path.stem)


def write_gnuplot_surface(surface: SurfaceData, path) -> None:
    """``N p value`` triples, one block per rate, blank-line separated (splot)."""
    with open(path, "w") as fh:
        fh.write(f"# {surface.name or 'surface'}: N p value\n")
        for i, p in enumerate(surface.p_axis):
            for j, n in enumerate(surface.n_axis):
                fh.write(f"{_fmt(n)} {_fmt(p)} {surface.cells[i, j]!r}\n")
            fh.write("\n")


def write_gnuplot_isolines(polylines: list[np.ndarray], path) -> None:
    with open(path, "w") as fh:
        fh.write("# zero isoline: N p, one block per polyline\n")
        for k, line in enumerate(polylines):
            fh.write(f"# polyline {k}\n")
            for n, p in line:
                fh.write(f"{n!r} {p!r}\n")
            fh.write("\n\n")
