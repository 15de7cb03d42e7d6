"""Per-character distortions, their resampling onto a uniform grid, and
row-wise feature vectors.

Translation distortion is reference minus scan of the box's top-left
corner; scaling distortion is the reference over scan box size. Both are
sampled at the (scattered) reference character locations and re-evaluated
on an ``n_r x n_c`` grid so every page yields vectors of the same length.
"""

from __future__ import annotations

import csv
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np
from scipy.spatial import Delaunay, cKDTree

from .align import MatchedPairSet
from .errors import DataError, DegenerateGeometry, EmptyInput, ZeroScanDimension

log = logging.getLogger(__name__)

DEFAULT_ROWS = 50
DEFAULT_COLS = 150
FIELDS = ("t_x", "t_y", "s_x", "s_y")
HULL_TOL = 1e-9  # barycentric slack when testing hull membership
KINDS = {
    "t_x": ("t_x",),
    "t_y": ("t_y",),
    "s_x": ("s_x",),
    "s_y": ("s_y",),
    "t_xy": ("t_x", "t_y"),
    "t_all": ("t_x", "t_y", "s_x", "s_y"),
}
# CLI spellings
KIND_ALIASES = {"tx": "t_x", "ty": "t_y", "sx": "s_x", "sy": "s_y", "txy": "t_xy", "tall": "t_all"}


def canonical_kind(kind: str) -> str:
    kind = KIND_ALIASES.get(kind, kind)
    if kind not in KINDS and kind != "ptmp":
        raise DataError(f"unknown feature kind {kind!r}")
    return kind


@dataclass(frozen=True, eq=False)
class ScatteredDistortion:
    xy: np.ndarray  # (N, 2) reference top-left locations
    values: np.ndarray  # (N, 4) columns t_x, t_y, s_x, s_y

    def __len__(self):
        return len(self.xy)

    def field(self, name: str) -> np.ndarray:
        return self.values[:, FIELDS.index(name)]


@dataclass(frozen=True, eq=False)
class DistortionGrid:
    grid_x: np.ndarray  # (n_c,)
    grid_y: np.ndarray  # (n_r,)
    t_x: np.ndarray  # (n_r, n_c)
    t_y: np.ndarray
    s_x: np.ndarray
    s_y: np.ndarray

    @property
    def n_r(self) -> int:
        return len(self.grid_y)

    @property
    def n_c(self) -> int:
        return len(self.grid_x)

    def field(self, name: str) -> np.ndarray:
        return getattr(self, name)

    def mesh(self) -> tuple[np.ndarray, np.ndarray]:
        return np.meshgrid(self.grid_x, self.grid_y)


@dataclass(frozen=True, eq=False)
class RowFeature:
    page_id: str
    row_index: int
    kind: str
    values: np.ndarray
    printer_label: str | None = None

    @property
    def dim(self) -> int:
        return len(self.values)


def compute_distortions(matches: MatchedPairSet) -> ScatteredDistortion:
    if matches.total == 0:
        raise EmptyInput("no matched characters")
    xy = np.empty((matches.total, 2))
    vals = np.empty((matches.total, 4))
    for k, p in enumerate(matches.pairs):
        r, s = p.ref_box, p.scan_box
        if not (s.w > 0 and s.h > 0):
            raise ZeroScanDimension(f"scan box {s.glyph!r} on line {p.line} has zero size")
        xy[k] = (r.x, r.y)
        vals[k] = (r.x - s.x, r.y - s.y, r.w / s.w, r.h / s.h)
    return ScatteredDistortion(xy, vals)


def _dedupe(xy: np.ndarray, values: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    _, first = np.unique(xy, axis=0, return_index=True)
    if len(first) < len(xy):
        log.warning("dropping %d duplicate sample locations (kept first)", len(xy) - len(first))
        first.sort()
        return xy[first], values[first]
    return xy, values


class TriangulatedInterpolant:
    """Piecewise-linear interpolation over one Delaunay triangulation,
    falling back to the nearest sample outside the convex hull."""

    def __init__(self, xy: np.ndarray):
        xy = np.asarray(xy, dtype=np.float64)
        if len(xy) < 3:
            raise DegenerateGeometry(f"need at least 3 sample locations, got {len(xy)}")
        centred = xy - xy.mean(axis=0)
        sv = np.linalg.svd(centred, compute_uv=False)
        if sv[1] <= 1e-9 * max(sv[0], 1.0):
            raise DegenerateGeometry("sample locations are collinear")
        # lexicographic order makes the triangulation independent of input order
        self.order = np.lexsort((xy[:, 1], xy[:, 0]))
        self.points = xy[self.order]
        self.tri = Delaunay(self.points)
        self.tree = cKDTree(self.points)

    def weights(self, q: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        """Vertex indices (into the sorted points) and weights per query."""
        q = np.asarray(q, dtype=np.float64)
        # points on the hull boundary count as inside; the default tolerance
        # misses many of them through rounding in the barycentric transform
        simplex = self.tri.find_simplex(q, tol=HULL_TOL)
        inside = simplex >= 0
        verts = np.empty((len(q), 3), dtype=np.int64)
        w = np.zeros((len(q), 3))
        s = simplex[inside]
        T = self.tri.transform[s]
        b = np.einsum("ijk,ik->ij", T[:, :2], q[inside] - T[:, 2])
        w[inside] = np.column_stack([b, 1.0 - b.sum(axis=1)])
        verts[inside] = self.tri.simplices[s]
        _, nearest = self.tree.query(q[~inside])
        verts[~inside] = np.asarray(nearest, dtype=np.int64)[:, None]
        w[~inside, 0] = 1.0
        return verts, w

    def __call__(self, values: np.ndarray, q: np.ndarray) -> np.ndarray:
        """Evaluate one or more value columns (given in input order) at ``q``."""
        v = np.asarray(values, dtype=np.float64)[self.order]
        verts, w = self.weights(q)
        if v.ndim == 1:
            return (v[verts] * w).sum(axis=1)
        return np.einsum("qk,qkf->qf", w, v[verts])


def resample_to_grid(
    field: ScatteredDistortion, n_r: int = DEFAULT_ROWS, n_c: int = DEFAULT_COLS
) -> DistortionGrid:
    """Re-evaluate the four scattered fields on a uniform grid spanning the
    bounding box of the sample locations."""
    if n_r < 1 or n_c < 1:
        raise DataError("grid needs at least one row and one column")
    xy, values = _dedupe(field.xy, field.values)
    interp = TriangulatedInterpolant(xy)
    gx = np.linspace(xy[:, 0].min(), xy[:, 0].max(), n_c)
    gy = np.linspace(xy[:, 1].min(), xy[:, 1].max(), n_r)
    X, Y = np.meshgrid(gx, gy)
    out = interp(values, np.column_stack([X.ravel(), Y.ravel()]))
    arrays = [out[:, k].reshape(n_r, n_c) for k in range(4)]
    return DistortionGrid(gx, gy, *arrays)


def extract_row_features(
    grid: DistortionGrid, kind: str = "t_x", page_id: str = "", label: str | None = None
) -> list[RowFeature]:
    """One zero-mean vector per grid row; composite kinds concatenate the
    per-field rows, each segment centred on its own."""
    kind = canonical_kind(kind)
    if kind == "ptmp":
        raise DataError("ptmp features are page-level; use ptmp.ptmp_features")
    parts = []
    for name in KINDS[kind]:
        a = grid.field(name)
        parts.append(a - a.mean(axis=1, keepdims=True))
    rows = np.concatenate(parts, axis=1)
    return [RowFeature(page_id, r + 1, kind, rows[r].copy(), label) for r in range(grid.n_r)]


# -- feature CSV ---------------------------------------------------------

def write_features(fh: TextIO, feats: Iterable[RowFeature], header: bool = True) -> None:
    feats = list(feats)
    w = csv.writer(fh, lineterminator="\n")
    if header:
        k = feats[0].dim if feats else 0
        w.writerow(["label", "page", "row", "kind"] + [f"v{i}" for i in range(1, k + 1)])
    for f in feats:
        w.writerow(
            [f.printer_label or "", f.page_id, f.row_index, f.kind] + [format(float(v), ".9g") for v in f.values]
        )


def save_features(path: str | Path, feats: Sequence[RowFeature], append: bool = False) -> None:
    path = Path(path)
    exists = append and path.exists() and path.stat().st_size > 0
    with open(path, "a" if exists else "w", encoding="utf-8", newline="") as fh:
        write_features(fh, feats, header=not exists)


def read_features(fh: TextIO) -> list[RowFeature]:
    r = csv.reader(fh)
    head = next(r, None)
    if head is None:
        return []
    if head[:4] != ["label", "page", "row", "kind"]:
        raise DataError("feature file must start with header label,page,row,kind,v1..vK")
    out = []
    for lineno, rec in enumerate(r, start=2):
        if not rec:
            continue
        try:
            vals = np.array([float(v) for v in rec[4:]])
            out.append(RowFeature(rec[1], int(rec[2]), rec[3], vals, rec[0] or None))
        except (ValueError, IndexError) as exc:
            raise DataError(f"feature file line {lineno}: {exc}") from None
    return out


def load_features(path: str | Path) -> list[RowFeature]:
    with open(path, encoding="utf-8", newline="") as fh:
        return read_features(fh)
