"""Character bounding boxes from an external OCR engine.

Two text formats are read:

* native: ``<glyph> <left> <top> <width> <height>``, top-left origin;
* OCR "box" convention: ``<glyph> <left> <bottom> <right> <top> <page>``
  with a bottom-left origin, which needs the page height to flip.

Boxes are grouped into text lines, and the rotation/translation corrections
can be applied directly to the boxes (rotate the four corners, take the
axis-aligned hull) instead of re-running OCR on a corrected raster.
"""

from __future__ import annotations

import io
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence, TextIO

import numpy as np
from scipy.spatial import cKDTree

from . import raster
from .errors import EmptyInput, ExcessiveSkew, MalformedLine, MissingPageHeight, NoBaselineChars

DESCENDERS = frozenset("gjpqy")
LINE_GAP_FACTOR = 0.6
NEIGHBOURS = 4  # nearest boxes examined when estimating the text direction


@dataclass(frozen=True)
class CharBox:
    glyph: str
    x: float
    y: float
    w: float
    h: float

    def __post_init__(self):
        if not (self.w > 0 and self.h > 0):
            raise ValueError(f"box for {self.glyph!r} has non-positive size {self.w}x{self.h}")

    @property
    def lower_midpoint(self) -> tuple[float, float]:
        return (self.x + self.w / 2.0, self.y + self.h)

    def corners(self) -> np.ndarray:
        x0, y0, x1, y1 = self.x, self.y, self.x + self.w, self.y + self.h
        return np.array([[x0, y0], [x1, y0], [x1, y1], [x0, y1]], dtype=np.float64)

    def sort_key(self):
        return (self.x, self.y, self.w, self.h, self.glyph)


@dataclass(frozen=True)
class TextLine:
    index: int
    boxes: tuple[CharBox, ...]

    @property
    def baseline_y(self) -> float:
        return raster.median(b.lower_midpoint[1] for b in self.boxes)

    @property
    def text(self) -> str:
        return "".join(b.glyph for b in self.boxes)

    def __len__(self):
        return len(self.boxes)


@dataclass(frozen=True)
class PageBoxes:
    lines: tuple[TextLine, ...]
    dpi: float = raster.DEFAULT_DPI
    source_tag: str = "scanned"
    page_size: tuple[float, float] | None = None  # (width, height) in pixels

    @property
    def n_lines(self) -> int:
        return len(self.lines)

    def all_boxes(self) -> list[CharBox]:
        return [b for line in self.lines for b in line.boxes]

    def center(self) -> tuple[float, float]:
        """Rotation pivot: the page centre, or the centre of the text block
        when the page size is unknown."""
        if self.page_size is not None:
            return (self.page_size[0] / 2.0, self.page_size[1] / 2.0)
        boxes = self.all_boxes()
        x0 = min(b.x for b in boxes)
        y0 = min(b.y for b in boxes)
        x1 = max(b.x + b.w for b in boxes)
        y1 = max(b.y + b.h for b in boxes)
        return ((x0 + x1) / 2.0, (y0 + y1) / 2.0)


def _num(tok: str, lineno: int) -> float:
    try:
        v = float(tok)
    except ValueError:
        raise MalformedLine(lineno, f"not a number: {tok!r}") from None
    if not math.isfinite(v):
        raise MalformedLine(lineno, f"not a finite number: {tok!r}")
    return v


def _parse_header(body: str, meta: dict) -> None:
    # "#@ key=value ..." carries page metadata; any other comment is ignored
    for tok in body.split():
        key, _, val = tok.partition("=")
        try:
            if key in ("width", "height", "dpi"):
                meta[key] = float(val)
            elif key == "source":
                meta[key] = val
        except ValueError:
            pass


def _is_hash_record(line: str) -> bool:
    # a '#' glyph: exactly "# n n n n [n]" with numeric fields
    toks = line.split()
    if toks[0] != "#" or len(toks) not in (5, 6) or not line.startswith("# "):
        return False
    try:
        [float(t) for t in toks[1:]]
    except ValueError:
        return False
    return True


def parse_boxfile(
    stream: TextIO | str,
    page_height: float | None = None,
    source_tag: str | None = None,
    dpi: float | None = None,
) -> PageBoxes:
    """Parse a native or OCR-convention box file into a grouped page."""
    if isinstance(stream, str):
        stream = io.StringIO(stream)
    meta: dict = {}
    boxes: list[CharBox] = []
    for lineno, raw in enumerate(stream, start=1):
        line = raw.rstrip("\r\n")
        if not line.strip():
            continue
        if line.lstrip().startswith("#") and not _is_hash_record(line):
            body = line.lstrip()[1:]
            if body.startswith("@"):
                _parse_header(body[1:], meta)
            continue
        toks = line.split(" ")
        toks = [t for t in toks if t != ""]
        if len(toks) not in (5, 6):
            raise MalformedLine(lineno, f"expected 5 or 6 fields, got {len(toks)}")
        glyph = toks[0]
        if len(glyph) != 1:
            raise MalformedLine(lineno, f"glyph must be a single code point: {glyph!r}")
        a, b, c, d = (_num(t, lineno) for t in toks[1:5])
        if len(toks) == 5:
            x, y, w, h = a, b, c, d
        else:
            _num(toks[5], lineno)
            height = page_height if page_height is not None else meta.get("height")
            if height is None:
                raise MissingPageHeight(
                    f"line {lineno}: bottom-origin box record needs the page height (--page-height)"
                )
            left, bottom, right, top = a, b, c, d
            x, y, w, h = left, height - top, right - left, top - bottom
        if not (w > 0 and h > 0):
            raise MalformedLine(lineno, f"non-positive box size {w}x{h}")
        boxes.append(CharBox(glyph, x, y, w, h))
    if not boxes:
        raise EmptyInput("box file contains no boxes")
    page_size = None
    if "width" in meta and "height" in meta:
        page_size = (meta["width"], meta["height"])
    elif page_height is not None and "width" in meta:
        page_size = (meta["width"], page_height)
    return group_lines(
        boxes,
        dpi=dpi if dpi is not None else meta.get("dpi", raster.DEFAULT_DPI),
        source_tag=source_tag or meta.get("source", "scanned"),
        page_size=page_size,
    )


def _fmt(v: float) -> str:
    if float(v).is_integer():
        return str(int(v))
    s = f"{v:.6f}".rstrip("0").rstrip(".")
    return "0" if s == "-0" else s


def emit_boxfile(page: PageBoxes, header: bool | None = None) -> str:
    """Serialize in native format, lines top-down and boxes left to right.

    A ``#@`` metadata comment is written when the page size is known (or
    ``header=True``); plain readers skip it as a comment.
    """
    out = []
    if header is None:
        header = page.page_size is not None
    if header:
        parts = [f"source={page.source_tag}", f"dpi={_fmt(page.dpi)}"]
        if page.page_size is not None:
            parts += [f"width={_fmt(page.page_size[0])}", f"height={_fmt(page.page_size[1])}"]
        out.append("#@ " + " ".join(parts))
    for line in page.lines:
        for b in line.boxes:
            out.append(f"{b.glyph} {_fmt(b.x)} {_fmt(b.y)} {_fmt(b.w)} {_fmt(b.h)}")
    return "\n".join(out) + "\n"


def read_boxfile(path: str | Path, **kwargs) -> PageBoxes:
    with open(path, encoding="utf-8") as fh:
        return parse_boxfile(fh, **kwargs)


def write_boxfile(path: str | Path, page: PageBoxes) -> None:
    Path(path).write_text(emit_boxfile(page), encoding="utf-8")


def text_direction(boxes: Sequence[CharBox]) -> float:
    """Dominant text-line angle (radians, y down): median slope between
    lower midpoints of nearby, roughly horizontal neighbours."""
    if len(boxes) < 2:
        return 0.0
    mids = np.array([b.lower_midpoint for b in boxes], dtype=np.float64)
    k = min(NEIGHBOURS + 1, len(boxes))
    _, idx = cKDTree(mids).query(mids, k=k)
    i = np.repeat(np.arange(len(boxes)), k - 1)
    j = idx[:, 1:].ravel()
    d = mids[j] - mids[i]
    keep = (d[:, 0] > 0) & (d[:, 0] > 2.0 * np.abs(d[:, 1]))
    if not keep.any():
        return 0.0
    return float(np.median(np.arctan(d[keep, 1] / d[keep, 0])))


def group_lines(
    boxes: Iterable[CharBox],
    dpi: float = raster.DEFAULT_DPI,
    source_tag: str = "scanned",
    page_size: tuple[float, float] | None = None,
) -> PageBoxes:
    """Cluster boxes into text lines.

    Lower midpoints are projected across the dominant text direction (so a
    skewed page groups like an upright one) and split wherever consecutive
    projected values are more than 0.6 x the median box height apart.
    """
    boxes = list(boxes)
    if not boxes:
        raise EmptyInput("no boxes to group")
    mids = np.array([b.lower_midpoint for b in boxes], dtype=np.float64)
    gap = LINE_GAP_FACTOR * float(np.median([b.h for b in boxes]))
    a = text_direction(boxes)
    across = mids[:, 1] * math.cos(a) - mids[:, 0] * math.sin(a)
    order = np.argsort(across, kind="stable")
    breaks = np.flatnonzero(np.diff(across[order]) > gap) + 1
    lines = [sorted((boxes[t] for t in chunk), key=CharBox.sort_key) for chunk in np.split(order, breaks)]

    def line_key(g):
        return (raster.median(b.lower_midpoint[1] for b in g), g[0].sort_key())

    lines.sort(key=line_key)
    return PageBoxes(
        lines=tuple(TextLine(i, tuple(g)) for i, g in enumerate(lines, start=1)),
        dpi=dpi,
        source_tag=source_tag,
        page_size=page_size,
    )


def is_baseline_glyph(glyph: str) -> bool:
    return glyph.isalnum() and glyph not in DESCENDERS


def baseline_points(line: TextLine) -> list[tuple[float, float]]:
    """Lower-midpoints of the line's glyphs that rest on the baseline
    (alphanumerics other than descenders; punctuation is skipped)."""
    if len(line.boxes) == 0:
        raise EmptyInput("empty text line")
    pts = [b.lower_midpoint for b in line.boxes if is_baseline_glyph(b.glyph)]
    if not pts:
        raise NoBaselineChars(f"line {line.index} ({line.text!r}) has no baseline characters")
    return pts


def rotate_box(box: CharBox, theta: float, pivot: tuple[float, float]) -> CharBox:
    """Axis-aligned hull of ``box`` after an anticlockwise rotation by
    ``theta`` about ``pivot``."""
    p = np.asarray(pivot, dtype=np.float64)
    pts = (box.corners() - p) @ raster.rotation_matrix(theta).T + p
    x0, y0 = pts.min(axis=0)
    x1, y1 = pts.max(axis=0)
    return CharBox(box.glyph, float(x0), float(y0), float(x1 - x0), float(y1 - y0))


def transform_boxes(
    page: PageBoxes,
    theta_m: float,
    corner: tuple[float, float] = (0.0, 0.0),
    pivot: tuple[float, float] | None = None,
) -> PageBoxes:
    """Rotate every box anticlockwise by ``theta_m`` about the page centre,
    then shift so that ``corner`` maps to the origin, and regroup lines."""
    if not abs(theta_m) < raster.MAX_SKEW_RAD:
        raise ExcessiveSkew(f"|theta| = {abs(theta_m):.4f} rad exceeds pi/4")
    if pivot is None:
        pivot = page.center()
    cx, cy = corner
    out = []
    for b in page.all_boxes():
        if theta_m != 0.0:
            b = rotate_box(b, theta_m, pivot)
        if cx != 0.0 or cy != 0.0:
            b = replace(b, x=b.x - cx, y=b.y - cy)
        out.append(b)
    return group_lines(out, dpi=page.dpi, source_tag=page.source_tag, page_size=page.page_size)


def leftmost_points(page: PageBoxes) -> list[tuple[float, float]]:
    """Lower-midpoint of the leftmost baseline glyph of each line."""
    pts = []
    for line in page.lines:
        for b in line.boxes:
            if is_baseline_glyph(b.glyph):
                pts.append(b.lower_midpoint)
                break
    return pts


def page_frame_corner(page: PageBoxes) -> raster.FrameCorner:
    ys = [p[1] for p in baseline_points(page.lines[0])]
    xs = [p[0] for p in leftmost_points(page)]
    return raster.frame_corner(ys, xs)


@dataclass(frozen=True)
class CorrectionReport:
    theta_m: float
    slope_m: float
    n_skew_points: int
    corner: tuple[float, float]
    n_corner_ys: int
    n_corner_xs: int


def correct_page(page: PageBoxes, rotate: bool = True) -> tuple[PageBoxes, CorrectionReport]:
    """Box-space preprocessing: rotation correction from the first line's
    baseline (scans only), then translation to the frame corner."""
    if rotate:
        skew = raster.estimate_skew(baseline_points(page.lines[0]))
        page = transform_boxes(page, skew.theta_m)
    else:
        skew = raster.SkewEstimate(0.0, 0.0, 0)
    ys = baseline_points(page.lines[0])
    xs = leftmost_points(page)
    fc = raster.frame_corner([p[1] for p in ys], [p[0] for p in xs])
    page = transform_boxes(page, 0.0, fc.corner)
    return page, CorrectionReport(skew.theta_m, skew.slope_m, skew.n_points, fc.corner, len(ys), len(xs))
