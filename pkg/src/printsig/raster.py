"""Scanned-page raster operations: binarization, speck removal, skew and
frame-corner estimation, and the rotation/translation corrections.

Rasters are row-major numpy arrays indexed ``[y, x]``. Intensity follows the
scanner convention (0 = black), so printed strokes are the *dark* class.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np
from PIL import Image
from scipy import ndimage

from .errors import (
    CornerOutOfBounds,
    DataError,
    DegenerateHistogram,
    EmptyInput,
    ExcessiveSkew,
    InsufficientPoints,
    VerticalDegenerate,
)

DEFAULT_DPI = 1200
DEFAULT_GAMMA = 20
MAX_SKEW_RAD = math.pi / 4

# 8-connectivity
_EIGHT = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True, eq=False)
class GrayRaster:
    samples: np.ndarray  # (height, width) uint16
    dpi: float = DEFAULT_DPI

    def __post_init__(self):
        s = np.asarray(self.samples)
        if s.ndim != 2 or s.shape[0] == 0 or s.shape[1] == 0:
            raise EmptyInput("gray raster must be a non-empty 2-D array")
        if self.dpi <= 0:
            raise DataError("dpi must be positive")
        object.__setattr__(self, "samples", s)

    @property
    def width(self) -> int:
        return self.samples.shape[1]

    @property
    def height(self) -> int:
        return self.samples.shape[0]


@dataclass(frozen=True, eq=False)
class BinaryRaster:
    bits: np.ndarray  # (height, width) bool, True = printed
    dpi: float = DEFAULT_DPI

    def __post_init__(self):
        b = np.asarray(self.bits, dtype=bool)
        if b.ndim != 2 or b.shape[0] == 0 or b.shape[1] == 0:
            raise EmptyInput("binary raster must be a non-empty 2-D array")
        object.__setattr__(self, "bits", b)

    @property
    def width(self) -> int:
        return self.bits.shape[1]

    @property
    def height(self) -> int:
        return self.bits.shape[0]

    def __eq__(self, other):
        if not isinstance(other, BinaryRaster):
            return NotImplemented
        return self.bits.shape == other.bits.shape and bool(np.array_equal(self.bits, other.bits))

    def to_gray(self, fg: int = 0, bg: int = 65535) -> GrayRaster:
        return GrayRaster(np.where(self.bits, fg, bg).astype(np.uint16), self.dpi)


@dataclass(frozen=True)
class SkewEstimate:
    slope_m: float
    theta_m: float
    n_points: int


@dataclass(frozen=True)
class FrameCorner:
    h_line: tuple[float, float, float]
    v_line: tuple[float, float, float]
    corner: tuple[float, float]


def otsu_threshold(samples: np.ndarray) -> int:
    """Return ``t`` such that splitting into ``< t`` / ``>= t`` maximizes the
    between-class variance of the full intensity histogram."""
    values = np.asarray(samples).ravel()
    if values.size == 0:
        raise EmptyInput("empty raster")
    lo = int(values.min())
    hi = int(values.max())
    if lo == hi:
        raise DegenerateHistogram(f"all pixels have intensity {lo}")
    hist = np.bincount(values.astype(np.int64) - lo).astype(np.float64)
    levels = np.arange(lo, hi + 1, dtype=np.float64)
    total = hist.sum()
    # candidate split k puts levels[:k] in the dark class, k = 1..len-1
    w0 = np.cumsum(hist)[:-1]
    s0 = np.cumsum(hist * levels)[:-1]
    w1 = total - w0
    mu0 = s0 / np.where(w0 > 0, w0, 1)
    mu1 = (s0[-1] + hist[-1] * levels[-1] - s0) / np.where(w1 > 0, w1, 1)
    between = w0 * w1 * (mu0 - mu1) ** 2
    between[(w0 == 0) | (w1 == 0)] = -1.0
    best = between.max()
    # middle of the plateau of maximizers keeps two-level images symmetric
    ks = np.flatnonzero(between >= best * (1 - 1e-12))
    k = int(ks[(len(ks) - 1) // 2]) + 1
    return lo + k


def binarize(img: GrayRaster) -> BinaryRaster:
    t = otsu_threshold(img.samples)
    return BinaryRaster(img.samples < t, img.dpi)


def label_components(img: BinaryRaster) -> tuple[np.ndarray, int]:
    """8-connected labelling of the foreground."""
    return ndimage.label(img.bits, structure=_EIGHT)


def denoise(img: BinaryRaster, gamma: int = DEFAULT_GAMMA) -> BinaryRaster:
    """Drop 8-connected foreground components with fewer than ``gamma`` pixels."""
    if gamma < 1:
        raise DataError("gamma must be >= 1")
    labels, n = label_components(img)
    if n == 0:
        return BinaryRaster(img.bits.copy(), img.dpi)
    sizes = np.bincount(labels.ravel())
    keep = sizes >= gamma
    keep[0] = False
    return BinaryRaster(keep[labels], img.dpi)


def component_boxes(img: BinaryRaster, min_pixels: int = 1) -> list[tuple[int, int, int, int]]:
    """Bounding boxes ``(x, y, w, h)`` of foreground components, in label order."""
    labels, n = label_components(img)
    if n == 0:
        return []
    sizes = np.bincount(labels.ravel())
    out = []
    for lab, sl in enumerate(ndimage.find_objects(labels), start=1):
        if sl is None or sizes[lab] < min_pixels:
            continue
        ys, xs = sl
        out.append((xs.start, ys.start, xs.stop - xs.start, ys.stop - ys.start))
    return out


def estimate_skew(baseline_points: Sequence[tuple[float, float]]) -> SkewEstimate:
    """Least-squares baseline slope through lower-midpoints of one text line."""
    pts = np.asarray(baseline_points, dtype=np.float64).reshape(-1, 2)
    n = len(pts)
    if n < 2:
        raise InsufficientPoints(f"need at least 2 baseline points, got {n}")
    x = pts[:, 0]
    y = pts[:, 1]
    # centred form of the textbook normal-equation slope; identical algebraically
    # but without the catastrophic cancellation of N*sum(x^2) - sum(x)^2
    xc = x - x.mean()
    yc = y - y.mean()
    den = float(np.dot(xc, xc))
    if den == 0.0 or den <= 1e-24 * float(np.dot(x, x)):
        raise VerticalDegenerate("all baseline points share one x coordinate")
    m = float(np.dot(xc, yc)) / den
    return SkewEstimate(slope_m=m, theta_m=math.atan(m), n_points=n)


def rotation_matrix(theta: float) -> np.ndarray:
    """Forward map of an anticlockwise (as displayed, y pointing down)
    rotation by ``theta`` applied to offsets from the pivot."""
    c, s = math.cos(theta), math.sin(theta)
    return np.array([[c, s], [-s, c]])


def rotate_raster(img: BinaryRaster, theta_m: float) -> BinaryRaster:
    """Rotate anticlockwise by ``theta_m`` about the image centre.

    Nearest-neighbour inverse mapping; output keeps the input size.
    """
    if not abs(theta_m) < MAX_SKEW_RAD:
        raise ExcessiveSkew(f"|theta| = {abs(theta_m):.4f} rad exceeds pi/4")
    if theta_m == 0.0:
        return BinaryRaster(img.bits.copy(), img.dpi)
    h, w = img.bits.shape
    cx, cy = (w - 1) / 2.0, (h - 1) / 2.0
    c, s = math.cos(theta_m), math.sin(theta_m)
    ys, xs = np.mgrid[0:h, 0:w]
    dx = xs - cx
    dy = ys - cy
    # inverse of rotation_matrix(theta)
    src_x = np.rint(c * dx - s * dy + cx).astype(np.int64)
    src_y = np.rint(s * dx + c * dy + cy).astype(np.int64)
    inside = (src_x >= 0) & (src_x < w) & (src_y >= 0) & (src_y < h)
    out = np.zeros((h, w), dtype=bool)
    out[inside] = img.bits[src_y[inside], src_x[inside]]
    return BinaryRaster(out, img.dpi)


def median(values: Iterable[float]) -> float:
    v = sorted(float(x) for x in values)
    if not v:
        raise EmptyInput("median of empty list")
    mid = len(v) // 2
    if len(v) % 2:
        return v[mid]
    return (v[mid - 1] + v[mid]) / 2.0


def frame_corner(first_line_baseline_ys: Sequence[float], leftmost_xs: Sequence[float]) -> FrameCorner:
    """Intersect the first horizontal text line with the first vertical
    character line, both taken as medians for robustness to indents."""
    if len(first_line_baseline_ys) == 0 or len(leftmost_xs) == 0:
        raise EmptyInput("frame corner needs at least one y and one x")
    h_line = np.array([0.0, 1.0, -median(first_line_baseline_ys)])
    v_line = np.array([1.0, 0.0, -median(leftmost_xs)])
    c = np.cross(h_line, v_line)
    corner = (float(c[0] / c[2]), float(c[1] / c[2]))
    return FrameCorner(tuple(h_line.tolist()), tuple(v_line.tolist()), corner)


def translate_raster(img: BinaryRaster, corner: tuple[float, float]) -> BinaryRaster:
    """Shift content so that ``corner`` lands on the raster origin."""
    h, w = img.bits.shape
    cx, cy = corner
    if not (0 <= cx < w and 0 <= cy < h):
        raise CornerOutOfBounds(f"corner ({cx}, {cy}) outside {w}x{h} raster")
    ox, oy = int(round(cx)), int(round(cy))
    out = np.zeros_like(img.bits)
    out[: h - oy, : w - ox] = img.bits[oy:, ox:]
    return BinaryRaster(out, img.dpi)


def read_raster(path: str | Path, dpi: float | None = None) -> GrayRaster:
    """Load a single-channel 8/16-bit PNG or PGM (TIFF if Pillow can)."""
    with Image.open(path) as im:
        if im.mode not in ("L", "I", "I;16", "I;16B", "I;16L"):
            raise DataError(f"{path}: expected single-channel raster, got mode {im.mode}")
        arr = np.array(im)
        meta_dpi = im.info.get("dpi")
    if dpi is None:
        dpi = round(float(meta_dpi[0])) if meta_dpi else DEFAULT_DPI
    return GrayRaster(arr.astype(np.uint16), dpi)


def write_raster(path: str | Path, img: GrayRaster | BinaryRaster, eight_bit: bool = False) -> None:
    if isinstance(img, BinaryRaster):
        img = img.to_gray(0, 255 if eight_bit else 65535)
    arr = img.samples
    if eight_bit:
        pil = Image.fromarray(np.clip(arr, 0, 255).astype(np.uint8), mode="L")
    else:
        pil = Image.fromarray(arr.astype(np.uint16))
    path = Path(path)
    if path.suffix.lower() == ".png":
        pil.save(path, dpi=(img.dpi, img.dpi))
    else:
        pil.save(path)
