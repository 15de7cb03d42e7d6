"""Synthetic printers and page pairs with known ground truth.

A printer is a smooth displacement field (fx, fy) plus smooth scale fields
(sx, sy), each a short sum of low-frequency sinusoids. Printing a reference
page moves every character box by (-fx, -fy) at its reference location and
divides its size by (sx, sy), so the measured translation distortion
recovers fx, fy and the scaling distortion recovers sx, sy.
"""

from __future__ import annotations

import math
import string
import zlib
from dataclasses import dataclass, field, replace
from typing import Sequence

import numpy as np

from . import raster
from .boxes import CharBox, PageBoxes, group_lines, rotate_box
from .errors import DataError, ExcessiveSkew, PageOverflow

MAX_MISHANDLING_SKEW_DEG = 3.0
INK = 30
PAPER = 220


def derive_seed(*keys) -> int:
    """Stable 32-bit seed from a tuple of ints/strings (no hash salting)."""
    ints = [k if isinstance(k, int) else zlib.crc32(str(k).encode("utf-8")) for k in keys]
    return int(np.random.SeedSequence([abs(int(i)) for i in ints]).generate_state(1)[0])


@dataclass(frozen=True)
class Sinusoid:
    amp: float
    fu: float  # cycles across the page width
    fv: float  # cycles down the page height
    phase: float

    def __call__(self, x, y, extent):
        W, H = extent
        return self.amp * np.sin(2 * np.pi * (self.fu * np.asarray(x) / W + self.fv * np.asarray(y) / H) + self.phase)


def _sum(terms, x, y, extent):
    out = np.zeros(np.broadcast(np.asarray(x), np.asarray(y)).shape)
    for t in terms:
        out = out + t(x, y, extent)
    return out


@dataclass(frozen=True)
class PrinterSignature:
    id: str
    extent: tuple[float, float]  # page (width, height) in pixels the frequencies refer to
    fx_terms: tuple[Sinusoid, ...] = ()
    fy_terms: tuple[Sinusoid, ...] = ()
    sx_terms: tuple[Sinusoid, ...] = ()
    sy_terms: tuple[Sinusoid, ...] = ()
    seed: int = 0

    def fx(self, x, y):
        return _sum(self.fx_terms, x, y, self.extent)

    def fy(self, x, y):
        return _sum(self.fy_terms, x, y, self.extent)

    def sx(self, x, y):
        return 1.0 + _sum(self.sx_terms, x, y, self.extent)

    def sy(self, x, y):
        return 1.0 + _sum(self.sy_terms, x, y, self.extent)

    @classmethod
    def random(
        cls,
        id: str,
        seed: int,
        extent: tuple[float, float],
        n_terms: tuple[int, int] = (2, 4),
        max_amp: float = 10.0,
        max_scale: float = 0.02,
        max_cycles: float = 3.0,
    ) -> "PrinterSignature":
        """Random signature; the summed amplitudes bound |fx|, |fy| by
        ``max_amp`` pixels and |sx - 1|, |sy - 1| by ``max_scale``."""
        rng = np.random.default_rng(seed)

        def terms(total):
            k = int(rng.integers(n_terms[0], n_terms[1] + 1))
            share = rng.dirichlet(np.ones(k)) * total * rng.uniform(0.6, 1.0)
            return tuple(
                Sinusoid(float(a), float(rng.uniform(0.2, max_cycles)), float(rng.uniform(0.0, max_cycles)),
                         float(rng.uniform(0, 2 * np.pi)))
                for a in share
            )

        return cls(id, tuple(extent), terms(max_amp), terms(max_amp), terms(max_scale), terms(max_scale), seed)

    def to_dict(self) -> dict:
        t = lambda ts: [[s.amp, s.fu, s.fv, s.phase] for s in ts]  # noqa: E731
        return {
            "id": self.id,
            "extent": list(self.extent),
            "seed": self.seed,
            "fx": t(self.fx_terms),
            "fy": t(self.fy_terms),
            "sx": t(self.sx_terms),
            "sy": t(self.sy_terms),
        }

    @classmethod
    def from_dict(cls, d) -> "PrinterSignature":
        t = lambda ts: tuple(Sinusoid(*map(float, s)) for s in ts)  # noqa: E731
        return cls(d["id"], tuple(d["extent"]), t(d["fx"]), t(d["fy"]), t(d["sx"]), t(d["sy"]), int(d["seed"]))


DEFAULT_ALPHABET = string.ascii_letters + string.digits


@dataclass(frozen=True)
class PageSpec:
    n_lines: int = 30
    chars_per_line: int | tuple[int, int] = (56, 64)
    glyph_alphabet: str = DEFAULT_ALPHABET
    char_cell: tuple[float, float] = (96.0, 128.0)  # (w, h) pixels
    margins: tuple[float, float] = (1200.0, 1200.0)  # (left, top) pixels
    dpi: float = 1200.0
    page_in: tuple[float, float] = (8.5, 11.0)
    line_pitch: float | None = None  # default 1.6 x cell height
    word_len: tuple[int, int] = (2, 9)
    indent_fraction: float = 0.0  # share of lines (never the first) indented
    indent: float | None = None  # default 4 cell widths
    justify: bool = True
    name: str = "default"

    def __post_init__(self):
        w, h = self.char_cell
        if self.n_lines < 1 or w <= 0 or h <= 0 or self.dpi <= 0:
            raise DataError("page spec dimensions must be positive")
        lo, hi = self.cpl_range
        if lo < 1 or hi < lo:
            raise DataError("chars_per_line must be >= 1")
        if not self.glyph_alphabet:
            raise DataError("empty glyph alphabet")
        if not 0.0 <= self.indent_fraction < 1.0:
            raise DataError("indent_fraction must be in [0, 1)")
        W, H = self.page_size
        if self.margins[1] + (self.n_lines - 1) * self.pitch + h > H:
            raise PageOverflow(f"{self.n_lines} lines do not fit a page of height {H}")
        if 2 * self.margins[0] >= W:
            raise PageOverflow("margins leave no room for text")

    @property
    def cpl_range(self) -> tuple[int, int]:
        c = self.chars_per_line
        return (c, c) if isinstance(c, int) else (int(c[0]), int(c[1]))

    @property
    def page_size(self) -> tuple[int, int]:
        return (int(round(self.page_in[0] * self.dpi)), int(round(self.page_in[1] * self.dpi)))

    @property
    def pitch(self) -> float:
        return self.line_pitch if self.line_pitch is not None else 1.6 * self.char_cell[1]

    @property
    def text_width(self) -> float:
        return self.page_size[0] - 2 * self.margins[0]

    def glyph_width(self, glyph: str) -> float:
        # deterministic per-glyph width between 0.75 and 1.0 of the cell
        return self.char_cell[0] * (0.75 + 0.025 * ((ord(glyph) * 37) % 11))


# three "fonts" for the multi-font protocol
FONTS = {
    "serif": PageSpec(name="serif"),
    "sans": PageSpec(
        name="sans", char_cell=(104.0, 136.0), chars_per_line=(50, 58), margins=(1100.0, 1300.0), n_lines=28
    ),
    "comic": PageSpec(
        name="comic", char_cell=(112.0, 150.0), chars_per_line=(46, 52), margins=(1000.0, 1100.0), n_lines=26
    ),
}


def make_reference(spec: PageSpec, text_seed: int) -> PageBoxes:
    """Lay out random words: uniform line pitch, per-glyph advances,
    optionally justified to the right margin.

    Each line gets at least ``chars_per_line`` glyphs; a justified line is
    then topped up with whole words while they fit, as a typesetter would,
    so the stretched word spaces stay short."""
    rng = np.random.default_rng(text_seed)
    cw, ch = spec.char_cell
    gap = 0.15 * cw
    space = 0.5 * cw
    indent = spec.indent if spec.indent is not None else 4 * cw
    alphabet = spec.glyph_alphabet
    lo, hi = spec.cpl_range
    n_indent = int(math.floor(spec.indent_fraction * spec.n_lines))
    indented = set()
    if n_indent and spec.n_lines > 1:
        indented = set((1 + rng.permutation(spec.n_lines - 1)[:n_indent]).tolist())
    boxes = []
    for i in range(spec.n_lines):
        k = int(rng.integers(lo, hi + 1))
        glyphs = [alphabet[t] for t in rng.integers(0, len(alphabet), size=k)]
        words = []
        pos = 0
        while pos < k:
            n = int(rng.integers(spec.word_len[0], spec.word_len[1] + 1))
            words.append(glyphs[pos : pos + n])
            pos += n
        left = spec.margins[0] + (indent if i in indented else 0.0)
        avail = spec.margins[0] + spec.text_width - left

        def width(w):
            return sum(spec.glyph_width(g) for g in w) + gap * (len(w) - 1)

        natural = sum(width(w) for w in words) + space * (len(words) - 1)
        if natural > avail:
            raise PageOverflow(f"line {i + 1} needs {natural:.0f} px but only {avail:.0f} px fit")
        while spec.justify:
            n = int(rng.integers(spec.word_len[0], spec.word_len[1] + 1))
            word = [alphabet[t] for t in rng.integers(0, len(alphabet), size=n)]
            if natural + space + width(word) > avail:
                break
            words.append(word)
            natural += space + width(word)
        extra = (avail - natural) / (len(words) - 1) if spec.justify and len(words) > 1 else 0.0
        top = spec.margins[1] + i * spec.pitch
        x = left
        for wi, word in enumerate(words):
            if wi:
                x += space + extra
            for gi, g in enumerate(word):
                if gi:
                    x += gap
                w = spec.glyph_width(g)
                boxes.append(CharBox(g, x, top, w, ch))
                x += w
    return group_lines(boxes, dpi=spec.dpi, source_tag="reference", page_size=spec.page_size)


def apply_printer(
    ref: PageBoxes,
    sig: PrinterSignature,
    noise_px: float = 0.0,
    seed: int = 0,
    size_noise_px: float | None = None,
) -> PageBoxes:
    """Print a reference page: shift each box by (-fx, -fy) at its
    reference top-left corner, divide its size by (sx, sy), add jitter."""
    if noise_px < 0 or (size_noise_px is not None and size_noise_px < 0):
        raise DataError("noise must be non-negative")
    if size_noise_px is None:
        size_noise_px = noise_px
    boxes = ref.all_boxes()
    x = np.array([b.x for b in boxes])
    y = np.array([b.y for b in boxes])
    w = np.array([b.w for b in boxes])
    h = np.array([b.h for b in boxes])
    nx = x - sig.fx(x, y)
    ny = y - sig.fy(x, y)
    nw = w / sig.sx(x, y)
    nh = h / sig.sy(x, y)
    if noise_px > 0 or size_noise_px > 0:
        rng = np.random.default_rng(seed)
        jitter = rng.standard_normal((len(boxes), 4))
        nx = nx + noise_px * jitter[:, 0]
        ny = ny + noise_px * jitter[:, 1]
        nw = np.maximum(nw + size_noise_px * jitter[:, 2], 1.0)
        nh = np.maximum(nh + size_noise_px * jitter[:, 3], 1.0)
    out = [CharBox(b.glyph, float(a), float(c), float(d), float(e)) for b, a, c, d, e in zip(boxes, nx, ny, nw, nh)]
    return group_lines(out, dpi=ref.dpi, source_tag="scanned", page_size=ref.page_size)


def apply_mishandling(page: PageBoxes, skew_deg: float, offset: tuple[float, float] = (0.0, 0.0)) -> PageBoxes:
    """Tilt the page clockwise by ``skew_deg`` about its centre (so the
    corrective anticlockwise angle is ``+skew_deg``), then shift it."""
    if abs(skew_deg) > MAX_MISHANDLING_SKEW_DEG:
        raise ExcessiveSkew(f"mishandling skew {skew_deg} deg exceeds {MAX_MISHANDLING_SKEW_DEG}")
    theta = -math.radians(skew_deg)
    pivot = page.center()
    dx, dy = offset
    out = []
    for b in page.all_boxes():
        if theta != 0.0:
            b = rotate_box(b, theta, pivot)
        if dx or dy:
            b = replace(b, x=b.x + dx, y=b.y + dy)
        out.append(b)
    return group_lines(out, dpi=page.dpi, source_tag=page.source_tag, page_size=page.page_size)


def _px(v: float) -> int:
    # round half up, so integer shifts of a page shift its pixels exactly
    return int(math.floor(v + 0.5))


def _pixel_rect(b: CharBox) -> tuple[int, int, int, int]:
    x0 = _px(b.x)
    y0 = _px(b.y)
    x1 = max(_px(b.x + b.w), x0 + 1)
    y1 = max(_px(b.y + b.h), y0 + 1)
    return x0, y0, x1, y1


def render_mask(page: PageBoxes, size: tuple[int, int], ring: int | None = None) -> np.ndarray:
    """Foreground mask with each box drawn as a hollow rectangle."""
    W, H = size
    mask = np.zeros((H, W), dtype=bool)
    for b in page.all_boxes():
        x0, y0, x1, y1 = _pixel_rect(b)
        if x0 < 0 or y0 < 0 or x1 > W or y1 > H:
            raise PageOverflow(f"box {b.glyph!r} at ({b.x:.1f}, {b.y:.1f}) falls outside the {W}x{H} page")
        t = ring if ring is not None else max(1, int(round(min(b.w, b.h) / 10)))
        mask[y0:y1, x0:x1] = True
        if x1 - x0 > 2 * t and y1 - y0 > 2 * t:
            mask[y0 + t : y1 - t, x0 + t : x1 - t] = False
    return mask


def add_specks(mask: np.ndarray, n: int, rng: np.random.Generator, max_size: int = 5, clearance: int = 2):
    """Scatter ``n`` isolated 1..max_size pixel blobs on the background."""
    from scipy import ndimage

    H, W = mask.shape
    blocked = ndimage.binary_dilation(mask, iterations=clearance) if mask.any() else np.zeros_like(mask)
    specks = np.zeros_like(mask)
    placed = tries = 0
    while placed < n and tries < 100 * n + 1000:
        tries += 1
        size = int(rng.integers(1, max_size + 1))
        y, x = int(rng.integers(0, H)), int(rng.integers(0, W))
        pix = [(y, x)]
        while len(pix) < size:
            py, px = pix[int(rng.integers(0, len(pix)))]
            dy, dx = [(0, 1), (1, 0), (0, -1), (-1, 0)][int(rng.integers(0, 4))]
            q = (py + dy, px + dx)
            if q not in pix:
                pix.append(q)
        if any(not (0 <= py < H and 0 <= px < W) or blocked[py, px] for py, px in pix):
            continue
        blob = np.zeros_like(mask)
        for py, px in pix:
            blob[py, px] = True
        specks |= blob
        blocked |= ndimage.binary_dilation(blob, iterations=clearance)
        placed += 1
    return specks


def rasterize(
    page: PageBoxes,
    spec: PageSpec,
    noise_sigma: float = 0.0,
    n_specks: int = 0,
    seed: int = 0,
    ring: int | None = None,
) -> raster.GrayRaster:
    """Render boxes as hollow rectangles (ink 30 on paper 220)."""
    mask = render_mask(page, spec.page_size, ring)
    rng = np.random.default_rng(seed)
    if n_specks:
        mask = mask | add_specks(mask, n_specks, rng)
    img = np.where(mask, float(INK), float(PAPER))
    if noise_sigma > 0:
        img = img + noise_sigma * rng.standard_normal(img.shape)
    return raster.GrayRaster(np.clip(np.rint(img), 0, 65535).astype(np.uint16), spec.dpi)


@dataclass(frozen=True)
class PageRecord:
    page_id: str
    printer_id: str
    font: str
    page_index: int
    skew_deg: float
    offset: tuple[float, float]
    text_seed: int
    noise_seed: int
    ref: PageBoxes
    scan: PageBoxes


def make_printers(n: int, seed: int, extent: tuple[float, float], **kwargs) -> list[PrinterSignature]:
    return [
        PrinterSignature.random(f"P{k + 1:02d}", derive_seed(seed, "printer", k), extent, **kwargs) for k in range(n)
    ]


def make_dataset(
    n_printers: int = 5,
    pages: int = 5,
    fonts: Sequence[str] = ("serif", "sans", "comic"),
    seed: int = 0,
    noise_px: float = 0.5,
    size_noise_px: float | None = None,
    max_skew_deg: float = 1.0,
    max_offset: float = 200.0,
    printers: Sequence[PrinterSignature] | None = None,
    font_specs: dict | None = None,
) -> tuple[list[PrinterSignature], list[PageRecord]]:
    """Every printer prints the same ``pages`` documents in each font; each
    printout gets its own jitter and mishandling."""
    specs = font_specs or FONTS
    extent = specs[fonts[0]].page_size
    if printers is None:
        printers = make_printers(n_printers, seed, extent)
    records = []
    for font in fonts:
        spec = specs[font]
        for p in range(pages):
            text_seed = derive_seed(seed, "text", font, p)
            ref = make_reference(spec, text_seed)
            for sig in printers:
                rng = np.random.default_rng(derive_seed(seed, "handling", sig.id, font, p))
                skew = float(rng.uniform(-max_skew_deg, max_skew_deg))
                off = (float(rng.uniform(-max_offset, max_offset)), float(rng.uniform(-max_offset, max_offset)))
                noise_seed = derive_seed(seed, "noise", sig.id, font, p)
                scan = apply_printer(ref, sig, noise_px, noise_seed, size_noise_px)
                scan = apply_mishandling(scan, skew, off)
                pid = f"{sig.id}_{font}_{p + 1:02d}"
                records.append(PageRecord(pid, sig.id, font, p + 1, skew, off, text_seed, noise_seed, ref, scan))
    return list(printers), records
