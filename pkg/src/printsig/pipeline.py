"""Page-pair pipeline: preprocess, match, measure, resample, featurize."""

from __future__ import annotations

from dataclasses import dataclass

from . import align, boxes, features, ptmp
from .boxes import CorrectionReport, PageBoxes
from .features import DistortionGrid, RowFeature


@dataclass(frozen=True)
class PreprocessResult:
    ref: PageBoxes
    scan: PageBoxes
    ref_report: CorrectionReport
    scan_report: CorrectionReport


def preprocess_pair(ref: PageBoxes, scan: PageBoxes) -> PreprocessResult:
    """Rotation + translation correction for the scan, translation only for
    the reference."""
    ref_c, ref_rep = boxes.correct_page(ref, rotate=False)
    scan_c, scan_rep = boxes.correct_page(scan, rotate=True)
    return PreprocessResult(ref_c, scan_c, ref_rep, scan_rep)


def distortion_grid(
    ref: PageBoxes, scan: PageBoxes, n_r: int = features.DEFAULT_ROWS, n_c: int = features.DEFAULT_COLS
) -> DistortionGrid:
    """Grid from already-corrected pages."""
    matches = align.match_pages(ref, scan)
    return features.resample_to_grid(features.compute_distortions(matches), n_r, n_c)


def grid_features(grid: DistortionGrid, kind: str, page_id: str = "", label: str | None = None) -> list[RowFeature]:
    kind = features.canonical_kind(kind)
    if kind == "ptmp":
        return [ptmp.ptmp_features(grid, page_id, label).as_row()]
    return features.extract_row_features(grid, kind, page_id, label)


def page_features(
    ref: PageBoxes,
    scan: PageBoxes,
    kind: str = "t_x",
    n_r: int = features.DEFAULT_ROWS,
    n_c: int = features.DEFAULT_COLS,
    page_id: str = "",
    label: str | None = None,
    corrected: bool = False,
) -> list[RowFeature]:
    if not corrected:
        pre = preprocess_pair(ref, scan)
        ref, scan = pre.ref, pre.scan
    return grid_features(distortion_grid(ref, scan, n_r, n_c), kind, page_id, label)
