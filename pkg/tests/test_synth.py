import math

import numpy as np
import pytest
from scipy.spatial import cKDTree

from printsig import align, boxes, features, pipeline, raster, synth
from printsig.boxes import CharBox, PageBoxes, TextLine
from printsig.errors import ExcessiveSkew, PageOverflow
from printsig.synth import PrinterSignature, Sinusoid

from conftest import RASTER, SMALL


def test_single_character_page():
    spec = synth.PageSpec(n_lines=1, chars_per_line=1, justify=False)
    page = synth.make_reference(spec, 0)
    [b] = page.all_boxes()
    assert (b.x, b.y, b.h) == (spec.margins[0], spec.margins[1], spec.char_cell[1])


def test_full_page_counts():
    spec = synth.PageSpec(n_lines=30, chars_per_line=60, justify=False)
    page = synth.make_reference(spec, 1)
    assert len(page.all_boxes()) == 1800
    regrouped = boxes.group_lines(page.all_boxes())
    assert regrouped.n_lines == 30 and all(len(l) == 60 for l in regrouped.lines)


def test_reference_is_deterministic():
    a = boxes.emit_boxfile(synth.make_reference(SMALL, 5))
    assert a == boxes.emit_boxfile(synth.make_reference(SMALL, 5))
    assert a != boxes.emit_boxfile(synth.make_reference(SMALL, 6))


def test_justified_lines_are_filled():
    spec = synth.FONTS["serif"]
    page = synth.make_reference(spec, 4)
    lo, _ = spec.cpl_range
    longest_word = spec.word_len[1] * (spec.char_cell[0] * 1.15) + 0.5 * spec.char_cell[0]
    for line in page.lines:
        assert len(line) >= lo
        b = line.boxes[-1]
        assert b.x + b.w == pytest.approx(spec.margins[0] + spec.text_width)
        gaps = [q.x - (p.x + p.w) for p, q in zip(line.boxes, line.boxes[1:])]
        assert max(gaps) <= longest_word


def test_layout_stays_inside_margins():
    for spec in synth.FONTS.values():
        page = synth.make_reference(spec, 2)
        W, H = spec.page_size
        right = max(b.x + b.w for b in page.all_boxes())
        assert right <= W - spec.margins[0] + 1e-6
        assert min(b.x for b in page.all_boxes()) == spec.margins[0]


def test_overflowing_spec_rejected():
    with pytest.raises(PageOverflow):
        synth.PageSpec(n_lines=80)
    with pytest.raises(PageOverflow):
        synth.make_reference(synth.PageSpec(chars_per_line=120), 0)


def test_seed_derivation_is_stable():
    assert synth.derive_seed(0, "printer", 1) == synth.derive_seed(0, "printer", 1)
    assert synth.derive_seed(0, "printer", 1) != synth.derive_seed(0, "printer", 2)
    assert synth.derive_seed(3, "text", "serif", 0) == 2549029028


def test_signature_bounds_and_round_trip():
    for k in range(20):
        sig = PrinterSignature.random(f"P{k}", k, (10200, 13200))
        X, Y = np.meshgrid(np.linspace(0, 10200, 60), np.linspace(0, 13200, 80))
        assert np.abs(sig.fx(X, Y)).max() <= 10 and np.abs(sig.fy(X, Y)).max() <= 10
        assert np.abs(sig.sx(X, Y) - 1).max() <= 0.02 and np.abs(sig.sy(X, Y) - 1).max() <= 0.02
        assert all(t.fu <= 3 and t.fv <= 3 for t in sig.fx_terms + sig.fy_terms)
        assert PrinterSignature.from_dict(sig.to_dict()) == sig


def test_neutral_printer_is_identity(small_ref):
    out = synth.apply_printer(small_ref, PrinterSignature("Z", SMALL.page_size), 0.0)
    assert out.all_boxes() == small_ref.all_boxes()


def test_constant_shift_recovered_exactly(small_ref):
    sig = PrinterSignature("C", SMALL.page_size, fx_terms=(Sinusoid(5.0, 0.0, 0.0, math.pi / 2),))
    d = features.compute_distortions(align.match_pages(small_ref, synth.apply_printer(small_ref, sig)))
    assert np.allclose(d.values[:, 0], 5.0, rtol=0, atol=1e-9)
    assert np.allclose(d.values[:, 1], 0.0) and np.allclose(d.values[:, 2:], 1.0)


def test_sinusoidal_field_recovered_on_grid():
    spec = synth.FONTS["serif"]
    ref = synth.make_reference(spec, 3)
    sig = PrinterSignature("S", spec.page_size, fx_terms=(Sinusoid(3.0, 1.0, 0.0, 0.0),))
    grid = pipeline.distortion_grid(ref, synth.apply_printer(ref, sig))
    X, Y = grid.mesh()
    assert np.abs(grid.t_x - sig.fx(X, Y)).max() <= 0.5


def test_scale_field_recovered(small_ref):
    sig = PrinterSignature("S", SMALL.page_size, sx_terms=(Sinusoid(0.015, 0.5, 0.5, 0.3),))
    d = features.compute_distortions(align.match_pages(small_ref, synth.apply_printer(small_ref, sig)))
    assert np.allclose(d.values[:, 2], sig.sx(d.xy[:, 0], d.xy[:, 1]), rtol=1e-12)


def test_mishandling_identity_and_limit(small_ref):
    assert synth.apply_mishandling(small_ref, 0.0, (0, 0)).all_boxes() == small_ref.all_boxes()
    with pytest.raises(ExcessiveSkew):
        synth.apply_mishandling(small_ref, 3.5)


@pytest.mark.parametrize("skew, offset", [(1.5, (0, 0)), (0.0, (120, -80)), (-3.0, (200, 200)), (3.0, (-150, 60))])
def test_mishandling_undone_by_preprocessing(small_ref, skew, offset):
    base, _ = boxes.correct_page(small_ref)
    fixed, rep = boxes.correct_page(synth.apply_mishandling(small_ref, skew, offset))
    assert abs(math.degrees(rep.theta_m) - skew) <= 0.05
    a = np.array([b.lower_midpoint for b in base.all_boxes()])
    c = np.array([b.lower_midpoint for b in fixed.all_boxes()])
    assert np.abs(a - c).max() <= 1.0


def test_single_box_raster_hull():
    spec = RASTER
    for x, y, w, h in [(40.0, 50.0, 20.0, 30.0), (100.4, 80.6, 17.3, 25.8)]:
        page = PageBoxes((TextLine(1, (CharBox("a", x, y, w, h),)),), spec.dpi)
        img = raster.binarize(synth.rasterize(page, spec))
        [(bx, by, bw, bh)] = raster.component_boxes(img)
        assert abs(bx - x) <= 1 and abs(by - y) <= 1 and abs(bw - w) <= 1 and abs(bh - h) <= 1


def test_rendered_page_components_match_boxes():
    page = synth.make_reference(RASTER, 9)
    img = raster.binarize(synth.rasterize(page, RASTER, noise_sigma=3.0, seed=2))
    found = np.array(raster.component_boxes(img), dtype=float)
    truth = np.array([(b.x, b.y, b.w, b.h) for b in page.all_boxes()])
    assert len(found) == len(truth)
    _, k = cKDTree(found[:, :2]).query(truth[:, :2])
    assert len(set(k.tolist())) == len(truth)
    assert np.abs(found[k] - truth).max() <= 1


def test_empty_page_is_uniform():
    img = synth.rasterize(PageBoxes((), RASTER.dpi), RASTER)
    assert img.samples.min() == img.samples.max() == synth.PAPER


def test_specks_below_gamma_are_cleaned():
    page = synth.make_reference(RASTER, 10)
    clean = raster.binarize(synth.rasterize(page, RASTER))
    dirty = raster.binarize(synth.rasterize(page, RASTER, n_specks=50, seed=3))
    assert (dirty.bits & ~clean.bits).sum() >= 50
    assert raster.denoise(dirty, 20) == clean


def test_rasterize_rejects_off_page_boxes():
    page = PageBoxes((TextLine(1, (CharBox("a", 1190.0, 10.0, 30.0, 30.0),)),), RASTER.dpi)
    with pytest.raises(PageOverflow):
        synth.rasterize(page, RASTER)


def test_dataset_is_deterministic():
    kw = dict(n_printers=2, pages=1, fonts=("serif",), seed=4)
    _, a = synth.make_dataset(**kw)
    _, b = synth.make_dataset(**kw)
    assert [boxes.emit_boxfile(r.scan) for r in a] == [boxes.emit_boxfile(r.scan) for r in b]
    assert all(abs(r.skew_deg) <= 1.0 and max(map(abs, r.offset)) <= 200 for r in a)


def test_signatures_with_disjoint_frequencies_are_distinct():
    spec = synth.FONTS["serif"]
    W = spec.page_size
    sig_a = PrinterSignature("A", W, fx_terms=(Sinusoid(4.0, 1.0, 0.5, 0.2), Sinusoid(3.0, 2.0, 1.0, 1.0)))
    sig_b = PrinterSignature("B", W, fx_terms=(Sinusoid(4.0, 1.5, 0.0, 2.0), Sinusoid(3.0, 2.5, 2.0, 0.5)))
    per = {}
    for sig in (sig_a, sig_b):
        pages = []
        for p in range(3):
            ref = synth.make_reference(spec, 100 + p)
            scan = synth.apply_printer(ref, sig, 0.5, seed=synth.derive_seed(p, sig.id))
            pages.append(np.array([f.values for f in pipeline.page_features(ref, scan, "t_x", corrected=True)]))
        per[sig.id] = np.stack(pages)  # (pages, rows, cols)
    mu = {k: v.mean(axis=0) for k, v in per.items()}
    between = np.linalg.norm(mu["A"] - mu["B"], axis=1).mean()
    within = math.sqrt(np.mean([np.sum((v - mu[k]) ** 2, axis=2).mean() for k, v in per.items()]))
    assert between > 5 * within
