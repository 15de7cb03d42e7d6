import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import stats
from scipy.spatial.distance import directed_hausdorff

from printsig import raster, synth
from printsig.boxes import CharBox, group_lines, baseline_points
from printsig.errors import (
    CornerOutOfBounds,
    DegenerateHistogram,
    EmptyInput,
    ExcessiveSkew,
    InsufficientPoints,
    VerticalDegenerate,
)

from conftest import RASTER


def gray(a, dpi=1200):
    return raster.GrayRaster(np.asarray(a, dtype=np.uint16), dpi)


def binary(a, dpi=1200):
    return raster.BinaryRaster(np.asarray(a, dtype=bool), dpi)


def raster_theta(img: raster.BinaryRaster) -> float:
    """Skew of the first line measured from component boxes."""
    boxes = [CharBox("o", x, y, w, h) for x, y, w, h in raster.component_boxes(img)]
    page = group_lines(boxes, dpi=img.dpi)
    return raster.estimate_skew(baseline_points(page.lines[0])).theta_m


# -- binarize ------------------------------------------------------------

def test_two_level_image_splits_between_modes():
    a = np.array([[10, 200, 10], [200, 200, 10]])
    b = raster.binarize(gray(a))
    assert np.array_equal(b.bits, a == 10)


def test_uniform_page_has_no_threshold():
    with pytest.raises(DegenerateHistogram):
        raster.binarize(gray(np.full((4, 5), 200)))


def test_noisy_render_recovers_generating_modes():
    page = synth.make_reference(RASTER, 3)
    clean = synth.render_mask(page, RASTER.page_size)
    img = synth.rasterize(page, RASTER, noise_sigma=5.0, seed=1)
    agree = np.mean(raster.binarize(img).bits == clean)
    assert agree >= 0.999


def test_otsu_matches_brute_force_between_class_variance():
    rng = np.random.default_rng(0)
    s = np.concatenate([rng.normal(60, 10, 500), rng.normal(170, 20, 700)]).clip(0, 255).astype(int)
    t = raster.otsu_threshold(s)
    hist = np.bincount(s, minlength=256).astype(float)
    levels = np.arange(256)

    def between(th):  # foreground = values < th
        w0, w1 = hist[:th].sum(), hist[th:].sum()
        if w0 == 0 or w1 == 0:
            return 0.0
        m0 = (hist[:th] * levels[:th]).sum() / w0
        m1 = (hist[th:] * levels[th:]).sum() / w1
        return w0 * w1 * (m0 - m1) ** 2

    best = max(between(k) for k in range(1, 256))
    assert between(t) == pytest.approx(best, rel=1e-12)


def test_binarize_is_idempotent_on_two_valued_images():
    rng = np.random.default_rng(2)
    b = binary(rng.random((20, 30)) < 0.3)
    again = raster.binarize(b.to_gray())
    assert again == b


# -- denoise -------------------------------------------------------------

def test_small_blob_removed_large_blob_kept():
    a = np.zeros((20, 20), dtype=bool)
    a[1, 1:4] = True  # 3 px
    assert not raster.denoise(binary(a), 20).bits.any()
    b = np.zeros((20, 20), dtype=bool)
    b[5:10, 5:10] = True  # 25 px
    assert raster.denoise(binary(b), 20) == binary(b)


def test_diagonal_pixels_form_one_component():
    a = np.eye(25, dtype=bool)
    assert raster.denoise(binary(a), 20).bits.sum() == 25


def test_specks_are_removed_exactly():
    page = synth.make_reference(RASTER, 4)
    clean = synth.render_mask(page, RASTER.page_size)
    specks = synth.add_specks(clean, 100, np.random.default_rng(5))
    assert specks.sum() >= 100
    out = raster.denoise(binary(clean | specks, RASTER.dpi), 20)
    assert np.array_equal(out.bits, clean)


@settings(max_examples=40, deadline=None)
@given(st.integers(0, 2**32 - 1), st.integers(1, 12), st.integers(1, 12))
def test_denoise_idempotent_and_monotone(seed, g1, dg):
    a = binary(np.random.default_rng(seed).random((24, 24)) < 0.35)
    once = raster.denoise(a, g1)
    assert raster.denoise(once, g1) == once
    coarser = raster.denoise(a, g1 + dg)
    assert not (coarser.bits & ~once.bits).any()
    assert not (once.bits & ~a.bits).any()


# -- estimate_skew -------------------------------------------------------

@pytest.mark.parametrize(
    "pts, m",
    [([(0, 0), (1, 1), (2, 2)], 1.0), ([(0, 1), (2, 1), (5, 1)], 0.0), ([(0, 0), (1, 0), (2, 1)], 0.5)],
)
def test_skew_examples(pts, m):
    est = raster.estimate_skew(pts)
    assert est.slope_m == pytest.approx(m, abs=1e-15)
    assert est.theta_m == math.atan(m)
    assert est.n_points == len(pts)


def test_skew_errors():
    with pytest.raises(InsufficientPoints):
        raster.estimate_skew([(1, 1)])
    with pytest.raises(VerticalDegenerate):
        raster.estimate_skew([(3, 1), (3, 5), (3, 9)])


@settings(max_examples=60, deadline=None)
@given(
    st.floats(-2, 2),
    st.floats(-1e3, 1e3),
    st.lists(st.floats(0, 1e4), min_size=2, max_size=40, unique=True),
)
def test_skew_exact_on_collinear_points(m, b, xs):
    if max(xs) - min(xs) < 1.0:
        return
    pts = [(x, m * x + b) for x in xs]
    est = raster.estimate_skew(pts)
    assert est.slope_m == pytest.approx(m, rel=1e-12, abs=1e-12)


def test_skew_matches_linear_regression_oracle():
    rng = np.random.default_rng(9)
    for _ in range(50):
        n = int(rng.integers(2, 60))
        x = rng.uniform(0, 5000, n)
        y = rng.uniform(-3, 3) * x + rng.normal(0, 20, n)
        est = raster.estimate_skew(list(zip(x, y)))
        ref = stats.linregress(x, y).slope
        assert est.slope_m == pytest.approx(ref, rel=1e-9, abs=1e-12)


# -- rotate_raster ---------------------------------------------------------

def test_zero_rotation_is_identity():
    a = binary(np.random.default_rng(1).random((31, 40)) < 0.2)
    assert raster.rotate_raster(a, 0.0) == a


def test_rotate_then_unrotate_line():
    a = np.zeros((200, 300), dtype=bool)
    a[100, 40:260] = True
    theta = math.radians(2.0)
    back = raster.rotate_raster(raster.rotate_raster(binary(a), theta), -theta)
    p, q = np.argwhere(a), np.argwhere(back.bits)
    d = max(directed_hausdorff(p, q)[0], directed_hausdorff(q, p)[0])
    assert d <= 2.0


def test_rotation_direction_is_anticlockwise():
    # y grows downward, so anticlockwise lifts the right end of a line
    a = np.zeros((101, 101), dtype=bool)
    a[50, 10:91] = True
    r = raster.rotate_raster(binary(a), math.radians(10)).bits
    ys, xs = np.nonzero(r)
    assert ys[xs.argmax()] < ys[xs.argmin()]


def test_excessive_rotation_rejected():
    with pytest.raises(ExcessiveSkew):
        raster.rotate_raster(binary(np.ones((3, 3))), math.pi / 4)


def test_skewed_page_straightened():
    page = synth.make_reference(RASTER, 8)
    clean = binary(synth.render_mask(page, RASTER.page_size), RASTER.dpi)
    skewed = raster.rotate_raster(clean, -math.radians(1.5))
    theta = raster_theta(skewed)
    assert abs(math.degrees(theta) - 1.5) <= 0.1
    straight = raster.rotate_raster(skewed, theta)
    # one pixel of baseline quantization over a ~900 px line is ~0.06 deg
    assert abs(math.degrees(raster_theta(straight))) <= 0.1


# -- frame corner and translation -------------------------------------------

def test_frame_corner_examples():
    fc = raster.frame_corner([100], [50])
    assert np.array_equal(fc.h_line, [0, 1, -100])
    assert np.array_equal(fc.v_line, [1, 0, -50])
    assert fc.corner == (50.0, 100.0)
    assert raster.frame_corner([100, 102, 300], [50, 50, 400]).corner == (50.0, 102.0)
    assert raster.frame_corner([1, 2, 3, 10], [4, 6]).corner == (5.0, 2.5)


def test_frame_corner_empty():
    with pytest.raises(EmptyInput):
        raster.frame_corner([], [1.0])
    with pytest.raises(EmptyInput):
        raster.frame_corner([1.0], [])


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-1e4, 1e4), min_size=1, max_size=15), st.lists(st.floats(-1e4, 1e4), min_size=1, max_size=15),
       st.randoms(use_true_random=False))
def test_frame_corner_permutation_invariant(ys, xs, rnd):
    a = raster.frame_corner(ys, xs).corner
    ys2, xs2 = list(ys), list(xs)
    rnd.shuffle(ys2)
    rnd.shuffle(xs2)
    assert raster.frame_corner(ys2, xs2).corner == a


def test_frame_corner_with_jittered_lines():
    rng = np.random.default_rng(4)
    ys = 300 + rng.uniform(-1, 1, 30)
    xs = 120 + rng.uniform(-1, 1, 20)
    cx, cy = raster.frame_corner(ys, xs).corner
    assert abs(cx - 120) <= 1 and abs(cy - 300) <= 1


def test_translate_examples():
    a = np.zeros((200, 200), dtype=bool)
    a[110, 60] = True
    out = raster.translate_raster(binary(a), (50, 100)).bits
    assert out[10, 10] and out.sum() == 1
    assert raster.translate_raster(binary(a), (0, 0)) == binary(a)
    with pytest.raises(CornerOutOfBounds):
        raster.translate_raster(binary(a), (250, 10))


# -- file round trip ---------------------------------------------------------

@pytest.mark.parametrize("eight_bit", [False, True])
def test_png_round_trip(tmp_path, eight_bit):
    rng = np.random.default_rng(0)
    top = 255 if eight_bit else 65535
    img = gray(rng.integers(0, top + 1, (13, 17)), dpi=300)
    path = tmp_path / "page.png"
    raster.write_raster(path, img, eight_bit=eight_bit)
    back = raster.read_raster(path)
    assert np.array_equal(back.samples, img.samples)
    assert back.dpi == pytest.approx(300, abs=0.01)


def test_reference_and_scan_rasters_register_identically():
    from printsig.boxes import page_frame_corner

    def corner(img):
        boxes = [CharBox("o", x, y, w, h) for x, y, w, h in raster.component_boxes(img)]
        return page_frame_corner(group_lines(boxes)).corner

    page = synth.make_reference(RASTER, 6)
    ref = binary(synth.render_mask(page, RASTER.page_size), RASTER.dpi)
    moved = synth.apply_mishandling(page, 0.0, (37.0, -12.0))
    scan = binary(synth.render_mask(moved, RASTER.page_size), RASTER.dpi)
    a = raster.translate_raster(ref, corner(ref))
    b = raster.translate_raster(scan, corner(scan))
    assert a == b
    assert corner(a) == corner(b)
