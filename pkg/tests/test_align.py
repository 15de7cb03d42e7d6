import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from printsig import align, boxes
from printsig.boxes import CharBox, PageBoxes, TextLine
from printsig.errors import NoMatches

from conftest import dp_lcs_length, line_of


def brute_force_smallest(a, b):
    """Lexicographically smallest ref-index sequence among all longest
    common subsequences, found by enumeration."""
    for k in range(min(len(a), len(b)), 0, -1):
        for ra in itertools.combinations(range(len(a)), k):
            sub = [a[i] for i in ra]
            it = iter(range(len(b)))
            # greedy earliest embedding decides whether sub is a subsequence of b
            if all(any(b[j] == c for j in it) for c in sub):
                return list(ra)
    return []


def test_identical_strings():
    assert align.lcs_match_line(line_of("abc"), line_of("abc")) == [(1, 1), (2, 2), (3, 3)]


def test_substitution_skipped():
    pairs = align.lcs_match_line(line_of("abcd"), line_of("abxd"))
    assert pairs == [(1, 1), (2, 2), (4, 4)]


def test_kitten_sitting():
    pairs = align.lcs_match_line(line_of("kitten"), line_of("sitting"))
    assert len(pairs) == 4
    assert "".join("kitten"[i - 1] for i, _ in pairs) == "ittn"


def test_no_shared_glyph():
    assert align.lcs_match_line(line_of("abc"), line_of("xyz")) == []


@settings(max_examples=300, deadline=None)
@given(st.text("abc", max_size=8), st.text("abc", max_size=8))
def test_matches_dp_and_tie_break(a, b):
    pairs = align.lcs_pairs(a, b)
    assert len(pairs) == dp_lcs_length(a, b)
    assert all(a[i] == b[j] for i, j in pairs)
    ra = [i for i, _ in pairs]
    sb = [j for _, j in pairs]
    assert ra == sorted(set(ra)) and sb == sorted(set(sb))
    assert ra == brute_force_smallest(a, b)


def _page(lines, tag):
    return PageBoxes(
        tuple(TextLine(i + 1, tuple(CharBox(g, 10.0 * k, 100.0 * i, 8.0, 12.0) for k, g in enumerate(t)))
              for i, t in enumerate(lines)),
        source_tag=tag,
    )


def test_identical_pages_match_fully(small_ref):
    m = align.match_pages(small_ref, small_ref)
    assert list(m.per_line_counts) == [len(l) for l in small_ref.lines]
    assert m.total == len(small_ref.all_boxes())


def test_dropout_loses_one_per_line(small_ref):
    rng = np.random.default_rng(1)
    kept = []
    for line in small_ref.lines:
        drop = int(rng.integers(len(line)))
        kept.extend(b for k, b in enumerate(line.boxes) if k != drop)
    scan = boxes.group_lines(kept, page_size=small_ref.page_size)
    m = align.match_pages(small_ref, scan)
    assert list(m.per_line_counts) == [len(l) - 1 for l in small_ref.lines]


def test_disjoint_pages():
    with pytest.raises(NoMatches):
        align.match_pages(_page(["abc", "def"], "reference"), _page(["xyz"], "scanned"))


def test_pair_set_invariants():
    ref = _page(["the quick", "brown fox", "jumps"], "reference")
    scan = _page(["teh quick", "brwn fox"], "scanned")
    m = align.match_pages(ref, scan)
    assert m.n_lines == 2
    assert len(m.pairs) == sum(m.per_line_counts)
    for p in m.pairs:
        assert p.ref_box.glyph == p.scan_box.glyph
    for i in (1, 2):
        row = [p for p in m.pairs if p.line == i]
        rx = [p.ref_box.x for p in row]
        sx = [p.scan_box.x for p in row]
        assert rx == sorted(set(rx)) and sx == sorted(set(sx))
    swapped = align.match_pages(scan, ref)
    assert swapped.per_line_counts == m.per_line_counts
    assert "line" in m.debug_report(ref, scan)
