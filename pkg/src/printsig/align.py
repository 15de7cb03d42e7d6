"""Line-wise character correspondence between a reference page and a scan.

Glyph strings of each line pair are aligned with a longest common
subsequence, so characters the OCR dropped or misread on either side are
skipped instead of shifting every later match.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .boxes import CharBox, PageBoxes, TextLine
from .errors import EmptyInput, NoMatches


@dataclass(frozen=True)
class MatchedPair:
    line: int  # 1-based line index i
    pos: int  # 1-based position j within the matched line
    ref_box: CharBox
    scan_box: CharBox


@dataclass(frozen=True)
class MatchedPairSet:
    pairs: tuple[MatchedPair, ...]
    n_lines: int
    per_line_counts: tuple[int, ...]  # J_i for i = 1..n_lines

    @property
    def total(self) -> int:
        return len(self.pairs)

    def debug_report(self, ref: PageBoxes | None = None, scan: PageBoxes | None = None) -> str:
        rows = ["line\tmatched\tref_unmatched\tscan_unmatched"]
        for i, j in enumerate(self.per_line_counts, start=1):
            r = len(ref.lines[i - 1]) - j if ref is not None else ""
            s = len(scan.lines[i - 1]) - j if scan is not None else ""
            rows.append(f"{i}\t{j}\t{r}\t{s}")
        rows.append(f"total\t{self.total}\t\t")
        return "\n".join(rows) + "\n"


def lcs_suffix_table(a: Sequence, b: Sequence) -> list[list[int]]:
    """``L[i][j]`` = LCS length of ``a[i:]`` and ``b[j:]``."""
    n, m = len(a), len(b)
    L = [[0] * (m + 1) for _ in range(n + 1)]
    for i in range(n - 1, -1, -1):
        ai = a[i]
        row, below = L[i], L[i + 1]
        for j in range(m - 1, -1, -1):
            if ai == b[j]:
                row[j] = below[j + 1] + 1
            else:
                row[j] = below[j] if below[j] >= row[j + 1] else row[j + 1]
    return L


def lcs_pairs(a: Sequence, b: Sequence) -> list[tuple[int, int]]:
    """0-based index pairs of one LCS of ``a`` and ``b``.

    Among all maximum-length alignments, returns the one whose sequence of
    ``a`` indices is lexicographically smallest, pairing each with the
    earliest feasible ``b`` index.
    """
    L = lcs_suffix_table(a, b)
    out = []
    i, j = 0, 0
    need = L[0][0]
    n, m = len(a), len(b)
    while need > 0:
        found = False
        for ii in range(i, n):
            if L[ii][j] < need:
                break
            ai = a[ii]
            for jj in range(j, m):
                if L[ii][jj] < need:
                    break
                if b[jj] == ai and L[ii + 1][jj + 1] == need - 1:
                    out.append((ii, jj))
                    i, j = ii + 1, jj + 1
                    need -= 1
                    found = True
                    break
            if found:
                break
        assert found, "LCS reconstruction failed"
    return out


def lcs_match_line(ref_line: TextLine, scan_line: TextLine) -> list[tuple[int, int]]:
    if len(ref_line.boxes) == 0 or len(scan_line.boxes) == 0:
        raise EmptyInput("cannot match an empty line")
    # 1-based positions, like line indices
    return [(p + 1, q + 1) for p, q in lcs_pairs(ref_line.text, scan_line.text)]


def match_pages(ref: PageBoxes, scan: PageBoxes) -> MatchedPairSet:
    """Pair lines by position from the top and LCS-match each pair."""
    if ref.n_lines == 0 or scan.n_lines == 0:
        raise EmptyInput("both pages need at least one line")
    n = min(ref.n_lines, scan.n_lines)
    pairs = []
    counts = []
    for i in range(n):
        rl, sl = ref.lines[i], scan.lines[i]
        matched = lcs_match_line(rl, sl)
        for j, (p, q) in enumerate(matched, start=1):
            pairs.append(MatchedPair(i + 1, j, rl.boxes[p - 1], sl.boxes[q - 1]))
        counts.append(len(matched))
    if not pairs:
        raise NoMatches("reference and scan share no characters on any line")
    return MatchedPairSet(tuple(pairs), n, tuple(counts))
