import cvxopt
import numpy as np
import pytest

from printsig import synth
from printsig.boxes import CharBox, TextLine


# A small page keeps box-level tests fast while exercising the same layout code.
SMALL = synth.PageSpec(n_lines=8, chars_per_line=(30, 34), margins=(600.0, 600.0), page_in=(5.0, 4.0), name="small")

# Low-dpi page for raster tests; all glyphs sit on the baseline.
RASTER = synth.PageSpec(
    n_lines=5,
    chars_per_line=(18, 22),
    glyph_alphabet="abcdefhikmnorstuvwxz",
    char_cell=(24.0, 32.0),
    margins=(150.0, 150.0),
    dpi=300.0,
    page_in=(4.0, 3.0),
    name="raster",
)


def line_of(text: str, y: float = 0.0) -> TextLine:
    return TextLine(1, [CharBox(g, float(k), y, 1.0, 1.0) for k, g in enumerate(text)])


def dp_lcs_length(a, b) -> int:
    """Textbook forward LCS table."""
    m, n = len(a), len(b)
    T = np.zeros((m + 1, n + 1), dtype=int)
    for i in range(1, m + 1):
        for j in range(1, n + 1):
            T[i, j] = T[i - 1, j - 1] + 1 if a[i - 1] == b[j - 1] else max(T[i - 1, j], T[i, j - 1])
    return int(T[m, n])


cvxopt.solvers.options.update(show_progress=False, abstol=1e-12, reltol=1e-12, feastol=1e-12)


def qp_dual(K, y, C):
    """Brute-force dual solution and bias from an interior-point QP solver."""
    n = len(y)
    P = cvxopt.matrix(np.outer(y, y) * K)
    q = cvxopt.matrix(-np.ones(n))
    G = cvxopt.matrix(np.vstack([-np.eye(n), np.eye(n)]))
    h = cvxopt.matrix(np.r_[np.zeros(n), C * np.ones(n)])
    A = cvxopt.matrix(y[None, :].astype(float))
    a = np.array(cvxopt.solvers.qp(P, q, G, h, A, cvxopt.matrix(0.0))["x"]).ravel()
    a = np.clip(a, 0, C)
    f = K @ (a * y)
    eps = 1e-6 * C
    free = (a > eps) & (a < C - eps)
    if free.any():
        rho = float(np.mean((f - y)[free]))
    else:
        # bias interval from the bound constraints; take its midpoint
        yg = y * (y * f - 1)
        up = ((a >= C - eps) & (y < 0)) | ((a <= eps) & (y > 0))
        low = ((a >= C - eps) & (y > 0)) | ((a <= eps) & (y < 0))
        rho = float((yg[up].min() + yg[low].max()) / 2)
    return a, rho


@pytest.fixture(scope="session")
def small_ref():
    return synth.make_reference(SMALL, 7)


@pytest.fixture(scope="session")
def small_printer():
    return synth.PrinterSignature.random("PX", 11, SMALL.page_size)
