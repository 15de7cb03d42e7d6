"""Projective-transformation baseline features.

A homography with its last entry fixed to 1 is fitted by linear least
squares between reference locations and their scanned positions; the four
entries of its linear block form a page-level feature vector.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import DegenerateConfiguration, InsufficientPoints
from .features import DistortionGrid, RowFeature

PTMP_INDICES = (0, 1, 3, 4)  # a1, a2, a4, a5


@dataclass(frozen=True)
class ProjectiveFit:
    coeffs: tuple[float, ...]  # a1..a8
    residual_rms: float

    def matrix(self) -> np.ndarray:
        a = self.coeffs
        return np.array([[a[0], a[1], a[2]], [a[3], a[4], a[5]], [a[6], a[7], 1.0]])

    def apply(self, pts: np.ndarray) -> np.ndarray:
        return apply_homography(self.matrix(), pts)


@dataclass(frozen=True)
class PtmpFeature:
    page_id: str
    values: tuple[float, float, float, float]
    printer_label: str | None = None

    def as_row(self) -> RowFeature:
        return RowFeature(self.page_id, 1, "ptmp", np.array(self.values), self.printer_label)


def apply_homography(H: np.ndarray, pts: np.ndarray) -> np.ndarray:
    pts = np.asarray(pts, dtype=np.float64)
    ph = np.column_stack([pts, np.ones(len(pts))]) @ H.T
    return ph[:, :2] / ph[:, 2:3]


def _normalizer(pts: np.ndarray) -> np.ndarray:
    """Similarity taking ``pts`` to zero mean and unit RMS distance."""
    mu = pts.mean(axis=0)
    rms = np.sqrt(((pts - mu) ** 2).sum(axis=1).mean())
    if rms == 0:
        raise DegenerateConfiguration("all points coincide")
    s = 1.0 / rms
    return np.array([[s, 0.0, -s * mu[0]], [0.0, s, -s * mu[1]], [0.0, 0.0, 1.0]])


def _solve(src: np.ndarray, dst: np.ndarray) -> np.ndarray:
    x, y = src[:, 0], src[:, 1]
    u, v = dst[:, 0], dst[:, 1]
    n = len(src)
    z = np.zeros(n)
    o = np.ones(n)
    A = np.empty((2 * n, 8))
    A[0::2] = np.column_stack([x, y, o, z, z, z, -x * u, -y * u])
    A[1::2] = np.column_stack([z, z, z, x, y, o, -x * v, -y * v])
    rhs = np.empty(2 * n)
    rhs[0::2] = u
    rhs[1::2] = v
    sol, _, rank, sv = np.linalg.lstsq(A, rhs, rcond=None)
    if rank < 8 or sv[-1] <= 1e-10 * sv[0]:
        raise DegenerateConfiguration("point configuration does not determine a homography")
    return np.append(sol, 1.0).reshape(3, 3)


def fit_projective(ref_pts, scan_pts, normalize: bool = True) -> ProjectiveFit:
    """Least-squares homography ``ref -> scan`` with the last entry fixed at 1."""
    src = np.asarray(ref_pts, dtype=np.float64).reshape(-1, 2)
    dst = np.asarray(scan_pts, dtype=np.float64).reshape(-1, 2)
    if len(src) != len(dst):
        raise ValueError("point lists differ in length")
    if len(src) < 4:
        raise InsufficientPoints(f"need at least 4 point pairs, got {len(src)}")
    if normalize:
        Ts, Td = _normalizer(src), _normalizer(dst)
        Hn = _solve(apply_homography(Ts, src), apply_homography(Td, dst))
        H = np.linalg.inv(Td) @ Hn @ Ts
    else:
        H = _solve(src, dst)
    if H[2, 2] == 0:
        raise DegenerateConfiguration("homography maps the origin to infinity")
    H = H / H[2, 2]
    resid = apply_homography(H, src) - dst
    rms = float(np.sqrt((resid**2).sum(axis=1).mean()))
    a = H.ravel()
    return ProjectiveFit(tuple(float(v) for v in a[:8]), rms)


def ptmp_features(grid: DistortionGrid, page_id: str = "", label: str | None = None) -> PtmpFeature:
    """Fit grid locations to their scanned estimates ``(x - t_x, y - t_y)``
    and keep the linear block of the homography."""
    X, Y = grid.mesh()
    src = np.column_stack([X.ravel(), Y.ravel()])
    dst = np.column_stack([(X - grid.t_x).ravel(), (Y - grid.t_y).ravel()])
    fit = fit_projective(src, dst)
    vals = tuple(fit.coeffs[k] for k in PTMP_INDICES)
    return PtmpFeature(page_id, vals, label)
