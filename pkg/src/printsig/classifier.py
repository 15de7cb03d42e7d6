"""Multi-class soft-margin SVM with a Gaussian kernel.

Binary problems are solved in the dual with sequential minimal
optimization (maximal-violating-pair selection with second-order
information for the partner index). Classes are combined one-vs-one; the
row score of a class is its share of the pairwise votes. Pages are labelled
by majority vote over their rows.
"""

from __future__ import annotations

import itertools
import json
import math
from collections import Counter, defaultdict
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Iterable, Mapping, Sequence

import numpy as np

from .errors import DataError, DimensionMismatch, EmptyInput, SingleClass
from .features import RowFeature

MODEL_FORMAT = "printsig-model"
MODEL_VERSION = 1
KKT_TOL = 1e-3  # required KKT tolerance
# stopping gap actually used; well inside KKT_TOL so decision values are
# accurate to ~1e-5 rather than ~1e-3
STOP_GAP = 1e-5
TAU = 1e-12
DEFAULT_C = 10.0
# auto-tune grid: powers of 4 on a 2^k ladder
C_GRID = tuple(2.0**k for k in range(-3, 8, 2))
GAMMA_GRID = tuple(2.0**k for k in range(-15, 4, 2))
CV_FOLDS = 3


def sq_dists(A: np.ndarray, B: np.ndarray) -> np.ndarray:
    aa = np.einsum("ij,ij->i", A, A)
    bb = np.einsum("ij,ij->i", B, B)
    d = aa[:, None] + bb[None, :] - 2.0 * (A @ B.T)
    np.maximum(d, 0.0, out=d)
    return d


def rbf_kernel(A: np.ndarray, B: np.ndarray, gamma: float) -> np.ndarray:
    return np.exp(-gamma * sq_dists(A, B))


def smo_solve(K: np.ndarray, y: np.ndarray, C: float, tol: float = STOP_GAP, max_iter: int | None = None):
    """Solve the C-SVM dual for a precomputed kernel matrix.

    ``y`` holds +1/-1. Returns ``(alpha, rho, n_iter)``; the decision
    function is ``sum_t alpha_t y_t K(x_t, x) - rho``.
    """
    y = np.asarray(y, dtype=np.float64)
    n = len(y)
    K = np.asarray(K, dtype=np.float64)
    QD = np.diag(K).copy()
    alpha = np.zeros(n)
    G = -np.ones(n)  # gradient of 0.5 a'Qa - e'a
    pos = y > 0
    neg = ~pos
    if max_iter is None:
        max_iter = max(10_000_000, 100 * n)
    it = 0
    while it < max_iter:
        yG = -y * G
        at_upper = alpha >= C
        at_lower = alpha <= 0
        up = (pos & ~at_upper) | (neg & ~at_lower)
        low = (pos & ~at_lower) | (neg & ~at_upper)
        if not up.any() or not low.any():
            break
        i = int(np.argmax(np.where(up, yG, -np.inf)))
        g_max = yG[i]
        g_min = float(np.where(low, yG, np.inf).min())
        if g_max - g_min < tol:
            break
        Ki = K[i]
        cand = low & (yG < g_max)
        b = g_max - yG
        a = QD[i] + QD - 2.0 * Ki
        a = np.where(a > 0, a, TAU)
        obj = np.where(cand, -(b * b) / a, np.inf)
        j = int(np.argmin(obj))
        it += 1

        Kj = K[j]
        yi, yj = y[i], y[j]
        ai_old, aj_old = alpha[i], alpha[j]
        quad = QD[i] + QD[j] - 2.0 * Ki[j]
        if quad <= 0:
            quad = TAU
        if yi != yj:
            delta = (-G[i] - G[j]) / quad
            diff = ai_old - aj_old
            ai = ai_old + delta
            aj = aj_old + delta
            if diff > 0:
                if aj < 0:
                    aj, ai = 0.0, diff
            else:
                if ai < 0:
                    ai, aj = 0.0, -diff
            if diff > 0:
                if ai > C:
                    ai, aj = C, C - diff
            else:
                if aj > C:
                    aj, ai = C, C + diff
        else:
            delta = (G[i] - G[j]) / quad
            total = ai_old + aj_old
            ai = ai_old - delta
            aj = aj_old + delta
            if total > C:
                if ai > C:
                    ai, aj = C, total - C
            else:
                if aj < 0:
                    aj, ai = 0.0, total
            if total > C:
                if aj > C:
                    aj, ai = C, total - C
            else:
                if ai < 0:
                    ai, aj = 0.0, total
        alpha[i], alpha[j] = ai, aj
        # Q[:, t] = y * y_t * K[:, t]
        G += y * (yi * (ai - ai_old) * Ki + yj * (aj - aj_old) * Kj)

    return alpha, _rho(alpha, y, G, C), it


def _rho(alpha: np.ndarray, y: np.ndarray, G: np.ndarray, C: float) -> float:
    yG = y * G
    free = (alpha > 0) & (alpha < C)
    if free.any():
        return float(yG[free].mean())
    at_upper = alpha >= C
    pos = y > 0
    ub_mask = (at_upper & ~pos) | (~at_upper & pos)
    lb_mask = ~ub_mask
    ub = yG[ub_mask].min() if ub_mask.any() else np.inf
    lb = yG[lb_mask].max() if lb_mask.any() else -np.inf
    return float((ub + lb) / 2.0)


@dataclass
class BinarySVM:
    """Decision function of one pairwise problem: positive favours ``first``."""

    first: int
    second: int
    support: np.ndarray  # (n_sv, dim)
    coef: np.ndarray  # alpha_t * y_t
    rho: float

    def decision(self, X: np.ndarray, gamma: float) -> np.ndarray:
        if len(self.coef) == 0:
            return np.full(len(X), -self.rho)
        return rbf_kernel(X, self.support, gamma) @ self.coef - self.rho


def train_binary(X: np.ndarray, y: np.ndarray, C: float, gamma: float, tol: float = STOP_GAP) -> BinarySVM:
    """Two-class helper; ``y`` holds +1 / -1."""
    alpha, rho, _ = smo_solve(rbf_kernel(X, X, gamma), y, C, tol)
    sv = alpha > 0
    return BinarySVM(0, 1, X[sv].copy(), (alpha * y)[sv], rho)


@dataclass
class PrinterModel:
    labels: tuple[str, ...]
    kernel_gamma: float
    cost_C: float
    machines: list[BinarySVM]
    kind: str
    dim: int
    seed: int = 0
    center: np.ndarray | None = None  # optional per-dimension standardization
    scale: np.ndarray | None = None
    tuning: dict = field(default_factory=dict)

    @property
    def n_classes(self) -> int:
        return len(self.labels)

    def prepare(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.ndim == 1:
            X = X[None, :]
        if X.shape[1] != self.dim:
            raise DimensionMismatch(f"model expects dimension {self.dim}, got {X.shape[1]}")
        if self.center is not None:
            X = (X - self.center) / self.scale
        return X

    def votes(self, X: np.ndarray) -> np.ndarray:
        X = self.prepare(X)
        v = np.zeros((len(X), self.n_classes))
        for m in self.machines:
            d = m.decision(X, self.kernel_gamma)
            v[:, m.first] += d > 0
            v[:, m.second] += d <= 0
        return v

    def scores(self, X: np.ndarray) -> np.ndarray:
        n_pairs = self.n_classes * (self.n_classes - 1) / 2
        return self.votes(X) / n_pairs

    def predict_indices(self, X: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
        s = self.scores(X)
        return np.argmax(s, axis=1), s  # argmax picks the lowest index on ties

    # -- serialization ---------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "format": MODEL_FORMAT,
            "version": MODEL_VERSION,
            "kernel": "rbf",
            "labels": list(self.labels),
            "C": self.cost_C,
            "gamma": self.kernel_gamma,
            "norm_meta": {
                "kind": self.kind,
                "dim": self.dim,
                "center": None if self.center is None else self.center.tolist(),
                "scale": None if self.scale is None else self.scale.tolist(),
            },
            "seed": self.seed,
            "tuning": self.tuning,
            "pairs": [
                {
                    "first": m.first,
                    "second": m.second,
                    "rho": m.rho,
                    "coef": m.coef.tolist(),
                    "support": m.support.tolist(),
                }
                for m in self.machines
            ],
        }

    @classmethod
    def from_dict(cls, d: Mapping) -> "PrinterModel":
        if d.get("format") != MODEL_FORMAT:
            raise DataError("not a printer model file")
        if d.get("version") != MODEL_VERSION:
            raise DataError(f"unsupported model version {d.get('version')}")
        meta = d["norm_meta"]
        dim = int(meta["dim"])
        machines = []
        for p in d["pairs"]:
            sup = np.array(p["support"], dtype=np.float64).reshape(-1, dim)
            machines.append(BinarySVM(p["first"], p["second"], sup, np.array(p["coef"], dtype=np.float64), p["rho"]))
        arr = lambda v: None if v is None else np.array(v, dtype=np.float64)  # noqa: E731
        return cls(
            labels=tuple(d["labels"]),
            kernel_gamma=float(d["gamma"]),
            cost_C=float(d["C"]),
            machines=machines,
            kind=meta["kind"],
            dim=dim,
            seed=int(d.get("seed", 0)),
            center=arr(meta.get("center")),
            scale=arr(meta.get("scale")),
            tuning=dict(d.get("tuning", {})),
        )

    def dumps(self) -> str:
        return json.dumps(self.to_dict(), indent=1) + "\n"

    @classmethod
    def loads(cls, text: str) -> "PrinterModel":
        try:
            return cls.from_dict(json.loads(text))
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            raise DataError(f"malformed model file: {exc}") from None

    def save(self, path: str | Path) -> None:
        Path(path).write_text(self.dumps(), encoding="utf-8")

    @classmethod
    def load(cls, path: str | Path) -> "PrinterModel":
        return cls.loads(Path(path).read_text(encoding="utf-8"))


def _stack(features: Sequence[RowFeature]) -> tuple[np.ndarray, list]:
    if not features:
        raise EmptyInput("no feature vectors")
    dims = {f.dim for f in features}
    if len(dims) != 1:
        raise DimensionMismatch(f"feature vectors have mixed dimensions {sorted(dims)}")
    return np.vstack([f.values for f in features]).astype(np.float64), [f.printer_label for f in features]


def scale_gamma(X: np.ndarray) -> float:
    """Default kernel width: 1 / (dim * variance of all feature values)."""
    var = float(X.var())
    return 1.0 / (X.shape[1] * var) if var > 0 else 1.0


def _fit_ovo(X: np.ndarray, yi: np.ndarray, n_classes: int, C: float, gamma: float, D: np.ndarray | None = None):
    if D is None:
        D = sq_dists(X, X)
    machines = []
    for a, b in itertools.combinations(range(n_classes), 2):
        idx = np.flatnonzero((yi == a) | (yi == b))
        yy = np.where(yi[idx] == a, 1.0, -1.0)
        K = np.exp(-gamma * D[np.ix_(idx, idx)])
        alpha, rho, _ = smo_solve(K, yy, C)
        sv = alpha > 0
        machines.append(BinarySVM(a, b, X[idx[sv]].copy(), (alpha * yy)[sv], rho))
    return machines


def _cv_folds(yi: np.ndarray, groups: Sequence[str], k: int, seed: int) -> np.ndarray:
    """Fold id per sample; whole pages stay in one fold, balanced per class."""
    rng = np.random.default_rng(seed)
    fold = np.empty(len(yi), dtype=np.int64)
    for c in np.unique(yi):
        idx = np.flatnonzero(yi == c)
        pages = sorted({groups[t] for t in idx})
        if len(pages) >= k:
            perm = rng.permutation(len(pages))
            assign = {pages[p]: r % k for r, p in enumerate(perm)}
            for t in idx:
                fold[t] = assign[groups[t]]
        else:
            perm = rng.permutation(len(idx))
            fold[idx[perm]] = np.arange(len(idx)) % k
    return fold


def auto_tune(
    X: np.ndarray, yi: np.ndarray, n_classes: int, groups: Sequence[str], seed: int = 0, folds: int = CV_FOLDS
) -> tuple[float, float, dict]:
    """Grid search (C, gamma) by k-fold cross-validated row accuracy.

    The first grid point (smallest C, then smallest gamma) wins ties.
    """
    fold = _cv_folds(yi, groups, folds, seed)
    D = sq_dists(X, X)
    best = (-1.0, None, None)
    table = []
    for C in C_GRID:
        for gamma in GAMMA_GRID:
            correct = 0
            for f in range(folds):
                tr = np.flatnonzero(fold != f)
                te = np.flatnonzero(fold == f)
                if len(te) == 0 or len(np.unique(yi[tr])) < n_classes:
                    continue
                ms = _fit_ovo(X[tr], yi[tr], n_classes, C, gamma, D[np.ix_(tr, tr)])
                m = PrinterModel(tuple(range(n_classes)), gamma, C, ms, "", X.shape[1])
                pred, _ = m.predict_indices(X[te])
                correct += int((pred == yi[te]).sum())
            acc = correct / len(yi)
            table.append([C, gamma, acc])
            if acc > best[0]:
                best = (acc, C, gamma)
    return best[1], best[2], {"cv_folds": folds, "cv_accuracy": best[0], "grid": table}


def train(
    features: Sequence[RowFeature],
    C: float | None = None,
    gamma: float | str | None = None,
    auto: bool = False,
    seed: int = 0,
    standardize: bool = False,
) -> PrinterModel:
    """Fit a one-vs-one RBF SVM on labelled feature vectors.

    ``gamma=None`` or ``"scale"`` uses :func:`scale_gamma`; ``auto=True``
    grid-searches both parameters. ``standardize`` z-scores each dimension
    with training statistics (used for the page-level PTMP features).
    """
    X, labels = _stack(features)
    if any(l is None for l in labels):
        raise DataError("training features must all carry a printer label")
    table = tuple(sorted(set(labels)))
    if len(table) < 2:
        raise SingleClass(f"need at least 2 printers, got {list(table)}")
    index = {l: k for k, l in enumerate(table)}
    yi = np.array([index[l] for l in labels])
    center = scale = None
    if standardize:
        center = X.mean(axis=0)
        scale = X.std(axis=0)
        scale[scale == 0] = 1.0
        X = (X - center) / scale
    tuning: dict = {}
    if auto:
        C, gamma, tuning = auto_tune(X, yi, len(table), [f.page_id for f in features], seed)
    else:
        if C is None:
            C = DEFAULT_C
        if gamma is None or gamma == "scale":
            gamma = scale_gamma(X)
    if not (C > 0 and gamma > 0):
        raise DataError("C and gamma must be positive")
    machines = _fit_ovo(X, yi, len(table), float(C), float(gamma))
    return PrinterModel(
        labels=table,
        kernel_gamma=float(gamma),
        cost_C=float(C),
        machines=machines,
        kind=features[0].kind,
        dim=X.shape[1],
        seed=seed,
        center=center,
        scale=scale,
        tuning=tuning,
    )


def predict_row(model: PrinterModel, feature: RowFeature | np.ndarray) -> tuple[str, dict[str, float]]:
    """Class of one row and the per-class normalized pairwise vote shares."""
    x = feature.values if isinstance(feature, RowFeature) else feature
    idx, s = model.predict_indices(np.asarray(x)[None, :])
    return model.labels[int(idx[0])], dict(zip(model.labels, s[0].tolist()))


def vote_page(labels: Sequence[int], scores: np.ndarray) -> int:
    """Majority label index; ties go to the larger summed score, then the
    lowest index."""
    counts = np.bincount(np.asarray(labels), minlength=scores.shape[1])
    top = np.flatnonzero(counts == counts.max())
    if len(top) == 1:
        return int(top[0])
    summed = scores.sum(axis=0)[top]
    return int(top[np.flatnonzero(summed == summed.max())[0]])


def predict_page(model: PrinterModel, rows: Sequence[RowFeature]) -> str:
    if not rows:
        raise EmptyInput("page has no rows")
    X, _ = _stack(rows)
    idx, s = model.predict_indices(X)
    return model.labels[vote_page(idx, s)]


@dataclass
class EvalReport:
    labels: tuple[str, ...]
    confusion: np.ndarray  # row-level, [true, predicted]
    page_confusion: np.ndarray
    row_accuracy: float  # percent
    page_accuracy: float
    auc: dict[str, float]  # (TP rate + TN rate) / 2, row level, one-vs-rest
    per_printer_row: dict[str, float]
    per_printer_page: dict[str, float]

    @classmethod
    def from_predictions(
        cls,
        labels: Sequence[str],
        row_true: Sequence[str],
        row_pred: Sequence[str],
        page_true: Sequence[str],
        page_pred: Sequence[str],
    ) -> "EvalReport":
        labels = tuple(labels)
        index = {l: k for k, l in enumerate(labels)}
        k = len(labels)

        def confusion(t, p):
            m = np.zeros((k, k), dtype=np.int64)
            for a, b in zip(t, p):
                m[index[a], index[b]] += 1
            return m

        cm = confusion(row_true, row_pred)
        pm = confusion(page_true, page_pred)

        def pct(m):
            total = m.sum()
            return 100.0 * np.trace(m) / total if total else 0.0

        def per_class(m):
            out = {}
            for c, l in enumerate(labels):
                n = m[c].sum()
                if n:
                    out[l] = 100.0 * m[c, c] / n
            return out

        auc = {}
        total = cm.sum()
        for c, l in enumerate(labels):
            pos = cm[c].sum()
            neg = total - pos
            if pos == 0 or neg == 0:
                continue
            tp = cm[c, c] / pos
            tn = (neg - (cm[:, c].sum() - cm[c, c])) / neg
            auc[l] = (tp + tn) / 2.0
        return cls(labels, cm, pm, pct(cm), pct(pm), auc, per_class(cm), per_class(pm))

    def confusion_csv(self, page_level: bool = False) -> str:
        m = self.page_confusion if page_level else self.confusion
        lines = ["true\\pred," + ",".join(self.labels)]
        for l, row in zip(self.labels, m):
            lines.append(l + "," + ",".join(str(int(v)) for v in row))
        return "\n".join(lines) + "\n"

    def summary(self) -> str:
        out = [
            f"row_accuracy\t{self.row_accuracy:.2f}",
            f"page_accuracy\t{self.page_accuracy:.2f}",
            "printer\trow_acc\tpage_acc\tauc",
        ]
        for l in self.labels:
            r = self.per_printer_row.get(l)
            p = self.per_printer_page.get(l)
            a = self.auc.get(l)
            fmt = lambda v, f: "-" if v is None else format(v, f)  # noqa: E731
            out.append(f"{l}\t{fmt(r, '.2f')}\t{fmt(p, '.2f')}\t{fmt(a, '.4f')}")
        return "\n".join(out) + "\n"


def group_by_page(features: Iterable[RowFeature]) -> dict[str, list[RowFeature]]:
    pages: dict[str, list[RowFeature]] = {}
    for f in features:
        pages.setdefault(f.page_id, []).append(f)
    return pages


def classify(model: PrinterModel, features: Sequence[RowFeature]):
    """Row predictions (label, scores) and page predictions, in input order."""
    X, _ = _stack(features)
    idx, s = model.predict_indices(X)
    row_pred = [model.labels[int(i)] for i in idx]
    pages = {}
    for t, f in enumerate(features):
        pages.setdefault(f.page_id, []).append(t)
    page_pred = {pid: model.labels[vote_page(idx[ts], s[ts])] for pid, ts in pages.items()}
    return row_pred, s, page_pred


def evaluate(model: PrinterModel, test: Sequence[RowFeature]) -> EvalReport:
    if not test:
        raise EmptyInput("empty test set")
    if any(f.printer_label is None for f in test):
        raise DataError("evaluation features must carry true labels")
    row_pred, _, page_pred = classify(model, test)
    truth = {}
    for f in test:
        truth.setdefault(f.page_id, f.printer_label)
    labels = tuple(sorted(set(model.labels) | {f.printer_label for f in test}))
    return EvalReport.from_predictions(
        labels,
        [f.printer_label for f in test],
        row_pred,
        list(truth.values()),
        [page_pred[p] for p in truth],
    )
