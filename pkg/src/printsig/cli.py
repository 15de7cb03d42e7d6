"""Command-line entry point: ``printsig <subcommand>``.

Exit codes: 0 success, 1 usage error, 2 data error, 3 numerical failure.
"""

from __future__ import annotations

import argparse
import contextlib
import csv
import json
import logging
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path
from typing import Callable, Iterable, Sequence

import numpy as np

from . import align, boxes, classifier, features, pipeline, raster, synth
from .errors import DataError, NumericalError, PrintSigError

log = logging.getLogger("printsig")

EXIT_OK, EXIT_USAGE, EXIT_DATA, EXIT_NUMERIC = 0, 1, 2, 3
MANIFEST_FIELDS = [
    "page_id", "printer_id", "font", "page_index", "split", "skew_deg",
    "offset_x", "offset_y", "text_seed", "noise_seed", "ref_path", "scan_path",
]


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


@contextlib.contextmanager
def file_context(path):
    """Prefix module errors with the offending file name."""
    try:
        yield
    except (DataError, NumericalError) as exc:
        base = DataError if isinstance(exc, DataError) else NumericalError
        raise base(f"{path}: {exc}") from exc


def _map(fn: Callable, items: Sequence, jobs: int) -> list:
    """Ordered map, optionally across worker processes."""
    if jobs <= 1 or len(items) <= 1:
        return [fn(it) for it in items]
    with ProcessPoolExecutor(max_workers=jobs) as ex:
        return list(ex.map(fn, items))


def _log_config(args: argparse.Namespace, out_dir: Path | None = None) -> dict:
    cfg = {k: (str(v) if isinstance(v, Path) else v) for k, v in sorted(vars(args).items()) if k != "func"}
    log.info("config %s", json.dumps(cfg, sort_keys=True))
    if out_dir is not None:
        (out_dir / "config.json").write_text(json.dumps(cfg, indent=1, sort_keys=True) + "\n", encoding="utf-8")
    return cfg


def load_boxes(path, page_height=None, dpi=None, source_tag=None) -> boxes.PageBoxes:
    with file_context(path):
        return boxes.read_boxfile(path, page_height=page_height, dpi=dpi, source_tag=source_tag)


def read_manifest(path: Path) -> list[dict]:
    with file_context(path):
        try:
            with open(path, encoding="utf-8", newline="") as fh:
                rows = list(csv.DictReader(fh))
        except OSError as exc:
            raise DataError(str(exc)) from None
        for r in rows:
            if "page_id" not in r or "ref_path" not in r or "scan_path" not in r:
                raise DataError("manifest needs page_id, ref_path and scan_path columns")
        return rows


def write_manifest(path: Path, rows: Iterable[dict]) -> None:
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=MANIFEST_FIELDS, lineterminator="\n", extrasaction="ignore")
        w.writeheader()
        for r in rows:
            w.writerow(r)


def _fmt(v: float) -> str:
    return format(float(v), ".9g")


# -- synth ---------------------------------------------------------------

def cmd_synth(args) -> int:
    out = Path(args.out)
    (out / "ref").mkdir(parents=True, exist_ok=True)
    (out / "scan").mkdir(parents=True, exist_ok=True)
    _log_config(args, out)
    fonts = _fonts(args.fonts)
    printers, records = synth.make_dataset(
        n_printers=args.printers, pages=args.pages, fonts=fonts, seed=args.seed, noise_px=args.noise,
        size_noise_px=args.size_noise, max_skew_deg=args.max_skew, max_offset=args.max_offset,
    )
    (out / "printers.json").write_text(
        json.dumps([p.to_dict() for p in printers], indent=1) + "\n", encoding="utf-8"
    )
    rows = []
    written_refs = set()
    for r in records:
        ref_name = f"ref/{r.font}_{r.page_index:02d}.box"
        if ref_name not in written_refs:
            boxes.write_boxfile(out / ref_name, r.ref)
            written_refs.add(ref_name)
        scan_name = f"scan/{r.page_id}.box"
        boxes.write_boxfile(out / scan_name, r.scan)
        if args.raster:
            raster.write_raster(out / f"scan/{r.page_id}.png", synth.rasterize(r.scan, synth.FONTS[r.font]), True)
        rows.append({
            "page_id": r.page_id, "printer_id": r.printer_id, "font": r.font, "page_index": r.page_index,
            "split": "train" if r.page_index <= args.train_pages else "test",
            "skew_deg": _fmt(r.skew_deg), "offset_x": _fmt(r.offset[0]), "offset_y": _fmt(r.offset[1]),
            "text_seed": r.text_seed, "noise_seed": r.noise_seed, "ref_path": ref_name, "scan_path": scan_name,
        })
    write_manifest(out / "manifest.csv", rows)
    print(f"wrote {len(rows)} page pairs for {len(printers)} printers to {out}")
    return EXIT_OK


def _fonts(spec: str) -> list[str]:
    if spec.isdigit():
        n = int(spec)
        if not 1 <= n <= len(synth.FONTS):
            raise UsageError(f"--fonts must be 1..{len(synth.FONTS)}")
        return list(synth.FONTS)[:n]
    names = [s for s in spec.split(",") if s]
    for n in names:
        if n not in synth.FONTS:
            raise UsageError(f"unknown font {n!r}; choose from {', '.join(synth.FONTS)}")
    return names


# -- preprocess ----------------------------------------------------------

def _preprocess_one(job: dict) -> dict:
    ref = load_boxes(job["ref"], job["page_height"], job["dpi"], "reference")
    scan = load_boxes(job["scan"], job["page_height"], job["dpi"], "scanned")
    scan_img = None
    if job.get("scan_raster"):
        with file_context(job["scan_raster"]):
            scan_img = raster.read_raster(job["scan_raster"], job["dpi"])
        if scan.page_size is None:
            scan = boxes.PageBoxes(scan.lines, scan.dpi, scan.source_tag, (scan_img.width, scan_img.height))
    with file_context(job["scan"]):
        pre = pipeline.preprocess_pair(ref, scan)
    out = Path(job["out_dir"])
    name = job["name"]
    boxes.write_boxfile(out / f"{name}.ref.box", pre.ref)
    boxes.write_boxfile(out / f"{name}.scan.box", pre.scan)
    rep = pre.scan_report
    row = {
        "name": name,
        "theta_m_rad": _fmt(rep.theta_m),
        "theta_m_deg": _fmt(math.degrees(rep.theta_m)),
        "slope_m": _fmt(rep.slope_m),
        "n_skew_points": rep.n_skew_points,
        "corner_x": _fmt(rep.corner[0]),
        "corner_y": _fmt(rep.corner[1]),
        "ref_corner_x": _fmt(pre.ref_report.corner[0]),
        "ref_corner_y": _fmt(pre.ref_report.corner[1]),
        "n_corner_ys": rep.n_corner_ys,
        "n_corner_xs": rep.n_corner_xs,
    }
    if scan_img is not None:
        with file_context(job["scan_raster"]):
            b = raster.denoise(raster.binarize(scan_img), job["gamma"])
            b = raster.rotate_raster(b, rep.theta_m)
            b = raster.translate_raster(b, rep.corner)
        suffix = Path(job["scan_raster"]).suffix.lower() or ".png"
        raster.write_raster(out / f"{name}.scan{suffix}", b, eight_bit=scan_img.samples.max() <= 255)
    return row


def cmd_preprocess(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _log_config(args, out)
    common = {"page_height": args.page_height, "dpi": args.dpi, "gamma": args.gamma, "out_dir": str(out)}
    if args.manifest:
        mpath = Path(args.manifest)
        rows = read_manifest(mpath)
        base = mpath.parent
        jobs = [
            dict(common, ref=str(base / r["ref_path"]), scan=str(base / r["scan_path"]), name=r["page_id"],
                 scan_raster=None)
            for r in rows
        ]
    else:
        if not (args.ref and args.scan):
            raise UsageError("preprocess needs --ref and --scan, or --manifest")
        name = args.name or Path(args.scan).stem
        jobs = [dict(common, ref=args.ref, scan=args.scan, name=name, scan_raster=args.scan_raster)]
        rows = None
    reports = _map(_preprocess_one, jobs, args.jobs)
    with open(out / "preprocess_report.csv", "w", encoding="utf-8", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=list(reports[0]), lineterminator="\n")
        w.writeheader()
        w.writerows(reports)
    if rows is not None:
        for r in rows:
            r["ref_path"] = f"{r['page_id']}.ref.box"
            r["scan_path"] = f"{r['page_id']}.scan.box"
        write_manifest(out / "manifest.csv", rows)
    for rep in reports:
        print(f"{rep['name']}: theta_m={rep['theta_m_deg']} deg corner=({rep['corner_x']}, {rep['corner_y']})")
    return EXIT_OK


# -- extract -------------------------------------------------------------

def _extract_one(job: dict) -> list[features.RowFeature]:
    ref = load_boxes(job["ref"], dpi=job["dpi"], source_tag="reference")
    scan = load_boxes(job["scan"], dpi=job["dpi"], source_tag="scanned")
    with file_context(job["scan"]):
        return pipeline.page_features(
            ref, scan, job["kind"], job["rows"], job["cols"], job["page_id"], job["label"], corrected=not job["raw"]
        )


def cmd_extract(args) -> int:
    kind = features.canonical_kind(args.kind)
    _log_config(args)
    common = {"kind": kind, "rows": args.rows, "cols": args.cols, "raw": args.raw, "dpi": args.dpi}
    if args.manifest:
        mpath = Path(args.manifest)
        rows = read_manifest(mpath)
        if args.split != "all":
            rows = [r for r in rows if r.get("split") == args.split]
        if not rows:
            raise DataError(f"no manifest entries for split {args.split!r}")
        jobs = [
            dict(common, ref=str(mpath.parent / r["ref_path"]), scan=str(mpath.parent / r["scan_path"]),
                 page_id=r["page_id"], label=r.get("printer_id") or None)
            for r in rows
        ]
    else:
        if not (args.ref and args.scan):
            raise UsageError("extract needs --ref and --scan, or --manifest")
        jobs = [dict(common, ref=args.ref, scan=args.scan, page_id=args.page_id or Path(args.scan).stem,
                     label=args.label)]
    feats = [f for chunk in _map(_extract_one, jobs, args.jobs) for f in chunk]
    features.save_features(args.out, feats, append=args.append)
    print(f"wrote {len(feats)} {kind} vectors of length {feats[0].dim} to {args.out}")
    return EXIT_OK


# -- train / classify / evaluate ----------------------------------------

def _load_features(paths: Sequence[str]) -> list[features.RowFeature]:
    out = []
    for p in paths:
        with file_context(p):
            try:
                out.extend(features.load_features(p))
            except OSError as exc:
                raise DataError(str(exc)) from None
    if not out:
        raise DataError("no feature vectors in input")
    kinds = {f.kind for f in out}
    if len(kinds) > 1:
        raise DataError(f"mixed feature kinds {sorted(kinds)}")
    return out


def _train_kwargs(args, feats) -> dict:
    gamma = args.svm_gamma if args.svm_gamma is not None else "scale"
    standardize = args.standardize if args.standardize is not None else feats[0].kind == "ptmp"
    return dict(C=args.svm_c, gamma=gamma, auto=args.auto_tune, seed=args.seed, standardize=standardize)


def cmd_train(args) -> int:
    _log_config(args)
    feats = _load_features(args.features)
    model = classifier.train(feats, **_train_kwargs(args, feats))
    model.save(args.model)
    print(f"trained {len(model.labels)}-class model on {len(feats)} vectors "
          f"(C={model.cost_C:g}, gamma={model.kernel_gamma:g}) -> {args.model}")
    return EXIT_OK


def _load_model(path) -> classifier.PrinterModel:
    try:
        with file_context(path):
            return classifier.PrinterModel.load(path)
    except OSError as exc:
        raise DataError(f"cannot read model: {exc}") from None


def cmd_classify(args) -> int:
    _log_config(args)
    model = _load_model(args.model)
    feats = _load_features(args.features)
    row_pred, scores, page_pred = classifier.classify(model, feats)
    if args.out_rows:
        with open(args.out_rows, "w", encoding="utf-8", newline="") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(["page", "row", "predicted"] + [f"score_{l}" for l in model.labels])
            for f, p, s in zip(feats, row_pred, scores):
                w.writerow([f.page_id, f.row_index, p] + [_fmt(v) for v in s])
    lines = ["page,predicted"] + [f"{pid},{lab}" for pid, lab in page_pred.items()]
    text = "\n".join(lines) + "\n"
    if args.out_pages:
        Path(args.out_pages).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)
    return EXIT_OK


def training_size_sweep(
    train_feats: Sequence[features.RowFeature],
    test_feats: Sequence[features.RowFeature],
    sizes: Sequence[int],
    repeats: int,
    seed: int,
    train_kwargs: dict,
) -> list[dict]:
    """Accuracy for ``i`` randomly drawn training pages per printer."""
    by_printer: dict[str, list[str]] = {}
    pages = classifier.group_by_page(train_feats)
    for pid, rows in pages.items():
        by_printer.setdefault(rows[0].printer_label, []).append(pid)
    results = []
    for size in sizes:
        for rep in range(repeats):
            rng = np.random.default_rng(synth.derive_seed(seed, "sweep", size, rep))
            chosen = []
            for printer in sorted(by_printer):
                avail = sorted(by_printer[printer])
                pick = rng.choice(len(avail), size=min(size, len(avail)), replace=False)
                chosen.extend(avail[k] for k in sorted(pick))
            feats = [f for pid in chosen for f in pages[pid]]
            model = classifier.train(feats, **train_kwargs)
            report = classifier.evaluate(model, test_feats)
            results.append({"n_train": size, "repeat": rep, "row_accuracy": report.row_accuracy,
                            "page_accuracy": report.page_accuracy})
    return results


def sweep_table(results: Sequence[dict]) -> str:
    lines = ["n_train\trow_mean\trow_std\tpage_mean\tpage_std"]
    for size in sorted({r["n_train"] for r in results}):
        sel = [r for r in results if r["n_train"] == size]
        ra = np.array([r["row_accuracy"] for r in sel])
        pa = np.array([r["page_accuracy"] for r in sel])
        lines.append(f"{size}\t{ra.mean():.2f}\t{ra.std():.2f}\t{pa.mean():.2f}\t{pa.std():.2f}")
    return "\n".join(lines) + "\n"


def cmd_evaluate(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _log_config(args, out)
    test = _load_features(args.features)
    if args.sweep:
        if not args.train_features:
            raise UsageError("--sweep needs --train-features")
        train = _load_features(args.train_features)
        counts = {}
        for pid, rows in classifier.group_by_page(train).items():
            counts[rows[0].printer_label] = counts.get(rows[0].printer_label, 0) + 1
        max_n = min(counts.values()) if args.max_train is None else args.max_train
        results = training_size_sweep(train, test, range(1, max_n + 1), args.repeats, args.seed,
                                      _train_kwargs(args, train))
        with open(out / "sweep.csv", "w", encoding="utf-8", newline="") as fh:
            w = csv.DictWriter(fh, fieldnames=list(results[0]), lineterminator="\n")
            w.writeheader()
            for r in results:
                w.writerow({k: (_fmt(v) if isinstance(v, float) else v) for k, v in r.items()})
        table = sweep_table(results)
        (out / "sweep_summary.txt").write_text(table, encoding="utf-8")
        sys.stdout.write(table)
        return EXIT_OK
    if args.model:
        model = _load_model(args.model)
    elif args.train_features:
        train = _load_features(args.train_features)
        model = classifier.train(train, **_train_kwargs(args, train))
    else:
        raise UsageError("evaluate needs --model or --train-features")
    report = classifier.evaluate(model, test)
    (out / "confusion.csv").write_text(report.confusion_csv(), encoding="utf-8")
    (out / "page_confusion.csv").write_text(report.confusion_csv(page_level=True), encoding="utf-8")
    (out / "summary.txt").write_text(report.summary(), encoding="utf-8")
    sys.stdout.write(report.summary())
    return EXIT_OK


# -- e2e -----------------------------------------------------------------

def _e2e_page(job) -> dict:
    rec, kinds, n_r, n_c = job
    pre = pipeline.preprocess_pair(rec.ref, rec.scan)
    grid = pipeline.distortion_grid(pre.ref, pre.scan, n_r, n_c)
    return {k: pipeline.grid_features(grid, k, rec.page_id, rec.printer_id) for k in kinds}


def cmd_e2e(args) -> int:
    out = Path(args.out_dir)
    out.mkdir(parents=True, exist_ok=True)
    _log_config(args, out)
    kinds = [features.canonical_kind(k) for k in args.kinds.split(",") if k]
    fonts = _fonts(args.fonts)
    if not 1 <= args.train_pages < args.pages:
        raise UsageError("--train-pages must be between 1 and --pages - 1")
    _, records = synth.make_dataset(
        n_printers=args.printers, pages=args.pages, fonts=fonts, seed=args.seed, noise_px=args.noise,
        size_noise_px=args.size_noise, max_skew_deg=args.max_skew, max_offset=args.max_offset,
    )
    feats = _map(_e2e_page, [(r, kinds, args.rows, args.cols) for r in records], args.jobs)
    rows = []
    for kind in kinds:
        for font in fonts:
            tr = [f for r, fs in zip(records, feats) if r.font == font and r.page_index <= args.train_pages
                  for f in fs[kind]]
            te = [f for r, fs in zip(records, feats) if r.font == font and r.page_index > args.train_pages
                  for f in fs[kind]]
            kw = dict(C=args.svm_c, gamma=args.svm_gamma if args.svm_gamma is not None else "scale",
                      auto=args.auto_tune, seed=args.seed, standardize=kind == "ptmp")
            report = classifier.evaluate(classifier.train(tr, **kw), te)
            rows.append({"kind": kind, "font": font, "n_train": args.train_pages,
                         "row_accuracy": report.row_accuracy, "page_accuracy": report.page_accuracy})
            (out / f"confusion_{kind}_{font}.csv").write_text(report.confusion_csv(), encoding="utf-8")
    lines = ["kind\tfont\tn_train\trow_acc\tpage_acc"]
    for r in rows:
        row_acc = "-" if r["kind"] == "ptmp" else f"{r['row_accuracy']:.2f}"
        lines.append(f"{r['kind']}\t{r['font']}\t{r['n_train']}\t{row_acc}\t{r['page_accuracy']:.2f}")
    text = "\n".join(lines) + "\n"
    (out / "e2e_summary.txt").write_text(text, encoding="utf-8")
    sys.stdout.write(text)
    return EXIT_OK


# -- parser ----------------------------------------------------------------

def _add_svm(p):
    p.add_argument("--svm-c", type=float, default=None, help=f"soft-margin cost (default {classifier.DEFAULT_C})")
    p.add_argument("--svm-gamma", type=float, default=None, help="RBF width (default 1/(dim*var))")
    p.add_argument("--auto-tune", action="store_true", help="cross-validated grid search over C and gamma")
    p.add_argument("--standardize", action=argparse.BooleanOptionalAction, default=None,
                   help="z-score each dimension (default: on for ptmp only)")


def _add_synth(p):
    p.add_argument("--printers", type=int, default=5)
    p.add_argument("--pages", type=int, default=5, help="pages per font")
    p.add_argument("--fonts", default="3", help="count or comma list of " + ",".join(synth.FONTS))
    p.add_argument("--noise", type=float, default=0.5, help="box position jitter std-dev, pixels")
    p.add_argument("--size-noise", type=float, default=None, help="box size jitter std-dev (default --noise)")
    p.add_argument("--max-skew", type=float, default=1.0, help="mishandling skew bound, degrees (<= 3)")
    p.add_argument("--max-offset", type=float, default=200.0, help="mishandling offset bound, pixels")


def _add_grid(p):
    p.add_argument("--rows", type=int, default=features.DEFAULT_ROWS)
    p.add_argument("--cols", type=int, default=features.DEFAULT_COLS)
    p.add_argument("--kind", default="tx", help="tx, ty, sx, sy, txy, tall or ptmp")


def build_parser() -> argparse.ArgumentParser:
    common = _Parser(add_help=False)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--dpi", type=float, default=None, help="override dpi (default 1200 or file metadata)")
    common.add_argument("-v", "--verbose", action="store_true")

    parser = _Parser(prog="printsig", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("synth", parents=[common], help="generate synthetic printers and page pairs")
    p.add_argument("--out", required=True)
    _add_synth(p)
    p.add_argument("--train-pages", type=int, default=3, help="pages per font marked split=train")
    p.add_argument("--raster", action="store_true", help="also render scan rasters (large at 1200 dpi)")
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("preprocess", parents=[common], help="rotation and translation correction")
    p.add_argument("--ref")
    p.add_argument("--scan")
    p.add_argument("--scan-raster", help="scanned page image to binarize, denoise and correct")
    p.add_argument("--manifest")
    p.add_argument("--name")
    p.add_argument("--page-height", type=float, default=None, help="needed for bottom-origin box files")
    p.add_argument("--gamma", type=int, default=raster.DEFAULT_GAMMA, help="speck size threshold, pixels")
    p.add_argument("--out-dir", required=True)
    p.set_defaults(func=cmd_preprocess)

    p = sub.add_parser("extract", parents=[common], help="distortion features from corrected page pairs")
    p.add_argument("--ref")
    p.add_argument("--scan")
    p.add_argument("--manifest")
    p.add_argument("--split", choices=["train", "test", "all"], default="all")
    p.add_argument("--label")
    p.add_argument("--page-id")
    p.add_argument("--raw", action="store_true", help="inputs are uncorrected; preprocess first")
    _add_grid(p)
    p.add_argument("--out", required=True)
    p.add_argument("--append", action="store_true")
    p.set_defaults(func=cmd_extract)

    p = sub.add_parser("train", parents=[common], help="train the printer classifier")
    p.add_argument("--features", nargs="+", required=True)
    p.add_argument("--model", required=True)
    _add_svm(p)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("classify", parents=[common], help="row and page predictions")
    p.add_argument("--model", required=True)
    p.add_argument("--features", nargs="+", required=True)
    p.add_argument("--out-rows")
    p.add_argument("--out-pages")
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("evaluate", parents=[common], help="confusion matrix, accuracies, training-size sweep")
    p.add_argument("--model")
    p.add_argument("--train-features", nargs="+")
    p.add_argument("--features", nargs="+", required=True, help="labelled test features")
    p.add_argument("--sweep", action="store_true")
    p.add_argument("--max-train", type=int, default=None)
    p.add_argument("--repeats", type=int, default=5)
    p.add_argument("--out-dir", required=True)
    _add_svm(p)
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("e2e", parents=[common], help="synthesize, extract, train and test in one go")
    _add_synth(p)
    p.add_argument("--train-pages", type=int, default=3)
    p.add_argument("--rows", type=int, default=features.DEFAULT_ROWS)
    p.add_argument("--cols", type=int, default=features.DEFAULT_COLS)
    p.add_argument("--kinds", default="tx,ptmp")
    p.add_argument("--out-dir", required=True)
    _add_svm(p)
    p.set_defaults(func=cmd_e2e)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s", stream=sys.stderr)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"printsig {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericalError as exc:
        print(f"printsig {args.command}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except (DataError, PrintSigError) as exc:
        print(f"printsig {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA
    except OSError as exc:
        print(f"printsig {args.command}: data error: {exc}", file=sys.stderr)
        return EXIT_DATA


if __name__ == "__main__":
    sys.exit(main())
