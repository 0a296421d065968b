"""Command-line entry point: one subcommand per stage plus ``pipeline`` and ``phantom``.

Exit codes: 0 success, 2 usage/config error, 3 data error, 4 numeric failure.
"""

from __future__ import annotations

import argparse
import json
import sys
from dataclasses import asdict, fields
from pathlib import Path

import numpy as np

from . import features as F
from .errors import OctSegError
from .guidewire import default_band_width, detect_shadow_band, remove_shadow
from .models import evaluate, load_model, predict_logreg, predict_svm, save_model, train_logreg, train_svm
from .models.logreg import LogRegModel
from .models.pca import pca_fit, pca_project
from .models.svm import default_gamma
from .noise import NoiseThresholds, assess_noise, median_filter
from .phantom import PhantomSpec, generate_phantom
from .pipeline import PipelineConfig, run_pipeline
from .raster import BinaryMask, load_mask, load_pgm, save_pgm
from .segmentation import apply_threshold, kmeans_segment, morph_refine, otsu_threshold
from .transform import PolarGeometry, cartesian_to_polar, polar_to_cartesian

_OPTIONAL_TYPES = {"band_width": int, "svm_gamma": float}


def _flag(name: str) -> str:
    return "--" + name.replace("_", "-")


def _add_dataclass_flags(parser: argparse.ArgumentParser, cls, skip=()) -> None:
    """One flag per field, all defaulting to None so unset flags don't override files."""
    defaults = cls()
    for f in fields(cls):
        if f.name in skip:
            continue
        default = getattr(defaults, f.name)
        if isinstance(default, bool):
            parser.add_argument(_flag(f.name), action=argparse.BooleanOptionalAction, default=None)
        elif isinstance(default, list):
            parser.add_argument(_flag(f.name), action="append", default=None, metavar="NAME")
        else:
            typ = _OPTIONAL_TYPES.get(f.name, type(default))
            parser.add_argument(_flag(f.name), type=typ, default=None, help=f"default: {default}")


def _overrides(args: argparse.Namespace, cls) -> dict:
    return {f.name: getattr(args, f.name) for f in fields(cls) if getattr(args, f.name, None) is not None}


def _dump(obj, path=None) -> None:
    text = json.dumps(obj, indent=1, sort_keys=True) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def cmd_denoise(args) -> None:
    img = load_pgm(args.input)
    th = NoiseThresholds(args.tau_min, args.tau_max, args.spr_threshold)
    rep = assess_noise(img, th)
    applied = rep.salt_pepper_flag or args.force
    save_pgm(median_filter(img, args.k) if applied else img, args.output)
    _dump({**asdict(rep), "median_applied": applied}, args.report)


def cmd_gw_remove(args) -> None:
    img = load_pgm(args.input)
    band = detect_shadow_band(img, args.band_width or default_band_width(img.width))
    save_pgm(remove_shadow(img, band, args.blend_width), args.output)
    _dump(asdict(band), args.report)


def cmd_remap(args) -> None:
    img = load_pgm(args.input)
    if args.inverse:
        n_angles = args.n_angles or img.width
        out = cartesian_to_polar(img, PolarGeometry(n_angles, img.width // 2, args.fill))
    else:
        out = polar_to_cartesian(img, PolarGeometry(img.width, img.height, args.fill))
    save_pgm(out, args.output)


def cmd_segment(args) -> None:
    img = load_pgm(args.input)
    if args.method == "otsu":
        res = otsu_threshold(img)
        mask = apply_threshold(img, res.threshold)
        summary = asdict(res)
    else:
        mask, trace = kmeans_segment(img, args.k, args.tol, args.max_iter)
        if args.trace:
            trace.to_csv(args.trace)
        summary = {"iterations": trace.iterations, "converged": trace.converged,
                   "centroids": list(trace.centroids_per_iter[-1]), "inertia": trace.inertia_per_iter[-1]}
    if args.morph_radius:
        mask = morph_refine(mask, args.morph_radius)
    save_pgm(mask, args.output)
    _dump(summary)


def cmd_features(args) -> None:
    ds = F.extract_dataset(load_pgm(args.image), load_mask(args.mask), args.patch, args.workers)
    for name in args.drop or []:
        ds = F.drop_feature(ds, name)
    ds.to_csv(args.output)
    if args.histograms:
        F.feature_histograms(ds, args.bins).to_csv(args.histograms)
    if args.pca:
        stats = F.fit_standardization(ds.X)
        X = stats.apply(ds.X)
        proj = pca_project(pca_fit(X), X)
        with open(args.pca, "w") as fh:
            fh.write("pc1,pc2,label\n")
            for (a, b), label in zip(proj, ds.y):
                fh.write(f"{a:.9g},{b:.9g},{int(label)}\n")


def cmd_train(args) -> None:
    ds = F.LabeledDataset.from_csv(args.features)
    if args.balance:
        ds = F.balance_dataset(ds, args.seed)
    train, test = F.split_dataset(ds, F.SplitSpec(args.train_fraction, args.seed + 1))
    train, test, stats = F.standardize(train, test)
    if args.model == "logreg":
        model = train_logreg(train.X, train.y, args.lr, args.epochs, args.l2, args.seed)
        pred = predict_logreg(model, test.X)[0] if len(test) else np.empty(0)
    else:
        gamma = args.gamma or default_gamma(train.X)
        model = train_svm(train.X, train.y, args.C, gamma, args.tol, args.max_passes, args.seed + 2)
        pred = predict_svm(model, test.X) if len(test) else np.empty(0)
    save_model(args.output, model, ds.feature_names, stats, args.patch)
    summary = {"train": len(train), "test": len(test)}
    if len(test):
        summary["metrics"] = evaluate(test.y, pred).to_dict()
    _dump(summary, args.metrics)


def cmd_predict(args) -> None:
    model, names, stats, patch = load_model(args.model)
    img = load_pgm(args.image)
    X = F.select_columns(F.feature_matrix(img, patch, args.workers), F.FEATURE_NAMES, names)
    if stats is not None:
        X = stats.apply(X)
    if isinstance(model, LogRegModel):
        labels = predict_logreg(model, X)[0]
    else:
        labels = predict_svm(model, X, args.workers)
    save_pgm(BinaryMask.from_bool(labels.reshape(img.shape) == 1), args.output)


def cmd_metrics(args) -> None:
    truth = load_mask(args.truth)
    pred = load_mask(args.pred)
    rep = evaluate(truth.foreground.astype(int), pred.foreground.astype(int))
    _dump({**rep.to_dict(), "accuracy_percent": rep.accuracy_percent}, args.output)


def cmd_phantom(args) -> None:
    spec = PhantomSpec.from_dict({**asdict(PhantomSpec()), **_overrides(args, PhantomSpec)})
    polar, truth = generate_phantom(spec)
    save_pgm(polar, args.out)
    save_pgm(truth, args.truth)
    sidecar = args.sidecar or str(Path(args.out).with_suffix(".json"))
    Path(sidecar).write_text(spec.to_json())


def cmd_pipeline(args) -> None:
    cfg = PipelineConfig.load(args.config, _overrides(args, PipelineConfig))
    report = run_pipeline(args.input, cfg, args.out_dir, args.workers)
    sys.stdout.write(json.dumps({"status": report.status, "metrics": report.metrics,
                                 "mask_agreement": report.mask_agreement}, indent=1, sort_keys=True) + "\n")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="octseg", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("denoise", help="assess noise and median-filter flagged frames")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--k", type=int, default=3)
    p.add_argument("--force", action="store_true", help="filter even when the frame is not flagged")
    p.add_argument("--tau-min", type=int, default=5)
    p.add_argument("--tau-max", type=int, default=250)
    p.add_argument("--spr-threshold", type=float, default=0.75)
    p.add_argument("--report", help="write the noise report JSON here instead of stdout")
    p.set_defaults(func=cmd_denoise)

    p = sub.add_parser("gw-remove", help="detect and remove the guidewire shadow band")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--band-width", type=int)
    p.add_argument("--blend-width", type=int, default=4)
    p.add_argument("--report")
    p.set_defaults(func=cmd_gw_remove)

    p = sub.add_parser("remap", help="polar -> Cartesian (or back with --inverse)")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--inverse", action="store_true")
    p.add_argument("--n-angles", type=int, help="angle count for --inverse (default: frame side)")
    p.add_argument("--fill", type=int, default=0)
    p.set_defaults(func=cmd_remap)

    p = sub.add_parser("segment", help="K-means (default) or Otsu vessel mask")
    p.add_argument("--input", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--method", choices=("kmeans", "otsu"), default="kmeans")
    p.add_argument("--k", type=int, default=2)
    p.add_argument("--tol", type=float, default=0.5)
    p.add_argument("--max-iter", type=int, default=50)
    p.add_argument("--morph-radius", type=int, default=0, help="opening+closing radius; 0 disables")
    p.add_argument("--trace", help="write the K-means convergence trace CSV")
    p.set_defaults(func=cmd_segment)

    p = sub.add_parser("features", help="per-pixel patch features labelled by a mask")
    p.add_argument("--image", required=True)
    p.add_argument("--mask", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--patch", type=int, default=11)
    p.add_argument("--drop", action="append", metavar="NAME")
    p.add_argument("--histograms")
    p.add_argument("--bins", type=int, default=32)
    p.add_argument("--pca", help="write a 2-D PCA projection CSV")
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_features)

    p = sub.add_parser("train", help="train a classifier on a features CSV")
    p.add_argument("--features", required=True)
    p.add_argument("--model", choices=("logreg", "svm"), required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--metrics", help="write test-split metrics JSON here instead of stdout")
    p.add_argument("--balance", action=argparse.BooleanOptionalAction, default=True)
    p.add_argument("--seed", type=int, default=42)
    p.add_argument("--train-fraction", type=float, default=0.8)
    p.add_argument("--patch", type=int, default=11, help="patch side the features were extracted with")
    p.add_argument("--lr", type=float, default=0.1)
    p.add_argument("--epochs", type=int, default=2000)
    p.add_argument("--l2", type=float, default=1e-4)
    p.add_argument("--C", type=float, default=1.0)
    p.add_argument("--gamma", type=float)
    p.add_argument("--tol", type=float, default=1e-3)
    p.add_argument("--max-passes", type=int, default=10)
    p.set_defaults(func=cmd_train)

    p = sub.add_parser("predict", help="apply a saved model to every pixel of an image")
    p.add_argument("--model", required=True)
    p.add_argument("--image", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--workers", type=int, default=1)
    p.set_defaults(func=cmd_predict)

    p = sub.add_parser("metrics", help="confusion matrix and metrics between two masks")
    p.add_argument("--truth", required=True)
    p.add_argument("--pred", required=True)
    p.add_argument("--output")
    p.set_defaults(func=cmd_metrics)

    p = sub.add_parser("phantom", help="synthetic polar frame plus truth mask")
    p.add_argument("--out", required=True)
    p.add_argument("--truth", required=True)
    p.add_argument("--sidecar", help="spec JSON path (default: OUT with .json suffix)")
    _add_dataclass_flags(p, PhantomSpec)
    p.set_defaults(func=cmd_phantom)

    p = sub.add_parser("pipeline", help="run every stage on one polar frame")
    p.add_argument("--input", required=True)
    p.add_argument("--out-dir", required=True)
    p.add_argument("--config", help="flat JSON config; flags override it")
    p.add_argument("--workers", type=int, default=1, help="threads; never changes any output byte")
    _add_dataclass_flags(p, PipelineConfig)
    p.set_defaults(func=cmd_pipeline)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "workers", 1) < 1:
        parser.error("--workers must be >= 1")
    try:
        args.func(args)
    except OctSegError as exc:
        print(f"octseg {args.command}: {exc}", file=sys.stderr)
        return exc.exit_code
    return 0


if __name__ == "__main__":
    sys.exit(main())
