"""End-to-end frame processing: denoise, guidewire removal, remap, segment, learn, evaluate."""

from __future__ import annotations

import json
import time
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path
from typing import Any, Optional

import numpy as np

from . import features as F
from .errors import ConfigError, OctSegError
from .guidewire import default_band_width, detect_shadow_band, remove_shadow
from .models import evaluate, pca_fit, pca_project, predict_logreg, predict_svm, save_model, train_logreg, train_svm
from .noise import NoiseThresholds, assess_noise, median_filter
from .raster import BinaryMask, GrayRaster, load_pgm, save_pgm
from .segmentation import apply_threshold, kmeans_segment, morph_refine, otsu_threshold
from .transform import PolarGeometry, polar_to_cartesian


@dataclass
class PipelineConfig:
    tau_min: int = 5
    tau_max: int = 250
    spr_threshold: float = 0.75
    variance_window: int = 11
    median_k: int = 3
    force_median: bool = False
    band_width: Optional[int] = None  # None: 5% of the frame width, rounded up
    blend_width: int = 4
    fill_value: int = 0
    k: int = 2
    kmeans_tol: float = 0.5
    kmeans_max_iter: int = 50
    morph: bool = True
    morph_radius: int = 1
    patch: int = 11
    drop_features: list = field(default_factory=list)
    train_fraction: float = 0.8
    seed: int = 42
    lr: float = 0.1
    epochs: int = 2000
    l2: float = 1e-4
    svm_C: float = 1.0
    svm_gamma: Optional[float] = None  # None: 1 / (d * mean feature variance)
    svm_tol: float = 1e-3
    svm_max_passes: int = 10
    histogram_bins: int = 32

    def validate(self) -> "PipelineConfig":
        bad = []

        def check(name, ok, msg):
            if not ok:
                bad.append(f"{name}: {msg} (got {getattr(self, name)!r})")

        check("tau_min", 0 <= self.tau_min < self.tau_max, "need 0 <= tau_min < tau_max")
        check("tau_max", self.tau_max <= 255, "must be <= 255")
        check("spr_threshold", 0.0 <= self.spr_threshold <= 1.0, "must be in [0, 1]")
        for name in ("variance_window", "median_k", "patch"):
            v = getattr(self, name)
            check(name, v >= 3 and v % 2 == 1, "must be odd and >= 3")
        check("band_width", self.band_width is None or self.band_width >= 1, "must be >= 1")
        check("blend_width", self.blend_width >= 0, "must be >= 0")
        check("fill_value", 0 <= self.fill_value <= 255, "must be in [0, 255]")
        check("k", self.k == 2, "only 2 clusters are supported")
        check("kmeans_tol", self.kmeans_tol > 0, "must be > 0")
        check("kmeans_max_iter", self.kmeans_max_iter >= 1, "must be >= 1")
        check("morph_radius", self.morph_radius >= 1, "must be >= 1")
        check("drop_features", all(n in F.FEATURE_NAMES for n in self.drop_features)
              and len(set(self.drop_features)) < len(F.FEATURE_NAMES), f"names from {F.FEATURE_NAMES}, not all")
        check("train_fraction", 0.0 < self.train_fraction < 1.0, "must be in (0, 1)")
        check("lr", self.lr > 0, "must be > 0")
        check("epochs", self.epochs >= 1, "must be >= 1")
        check("l2", self.l2 >= 0, "must be >= 0")
        check("svm_C", self.svm_C > 0, "must be > 0")
        check("svm_gamma", self.svm_gamma is None or self.svm_gamma > 0, "must be > 0")
        check("svm_tol", self.svm_tol > 0, "must be > 0")
        check("svm_max_passes", self.svm_max_passes >= 1, "must be >= 1")
        check("histogram_bins", self.histogram_bins >= 1, "must be >= 1")
        if bad:
            raise ConfigError("invalid config: " + "; ".join(bad))
        return self

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        known = {f.name for f in fields(cls)}
        unknown = sorted(set(d) - known)
        if unknown:
            raise ConfigError(f"unknown config fields: {', '.join(unknown)}")
        return cls(**d).validate()

    @classmethod
    def load(cls, path, overrides: dict | None = None) -> "PipelineConfig":
        """Defaults, then the JSON file, then ``overrides`` (skipping None values)."""
        d: dict[str, Any] = {}
        if path is not None:
            with open(path) as fh:
                d.update(json.load(fh))
        d.update({k: v for k, v in (overrides or {}).items() if v is not None})
        return cls.from_dict(d)

    @property
    def noise_thresholds(self) -> NoiseThresholds:
        return NoiseThresholds(self.tau_min, self.tau_max, self.spr_threshold, self.variance_window)


class PipelineError(OctSegError):
    def __init__(self, stage: str, cause: Exception) -> None:
        super().__init__(f"stage {stage!r} failed: {type(cause).__name__}: {cause}")
        self.stage = stage
        self.cause = cause
        self.exit_code = getattr(cause, "exit_code", 3)


@dataclass
class RunReport:
    status: str = "RUNNING"
    failed_stage: Optional[str] = None
    error: Optional[str] = None
    config: dict = field(default_factory=dict)
    noise: Optional[dict] = None
    median_applied: Optional[bool] = None
    shadow_band: Optional[dict] = None
    otsu: Optional[dict] = None
    kmeans: Optional[dict] = None
    dataset: dict = field(default_factory=dict)
    pca: Optional[dict] = None
    metrics: dict = field(default_factory=dict)
    mask_agreement: Optional[float] = None
    artifacts: dict = field(default_factory=dict)
    timings: dict = field(default_factory=dict)

    def to_json(self, include_timings: bool = True) -> str:
        d = asdict(self)
        if not include_timings:
            d.pop("timings")
        return json.dumps(d, indent=1, sort_keys=True) + "\n"


class _Run:
    def __init__(self, out_dir: Path, report: RunReport) -> None:
        self.out = out_dir
        self.report = report

    def stage(self, name: str, fn, *args, **kwargs):
        t0 = time.perf_counter()
        try:
            return fn(*args, **kwargs)
        except Exception as exc:
            self.report.status = "FAILED"
            self.report.failed_stage = name
            self.report.error = f"{type(exc).__name__}: {exc}"
            self.write_report()
            raise PipelineError(name, exc) from exc
        finally:
            self.report.timings[name] = round(time.perf_counter() - t0, 6)

    def write_report(self) -> None:
        (self.out / "report.json").write_text(self.report.to_json())


def _write_pca_csv(path: Path, proj: np.ndarray, ds: F.LabeledDataset) -> None:
    with open(path, "w") as fh:
        fh.write(",".join(["pc1", "pc2", "label", *ds.feature_names]) + "\n")
        for (a, b), label, row in zip(proj, ds.y, ds.X):
            fh.write(",".join([f"{a:.9g}", f"{b:.9g}", str(int(label)), *(f"{v:.9g}" for v in row)]) + "\n")


def _round6(v: float) -> float:
    return round(float(v), 6)


def run_pipeline(input_path, config: PipelineConfig | None = None, out_dir=".", workers: int = 1) -> RunReport:
    """Process one polar frame and write every stage artifact plus ``report.json`` into ``out_dir``.

    The guidewire-blended frame is written for display only; features and labels
    come from the remapped, un-blended frame and its K-means mask.
    """
    cfg = (config or PipelineConfig()).validate()
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    report = RunReport(config=asdict(cfg))
    run = _Run(out, report)

    polar = run.stage("load", load_pgm, input_path)

    noise = run.stage("noise", assess_noise, polar, cfg.noise_thresholds)
    report.noise = {k: (_round6(v) if isinstance(v, float) else v) for k, v in asdict(noise).items()}
    report.median_applied = bool(noise.salt_pepper_flag or cfg.force_median)
    denoised = run.stage("median", median_filter, polar, cfg.median_k) if report.median_applied else polar
    save_pgm(denoised, out / "01_denoised.pgm")
    report.artifacts["denoised"] = "01_denoised.pgm"

    def guidewire():
        bw = cfg.band_width or default_band_width(denoised.width)
        band = detect_shadow_band(denoised, bw)
        return band, remove_shadow(denoised, band, min(cfg.blend_width, (denoised.width - bw) // 2))

    band, blended = run.stage("guidewire", guidewire)
    report.shadow_band = {"start_col": band.start_col, "width": band.width,
                          "mean_intensity": _round6(band.mean_intensity)}
    save_pgm(blended, out / "02_blended_display.pgm")
    report.artifacts["blended_display"] = "02_blended_display.pgm"

    geom = PolarGeometry(denoised.width, denoised.height, cfg.fill_value)
    cart = run.stage("remap", polar_to_cartesian, denoised, geom)
    save_pgm(cart, out / "03_cartesian.pgm")
    report.artifacts["cartesian"] = "03_cartesian.pgm"

    # fill pixels outside the imaging disc are not data, so they stay out of the histogram
    in_view = GrayRaster(cart.pixels[geom.field_of_view()][None, :])
    otsu = run.stage("otsu", otsu_threshold, in_view)
    report.otsu = {"threshold": otsu.threshold, "between_class_variance": _round6(otsu.between_class_variance)}
    save_pgm(apply_threshold(cart, otsu.threshold), out / "04_otsu_mask.pgm")
    report.artifacts["otsu_mask"] = "04_otsu_mask.pgm"

    def segment():
        mask, trace = kmeans_segment(cart, cfg.k, cfg.kmeans_tol, cfg.kmeans_max_iter)
        return (morph_refine(mask, cfg.morph_radius) if cfg.morph else mask), trace

    km_mask, trace = run.stage("kmeans", segment)
    report.kmeans = {
        "iterations": trace.iterations,
        "converged": trace.converged,
        "centroids": [_round6(c) for c in trace.centroids_per_iter[-1]],
        "inertia": _round6(trace.inertia_per_iter[-1]),
    }
    save_pgm(km_mask, out / "05_kmeans_mask.pgm")
    trace.to_csv(out / "kmeans_trace.csv")
    report.artifacts["kmeans_mask"] = "05_kmeans_mask.pgm"
    report.artifacts["kmeans_trace"] = "kmeans_trace.csv"

    full = run.stage("features", F.extract_dataset, cart, km_mask, cfg.patch, workers)
    ds = full
    for name in cfg.drop_features:
        ds = F.drop_feature(ds, name)
    ds.to_csv(out / "features.csv")
    report.artifacts["features"] = "features.csv"

    balanced = run.stage("balance", F.balance_dataset, ds, cfg.seed)
    train, test = run.stage("split", F.split_dataset, balanced, F.SplitSpec(cfg.train_fraction, cfg.seed + 1))
    train, test, stats = run.stage("standardize", F.standardize, train, test)
    n0, n1 = ds.counts()
    report.dataset = {"total": len(ds), "class_0": n0, "class_1": n1, "balanced": len(balanced),
                      "train": len(train), "test": len(test), "feature_names": list(ds.feature_names)}

    hist = F.feature_histograms(balanced, cfg.histogram_bins)
    hist.to_csv(out / "histograms.csv")
    report.artifacts["histograms"] = "histograms.csv"

    pca = run.stage("pca", pca_fit, stats.apply(balanced.X))
    _write_pca_csv(out / "pca.csv", pca_project(pca, stats.apply(balanced.X)), balanced)
    report.pca = {"explained_variance": [_round6(v) for v in pca.explained_variance]}
    report.artifacts["pca"] = "pca.csv"

    lr = run.stage("train_logreg", train_logreg, train.X, train.y, cfg.lr, cfg.epochs, cfg.l2, cfg.seed)
    svm = run.stage("train_svm", train_svm, train.X, train.y, cfg.svm_C, cfg.svm_gamma, cfg.svm_tol,
                    cfg.svm_max_passes, cfg.seed + 2)
    for name, model in (("logreg", lr), ("svm", svm)):
        fname = f"model_{name}.json"
        save_model(out / fname, model, ds.feature_names, stats, cfg.patch)
        report.artifacts[f"model_{name}"] = fname
    report.metrics["logreg"] = evaluate(test.y, predict_logreg(lr, test.X)[0]).to_dict()
    report.metrics["svm"] = evaluate(test.y, predict_svm(svm, test.X, workers)).to_dict()
    report.metrics["svm"]["converged"] = svm.converged
    report.metrics["svm"]["n_support"] = int(svm.dual_coef.size)

    def whole_image():
        X = stats.apply(ds.X)
        return predict_svm(svm, X, workers).reshape(cart.shape)

    pred = run.stage("predict", whole_image)
    svm_mask = BinaryMask.from_bool(pred == 1)
    save_pgm(svm_mask, out / "06_svm_mask.pgm")
    report.artifacts["svm_mask"] = "06_svm_mask.pgm"
    report.mask_agreement = _round6(np.mean(svm_mask.pixels == km_mask.pixels))

    report.status = "OK"
    run.write_report()
    return report
