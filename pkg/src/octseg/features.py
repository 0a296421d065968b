"""Per-pixel patch descriptors, labelled datasets, balancing, splitting and scaling."""

from __future__ import annotations

import csv
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field, replace

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import DimensionMismatch, EmptyClass, EmptyDataset, InvalidPatch, InvalidSpec, UnknownFeature
from .raster import pad_reflect
from .rng import SplitMix64

FEATURE_NAMES = ("mean", "std", "min", "max", "median", "entropy", "grad_mag")
SOBEL_X = np.array([[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]])
SOBEL_Y = SOBEL_X.T
# fixed work unit for extraction; worker count only changes scheduling
CHUNK_ROWS = 16
# -(c/9) * log2(c/9) split evenly over the c pixels sharing a value
_ENTROPY_TERM = np.array([0.0] + [-math.log2(c / 9) / 9 for c in range(1, 10)])


@dataclass(frozen=True)
class Standardization:
    mean: tuple[float, ...]
    std: tuple[float, ...]

    def apply(self, X: np.ndarray) -> np.ndarray:
        mu = np.asarray(self.mean)
        sd = np.asarray(self.std)
        scale = sd > 0
        out = np.array(X, dtype=np.float64, copy=True)
        out[:, scale] = (out[:, scale] - mu[scale]) / sd[scale]
        return out

    def to_dict(self) -> dict:
        return {"mean": list(self.mean), "std": list(self.std)}

    @classmethod
    def from_dict(cls, d: dict) -> "Standardization":
        return cls(tuple(float(v) for v in d["mean"]), tuple(float(v) for v in d["std"]))


@dataclass(frozen=True)
class LabeledDataset:
    X: np.ndarray
    y: np.ndarray
    feature_names: tuple[str, ...] = FEATURE_NAMES
    balanced: bool = False
    standardization: Standardization | None = None

    def __post_init__(self) -> None:
        X = np.asarray(self.X, dtype=np.float64)
        if X.ndim == 1:
            X = X.reshape(-1, len(self.feature_names))
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "y", np.asarray(self.y, dtype=np.int64).ravel())
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        if X.shape[0] != self.y.size:
            raise DimensionMismatch(f"{X.shape[0]} rows but {self.y.size} labels")
        if X.shape[1] != len(self.feature_names):
            raise DimensionMismatch(f"{X.shape[1]} columns but {len(self.feature_names)} names")

    def __len__(self) -> int:
        return self.y.size

    def counts(self) -> tuple[int, int]:
        n1 = int(np.count_nonzero(self.y == 1))
        return len(self) - n1, n1

    def take(self, idx, **changes) -> "LabeledDataset":
        return replace(self, X=self.X[idx], y=self.y[idx], **changes)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow([*self.feature_names, "label"])
            for row, label in zip(self.X, self.y):
                writer.writerow([*(f"{v:.9g}" for v in row), int(label)])

    @classmethod
    def from_csv(cls, path) -> "LabeledDataset":
        with open(path, newline="") as fh:
            reader = csv.reader(fh)
            header = next(reader)
            if not header or header[-1] != "label":
                raise DimensionMismatch(f"{path}: last column must be 'label'")
            rows = [r for r in reader if r]
        names = tuple(header[:-1])
        if not rows:
            return cls(np.empty((0, len(names))), np.empty(0, dtype=np.int64), names)
        data = np.array(rows, dtype=np.float64)
        return cls(data[:, :-1], data[:, -1].astype(np.int64), names)


@dataclass(frozen=True)
class SplitSpec:
    train_fraction: float = 0.8
    seed: int = 42
    stratified: bool = True


def _check_patch(side: int) -> None:
    if side < 3 or side % 2 == 0:
        raise InvalidPatch(f"patch side must be odd and >= 3, got {side}")


def patch_features(patch) -> np.ndarray:
    """Seven descriptors of one square patch, ordered as FEATURE_NAMES.

    Entropy (base 2) and the L1 Sobel magnitude are taken on the 3x3
    neighbourhood of the centre pixel; the rest use the whole patch.
    """
    p = np.asarray(patch)
    if p.ndim != 2 or p.shape[0] != p.shape[1]:
        raise InvalidPatch(f"patch must be square, got shape {p.shape}")
    _check_patch(p.shape[0])
    return _features_from_windows(p[None, None].astype(np.int64))[0, 0]


def _features_from_windows(win: np.ndarray) -> np.ndarray:
    """Features for a (rows, cols, side, side) int64 window stack."""
    rows, cols, side, _ = win.shape
    n = side * side
    flat = win.reshape(rows, cols, n)
    s1 = flat.sum(axis=-1)
    s2 = (flat * flat).sum(axis=-1)
    out = np.empty((rows, cols, 7))
    out[..., 0] = s1 / n
    out[..., 1] = np.sqrt((n * s2 - s1 * s1).astype(np.float64)) / n
    out[..., 2] = flat.min(axis=-1)
    out[..., 3] = flat.max(axis=-1)
    out[..., 4] = np.partition(flat, n // 2, axis=-1)[..., n // 2]
    c = side // 2
    core = win[:, :, c - 1:c + 2, c - 1:c + 2].reshape(rows, cols, 9)
    same = (core[..., :, None] == core[..., None, :]).sum(axis=-1)
    out[..., 5] = _ENTROPY_TERM[same].sum(axis=-1)
    gx = np.einsum("rcij,ij->rc", win[:, :, c - 1:c + 2, c - 1:c + 2], SOBEL_X)
    gy = np.einsum("rcij,ij->rc", win[:, :, c - 1:c + 2, c - 1:c + 2], SOBEL_Y)
    out[..., 6] = np.abs(gx) + np.abs(gy)
    return out


def feature_matrix(image, patch: int = 11, workers: int = 1) -> np.ndarray:
    """Row-major (H*W, 7) feature matrix of every pixel of ``image``."""
    _check_patch(patch)
    img = np.asarray(image)
    h, w = img.shape
    padded = pad_reflect(img, patch // 2).astype(np.int64)
    windows = sliding_window_view(padded, (patch, patch))

    def chunk(r0: int) -> np.ndarray:
        return _features_from_windows(windows[r0:r0 + CHUNK_ROWS]).reshape(-1, 7)

    starts = range(0, h, CHUNK_ROWS)
    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(chunk, starts))
    else:
        parts = [chunk(r0) for r0 in starts]
    return np.concatenate(parts, axis=0)


def extract_dataset(image, mask, patch: int = 11, workers: int = 1) -> LabeledDataset:
    img, msk = np.asarray(image), np.asarray(mask)
    if img.shape != msk.shape:
        raise DimensionMismatch(f"image {img.shape} vs mask {msk.shape}")
    X = feature_matrix(img, patch, workers)
    y = (msk.ravel() == 255).astype(np.int64)
    return LabeledDataset(X, y)


def balance_dataset(ds: LabeledDataset, seed: int) -> LabeledDataset:
    """Downsample the majority class uniformly without replacement; row order is kept."""
    n0, n1 = ds.counts()
    if n0 == 0 or n1 == 0:
        raise EmptyClass(f"class counts {n0}/{n1}: both classes are required")
    if n0 == n1:
        return replace(ds, balanced=True)
    major = 0 if n0 > n1 else 1
    major_idx = np.flatnonzero(ds.y == major)
    keep = major_idx[SplitMix64(seed).sample(major_idx.size, min(n0, n1))]
    idx = np.sort(np.concatenate([np.flatnonzero(ds.y != major), keep]))
    return ds.take(idx, balanced=True)


def split_dataset(ds: LabeledDataset, spec: SplitSpec = SplitSpec()):
    """Seeded shuffle then (optionally stratified) partition into (train, test)."""
    if len(ds) == 0:
        raise EmptyDataset("cannot split an empty dataset")
    if not 0.0 < spec.train_fraction < 1.0:
        raise InvalidSpec(f"train fraction {spec.train_fraction} outside (0, 1)")
    rng = SplitMix64(spec.seed)
    groups = [np.flatnonzero(ds.y == c) for c in (0, 1)] if spec.stratified else [np.arange(len(ds))]
    train, test = [], []
    for g in groups:
        g = g[rng.permutation(g.size)]
        n_train = math.floor(spec.train_fraction * g.size + 0.5)
        train.append(g[:n_train])
        test.append(g[n_train:])
    tr = np.sort(np.concatenate(train))
    te = np.sort(np.concatenate(test))
    return ds.take(tr), ds.take(te)


def fit_standardization(X: np.ndarray) -> Standardization:
    X = np.asarray(X, dtype=np.float64)
    return Standardization(tuple(X.mean(axis=0).tolist()), tuple(X.std(axis=0).tolist()))


def standardize(train: LabeledDataset, test: LabeledDataset | None = None):
    """Z-score with training statistics; zero-variance columns pass through untouched.

    Returns ``(train', test', stats)``; ``test'`` is None when no test set is given.
    """
    if len(train) == 0:
        raise EmptyDataset("standardization needs training rows")
    stats = fit_standardization(train.X)
    tr = replace(train, X=stats.apply(train.X), standardization=stats)
    te = None if test is None else replace(test, X=stats.apply(test.X), standardization=stats)
    return tr, te, stats


@dataclass
class FeatureHistograms:
    bins: int
    edges: dict[str, np.ndarray] = field(default_factory=dict)
    # name -> (class-0 density, class-1 density), each summing to 1
    density: dict[str, tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["feature", "bin", "lo", "hi", "class0", "class1"])
            for name, edges in self.edges.items():
                d0, d1 = self.density[name]
                for b in range(self.bins):
                    writer.writerow([name, b, f"{edges[b]:.9g}", f"{edges[b + 1]:.9g}", f"{d0[b]:.9g}", f"{d1[b]:.9g}"])


def feature_histograms(ds: LabeledDataset, bins: int = 32) -> FeatureHistograms:
    """Per-feature, per-class normalised histograms over each feature's observed range.

    An empty class gets an all-zero histogram.
    """
    if len(ds) == 0:
        raise EmptyDataset("no rows to histogram")
    out = FeatureHistograms(bins)
    for j, name in enumerate(ds.feature_names):
        col = ds.X[:, j]
        lo, hi = float(col.min()), float(col.max())
        if lo == hi:
            lo, hi = lo - 0.5, hi + 0.5
        edges = np.linspace(lo, hi, bins + 1)
        dens = []
        for c in (0, 1):
            counts, _ = np.histogram(col[ds.y == c], bins=edges)
            total = counts.sum()
            dens.append(counts / total if total else counts.astype(np.float64))
        out.edges[name] = edges
        out.density[name] = (dens[0], dens[1])
    return out


def drop_feature(ds: LabeledDataset, name: str) -> LabeledDataset:
    if name not in ds.feature_names:
        raise UnknownFeature(f"unknown feature {name!r}; have {', '.join(ds.feature_names)}")
    j = ds.feature_names.index(name)
    keep = [i for i in range(len(ds.feature_names)) if i != j]
    std = ds.standardization
    if std is not None:
        std = Standardization(tuple(std.mean[i] for i in keep), tuple(std.std[i] for i in keep))
    names = tuple(n for n in ds.feature_names if n != name)
    return replace(ds, X=ds.X[:, keep], feature_names=names, standardization=std)


def select_columns(X: np.ndarray, names: tuple[str, ...], wanted: tuple[str, ...]) -> np.ndarray:
    """Columns of a full feature matrix matching ``wanted`` (used at prediction time)."""
    try:
        idx = [names.index(n) for n in wanted]
    except ValueError as exc:
        raise UnknownFeature(str(exc)) from None
    return X[:, idx]
