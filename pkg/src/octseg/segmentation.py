"""Unsupervised vessel/background masks: Otsu thresholding and two-cluster intensity K-means."""

from __future__ import annotations

import csv
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import DegenerateHistogram, InvalidSpec, LengthMismatch, TooFewIntensities
from .raster import BinaryMask

LEVELS = np.arange(256)


@dataclass(frozen=True)
class OtsuResult:
    threshold: int
    between_class_variance: float


@dataclass
class KMeansTrace:
    centroids_per_iter: list[tuple[float, float]] = field(default_factory=list)
    inertia_per_iter: list[float] = field(default_factory=list)
    iterations: int = 0
    converged: bool = False
    tol: float = 0.5

    def to_csv(self, path) -> None:
        with open(path, "w", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(["iteration", "c0", "c1", "inertia", "converged"])
            last = len(self.inertia_per_iter)
            for i, ((c0, c1), inertia) in enumerate(zip(self.centroids_per_iter, self.inertia_per_iter), 1):
                done = int(self.converged and i == last)
                writer.writerow([i, f"{c0:.9g}", f"{c1:.9g}", f"{inertia:.9g}", done])

    @classmethod
    def from_csv(cls, path) -> "KMeansTrace":
        trace = cls()
        with open(path, newline="") as fh:
            for row in csv.DictReader(fh):
                trace.centroids_per_iter.append((float(row["c0"]), float(row["c1"])))
                trace.inertia_per_iter.append(float(row["inertia"]))
                trace.converged = row.get("converged") == "1"
        trace.iterations = len(trace.inertia_per_iter)
        return trace


def histogram(raster) -> np.ndarray:
    return np.bincount(np.asarray(raster, dtype=np.uint8).ravel(), minlength=256).astype(np.int64)


def otsu_threshold(raster) -> OtsuResult:
    """Threshold ``t`` maximising ``w0*w1*(mu0-mu1)^2`` with class 0 = {x <= t}.

    Scores are compared as exact rationals,
    ``(N*S0 - S*n0)^2 / (N^2 * n0 * n1)``, so ties resolve to the smallest t
    without floating-point noise.
    """
    hist = histogram(raster)
    if np.count_nonzero(hist) < 2:
        raise DegenerateHistogram("all pixels share one intensity")
    n_total = int(hist.sum())
    s_total = int((hist * LEVELS).sum())
    n0s = np.cumsum(hist).tolist()
    s0s = np.cumsum(hist * LEVELS).tolist()
    best_t, best = 0, Fraction(-1)
    for t in range(255):
        n0, s0 = n0s[t], s0s[t]
        n1 = n_total - n0
        if n0 == 0 or n1 == 0:
            score = Fraction(0)
        else:
            score = Fraction((n_total * s0 - s_total * n0) ** 2, n_total * n_total * n0 * n1)
        if score > best:
            best_t, best = t, score
    return OtsuResult(best_t, float(best))


def apply_threshold(raster, t: int) -> BinaryMask:
    return BinaryMask.from_bool(np.asarray(raster) > t)


def inertia(pixels, assignment, centroids) -> float:
    """Sum of squared distances of each pixel to the centroid of its cluster."""
    x = np.asarray(pixels, dtype=np.float64).ravel()
    lab = np.asarray(assignment).ravel()
    if x.shape != lab.shape:
        raise LengthMismatch(f"{x.size} pixels but {lab.size} labels")
    mu = np.asarray(centroids, dtype=np.float64)
    return float(np.sum((x - mu[lab]) ** 2))


def _assign_levels(c0: Fraction, c1: Fraction) -> np.ndarray:
    """Cluster of every intensity level; ties go to the lower centroid."""
    lo, hi = (c0, c1) if c0 <= c1 else (c1, c0)
    lo_label = 0 if c0 <= c1 else 1
    # |v - lo| <= |v - hi|  <=>  2v <= lo + hi  (lo <= hi)
    mid2 = lo + hi
    to_lo = np.array([2 * v <= mid2 for v in range(256)])
    return np.where(to_lo, lo_label, 1 - lo_label)


def _hist_inertia(hist: np.ndarray, labels: np.ndarray, cents: list[Fraction]) -> Fraction:
    total = Fraction(0)
    for v in np.flatnonzero(hist).tolist():
        d = v - cents[labels[v]]
        total += int(hist[v]) * d * d
    return total


def kmeans_segment(raster, k: int = 2, tol: float = 0.5, max_iter: int = 50):
    """Two-cluster 1-D intensity K-means; the brighter cluster is the vessel (255).

    Centroids start at the image's min and max intensity. Each iteration assigns
    every pixel to the nearest centroid, moves centroids to their cluster means
    and records the centroids and inertia; it stops once no centroid moves by
    ``tol`` or more. Arithmetic runs on the 256-bin histogram with exact
    rationals, so inverting the image inverts the trajectory exactly.

    Returns ``(mask, trace)``.
    """
    if k != 2:
        raise InvalidSpec(f"only k = 2 is supported, got {k}")
    if tol <= 0 or max_iter < 1:
        raise InvalidSpec("tol must be > 0 and max_iter >= 1")
    hist = histogram(raster)
    present = np.flatnonzero(hist).tolist()
    if len(present) < k:
        raise TooFewIntensities(f"{len(present)} distinct intensities for k = {k}")
    cents = [Fraction(present[0]), Fraction(present[-1])]
    trace = KMeansTrace(tol=tol)
    labels = _assign_levels(*cents)
    tol_q = Fraction(tol)
    for _ in range(max_iter):
        labels = _assign_levels(*cents)
        new = []
        for c in range(k):
            members = hist * (labels == c)
            n = int(members.sum())
            if n == 0:
                # reseed at the populated level farthest from the other centroid
                other = cents[1 - c]
                far = max(present, key=lambda v: (abs(v - other), -v))
                new.append(Fraction(far))
            else:
                new.append(Fraction(int((members * LEVELS).sum()), n))
        moved = max(abs(a - b) for a, b in zip(new, cents))
        cents = new
        trace.centroids_per_iter.append((float(cents[0]), float(cents[1])))
        trace.inertia_per_iter.append(float(_hist_inertia(hist, labels, cents)))
        trace.iterations += 1
        if moved < tol_q:
            trace.converged = True
            break
    # final labels follow the final centroids
    labels = _assign_levels(*cents)
    vessel = 1 if cents[1] > cents[0] else 0
    mask = BinaryMask.from_bool(labels[np.asarray(raster, dtype=np.uint8)] == vessel)
    return mask, trace


def _erode(fg: np.ndarray, r: int) -> np.ndarray:
    padded = np.pad(fg, r, constant_values=False)
    return sliding_window_view(padded, (2 * r + 1, 2 * r + 1)).all(axis=(-2, -1))


def _dilate(fg: np.ndarray, r: int) -> np.ndarray:
    padded = np.pad(fg, r, constant_values=False)
    return sliding_window_view(padded, (2 * r + 1, 2 * r + 1)).any(axis=(-2, -1))


def morph_refine(mask, radius: int = 1) -> BinaryMask:
    """Binary opening then closing with a (2r+1)-square element; outside the frame is background."""
    if radius < 1:
        raise InvalidSpec(f"radius must be >= 1, got {radius}")
    fg = np.asarray(mask) == 255
    r = radius
    # work on a frame padded by 2r so closing sees the empty surround
    big = np.pad(fg, 2 * r, constant_values=False)
    opened = _dilate(_erode(big, r), r)
    closed = _erode(_dilate(opened, r), r)
    return BinaryMask.from_bool(closed[2 * r:-2 * r, 2 * r:-2 * r])
