"""Slow, independent reference implementations used only by the tests.

Everything here works pixel by pixel on plain Python lists so it shares no code
path with the vectorised library.
"""

from __future__ import annotations

import math
from collections import Counter
from fractions import Fraction

import numpy as np


def mirror(i: int, n: int) -> int:
    """Reflect an index about the edge pixels without repeating them."""
    while i < 0 or i >= n:
        i = -i if i < 0 else 2 * (n - 1) - i
    return i


def window(img, r: int, c: int, k: int) -> list[int]:
    h, w = len(img), len(img[0])
    m = k // 2
    return [img[mirror(r + dr, h)][mirror(c + dc, w)] for dr in range(-m, m + 1) for dc in range(-m, m + 1)]


def pad_reflect(img, m: int):
    a = np.asarray(img).tolist()
    h, w = len(a), len(a[0])
    return np.array([[a[mirror(r, h)][mirror(c, w)] for c in range(-m, w + m)] for r in range(-m, h + m)])


def median_filter(img, k: int) -> np.ndarray:
    a = np.asarray(img).tolist()
    h, w = len(a), len(a[0])
    return np.array([[sorted(window(a, r, c, k))[k * k // 2] for c in range(w)] for r in range(h)])


def local_variance(img, k: int) -> np.ndarray:
    a = np.asarray(img).tolist()
    h, w = len(a), len(a[0])
    out = np.empty((h, w))
    for r in range(h):
        for c in range(w):
            vals = window(a, r, c, k)
            mu = Fraction(sum(vals), len(vals))
            out[r, c] = float(sum((v - mu) ** 2 for v in vals) / len(vals))
    return out


def laplacian_std(img) -> float:
    a = np.asarray(img, dtype=float).tolist()
    vals = []
    for r in range(1, len(a) - 1):
        for c in range(1, len(a[0]) - 1):
            vals.append(a[r - 1][c] + a[r + 1][c] + a[r][c - 1] + a[r][c + 1] - 4 * a[r][c])
    mu = sum(vals) / len(vals)
    return math.sqrt(sum((v - mu) ** 2 for v in vals) / len(vals))


def patch_features(vals: list[int], side: int) -> list[float]:
    n = len(vals)
    mean = sum(vals) / n
    std = math.sqrt(sum((v - mean) ** 2 for v in vals) / n)
    grid = [vals[i * side:(i + 1) * side] for i in range(side)]
    c = side // 2
    core = [grid[c + dr][c + dc] for dr in (-1, 0, 1) for dc in (-1, 0, 1)]
    entropy = -sum((m / 9) * math.log2(m / 9) for m in Counter(core).values())
    sx = [[-1, 0, 1], [-2, 0, 2], [-1, 0, 1]]
    gx = sum(sx[i][j] * grid[c - 1 + i][c - 1 + j] for i in range(3) for j in range(3))
    gy = sum(sx[j][i] * grid[c - 1 + i][c - 1 + j] for i in range(3) for j in range(3))
    return [mean, std, min(vals), max(vals), sorted(vals)[n // 2], entropy, abs(gx) + abs(gy)]


def extract_features(img, mask, side: int = 11):
    a = np.asarray(img).tolist()
    h, w = len(a), len(a[0])
    rows, labels = [], []
    for r in range(h):
        for c in range(w):
            rows.append(patch_features(window(a, r, c, side), side))
            labels.append(1 if int(np.asarray(mask)[r, c]) == 255 else 0)
    return np.array(rows), np.array(labels)


def otsu_threshold(img) -> int:
    """Exhaustive argmax of w0*w1*(mu0-mu1)^2 over t in [0, 254], exact rationals."""
    x = np.asarray(img).ravel().astype(np.int64)
    hist = np.bincount(x, minlength=256)
    levels = np.arange(256)
    below = levels[None, :] <= np.arange(255)[:, None]  # (t, level)
    n0 = below @ hist
    s0 = below @ (hist * levels)
    n1 = (~below) @ hist
    s1 = (~below) @ (hist * levels)
    total = int(x.size)
    best_t, best = None, None
    for t in range(255):
        if n0[t] == 0 or n1[t] == 0:
            score = Fraction(0)
        else:
            w0, w1 = Fraction(int(n0[t]), total), Fraction(int(n1[t]), total)
            d = Fraction(int(s0[t]), int(n0[t])) - Fraction(int(s1[t]), int(n1[t]))
            score = w0 * w1 * d * d
        if best is None or score > best:
            best_t, best = t, score
    return best_t


def inertia(pixels, labels, centroids) -> float:
    total = 0.0
    for x, lab in zip(pixels, labels):
        total += (float(x) - centroids[lab]) ** 2
    return total
