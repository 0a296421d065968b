"""Degradation metrics (sharpness, impulse-noise ratio, local variance) and the median filter."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.lib.stride_tricks import sliding_window_view

from .errors import EvenWindow, ImageTooSmall, InvalidThresholds
from .raster import GrayRaster, pad_reflect

LAPLACIAN_4 = np.array([[0, 1, 0], [1, -4, 1], [0, 1, 0]])


@dataclass(frozen=True)
class NoiseThresholds:
    tau_min: int = 5
    tau_max: int = 250
    spr_threshold: float = 0.75
    variance_window: int = 11


@dataclass(frozen=True)
class NoiseReport:
    laplacian_std: float
    spr: float
    mean_local_variance: float
    salt_pepper_flag: bool


def laplacian_std(raster) -> float:
    """Population std of the 4-neighbour Laplacian over interior pixels (borders excluded)."""
    a = np.asarray(raster, dtype=np.int64)
    if a.shape[0] < 3 or a.shape[1] < 3:
        raise ImageTooSmall(f"Laplacian needs at least 3x3, got {a.shape[1]}x{a.shape[0]}")
    lap = a[:-2, 1:-1] + a[2:, 1:-1] + a[1:-1, :-2] + a[1:-1, 2:] - 4 * a[1:-1, 1:-1]
    return float(np.std(lap))


def salt_pepper_ratio(raster, tau_min: int = 5, tau_max: int = 250) -> float:
    if not 0 <= tau_min < tau_max <= 255:
        raise InvalidThresholds(f"need 0 <= tau_min < tau_max <= 255, got ({tau_min}, {tau_max})")
    a = np.asarray(raster)
    extreme = np.count_nonzero((a <= tau_min) | (a >= tau_max))
    return extreme / a.size


def _check_window(k: int, what: str) -> None:
    if k < 3 or k % 2 == 0:
        raise EvenWindow(f"{what} must be odd and >= 3, got {k}")


def local_variance_map(raster, window: int = 11) -> np.ndarray:
    """Population variance of the ``window``x``window`` neighbourhood of every pixel.

    Window sums come from integer integral images, so each value is
    ``(n*sum(x^2) - sum(x)^2) / n^2`` with a single final rounding.
    """
    _check_window(window, "window")
    m = window // 2
    a = np.asarray(pad_reflect(np.asarray(raster), m), dtype=np.int64)
    h, w = a.shape[0] - 2 * m, a.shape[1] - 2 * m

    def box_sum(x: np.ndarray) -> np.ndarray:
        ii = np.zeros((x.shape[0] + 1, x.shape[1] + 1), dtype=np.int64)
        ii[1:, 1:] = x.cumsum(0).cumsum(1)
        return ii[window:, window:] - ii[:-window, window:] - ii[window:, :-window] + ii[:-window, :-window]

    s1 = box_sum(a)
    s2 = box_sum(a * a)
    n = window * window
    assert s1.shape == (h, w)
    return (n * s2 - s1 * s1) / float(n * n)


def median_filter(raster, k: int = 3) -> GrayRaster:
    _check_window(k, "median kernel")
    padded = pad_reflect(np.asarray(raster), k // 2)
    win = sliding_window_view(padded, (k, k)).reshape(*np.asarray(raster).shape, k * k)
    # odd count: the middle order statistic is an input value, so no rounding happens
    med = np.partition(win, k * k // 2, axis=-1)[..., k * k // 2]
    return GrayRaster(med)


def assess_noise(raster, config: NoiseThresholds = NoiseThresholds()) -> NoiseReport:
    a = np.asarray(raster)
    if a.shape[0] < 3 or a.shape[1] < 3:
        raise ImageTooSmall(f"noise assessment needs at least 3x3, got {a.shape[1]}x{a.shape[0]}")
    spr = salt_pepper_ratio(a, config.tau_min, config.tau_max)
    window = config.variance_window
    if window // 2 > min(a.shape) - 1:
        # reflect padding cannot exceed the frame; shrink the window on tiny frames
        window = 2 * (min(a.shape) - 1) + 1
    lv = local_variance_map(a, window)
    return NoiseReport(
        laplacian_std=laplacian_std(a),
        spr=spr,
        mean_local_variance=float(lv.mean()),
        salt_pepper_flag=spr > config.spr_threshold,
    )
