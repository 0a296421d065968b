"""Guidewire shadow detection and shift-and-blend removal on polar frames.

Columns of a polar frame are A-lines (angles), so the shadow is a band of dark
columns and the column axis is cyclic.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BandTooWide, InvalidBand
from .raster import GrayRaster


@dataclass(frozen=True)
class ShadowBand:
    start_col: int
    width: int
    mean_intensity: float


def default_band_width(image_width: int) -> int:
    return max(1, math.ceil(0.05 * image_width))


def detect_shadow_band(polar, band_width: int) -> ShadowBand:
    """Contiguous ``band_width`` columns with the lowest mean intensity (first one on ties)."""
    a = np.asarray(polar)
    h, w = a.shape
    if not 1 <= band_width < w:
        raise BandTooWide(f"band width {band_width} not in [1, {w - 1}]")
    # integer column sums keep tie detection exact
    col_sums = a.sum(axis=0, dtype=np.int64)
    csum = np.concatenate(([0], np.cumsum(col_sums)))
    band_sums = csum[band_width:] - csum[:-band_width]
    start = int(np.argmin(band_sums))
    return ShadowBand(start, band_width, float(band_sums[start]) / (band_width * h))


def remove_shadow(polar, band: ShadowBand, blend_width: int = 4) -> GrayRaster:
    """Delete the band's columns, close the gap and cross-fade across the seam.

    The seam sits between output columns ``start_col - 1`` and ``start_col``
    (cyclically). The ``2 * blend_width`` output columns nearest the seam are a
    linear mix of the last column left of the seam and the first column right of
    it, clamped so each side contributes its own real columns; everything else is
    copied verbatim.
    """
    a = np.asarray(polar)
    h, w = a.shape
    if band.width < 1 or band.start_col < 0 or band.start_col + band.width > w or band.width >= w:
        raise InvalidBand(f"band {band} does not fit a width-{w} frame")
    if blend_width < 0:
        raise InvalidBand(f"negative blend width {blend_width}")
    s = band.start_col
    out = np.concatenate([a[:, :s], a[:, s + band.width:]], axis=1)
    n = out.shape[1]
    if blend_width == 0:
        return GrayRaster(out)
    if 2 * blend_width > n:
        raise InvalidBand(f"blend width {blend_width} too large for {n} remaining columns")
    src = out.astype(np.float64)
    blended = out.copy()
    for t in range(-blend_width, blend_width):
        j = (s + t) % n
        left = src[:, (s + min(t, -1)) % n]
        right = src[:, (s + max(t, 0)) % n]
        wt = (t + blend_width + 0.5) / (2 * blend_width)
        blended[:, j] = np.rint((1.0 - wt) * left + wt * right).astype(np.uint8)
    return GrayRaster(blended)
