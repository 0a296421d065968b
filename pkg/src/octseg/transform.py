"""Polar <-> Cartesian remapping with bilinear interpolation.

Polar layout: column = angle, uniform over [0, 2*pi); row = radius, row 0 at the
catheter centre. Cartesian frames are square with side ``2 * n_radii`` and centre
``(side/2 - 0.5, side/2 - 0.5)`` in pixel-centre coordinates. The angle is
``atan2(row - c, col - c)``: counter-clockwise from +x in (x, row) coordinates,
which reads clockwise on screen because rows grow downward.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, InvalidSpec, NonSquareInput
from .raster import GrayRaster

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class PolarGeometry:
    n_angles: int
    n_radii: int
    fill_value: int = 0

    def __post_init__(self) -> None:
        if self.n_angles < 4 or self.n_radii < 2:
            raise InvalidSpec(f"need n_angles >= 4 and n_radii >= 2, got {self.n_angles}, {self.n_radii}")
        if not 0 <= self.fill_value <= 255:
            raise InvalidSpec(f"fill value {self.fill_value} outside [0, 255]")

    @property
    def side(self) -> int:
        return 2 * self.n_radii

    @property
    def center(self) -> float:
        return self.side / 2 - 0.5

    def field_of_view(self) -> np.ndarray:
        """Boolean (side, side) map of Cartesian pixels that sample the polar frame."""
        rows, cols = np.mgrid[0:self.side, 0:self.side].astype(np.float64)
        return np.hypot(cols - self.center, rows - self.center) < self.n_radii

    @classmethod
    def of(cls, polar, fill_value: int = 0) -> "PolarGeometry":
        h, w = np.asarray(polar).shape
        return cls(n_angles=w, n_radii=h, fill_value=fill_value)


def _to_u8(values: np.ndarray) -> np.ndarray:
    return np.clip(np.rint(values), 0, 255).astype(np.uint8)


def sample_polar(polar: np.ndarray, radius: np.ndarray, theta: np.ndarray) -> np.ndarray:
    """Bilinear sample at continuous (radius, theta): angular wrap, radial clamp, no fill."""
    p = np.asarray(polar, dtype=np.float64)
    n_radii, n_angles = p.shape
    a = np.mod(theta, TWO_PI) * (n_angles / TWO_PI)
    a0 = np.floor(a)
    fa = a - a0
    c0 = a0.astype(np.int64) % n_angles
    c1 = (c0 + 1) % n_angles
    r = np.clip(radius, 0.0, n_radii - 1)
    r0 = np.minimum(np.floor(r).astype(np.int64), n_radii - 2)
    fr = r - r0
    top = (1 - fa) * p[r0, c0] + fa * p[r0, c1]
    bottom = (1 - fa) * p[r0 + 1, c0] + fa * p[r0 + 1, c1]
    return (1 - fr) * top + fr * bottom


def polar_to_cartesian(polar, geom: PolarGeometry | None = None) -> GrayRaster:
    p = np.asarray(polar)
    geom = geom or PolarGeometry.of(p)
    if p.shape != (geom.n_radii, geom.n_angles):
        raise DimensionMismatch(f"polar frame {p.shape} does not match {geom}")
    side, c = geom.side, geom.center
    rows, cols = np.mgrid[0:side, 0:side].astype(np.float64)
    dy, dx = rows - c, cols - c
    radius = np.hypot(dx, dy)
    theta = np.arctan2(dy, dx)
    out = np.full((side, side), float(geom.fill_value))
    inside = radius < geom.n_radii
    out[inside] = sample_polar(p, radius[inside], theta[inside])
    return GrayRaster(_to_u8(out))


def sample_cartesian(cart: np.ndarray, x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Bilinear sample at continuous (x=col, y=row), clamped to the frame."""
    img = np.asarray(cart, dtype=np.float64)
    h, w = img.shape
    x = np.clip(x, 0.0, w - 1)
    y = np.clip(y, 0.0, h - 1)
    x0 = np.minimum(np.floor(x).astype(np.int64), w - 2)
    y0 = np.minimum(np.floor(y).astype(np.int64), h - 2)
    fx, fy = x - x0, y - y0
    top = (1 - fx) * img[y0, x0] + fx * img[y0, x0 + 1]
    bottom = (1 - fx) * img[y0 + 1, x0] + fx * img[y0 + 1, x0 + 1]
    return (1 - fy) * top + fy * bottom


def cartesian_to_polar(cart, geom: PolarGeometry | None = None) -> GrayRaster:
    img = np.asarray(cart)
    h, w = img.shape
    if h != w:
        raise NonSquareInput(f"Cartesian frame must be square, got {w}x{h}")
    if geom is None:
        if h % 2:
            raise DimensionMismatch(f"side {h} is odd; pass a PolarGeometry")
        geom = PolarGeometry(n_angles=h, n_radii=h // 2)
    if h != geom.side:
        raise DimensionMismatch(f"side {h} does not match 2*n_radii = {geom.side}")
    radius = np.arange(geom.n_radii, dtype=np.float64)[:, None]
    theta = np.arange(geom.n_angles, dtype=np.float64)[None, :] * (TWO_PI / geom.n_angles)
    x = geom.center + radius * np.cos(theta)
    y = geom.center + radius * np.sin(theta)
    return GrayRaster(_to_u8(sample_cartesian(img, x, y)))
