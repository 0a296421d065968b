"""Synthetic polar OCT-like frames with a known vessel-wall mask."""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, fields

import numpy as np

from .errors import InvalidSpec
from .raster import BinaryMask, GrayRaster
from .rng import SplitMix64

SHADOW_GAIN = 0.05


@dataclass(frozen=True)
class PhantomSpec:
    n_angles: int = 128
    n_radii: int = 128
    lumen_radius_base: float = 40.0
    lumen_eccentricity: float = 0.15
    wall_thickness: int = 20
    wall_intensity: int = 190
    background_intensity: int = 40
    speckle_sigma: float = 0.2
    salt_pepper_fraction: float = 0.05
    shadow_center_col: int = 96
    shadow_width: int = 6
    seed: int = 0

    def validate(self) -> None:
        problems = []
        if self.n_angles < 4 or self.n_radii < 2:
            problems.append("n_angles >= 4 and n_radii >= 2 required")
        if not 0.0 <= self.lumen_eccentricity <= 0.5:
            problems.append("lumen_eccentricity must be in [0, 0.5]")
        if self.lumen_radius_base <= 0 or self.wall_thickness < 1:
            problems.append("lumen_radius_base > 0 and wall_thickness >= 1 required")
        if self.lumen_radius_base * (1 + self.lumen_eccentricity) + self.wall_thickness >= self.n_radii:
            problems.append("wall extends past the last radius")
        if not 0 <= self.background_intensity < self.wall_intensity <= 255:
            problems.append("need 0 <= background_intensity < wall_intensity <= 255")
        if self.speckle_sigma < 0:
            problems.append("speckle_sigma must be >= 0")
        if not 0.0 <= self.salt_pepper_fraction < 1.0:
            problems.append("salt_pepper_fraction must be in [0, 1)")
        if not 0 <= self.shadow_width < self.n_angles:
            problems.append("shadow_width must be in [0, n_angles)")
        if problems:
            raise InvalidSpec("; ".join(problems))

    def to_json(self) -> str:
        return json.dumps(asdict(self), indent=1, sort_keys=True) + "\n"

    @classmethod
    def from_dict(cls, d: dict) -> "PhantomSpec":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise InvalidSpec(f"unknown phantom fields: {sorted(unknown)}")
        return cls(**d)


def wall_rows(spec: PhantomSpec) -> np.ndarray:
    """First wall row of every angle column."""
    theta = 2.0 * math.pi * np.arange(spec.n_angles) / spec.n_angles
    r = spec.lumen_radius_base * (1.0 + spec.lumen_eccentricity * np.sin(theta))
    return np.floor(r + 0.5).astype(np.int64)


def generate_phantom(spec: PhantomSpec = PhantomSpec()) -> tuple[GrayRaster, BinaryMask]:
    """``(polar frame, truth mask)``; noise order is speckle, salt-and-pepper, then shadow."""
    spec.validate()
    h, w = spec.n_radii, spec.n_angles
    start = wall_rows(spec)
    rows = np.arange(h)[:, None]
    wall = (rows >= start[None, :]) & (rows < start[None, :] + spec.wall_thickness)
    clean = np.where(wall, spec.wall_intensity, spec.background_intensity).astype(np.float64)

    rng = SplitMix64(spec.seed)
    z = rng.normal(h * w).reshape(h, w)
    hit = rng.uniform(h * w).reshape(h, w)
    salt = rng.uniform(h * w).reshape(h, w)

    img = clean * np.exp(spec.speckle_sigma * z) if spec.speckle_sigma > 0 else clean
    img = np.clip(np.rint(img), 0, 255)
    impulse = hit < spec.salt_pepper_fraction
    img[impulse] = np.where(salt[impulse] < 0.5, 0.0, 255.0)
    if spec.shadow_width > 0:
        cols = (spec.shadow_center_col - spec.shadow_width // 2 + np.arange(spec.shadow_width)) % w
        img[:, cols] = np.rint(img[:, cols] * SHADOW_GAIN)
    return GrayRaster(img.astype(np.uint8)), BinaryMask.from_bool(wall)
