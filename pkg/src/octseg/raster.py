"""8-bit grayscale rasters, binary masks, binary PGM (P5) I/O and reflect padding.

Pixels are stored as a read-only ``(height, width)`` uint8 array, row-major with
the origin at the top-left corner.
"""

from __future__ import annotations

import os
import re
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (
    InvalidRaster,
    MalformedHeader,
    MarginTooLarge,
    MissingFile,
    TruncatedPayload,
    Unwritable,
    UnsupportedMaxval,
)


def _frozen_u8(pixels) -> np.ndarray:
    arr = np.asarray(pixels)
    if arr.ndim != 2 or arr.shape[0] < 1 or arr.shape[1] < 1:
        raise InvalidRaster(f"expected a non-empty 2-D array, got shape {arr.shape}")
    if arr.dtype != np.uint8:
        if not np.all(np.isfinite(arr)) or arr.min() < 0 or arr.max() > 255:
            raise InvalidRaster("intensities must lie in [0, 255]")
        if np.issubdtype(arr.dtype, np.floating) and np.any(arr != np.floor(arr)):
            raise InvalidRaster("intensities must be integers")
        arr = arr.astype(np.uint8)
    arr = np.array(arr, dtype=np.uint8, copy=True, order="C")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class GrayRaster:
    pixels: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "pixels", _frozen_u8(self.pixels))

    @property
    def width(self) -> int:
        return self.pixels.shape[1]

    @property
    def height(self) -> int:
        return self.pixels.shape[0]

    @property
    def shape(self) -> tuple[int, int]:
        return self.pixels.shape

    def __array__(self, dtype=None, copy=None):
        return self.pixels if dtype is None else self.pixels.astype(dtype)

    def __eq__(self, other) -> bool:
        if not isinstance(other, (GrayRaster, BinaryMask)):
            return NotImplemented
        return self.shape == other.shape and bool(np.array_equal(self.pixels, other.pixels))

    __hash__ = None

    @classmethod
    def from_flat(cls, width: int, height: int, pixels) -> "GrayRaster":
        flat = np.asarray(pixels)
        if flat.size != width * height:
            raise InvalidRaster(f"{flat.size} pixels for a {width}x{height} raster")
        return cls(flat.reshape(height, width))


@dataclass(frozen=True, eq=False)
class BinaryMask(GrayRaster):
    """Vessel (255) / background (0) labels."""

    def __post_init__(self) -> None:
        super().__post_init__()
        if not np.all((self.pixels == 0) | (self.pixels == 255)):
            raise InvalidRaster("mask values must be exactly 0 or 255")

    @classmethod
    def from_bool(cls, fg) -> "BinaryMask":
        return cls(np.where(np.asarray(fg, dtype=bool), 255, 0).astype(np.uint8))

    @property
    def foreground(self) -> np.ndarray:
        return self.pixels == 255


_HEADER = re.compile(rb"P5(?:\s|#[^\n]*\n)+(\d+)(?:\s|#[^\n]*\n)+(\d+)(?:\s|#[^\n]*\n)+(\d+)\s")


def load_pgm(path) -> GrayRaster:
    path = Path(path)
    try:
        data = path.read_bytes()
    except FileNotFoundError:
        raise MissingFile(f"{path}: no such file") from None
    if not data.startswith(b"P5"):
        raise MalformedHeader(f"{path}: magic is {data[:2]!r}, expected b'P5'")
    m = _HEADER.match(data)
    if m is None:
        raise MalformedHeader(f"{path}: cannot parse P5 header")
    width, height, maxval = (int(g) for g in m.groups())
    if width < 1 or height < 1:
        raise MalformedHeader(f"{path}: non-positive dimensions {width}x{height}")
    if maxval != 255:
        raise UnsupportedMaxval(f"{path}: maxval {maxval}, only 255 is supported")
    payload = data[m.end():]
    need = width * height
    if len(payload) < need:
        raise TruncatedPayload(f"{path}: {len(payload)} payload bytes, expected {need}")
    pixels = np.frombuffer(payload, dtype=np.uint8, count=need).reshape(height, width)
    return GrayRaster(pixels)


def load_mask(path) -> BinaryMask:
    return BinaryMask(load_pgm(path).pixels)


def save_pgm(raster: GrayRaster, path) -> None:
    pixels = np.asarray(raster, dtype=np.uint8)
    h, w = pixels.shape
    header = b"P5\n%d %d\n255\n" % (w, h)
    try:
        with open(path, "wb") as fh:
            fh.write(header)
            fh.write(np.ascontiguousarray(pixels).tobytes())
    except (PermissionError, IsADirectoryError, NotADirectoryError, FileNotFoundError) as exc:
        raise Unwritable(f"{os.fspath(path)}: {exc.strerror or exc}") from None


def pad_reflect(raster, margin: int) -> np.ndarray | GrayRaster:
    """Mirror-pad about the edge pixel without repeating it (``[1,2,3]`` -> ``[2,1,2,3,2]``).

    Returns the same kind it was given: GrayRaster in, GrayRaster out; arrays stay arrays.
    """
    arr = np.asarray(raster)
    if margin < 0:
        raise MarginTooLarge(f"negative margin {margin}")
    if margin > min(arr.shape[:2]) - 1:
        raise MarginTooLarge(f"margin {margin} needs an image of at least {margin + 1} px per side, got {arr.shape}")
    padded = np.pad(arr, margin, mode="reflect")
    if isinstance(raster, BinaryMask):
        return BinaryMask(padded)
    if isinstance(raster, GrayRaster):
        return GrayRaster(padded)
    return padded
