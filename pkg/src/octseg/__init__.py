"""Intracoronary OCT frame processing: denoising, guidewire removal, remapping,
unsupervised vessel segmentation and pixel-wise classification."""

from .raster import BinaryMask, GrayRaster, load_pgm, pad_reflect, save_pgm

__version__ = "0.1.0"

__all__ = ["BinaryMask", "GrayRaster", "load_pgm", "pad_reflect", "save_pgm"]
