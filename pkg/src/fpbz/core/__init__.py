#!/usr/bin/env python3
"""
Core modules for fingerprint ridge extraction, Bezier fitting and the FPBZ codec.
"""

from .raster_io import GrayImage, BinaryImage, read_pgm, write_pgm
from .bezier_core import CubicBezier, Point2, fit_ridge, fit_error
from .codec import CompressedFingerprint, encode, decode, compression_stats
from .reconstruct_eval import OverlapReport, rasterize, superimpose, overlap_metrics

__all__ = [
    'GrayImage', 'BinaryImage', 'read_pgm', 'write_pgm',
    'CubicBezier', 'Point2', 'fit_ridge', 'fit_error',
    'CompressedFingerprint', 'encode', 'decode', 'compression_stats',
    'OverlapReport', 'rasterize', 'superimpose', 'overlap_metrics',
]
