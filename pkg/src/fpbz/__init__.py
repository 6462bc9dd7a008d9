"""
Fingerprint compression by cubic Bezier ridge curves.

This package turns a grayscale fingerprint into one cubic Bezier curve per
ridge, stores the control points in the FPBZ format and reconstructs a ridge
image from them.
"""

from .app_data import PipelineConfig
from .pipeline import FingerprintCompressor

__all__ = ['PipelineConfig', 'FingerprintCompressor']
