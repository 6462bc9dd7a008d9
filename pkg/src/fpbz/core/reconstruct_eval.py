#!/usr/bin/env python3
"""
Reconstruction and Evaluation Module

Draws the stored curves back into a ridge image and compares it with the
ridges extracted before compression: a three-level overlay for inspection
plus distance-based coverage numbers.
"""

from dataclasses import dataclass
import logging
import math

import numpy as np
from scipy import ndimage

from .bezier_core import CubicBezier, bernstein_basis
from .codec import CompressedFingerprint
from .raster_io import BinaryImage, GrayImage

logger = logging.getLogger(__name__)

DEFAULT_TOL = 2.0

LEVEL_BACKGROUND = 255
LEVEL_ONE = 128
LEVEL_BOTH = 0


@dataclass(frozen=True)
class OverlapReport:
    """Coverage of extracted ridges by the reconstruction and vice versa."""
    forward_cover: float
    reverse_cover: float
    mean_dist: float
    max_dist: float
    tol: float
    extracted_pixels: int = 0
    reconstructed_pixels: int = 0

    def to_text(self) -> str:
        """key: value lines, fixed precision so reruns compare byte for byte."""
        lines = [
            f"forward_cover: {self.forward_cover:.6f}",
            f"reverse_cover: {self.reverse_cover:.6f}",
            f"mean_dist: {self.mean_dist:.6f}",
            f"max_dist: {self.max_dist:.6f}",
            f"tol: {self.tol:g}",
            f"extracted_pixels: {self.extracted_pixels}",
            f"reconstructed_pixels: {self.reconstructed_pixels}",
        ]
        return '\n'.join(lines) + '\n'


def sample_count(curve: CubicBezier) -> int:
    """
    Number of parameter intervals for rasterizing `curve`.

    max(2, ceil(2 L), ceil(6 m)) with L the control polygon length and m its
    longest leg. |B'(u)| <= 3 m, so neighbouring samples are at most 0.5 px
    apart.
    """
    return max(2, math.ceil(2.0 * curve.polygon_length()), math.ceil(6.0 * curve.longest_leg()))


def rasterize_curve(curve: CubicBezier, width: int, height: int) -> np.ndarray:
    """(height, width) bool trace of one curve; samples outside the frame are dropped."""
    intervals = sample_count(curve)
    u = np.linspace(0.0, 1.0, intervals + 1)
    samples = bernstein_basis(u) @ curve.as_array()
    pixels = np.floor(samples + 0.5)

    inside = ((pixels[:, 0] >= 0) & (pixels[:, 0] < width)
              & (pixels[:, 1] >= 0) & (pixels[:, 1] < height))
    if not inside.all():
        logger.debug(f"Clipped {int((~inside).sum())} of {len(u)} samples outside the frame")

    bits = np.zeros((height, width), dtype=bool)
    xs = pixels[inside, 0].astype(np.intp)
    ys = pixels[inside, 1].astype(np.intp)
    bits[ys, xs] = True
    return bits


def rasterize(cf: CompressedFingerprint) -> BinaryImage:
    """
    Draw every stored curve into one binary image.

    Each curve is sampled densely enough that its trace is 8-connected inside
    the frame; the traces are OR-merged.
    """
    bits = np.zeros((cf.height, cf.width), dtype=bool)
    for curve in cf.ridges:
        bits |= rasterize_curve(curve, cf.width, cf.height)
    logger.info(f"Rasterized {len(cf.ridges)} curves into {int(bits.sum())} pixels")
    return BinaryImage(width=cf.width, height=cf.height, bits=bits)


def _check_same_size(a: BinaryImage, b: BinaryImage):
    if (a.width, a.height) != (b.width, b.height):
        raise ValueError(
            f"Image dimensions differ: {a.width}x{a.height} vs {b.width}x{b.height}")


def superimpose(extracted: BinaryImage, reconstructed: BinaryImage) -> GrayImage:
    """
    Overlay two ridge images.

    Background is 255, pixels set in exactly one image 128, pixels set in
    both 0.

    Raises:
        ValueError: If the dimensions differ
    """
    _check_same_size(extracted, reconstructed)
    both = extracted.bits & reconstructed.bits
    one = extracted.bits ^ reconstructed.bits
    pixels = np.full(both.shape, LEVEL_BACKGROUND, dtype=np.uint8)
    pixels[one] = LEVEL_ONE
    pixels[both] = LEVEL_BOTH
    return GrayImage(width=extracted.width, height=extracted.height, pixels=pixels)


def nearest_distances(source: BinaryImage, target: BinaryImage) -> np.ndarray:
    """
    Euclidean distance from every `source` pixel (row-major) to the closest
    `target` pixel; infinite when `target` is empty.
    """
    _check_same_size(source, target)
    ys, xs = np.nonzero(source.bits)
    if not target.bits.any():
        return np.full(len(ys), np.inf)
    # distance to the nearest zero, so the target becomes the zeros
    field = ndimage.distance_transform_edt(~target.bits)
    return field[ys, xs]


def _cover(distances: np.ndarray, tol: float) -> float:
    if len(distances) == 0:
        return 1.0
    return float(np.count_nonzero(distances <= tol)) / len(distances)


def overlap_metrics(extracted: BinaryImage, reconstructed: BinaryImage,
                    tol: float = DEFAULT_TOL) -> OverlapReport:
    """
    Compare extracted ridges with their reconstruction.

    forward_cover is the fraction of extracted pixels within `tol` of a
    reconstructed pixel, reverse_cover the same the other way round. An empty
    side counts as fully covered. mean_dist and max_dist summarize the forward
    distances (0 when nothing was extracted).

    Args:
        extracted: Ridge pixels before compression
        reconstructed: Rasterized curves
        tol: Distance tolerance in pixels

    Returns:
        OverlapReport

    Raises:
        ValueError: If the dimensions differ or tol < 0
    """
    if tol < 0:
        raise ValueError(f"Tolerance must be >= 0, got {tol}")
    _check_same_size(extracted, reconstructed)

    forward = nearest_distances(extracted, reconstructed)
    reverse = nearest_distances(reconstructed, extracted)
    report = OverlapReport(
        forward_cover=_cover(forward, tol),
        reverse_cover=_cover(reverse, tol),
        mean_dist=float(forward.mean()) if len(forward) else 0.0,
        max_dist=float(forward.max()) if len(forward) else 0.0,
        tol=float(tol),
        extracted_pixels=len(forward),
        reconstructed_pixels=len(reverse),
    )
    logger.info(f"Overlap at tol={tol:g}: forward {report.forward_cover:.3f}, "
                f"reverse {report.reverse_cover:.3f}, max distance {report.max_dist:.2f}")
    return report
