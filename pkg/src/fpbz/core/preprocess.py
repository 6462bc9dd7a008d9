#!/usr/bin/env python3
"""
Fingerprint Preprocessing Module

The five preprocessing steps that turn a raw grayscale print into a clean
binary ridge image ready for thinning:

    histogram_equalize -> fft_enhance -> binarize -> estimate_orientation
    (diagnostic only) -> morph_cleanup
"""

from dataclasses import dataclass
from typing import Union
import logging
import math

import numpy as np

from .raster_io import GrayImage, BinaryImage

logger = logging.getLogger(__name__)

DEFAULT_FFT_BLOCK = 32
DEFAULT_FFT_K = 0.45
DEFAULT_ORIENTATION_BLOCK = 16
DEFAULT_SPUR_ITERS = 3

Threshold = Union[int, str]


@dataclass(frozen=True, eq=False)
class OrientationField:
    """Per-block ridge-flow angles in radians, range [0, pi). `angles` has shape (rows, cols)."""
    block_size: int
    cols: int
    rows: int
    angles: np.ndarray

    def angle(self, col: int, row: int) -> float:
        return float(self.angles[row, col])


def histogram_equalize(img: GrayImage) -> GrayImage:
    """
    Map grey levels p to q with the cumulative histogram.

    q = round(255 * (cdf(p) - cdf_min) / (N - cdf_min)), cdf in pixel counts.
    An image with a single occupied level is returned unchanged.

    Args:
        img: Input image

    Returns:
        Equalized image, same dimensions
    """
    hist = np.bincount(img.pixels.ravel(), minlength=256)
    cdf = np.cumsum(hist)
    total = int(cdf[-1])
    cdf_min = int(cdf[np.flatnonzero(hist)[0]])
    if cdf_min == total:
        return img

    lut = np.floor((cdf - cdf_min) * 255.0 / (total - cdf_min) + 0.5)
    lut = np.clip(lut, 0, 255).astype(np.uint8)
    logger.debug(f"Equalized {np.count_nonzero(hist)} occupied grey levels")
    return GrayImage(width=img.width, height=img.height, pixels=lut[img.pixels])


def enhance_spectrum(block: np.ndarray, k: float) -> np.ndarray:
    """Return F * |F|**k for the 2-D DFT F of `block`."""
    spectrum = np.fft.fft2(np.asarray(block, dtype=np.float64))
    return spectrum * np.abs(spectrum) ** k


def _enhance_block(block: np.ndarray, size: int, k: float) -> np.ndarray:
    """
    One block of F * |F|^k on the zero-mean values. The plain inverse
    transform has no fixed scale, so the AC part is rescaled to the energy it
    had before and the block mean is added back.
    """
    mean = float(block.mean())
    centred = np.zeros((size, size), dtype=np.float64)
    centred[:block.shape[0], :block.shape[1]] = block - mean

    energy = float(np.sum(centred ** 2))
    if energy == 0.0:
        return np.full(block.shape, mean)

    enhanced = np.real(np.fft.ifft2(enhance_spectrum(centred, k)))
    enhanced_energy = float(np.sum(enhanced ** 2))
    if enhanced_energy > 0.0:
        enhanced *= math.sqrt(energy / enhanced_energy)
    return enhanced[:block.shape[0], :block.shape[1]] + mean


def fft_enhance(img: GrayImage, block: int = DEFAULT_FFT_BLOCK,
                k: float = DEFAULT_FFT_K) -> GrayImage:
    """
    Block-wise FFT enhancement.

    Each block (edge blocks padded with their mean) has its mean removed, its
    spectrum F replaced by F * |F|**k and is transformed back. The result keeps
    the block's original AC energy and mean, so k = 0 is the identity and a
    constant block stays constant; the dominant ridge frequency gains weight
    relative to everything else.

    Args:
        img: Input image
        block: Block edge length in pixels
        k: Enhancement exponent (>= 0)

    Returns:
        Enhanced image, rounded and clamped to 0..255

    Raises:
        ValueError: If block < 1 or k < 0
    """
    if block < 1:
        raise ValueError(f"FFT block size must be >= 1, got {block}")
    if k < 0:
        raise ValueError(f"FFT exponent must be >= 0, got {k}")

    src = img.pixels.astype(np.float64)
    out = np.empty_like(src)
    for y0 in range(0, img.height, block):
        for x0 in range(0, img.width, block):
            tile = src[y0:y0 + block, x0:x0 + block]
            out[y0:y0 + block, x0:x0 + block] = _enhance_block(tile, block, k)

    pixels = np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8)
    logger.debug(f"FFT enhanced {img.width}x{img.height} with block={block}, k={k}")
    return GrayImage(width=img.width, height=img.height, pixels=pixels)


def between_class_variance(img: GrayImage) -> np.ndarray:
    """
    Between-class variance for every candidate threshold 0..255.

    Class 0 holds levels <= t, class 1 levels > t; an empty class scores 0.
    """
    hist = np.bincount(img.pixels.ravel(), minlength=256).astype(np.int64)
    levels = np.arange(256, dtype=np.int64)
    total = float(hist.sum())
    total_sum = float(np.dot(hist, levels))

    count0 = np.cumsum(hist).astype(np.float64)
    sum0 = np.cumsum(hist * levels).astype(np.float64)
    count1 = total - count0
    sum1 = total_sum - sum0

    variance = np.zeros(256, dtype=np.float64)
    valid = (count0 > 0) & (count1 > 0)
    w0 = count0[valid] / total
    w1 = count1[valid] / total
    mu0 = sum0[valid] / count0[valid]
    mu1 = sum1[valid] / count1[valid]
    variance[valid] = w0 * w1 * (mu0 - mu1) * (mu0 - mu1)
    return variance


def otsu_threshold(img: GrayImage) -> int:
    """Threshold maximizing between-class variance; lowest maximizer wins ties."""
    return int(np.argmax(between_class_variance(img)))


def binarize(img: GrayImage, threshold: Threshold = 'auto') -> BinaryImage:
    """
    Global thresholding: pixel > threshold becomes 1.

    Args:
        img: Enhanced image (ridges bright)
        threshold: 0..255 or "auto" for the between-class-variance optimum

    Returns:
        Binary ridge image
    """
    if threshold == 'auto':
        threshold = otsu_threshold(img)
        logger.info(f"Automatic binarization threshold: {threshold}")
    elif not isinstance(threshold, (int, np.integer)) or not 0 <= threshold <= 255:
        raise ValueError(f"Threshold must be 'auto' or 0..255, got {threshold!r}")
    return BinaryImage(width=img.width, height=img.height, bits=img.pixels > threshold)


def _central_gradients(img: GrayImage):
    padded = np.pad(img.pixels.astype(np.float64), 1, mode='edge')
    gx = (padded[1:-1, 2:] - padded[1:-1, :-2]) / 2.0
    gy = (padded[2:, 1:-1] - padded[:-2, 1:-1]) / 2.0
    return gx, gy


def _block_sums(values: np.ndarray, block: int, rows: int, cols: int) -> np.ndarray:
    padded = np.zeros((rows * block, cols * block), dtype=np.float64)
    padded[:values.shape[0], :values.shape[1]] = values
    return padded.reshape(rows, block, cols, block).sum(axis=(1, 3))


def estimate_orientation(img: GrayImage,
                         block: int = DEFAULT_ORIENTATION_BLOCK) -> OrientationField:
    """
    Gradient-based ridge orientation per block.

    theta = 0.5 * atan2(sum(2 gx gy), sum(gx^2 - gy^2)) + pi/2, mapped into
    [0, pi): ridges run perpendicular to the dominant gradient. Blocks with no
    gradient energy get angle 0.

    Raises:
        ValueError: If block < 3
    """
    if block < 3:
        raise ValueError(f"Orientation block must be >= 3, got {block}")

    gx, gy = _central_gradients(img)
    rows = -(-img.height // block)
    cols = -(-img.width // block)
    vx = _block_sums(2.0 * gx * gy, block, rows, cols)
    vy = _block_sums(gx * gx - gy * gy, block, rows, cols)
    energy = _block_sums(gx * gx + gy * gy, block, rows, cols)

    angles = np.mod(0.5 * np.arctan2(vx, vy) + np.pi / 2.0, np.pi)
    angles = np.where(energy > 0.0, angles, 0.0)
    # mod can land on pi itself through rounding
    angles = np.where(angles >= np.pi, 0.0, angles)
    angles.setflags(write=False)
    return OrientationField(block_size=block, cols=cols, rows=rows, angles=angles)


def render_orientation(field: OrientationField) -> GrayImage:
    """One grey pixel per block, angle / pi * 255."""
    levels = np.floor(field.angles / np.pi * 255.0 + 0.5)
    return GrayImage.from_array(np.clip(levels, 0, 255).astype(np.uint8))


def neighbor_count(bits: np.ndarray) -> np.ndarray:
    """Number of set 8-neighbours of every pixel (outside reads as 0)."""
    padded = np.pad(bits.astype(np.uint8), 1)
    h, w = bits.shape
    total = np.zeros((h, w), dtype=np.uint8)
    for dy in (-1, 0, 1):
        for dx in (-1, 0, 1):
            if dx or dy:
                total += padded[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]
    return total


def _clean(bits: np.ndarray) -> np.ndarray:
    return bits & (neighbor_count(bits) > 0)


def _hbreak(bits: np.ndarray) -> np.ndarray:
    padded = np.pad(bits, 1)
    h, w = bits.shape

    def at(dx, dy):
        return padded[1 + dy:1 + dy + h, 1 + dx:1 + dx + w]

    left = at(-1, -1) & at(-1, 0) & at(-1, 1)
    right = at(1, -1) & at(1, 0) & at(1, 1)
    top = at(-1, -1) & at(0, -1) & at(1, -1)
    bottom = at(-1, 1) & at(0, 1) & at(1, 1)
    # H: both side columns full, middle column empty above and below
    vertical_h = left & right & ~at(0, -1) & ~at(0, 1)
    horizontal_h = top & bottom & ~at(-1, 0) & ~at(1, 0)
    return bits & ~(vertical_h | horizontal_h)


def _spur(bits: np.ndarray, iterations: int) -> np.ndarray:
    for _ in range(iterations):
        endpoints = bits & (neighbor_count(bits) == 1)
        if not endpoints.any():
            break
        bits = bits & ~endpoints
    return bits


def morph_cleanup(img: BinaryImage, spur_iters: int = DEFAULT_SPUR_ITERS) -> BinaryImage:
    """
    Clean, H-break and spur operators, in that order.

    clean removes pixels with no 8-neighbour, hbreak removes the centre of H
    patterns (and their 90 degree rotation), spur strips endpoint pixels
    `spur_iters` times. Never adds foreground.
    """
    if spur_iters < 0:
        raise ValueError(f"spur_iters must be >= 0, got {spur_iters}")
    bits = _clean(img.bits)
    bits = _hbreak(bits)
    bits = _spur(bits, spur_iters)
    logger.debug(f"Morphological cleanup kept {int(bits.sum())} of {img.count()} pixels")
    return BinaryImage(width=img.width, height=img.height, bits=bits)
