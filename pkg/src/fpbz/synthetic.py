#!/usr/bin/env python3
"""
Synthetic fingerprint generator.

Produces seeded 8-bit images of dark sinusoidal ridges following a gently
warped flow field, with scattered ridge endings. They stand in for scanned
prints in the acceptance tests and in `fpbz_codec.py synth`.
"""

from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple, Union
import logging
import math

import numpy as np

from .core.raster_io import GrayImage, write_pgm

logger = logging.getLogger(__name__)

DEFAULT_WIDTH = 256
DEFAULT_HEIGHT = 288
# ridge breaks per print, inclusive, and their distance from the border
BREAKS = (22, 32)
BREAK_MARGIN = 24.0


@dataclass(frozen=True)
class RidgePattern:
    """
    Parameters of one synthetic print.

    Ridge centres are the level sets phase(x, y) = offset + k * period where
    phase = v + warp_amplitude * sin(2 pi s / warp_wavelength + warp_phase),
    with (s, v) the pixel coordinates rotated by `angle`. Each entry of
    `breaks` is an (x, y) point; the ridge nearest to it is interrupted over
    `break_length` pixels there, which leaves two ridge endings.
    """
    period: float
    angle: float
    warp_amplitude: float
    warp_wavelength: float
    warp_phase: float
    offset: float
    contrast: float = 90.0
    noise: float = 6.0
    breaks: Tuple[Tuple[float, float], ...] = ()
    break_length: float = 0.0


def random_pattern(rng: np.random.Generator, high_curvature: bool = False,
                   width: int = DEFAULT_WIDTH, height: int = DEFAULT_HEIGHT) -> RidgePattern:
    """Draw pattern parameters; high_curvature shortens the warp wavelength."""
    wavelength = rng.uniform(90.0, 140.0) if high_curvature else rng.uniform(450.0, 700.0)
    amplitude = rng.uniform(6.0, 10.0) if high_curvature else rng.uniform(3.0, 8.0)
    period = rng.uniform(6.0, 7.0)
    count = int(rng.integers(BREAKS[0], BREAKS[1] + 1))
    xs = rng.uniform(BREAK_MARGIN, width - BREAK_MARGIN, count)
    ys = rng.uniform(BREAK_MARGIN, height - BREAK_MARGIN, count)
    return RidgePattern(
        period=period,
        angle=rng.uniform(-0.35, 0.35),
        warp_amplitude=amplitude,
        warp_wavelength=wavelength,
        warp_phase=rng.uniform(0.0, 2.0 * math.pi),
        offset=rng.uniform(0.0, period),
        breaks=tuple(zip(xs.tolist(), ys.tolist())),
        break_length=2.5 * period,
    )


def _flow(pattern: RidgePattern, xs, ys):
    """(along, phase) at the given pixel coordinates."""
    cos_a, sin_a = math.cos(pattern.angle), math.sin(pattern.angle)
    along = xs * cos_a + ys * sin_a
    across = ys * cos_a - xs * sin_a
    phase = across + pattern.warp_amplitude * np.sin(
        2.0 * math.pi * along / pattern.warp_wavelength + pattern.warp_phase)
    return along, phase


def render_pattern(pattern: RidgePattern, width: int = DEFAULT_WIDTH,
                   height: int = DEFAULT_HEIGHT,
                   rng: Optional[np.random.Generator] = None) -> GrayImage:
    """
    Draw a pattern: ridges dark on a light background.

    Args:
        pattern: Ridge-flow parameters
        width: Image width
        height: Image height
        rng: Source of the additive Gaussian noise; no noise when None

    Returns:
        8-bit grayscale image
    """
    ys, xs = np.indices((height, width), dtype=np.float64)
    along, phase = _flow(pattern, xs, ys)

    # cos = 1 at ridge centres, which become dark
    wave = np.cos(2.0 * math.pi * (phase - pattern.offset) / pattern.period)
    for bx, by in pattern.breaks:
        break_along, break_phase = _flow(pattern, np.float64(bx), np.float64(by))
        k = round((float(break_phase) - pattern.offset) / pattern.period)
        centre = pattern.offset + k * pattern.period
        gap = ((np.abs(along - float(break_along)) < pattern.break_length / 2.0)
               & (np.abs(phase - centre) < pattern.period / 2.0))
        wave[gap] = -1.0

    intensity = 128.0 - pattern.contrast * wave
    if rng is not None and pattern.noise > 0:
        intensity += rng.normal(0.0, pattern.noise, intensity.shape)
    pixels = np.clip(np.floor(intensity + 0.5), 0, 255).astype(np.uint8)
    return GrayImage(width=width, height=height, pixels=pixels)


def synthetic_fingerprint(seed: int, width: int = DEFAULT_WIDTH, height: int = DEFAULT_HEIGHT,
                          high_curvature: bool = False) -> GrayImage:
    """One reproducible print per seed."""
    rng = np.random.default_rng(seed)
    pattern = random_pattern(rng, high_curvature, width, height)
    return render_pattern(pattern, width, height, rng)


def synthetic_corpus(count: int, seed: int = 0, width: int = DEFAULT_WIDTH,
                     height: int = DEFAULT_HEIGHT,
                     high_curvature: bool = False) -> List[GrayImage]:
    """`count` prints with seeds seed, seed + 1, ..."""
    if count < 0:
        raise ValueError(f"count must be >= 0, got {count}")
    return [synthetic_fingerprint(seed + i, width, height, high_curvature)
            for i in range(count)]


def write_corpus(directory: Union[str, Path], count: int, seed: int = 0,
                 high_curvature: bool = False) -> List[Path]:
    """Write a corpus as synth_0000.pgm, synth_0001.pgm, ... and return the paths."""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    paths = []
    for i, image in enumerate(synthetic_corpus(count, seed, high_curvature=high_curvature)):
        path = directory / f"synth_{i:04d}.pgm"
        path.write_bytes(write_pgm(image))
        paths.append(path)
    logger.info(f"Wrote {len(paths)} synthetic prints to {directory}")
    return paths
