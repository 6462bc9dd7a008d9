#!/usr/bin/env python3
"""
Raster I/O Module

Holds the two raster value types used throughout the codec and reads/writes
them as PGM (P5 binary or P2 ASCII, maxval <= 255).

Coordinates are fixed project-wide: x = column (rightward), y = row
(downward), origin top-left. pixel(x, y) == pixels[y, x].
"""

from dataclasses import dataclass
from typing import List, Tuple
import logging

import numpy as np

logger = logging.getLogger(__name__)

MAX_DIMENSION = 65535


class PgmError(ValueError):
    """Base class for PGM parse errors."""


class PgmMagicError(PgmError):
    """Header does not start with P5 or P2."""


class PgmMaxvalError(PgmError):
    """Maxval missing, zero or above 255."""


class PgmTruncatedError(PgmError):
    """Header or sample data ends early."""


class PgmDimensionError(PgmError):
    """Width or height is zero or out of range."""


def _frozen(array: np.ndarray, dtype) -> np.ndarray:
    out = np.array(array, dtype=dtype, copy=True)
    out.setflags(write=False)
    return out


@dataclass(frozen=True, eq=False)
class GrayImage:
    """8-bit grayscale raster. `pixels` is a read-only (height, width) uint8 array."""
    width: int
    height: int
    pixels: np.ndarray

    def __post_init__(self):
        _check_dimensions(self.width, self.height)
        pixels = np.asarray(self.pixels)
        if pixels.size != self.width * self.height:
            raise ValueError(
                f"Pixel count {pixels.size} does not match {self.width}x{self.height}")
        if pixels.size and (pixels.min() < 0 or pixels.max() > 255):
            raise ValueError("Intensities must lie in 0..255")
        object.__setattr__(
            self, 'pixels', _frozen(pixels.reshape(self.height, self.width), np.uint8))

    @classmethod
    def from_array(cls, array: np.ndarray) -> 'GrayImage':
        array = np.asarray(array)
        if array.ndim != 2:
            raise ValueError(f"Expected a 2-D array, got shape {array.shape}")
        return cls(width=array.shape[1], height=array.shape[0], pixels=array)

    def pixel(self, x: int, y: int) -> int:
        return int(self.pixels[y, x])

    def __eq__(self, other):
        if not isinstance(other, GrayImage):
            return NotImplemented
        return (self.width == other.width and self.height == other.height
                and np.array_equal(self.pixels, other.pixels))

    def __hash__(self):
        return hash((self.width, self.height, self.pixels.tobytes()))


@dataclass(frozen=True, eq=False)
class BinaryImage:
    """1-bit raster. `bits` is a read-only (height, width) bool array, True = ridge."""
    width: int
    height: int
    bits: np.ndarray

    def __post_init__(self):
        _check_dimensions(self.width, self.height)
        bits = np.asarray(self.bits)
        if bits.size != self.width * self.height:
            raise ValueError(
                f"Bit count {bits.size} does not match {self.width}x{self.height}")
        object.__setattr__(
            self, 'bits', _frozen(bits.reshape(self.height, self.width) != 0, bool))

    @classmethod
    def from_array(cls, array: np.ndarray) -> 'BinaryImage':
        array = np.asarray(array)
        if array.ndim != 2:
            raise ValueError(f"Expected a 2-D array, got shape {array.shape}")
        return cls(width=array.shape[1], height=array.shape[0], bits=array)

    @classmethod
    def empty(cls, width: int, height: int) -> 'BinaryImage':
        return cls(width=width, height=height, bits=np.zeros((height, width), dtype=bool))

    @classmethod
    def from_points(cls, width: int, height: int,
                    points: List[Tuple[int, int]]) -> 'BinaryImage':
        """Build an image with the given (x, y) pixels set; out-of-range points are ignored."""
        bits = np.zeros((height, width), dtype=bool)
        for x, y in points:
            if 0 <= x < width and 0 <= y < height:
                bits[y, x] = True
        return cls(width=width, height=height, bits=bits)

    def pixel(self, x: int, y: int) -> bool:
        return bool(self.bits[y, x])

    def count(self) -> int:
        return int(np.count_nonzero(self.bits))

    def points(self) -> List[Tuple[int, int]]:
        """Foreground pixels as (x, y) in row-major order."""
        ys, xs = np.nonzero(self.bits)
        return list(zip(xs.tolist(), ys.tolist()))

    def issubset(self, other: 'BinaryImage') -> bool:
        return not np.any(self.bits & ~other.bits)

    def __eq__(self, other):
        if not isinstance(other, BinaryImage):
            return NotImplemented
        return (self.width == other.width and self.height == other.height
                and np.array_equal(self.bits, other.bits))

    def __hash__(self):
        return hash((self.width, self.height, np.packbits(self.bits).tobytes()))


def _check_dimensions(width: int, height: int):
    if width < 1 or height < 1:
        raise PgmDimensionError(f"Image dimensions must be >= 1, got {width}x{height}")
    if width > MAX_DIMENSION or height > MAX_DIMENSION:
        raise PgmDimensionError(
            f"Image dimensions must be <= {MAX_DIMENSION}, got {width}x{height}")


class _HeaderReader:
    """Token reader for the PGM header; skips whitespace and '#' comments."""

    def __init__(self, data: bytes):
        self.data = data
        self.pos = 0

    def token(self, what: str) -> bytes:
        data = self.data
        while self.pos < len(data):
            ch = data[self.pos:self.pos + 1]
            if ch == b'#':
                end = data.find(b'\n', self.pos)
                self.pos = len(data) if end < 0 else end + 1
            elif ch.isspace():
                self.pos += 1
            else:
                break
        start = self.pos
        while self.pos < len(data) and not data[self.pos:self.pos + 1].isspace() \
                and data[self.pos:self.pos + 1] != b'#':
            self.pos += 1
        if start == self.pos:
            raise PgmTruncatedError(f"Header ends before {what}")
        return data[start:self.pos]

    def integer(self, what: str, error_cls=PgmError) -> int:
        tok = self.token(what)
        try:
            return int(tok)
        except ValueError:
            raise error_cls(f"Invalid {what}: {tok!r}")


def read_pgm(data: bytes) -> GrayImage:
    """
    Parse a PGM byte stream.

    Args:
        data: Raw file contents (P5 binary or P2 ASCII)

    Returns:
        GrayImage with exactly width*height samples

    Raises:
        PgmMagicError, PgmMaxvalError, PgmTruncatedError, PgmDimensionError
    """
    magic = data[:2]
    if magic not in (b'P5', b'P2'):
        raise PgmMagicError(f"Unsupported PGM magic {magic!r}")

    reader = _HeaderReader(data)
    reader.pos = 2
    width = reader.integer("width", PgmDimensionError)
    height = reader.integer("height", PgmDimensionError)
    _check_dimensions(width, height)
    maxval = reader.integer("maxval", PgmMaxvalError)
    if maxval < 1 or maxval > 255:
        raise PgmMaxvalError(f"Maxval {maxval} outside 1..255")

    count = width * height
    if magic == b'P5':
        # exactly one whitespace byte separates the header from the samples
        start = reader.pos + 1
        body = data[start:start + count]
        if len(body) < count:
            raise PgmTruncatedError(
                f"Expected {count} samples, found {len(body)}")
        samples = np.frombuffer(body, dtype=np.uint8)
    else:
        tokens = data[reader.pos:].split()
        if len(tokens) < count:
            raise PgmTruncatedError(
                f"Expected {count} samples, found {len(tokens)}")
        try:
            samples = np.array([int(t) for t in tokens[:count]], dtype=np.int64)
        except ValueError as e:
            raise PgmError(f"Invalid ASCII sample: {e}")

    if samples.size and samples.max() > maxval:
        raise PgmMaxvalError(f"Sample {int(samples.max())} exceeds maxval {maxval}")

    logger.debug(f"Read {magic.decode()} image {width}x{height}, maxval {maxval}")
    return GrayImage(width=width, height=height, pixels=samples.reshape(height, width))


def write_pgm(img: GrayImage) -> bytes:
    """Serialize as binary P5 with maxval 255, samples in row-major order."""
    header = f"P5\n{img.width} {img.height}\n255\n".encode('ascii')
    return header + img.pixels.tobytes()


def binary_to_gray(img: BinaryImage, fg: int, bg: int) -> GrayImage:
    """
    Render a binary image: foreground bits become `fg`, background `bg`.

    Raises:
        ValueError: If fg == bg (the rendering would lose the image)
    """
    if fg == bg:
        raise ValueError(f"Foreground and background levels must differ (both {fg})")
    pixels = np.where(img.bits, fg, bg).astype(np.uint8)
    return GrayImage(width=img.width, height=img.height, pixels=pixels)


def gray_to_binary(img: GrayImage, level: int = 128) -> BinaryImage:
    """Pixels darker than `level` become foreground."""
    return BinaryImage(width=img.width, height=img.height, bits=img.pixels < level)
