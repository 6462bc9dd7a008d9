#!/usr/bin/env python3
"""
FPBZ Codec Module

Bit-exact container for a compressed fingerprint: the four control points of
every ridge curve, stored as signed 24.8 fixed point.

Layout (little-endian):

    offset  size  field
    0       4     magic "FPBZ"
    4       1     version (1)
    5       1     reserved (0)
    6       2     width  (uint16)
    8       2     height (uint16)
    10      4     ridge count n (uint32)
    14      32*n  per ridge: P0.x P0.y P1.x P1.y P2.x P2.y P3.x P3.y (int32 each)
"""

from dataclasses import dataclass
from typing import Tuple
import logging
import struct

import numpy as np

from .bezier_core import CubicBezier

logger = logging.getLogger(__name__)

MAGIC = b'FPBZ'
VERSION = 1
HEADER = struct.Struct('<4sBBHHI')
HEADER_SIZE = HEADER.size
RIDGE_SIZE = 32
FIXED_SCALE = 256
MAX_RIDGES = 2 ** 32 - 1
MAX_DIMENSION = 65535

_FIXED_MIN = -2 ** 31
_FIXED_MAX = 2 ** 31 - 1


class CodecError(ValueError):
    """Base class for FPBZ encode/decode errors."""


class BadMagicError(CodecError):
    pass


class UnsupportedVersionError(CodecError):
    pass


class TruncatedStreamError(CodecError):
    """The stream ends before the declared content; `offset` is where it ends."""

    def __init__(self, offset: int, needed: int, what: str = "stream"):
        self.offset = offset
        self.needed = needed
        super().__init__(f"Truncated {what} at offset {offset}: expected {needed} bytes")


class TrailingBytesError(CodecError):
    pass


class CoordinateOverflowError(CodecError):
    """
    round(coord * 256) does not fit a signed 32-bit integer, i.e. |coord| is
    about 2^23 or more. The tighter 2^23/256 = 32768 bound is not used: it
    would reject coordinates that a 16-bit width or height allows.
    """


@dataclass(frozen=True)
class CompressedFingerprint:
    """Image dimensions plus one cubic per ridge."""
    width: int
    height: int
    ridges: Tuple[CubicBezier, ...] = ()

    def __post_init__(self):
        object.__setattr__(self, 'ridges', tuple(self.ridges))
        if not (1 <= self.width <= MAX_DIMENSION and 1 <= self.height <= MAX_DIMENSION):
            raise ValueError(
                f"Dimensions must lie in 1..{MAX_DIMENSION}, got {self.width}x{self.height}")
        if len(self.ridges) > MAX_RIDGES:
            raise ValueError(f"Too many ridges: {len(self.ridges)}")

    def control_array(self) -> np.ndarray:
        """(n, 4, 2) array of all control points."""
        if not self.ridges:
            return np.zeros((0, 4, 2), dtype=np.float64)
        return np.stack([c.as_array() for c in self.ridges])


@dataclass(frozen=True)
class FbzHeader:
    version: int
    width: int
    height: int
    ridge_count: int

    @property
    def expected_size(self) -> int:
        return expected_size(self.ridge_count)


def expected_size(ridge_count: int) -> int:
    """File size for `ridge_count` ridges: 14 + 32 n."""
    return HEADER_SIZE + RIDGE_SIZE * ridge_count


def _to_fixed(values: np.ndarray) -> np.ndarray:
    # round half away from zero
    scaled = np.sign(values) * np.floor(np.abs(values) * FIXED_SCALE + 0.5)
    bad = (scaled < _FIXED_MIN) | (scaled > _FIXED_MAX)
    if np.any(bad):
        worst = float(values[bad].flat[0])
        raise CoordinateOverflowError(
            f"Coordinate {worst} does not fit signed 24.8 fixed point "
            f"(|coord| < 2^23, not the 2^23/256 = 32768 pixel bound)")
    return scaled.astype(np.int64)


def _from_fixed(fixed: np.ndarray) -> np.ndarray:
    return fixed.astype(np.float64) / FIXED_SCALE


def _ridges_from_array(controls: np.ndarray) -> Tuple[CubicBezier, ...]:
    return tuple(CubicBezier.from_array(c) for c in controls)


def quantize(cf: CompressedFingerprint) -> CompressedFingerprint:
    """
    Round every coordinate to the nearest 1/256 without serializing.

    Raises:
        CoordinateOverflowError: If a coordinate falls outside the 24.8 range
    """
    controls = _from_fixed(_to_fixed(cf.control_array()))
    return CompressedFingerprint(width=cf.width, height=cf.height,
                                 ridges=_ridges_from_array(controls))


def encode(cf: CompressedFingerprint) -> bytes:
    """
    Serialize to the FPBZ byte layout.

    Args:
        cf: Fingerprint to store

    Returns:
        Exactly 14 + 32 n bytes

    Raises:
        CoordinateOverflowError: If a coordinate falls outside the 24.8 range
    """
    fixed = _to_fixed(cf.control_array())
    header = HEADER.pack(MAGIC, VERSION, 0, cf.width, cf.height, len(cf.ridges))
    body = fixed.astype('<i4').tobytes()
    data = header + body
    logger.debug(f"Encoded {len(cf.ridges)} ridges into {len(data)} bytes")
    return data


def read_header(data: bytes) -> FbzHeader:
    """
    Parse and validate only the 14-byte header.

    Raises:
        BadMagicError, UnsupportedVersionError, TruncatedStreamError, CodecError
    """
    head = bytes(data[:len(MAGIC)])
    if head != MAGIC[:len(head)]:
        raise BadMagicError(f"Bad magic {head!r}, expected {MAGIC!r}")
    if len(data) < HEADER_SIZE:
        raise TruncatedStreamError(offset=len(data), needed=HEADER_SIZE, what="header")

    magic, version, reserved, width, height, count = HEADER.unpack_from(data)
    if version != VERSION:
        raise UnsupportedVersionError(f"Unsupported FPBZ version {version}")
    if reserved != 0:
        raise CodecError(f"Reserved header byte must be 0, got {reserved}")
    if width == 0 or height == 0:
        raise CodecError(f"Invalid dimensions {width}x{height}")
    return FbzHeader(version=version, width=width, height=height, ridge_count=count)


def check_length(data: bytes, header: FbzHeader):
    """
    Raises:
        TruncatedStreamError: If the body is shorter than the header declares
        TrailingBytesError: If bytes follow the last ridge
    """
    needed = header.expected_size
    if len(data) < needed:
        raise TruncatedStreamError(offset=len(data), needed=needed, what="ridge body")
    if len(data) > needed:
        raise TrailingBytesError(
            f"{len(data) - needed} trailing bytes after offset {needed}")


def decode(data: bytes) -> CompressedFingerprint:
    """
    Parse an FPBZ stream.

    Args:
        data: Complete file contents

    Returns:
        The stored fingerprint; decode(encode(cf)) == quantize(cf)

    Raises:
        BadMagicError, UnsupportedVersionError, TruncatedStreamError,
        TrailingBytesError, CodecError
    """
    header = read_header(data)
    check_length(data, header)

    fixed = np.frombuffer(bytes(data[HEADER_SIZE:]), dtype='<i4') if header.ridge_count \
        else np.zeros(0, dtype=np.int32)
    controls = _from_fixed(fixed).reshape(header.ridge_count, 4, 2)
    logger.debug(f"Decoded {header.ridge_count} ridges for "
                 f"{header.width}x{header.height} image")
    return CompressedFingerprint(width=header.width, height=header.height,
                                 ridges=_ridges_from_array(controls))


def compression_stats(original_bytes: int, compressed_bytes: int) -> float:
    """
    Compression ratio original / compressed.

    Raises:
        ValueError: If either size is not positive
    """
    if original_bytes <= 0 or compressed_bytes <= 0:
        raise ValueError(
            f"Sizes must be positive, got {original_bytes} and {compressed_bytes}")
    return original_bytes / compressed_bytes
