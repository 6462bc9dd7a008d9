#!/usr/bin/env python3
"""
Tests for the FPBZ container: exact layout, fixed-point rounding and the
decode error cases.
"""

import struct
import pytest
import numpy as np
import sys
import os

# Add parent directory to path for imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from fpbz.core.bezier_core import CubicBezier, Point2
from fpbz.core.codec import (
    BadMagicError, CodecError, CompressedFingerprint, CoordinateOverflowError,
    TrailingBytesError, TruncatedStreamError, UnsupportedVersionError, compression_stats,
    decode, encode, expected_size, quantize, read_header,
)


def line_curve(x0, y0, x1, y1):
    return CubicBezier(Point2(x0, y0), Point2(x0 + (x1 - x0) / 3, y0 + (y1 - y0) / 3),
                       Point2(x0 + 2 * (x1 - x0) / 3, y0 + 2 * (y1 - y0) / 3), Point2(x1, y1))


def random_fingerprint(rng, count, width=256, height=288):
    ridges = [CubicBezier.from_array(rng.uniform(-50, 350, size=(4, 2))) for _ in range(count)]
    return CompressedFingerprint(width=width, height=height, ridges=ridges)


class TestEncode:

    def test_empty_fingerprint_bytes(self):
        data = encode(CompressedFingerprint(width=256, height=288))
        assert data == bytes([0x46, 0x50, 0x42, 0x5A, 0x01, 0x00, 0x00, 0x01,
                              0x20, 0x01, 0x00, 0x00, 0x00, 0x00])

    def test_single_ridge_layout(self):
        curve = CubicBezier(Point2(1.5, 2), Point2(3, 4), Point2(5, 6), Point2(7, -1))
        data = encode(CompressedFingerprint(width=10, height=10, ridges=[curve]))
        assert len(data) == 46
        assert data[14:18] == bytes([0x80, 0x01, 0x00, 0x00])
        values = struct.unpack('<8i', data[14:])
        assert values == (384, 512, 768, 1024, 1280, 1536, 1792, -256)

    def test_size_law(self):
        rng = np.random.default_rng(30)
        for count in (0, 1, 2, 17):
            assert len(encode(random_fingerprint(rng, count))) == expected_size(count)
        assert expected_size(3) == 110

    def test_rounds_half_away_from_zero(self):
        cf = CompressedFingerprint(width=4, height=4, ridges=[
            CubicBezier(Point2(1 / 512, -1 / 512), Point2(3 / 512, -3 / 512),
                        Point2(0, 0), Point2(1, 1))])
        values = struct.unpack('<8i', encode(cf)[14:])
        assert values[:4] == (1, -1, 2, -2)

    def test_overflow(self):
        big = CompressedFingerprint(width=4, height=4, ridges=[line_curve(0, 0, 9e6, 0)])
        with pytest.raises(CoordinateOverflowError, match=r"9000000.0 .*2\^23/256 = 32768"):
            encode(big)
        fine = CompressedFingerprint(width=4, height=4, ridges=[line_curve(0, 0, 8e6, 0)])
        assert len(encode(fine)) == 46

    def test_beyond_32768_still_fits(self):
        wide = CompressedFingerprint(width=65535, height=4, ridges=[line_curve(0, 0, 60000.5, 0)])
        assert decode(encode(wide)).ridges[0].p3.x == 60000.5

    def test_dimension_limits(self):
        with pytest.raises(ValueError):
            CompressedFingerprint(width=0, height=5)
        with pytest.raises(ValueError):
            CompressedFingerprint(width=5, height=65536)


class TestDecode:

    def test_round_trip_is_quantization(self):
        rng = np.random.default_rng(31)
        for _ in range(1000):
            cf = random_fingerprint(rng, int(rng.integers(0, 4)))
            assert decode(encode(cf)) == quantize(cf)

    def test_quantization_error_bound(self):
        rng = np.random.default_rng(32)
        cf = random_fingerprint(rng, 50)
        diff = quantize(cf).control_array() - cf.control_array()
        assert np.max(np.abs(diff)) <= 1 / 512

    def test_decode_then_encode_is_identity(self):
        rng = np.random.default_rng(33)
        data = encode(random_fingerprint(rng, 5))
        assert encode(decode(data)) == data

    def test_empty(self):
        cf = decode(encode(CompressedFingerprint(width=3, height=2)))
        assert (cf.width, cf.height, cf.ridges) == (3, 2, ())

    def test_bad_magic(self):
        data = bytearray(encode(CompressedFingerprint(width=3, height=2)))
        data[3] = ord('X')
        with pytest.raises(BadMagicError):
            decode(bytes(data))

    def test_unsupported_version(self):
        data = bytearray(encode(CompressedFingerprint(width=3, height=2)))
        data[4] = 2
        with pytest.raises(UnsupportedVersionError):
            decode(bytes(data))

    def test_reserved_byte_must_be_zero(self):
        data = bytearray(encode(CompressedFingerprint(width=3, height=2)))
        data[5] = 1
        with pytest.raises(CodecError):
            decode(bytes(data))

    def test_truncated_body(self):
        rng = np.random.default_rng(34)
        data = encode(random_fingerprint(rng, 2))[:46]
        with pytest.raises(TruncatedStreamError) as info:
            decode(data)
        assert info.value.offset == 46
        assert info.value.needed == 78

    def test_truncated_header(self):
        with pytest.raises(TruncatedStreamError) as info:
            decode(b"FPBZ\x01")
        assert info.value.offset == 5

    def test_trailing_bytes(self):
        data = encode(CompressedFingerprint(width=3, height=2)) + b"\x00"
        with pytest.raises(TrailingBytesError):
            decode(data)

    def test_errors_are_value_errors(self):
        with pytest.raises(ValueError):
            decode(b"nope")

    def test_read_header(self):
        rng = np.random.default_rng(35)
        header = read_header(encode(random_fingerprint(rng, 3, width=300, height=400)))
        assert (header.version, header.width, header.height, header.ridge_count) == (1, 300, 400, 3)
        assert header.expected_size == 110


class TestCompressionStats:

    def test_ratios(self):
        assert compression_stats(19400, 2700) == pytest.approx(7.19, abs=0.01)
        assert compression_stats(19200, 2600) == pytest.approx(7.38, abs=0.01)

    @pytest.mark.parametrize("sizes", [(0, 10), (10, 0), (-1, 5)])
    def test_non_positive_sizes(self, sizes):
        with pytest.raises(ValueError):
            compression_stats(*sizes)
