#!/usr/bin/env python3
"""
Tests for PGM reading/writing and the raster value types.
"""

import pytest
import numpy as np
import sys
import os

# Add parent directory to path for imports
sys.path.insert(0, os.path.dirname(os.path.dirname(os.path.abspath(__file__))))

from fpbz.core.raster_io import (
    BinaryImage, GrayImage, PgmDimensionError, PgmMagicError, PgmMaxvalError,
    PgmTruncatedError, binary_to_gray, gray_to_binary, read_pgm, write_pgm,
)


class TestReadPgm:
    """Parsing of binary and ASCII PGM streams."""

    def test_binary_pgm(self):
        data = b"P5\n3 2\n255\n" + bytes([0, 10, 20, 30, 40, 255])
        img = read_pgm(data)
        assert (img.width, img.height) == (3, 2)
        assert img.pixel(0, 0) == 0
        assert img.pixel(2, 0) == 20
        assert img.pixel(0, 1) == 30
        assert img.pixel(2, 1) == 255

    def test_ascii_pgm_with_comments(self):
        data = b"P2\n# made by hand\n3 2 # size\n255\n0 1 2\n3 4 5\n"
        img = read_pgm(data)
        assert img.pixels.tolist() == [[0, 1, 2], [3, 4, 5]]

    def test_comment_in_binary_header(self):
        data = b"P5\n# comment\n2 1\n255\n" + bytes([7, 9])
        img = read_pgm(data)
        assert img.pixels.tolist() == [[7, 9]]

    def test_small_maxval_keeps_samples(self):
        data = b"P5\n2 1\n15\n" + bytes([3, 15])
        assert read_pgm(data).pixels.tolist() == [[3, 15]]

    def test_sample_data_may_start_with_whitespace_byte(self):
        # sample value 32 is an ASCII space and must not be skipped
        data = b"P5\n2 1\n255\n" + bytes([32, 10])
        assert read_pgm(data).pixels.tolist() == [[32, 10]]

    @pytest.mark.parametrize("data", [b"P6\n1 1\n255\n\x00", b"", b"XX"])
    def test_bad_magic(self, data):
        with pytest.raises(PgmMagicError):
            read_pgm(data)

    @pytest.mark.parametrize("maxval", [b"0", b"256", b"65535"])
    def test_bad_maxval(self, maxval):
        with pytest.raises(PgmMaxvalError):
            read_pgm(b"P5\n1 1\n" + maxval + b"\n\x00")

    def test_sample_above_maxval(self):
        with pytest.raises(PgmMaxvalError):
            read_pgm(b"P2\n2 1\n15\n3 16\n")

    def test_truncated_samples(self):
        with pytest.raises(PgmTruncatedError):
            read_pgm(b"P5\n2 2\n255\n" + bytes(3))
        with pytest.raises(PgmTruncatedError):
            read_pgm(b"P2\n2 2\n255\n1 2 3\n")

    def test_truncated_header(self):
        with pytest.raises(PgmTruncatedError):
            read_pgm(b"P5\n2")

    @pytest.mark.parametrize("size", [b"0 2", b"2 0", b"70000 1"])
    def test_bad_dimensions(self, size):
        with pytest.raises(PgmDimensionError):
            read_pgm(b"P5\n" + size + b"\n255\n")

    def test_errors_are_value_errors(self):
        with pytest.raises(ValueError):
            read_pgm(b"P7")


class TestWritePgm:
    """Serialization and the read/write laws."""

    def test_exact_bytes(self):
        img = GrayImage.from_array(np.array([[1, 2, 3], [4, 5, 6]], dtype=np.uint8))
        assert write_pgm(img) == b"P5\n3 2\n255\n" + bytes([1, 2, 3, 4, 5, 6])

    def test_read_back_random_images(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            h, w = rng.integers(1, 30, size=2)
            img = GrayImage.from_array(rng.integers(0, 256, size=(h, w)).astype(np.uint8))
            assert read_pgm(write_pgm(img)) == img

    def test_ascii_and_binary_agree(self):
        ascii_img = read_pgm(b"P2 2 2 255 9 8 7 6")
        binary_img = read_pgm(b"P5 2 2 255 " + bytes([9, 8, 7, 6]))
        assert ascii_img == binary_img


class TestImageTypes:
    """GrayImage / BinaryImage construction and conversions."""

    def test_pixels_are_read_only(self):
        img = GrayImage.from_array(np.zeros((2, 2), dtype=np.uint8))
        with pytest.raises(ValueError):
            img.pixels[0, 0] = 1

    def test_pixel_count_must_match(self):
        with pytest.raises(ValueError):
            GrayImage(width=3, height=3, pixels=np.zeros(8, dtype=np.uint8))

    def test_from_points_and_points_order(self):
        img = BinaryImage.from_points(4, 3, [(3, 2), (0, 1), (2, 0), (9, 9)])
        assert img.points() == [(2, 0), (0, 1), (3, 2)]
        assert img.count() == 3

    def test_binary_to_gray_levels(self):
        img = BinaryImage.from_points(2, 1, [(1, 0)])
        gray = binary_to_gray(img, fg=0, bg=255)
        assert gray.pixels.tolist() == [[255, 0]]

    def test_binary_to_gray_rejects_equal_levels(self):
        with pytest.raises(ValueError):
            binary_to_gray(BinaryImage.empty(2, 2), fg=7, bg=7)

    def test_gray_binary_round_trip(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            bits = rng.random((9, 13)) < 0.4
            img = BinaryImage.from_array(bits)
            assert gray_to_binary(binary_to_gray(img, fg=0, bg=255)) == img

    def test_gray_to_binary_level(self):
        gray = GrayImage.from_array(np.array([[0, 127, 128, 255]], dtype=np.uint8))
        assert gray_to_binary(gray).bits.tolist() == [[True, True, False, False]]

    def test_issubset(self):
        small = BinaryImage.from_points(3, 3, [(1, 1)])
        big = BinaryImage.from_points(3, 3, [(1, 1), (2, 2)])
        assert small.issubset(big)
        assert not big.issubset(small)
