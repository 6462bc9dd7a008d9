#!/usr/bin/env python3
"""
Skeleton Module

Two-subiteration parallel thinning on a checkerboard of subfields, plus
crossing-number minutiae detection on the resulting skeleton.

Neighbour numbering: x1 = east, then counter-clockwise (x3 = north,
x5 = west, x7 = south), indices cyclic so x9 == x1. A neighbourhood is also
addressed by its code sum(x_i << (i - 1)), which indexes the 256-entry
deletion tables used by `thin`.
"""

from dataclasses import dataclass
from typing import List, Tuple
import logging

import numpy as np

from .raster_io import BinaryImage

logger = logging.getLogger(__name__)

# (dx, dy) of x1..x8 with y pointing down
NEIGHBOR_OFFSETS: Tuple[Tuple[int, int], ...] = (
    (1, 0), (1, -1), (0, -1), (-1, -1), (-1, 0), (-1, 1), (0, 1), (1, 1),
)

ENDING = 'ending'
BIFURCATION = 'bifurcation'


@dataclass(frozen=True)
class Neighborhood:
    """Values x1..x8 of the eight neighbours of a pixel."""
    x: Tuple[int, ...]

    def __post_init__(self):
        if len(self.x) != 8 or any(v not in (0, 1) for v in self.x):
            raise ValueError(f"Neighborhood needs 8 values in {{0,1}}, got {self.x}")

    @classmethod
    def from_code(cls, code: int) -> 'Neighborhood':
        return cls(tuple((code >> i) & 1 for i in range(8)))

    @property
    def code(self) -> int:
        return sum(v << i for i, v in enumerate(self.x))

    def __getitem__(self, i: int) -> int:
        """1-based cyclic access: n[1] is x1, n[9] is x1 again."""
        return self.x[(i - 1) % 8]


@dataclass(frozen=True)
class MinutiaPoint:
    x: int
    y: int
    kind: str


def condition_g1(n: Neighborhood) -> bool:
    """X_H(p) == 1 where b_i = 1 iff x_{2i-1} = 0 and (x_{2i} or x_{2i+1})."""
    x_h = sum(1 for i in range(1, 5)
              if n[2 * i - 1] == 0 and (n[2 * i] == 1 or n[2 * i + 1] == 1))
    return x_h == 1


def condition_g2(n: Neighborhood) -> bool:
    """2 <= min(n1, n2) <= 3."""
    n1 = sum(n[2 * k - 1] | n[2 * k] for k in range(1, 5))
    n2 = sum(n[2 * k] | n[2 * k + 1] for k in range(1, 5))
    return 2 <= min(n1, n2) <= 3


def condition_g3(n: Neighborhood) -> bool:
    """(x2 or x3 or not x8) and x1 == 0."""
    return ((n[2] | n[3] | (1 - n[8])) & n[1]) == 0


def condition_g3_prime(n: Neighborhood) -> bool:
    """(x6 or x7 or not x4) and x5 == 0.

    The negated operand is x4, the 180 degree rotation of x8 in G3.
    """
    return ((n[6] | n[7] | (1 - n[4])) & n[5]) == 0


def _build_table(third_condition) -> np.ndarray:
    table = np.zeros(256, dtype=bool)
    for code in range(256):
        n = Neighborhood.from_code(code)
        table[code] = condition_g1(n) and condition_g2(n) and third_condition(n)
    return table


FIRST_PASS_TABLE = _build_table(condition_g3)
SECOND_PASS_TABLE = _build_table(condition_g3_prime)
SIMPLE_TABLE = np.array([condition_g1(Neighborhood.from_code(c)) for c in range(256)], dtype=bool)

CROSSING_TABLE = np.array([
    sum(abs(Neighborhood.from_code(c)[i] - Neighborhood.from_code(c)[i + 1])
        for i in range(1, 9)) // 2
    for c in range(256)
], dtype=np.uint8)


def neighborhood_codes(bits: np.ndarray) -> np.ndarray:
    """Neighbourhood code of every pixel; outside the image reads as 0."""
    h, w = bits.shape
    padded = np.pad(bits.astype(np.uint8), 1)
    codes = np.zeros((h, w), dtype=np.uint8)
    for i, (dx, dy) in enumerate(NEIGHBOR_OFFSETS):
        codes |= np.left_shift(padded[1 + dy:1 + dy + h, 1 + dx:1 + dx + w], np.uint8(i))
    return codes


def neighborhood_at(img: BinaryImage, x: int, y: int) -> Neighborhood:
    values = []
    for dx, dy in NEIGHBOR_OFFSETS:
        nx, ny = x + dx, y + dy
        inside = 0 <= nx < img.width and 0 <= ny < img.height
        values.append(int(img.bits[ny, nx]) if inside else 0)
    return Neighborhood(tuple(values))


def _subiteration(bits: np.ndarray, subfield: np.ndarray, table: np.ndarray) -> np.ndarray:
    # decide from the snapshot, then delete
    delete = bits & subfield & table[neighborhood_codes(bits)]
    return delete


def _code_at(bits: np.ndarray, x: int, y: int) -> int:
    h, w = bits.shape
    code = 0
    for i, (dx, dy) in enumerate(NEIGHBOR_OFFSETS):
        nx, ny = x + dx, y + dy
        if 0 <= nx < w and 0 <= ny < h and bits[ny, nx]:
            code |= 1 << i
    return code


def full_blocks(bits: np.ndarray) -> np.ndarray:
    """Top-left (y, x) corners of fully set 2x2 squares, row-major."""
    full = bits[:-1, :-1] & bits[1:, :-1] & bits[:-1, 1:] & bits[1:, 1:]
    return np.argwhere(full)


def clear_square_blocks(bits: np.ndarray) -> int:
    """
    Delete one simple pixel (X_H == 1) from every full 2x2 square, in place.

    Squares are visited by their top-left corner in row-major order and
    their pixels tried top-left, top-right, bottom-left, bottom-right. Each
    deletion is decided on the current image, so topology is preserved. A
    square whose four pixels all join separate branches has no simple pixel
    and stays.

    Returns:
        Number of pixels deleted
    """
    removed = 0
    for by, bx in full_blocks(bits).tolist():
        if not bits[by:by + 2, bx:bx + 2].all():
            continue
        for y, x in ((by, bx), (by, bx + 1), (by + 1, bx), (by + 1, bx + 1)):
            if SIMPLE_TABLE[_code_at(bits, x, y)]:
                bits[y, x] = False
                removed += 1
                break
    return removed


def _thin_subfields(bits: np.ndarray, even: np.ndarray, odd: np.ndarray) -> int:
    iterations = 0
    while True:
        iterations += 1
        first = _subiteration(bits, even, FIRST_PASS_TABLE)
        bits &= ~first
        second = _subiteration(bits, odd, SECOND_PASS_TABLE)
        bits &= ~second
        if not first.any() and not second.any():
            return iterations


def thin_subfields(img: BinaryImage) -> BinaryImage:
    """
    The subiteration pair alone, run to a fixpoint.

    On noisy input this leaves full 2x2 squares: a square pixel that passes
    G1 and G2 can still be held by G3/G3' or by its subfield parity.
    """
    bits = img.bits.copy()
    ys, xs = np.indices(bits.shape)
    even = (xs + ys) % 2 == 0
    _thin_subfields(bits, even, ~even)
    return BinaryImage(width=img.width, height=img.height, bits=bits)


def thin(img: BinaryImage) -> BinaryImage:
    """
    Thin to a 1-pixel-wide skeleton.

    One iteration runs two subiterations: pixels with (x + y) even are deleted
    when G1, G2 and G3 hold, then pixels with (x + y) odd when G1, G2 and G3'
    hold. At the subiteration fixpoint, `clear_square_blocks` removes a simple
    pixel from each full 2x2 square, and the subiterations run again until
    neither step deletes anything. Squares without a simple pixel are kept
    so that no component is split.
    """
    bits = img.bits.copy()
    ys, xs = np.indices(bits.shape)
    even = (xs + ys) % 2 == 0
    odd = ~even

    iterations = 0
    squares = 0
    while True:
        iterations += _thin_subfields(bits, even, odd)
        cleared = clear_square_blocks(bits)
        squares += cleared
        if not cleared:
            break

    logger.debug(f"Thinning reached a fixpoint after {iterations} iterations "
                 f"({squares} square pixels cleared), "
                 f"{int(bits.sum())} of {img.count()} pixels kept")
    return BinaryImage(width=img.width, height=img.height, bits=bits)


def crossing_number(img: BinaryImage, x: int, y: int) -> int:
    """
    CN = 1/2 * sum |x_i - x_{i+1}| over the cyclic neighbour sequence.

    Raises:
        ValueError: If (x, y) is not a foreground pixel
    """
    if not (0 <= x < img.width and 0 <= y < img.height) or not img.bits[y, x]:
        raise ValueError(f"Pixel ({x}, {y}) is not foreground")
    return int(CROSSING_TABLE[neighborhood_at(img, x, y).code])


def crossing_numbers(img: BinaryImage) -> np.ndarray:
    """CN for every pixel (meaningful on foreground pixels only)."""
    return CROSSING_TABLE[neighborhood_codes(img.bits)]


def find_minutiae(img: BinaryImage) -> List[MinutiaPoint]:
    """
    Endings (CN = 1) and bifurcations (CN >= 3) of a thinned image.

    Pixels within 1 px of the image border are skipped. Results are in
    row-major order.
    """
    cn = crossing_numbers(img)
    interior = np.zeros_like(img.bits)
    interior[1:-1, 1:-1] = True
    candidates = img.bits & interior

    minutiae = []
    ys, xs = np.nonzero(candidates & ((cn == 1) | (cn >= 3)))
    for x, y in zip(xs.tolist(), ys.tolist()):
        kind = ENDING if cn[y, x] == 1 else BIFURCATION
        minutiae.append(MinutiaPoint(x=x, y=y, kind=kind))

    endings = sum(1 for m in minutiae if m.kind == ENDING)
    logger.info(f"Found {endings} endings and {len(minutiae) - endings} bifurcations")
    return minutiae
