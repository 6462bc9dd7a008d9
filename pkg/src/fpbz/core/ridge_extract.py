#!/usr/bin/env python3
"""
Ridge Extraction Module

Separates a skeleton into individual ridges at bifurcations, labels the
8-connected pieces and covers each one with ordered pixel paths.
"""

from dataclasses import dataclass
from typing import FrozenSet, Iterable, List, Optional, Tuple
import logging
import math

import numpy as np
from scipy import ndimage

from .raster_io import BinaryImage
from .skeleton import BIFURCATION, MinutiaPoint, find_minutiae

logger = logging.getLogger(__name__)

DEFAULT_MIN_RIDGE_PX = 4

Pixel = Tuple[int, int]
Component = FrozenSet[Pixel]

EIGHT_CONNECTED = np.ones((3, 3), dtype=bool)


@dataclass(frozen=True)
class RidgePath:
    """Ordered (x, y) pixels of one ridge; consecutive points are 8-adjacent, none repeated."""
    points: Tuple[Pixel, ...]

    def __post_init__(self):
        points = tuple((int(x), int(y)) for x, y in self.points)
        object.__setattr__(self, 'points', points)
        if len(points) < 2:
            raise ValueError(f"A ridge path needs at least 2 points, got {len(points)}")
        if len(set(points)) != len(points):
            raise ValueError("Ridge path repeats a point")
        for (ax, ay), (bx, by) in zip(points, points[1:]):
            if max(abs(ax - bx), abs(ay - by)) != 1:
                raise ValueError(f"Points ({ax},{ay}) and ({bx},{by}) are not 8-adjacent")

    def __len__(self):
        return len(self.points)

    def as_array(self) -> np.ndarray:
        """(n, 2) float array of x, y."""
        return np.asarray(self.points, dtype=np.float64)


@dataclass(frozen=True)
class RidgeExtraction:
    """
    Intermediate images and the ridge paths. `ridge_pixels` is `separated`
    without the components that were too small to keep.
    """
    skeleton: BinaryImage
    minutiae: List[MinutiaPoint]
    separated: BinaryImage
    ridge_pixels: BinaryImage
    paths: List[RidgePath]


def disconnect_at_minutiae(img: BinaryImage, minutiae: Iterable[MinutiaPoint]) -> BinaryImage:
    """Clear every bifurcation pixel; endings are left in place."""
    bits = img.bits.copy()
    removed = 0
    for m in minutiae:
        if m.kind == BIFURCATION:
            bits[m.y, m.x] = False
            removed += 1
    logger.debug(f"Removed {removed} bifurcation pixels")
    return BinaryImage(width=img.width, height=img.height, bits=bits)


def label_components(img: BinaryImage,
                     min_ridge_px: int = DEFAULT_MIN_RIDGE_PX) -> List[Component]:
    """
    8-connected components as sets of (x, y) pixels.

    Components are ordered by their smallest row-major pixel index; those with
    fewer than `min_ridge_px` pixels are dropped.
    """
    labels, count = ndimage.label(img.bits, structure=EIGHT_CONNECTED)
    if count == 0:
        return []

    flat = labels.ravel()
    order = np.argsort(flat, kind='stable')
    sorted_labels = flat[order]
    starts = np.searchsorted(sorted_labels, np.arange(1, count + 1))
    ends = np.searchsorted(sorted_labels, np.arange(1, count + 1), side='right')

    components = []
    for start, end in zip(starts.tolist(), ends.tolist()):
        if end - start < min_ridge_px:
            continue
        # stable sort keeps each label's indices ascending, so order[start] is its minimum
        indices = order[start:end]
        ys, xs = np.divmod(indices, img.width)
        components.append((int(indices[0]), frozenset(zip(xs.tolist(), ys.tolist()))))

    components.sort(key=lambda item: item[0])
    dropped = count - len(components)
    logger.info(f"Labeled {count} components, kept {len(components)} "
                f"(dropped {dropped} below {min_ridge_px} px)")
    return [c for _, c in components]


def _neighbors(pixel: Pixel, component: Component) -> List[Pixel]:
    x, y = pixel
    return [(x + dx, y + dy)
            for dy in (-1, 0, 1) for dx in (-1, 0, 1)
            if (dx or dy) and (x + dx, y + dy) in component]


def _row_major(pixel: Pixel) -> Tuple[int, int]:
    return pixel[1], pixel[0]


def _turn(previous: Optional[Pixel], current: Pixel, candidate: Pixel) -> float:
    if previous is None:
        return 0.0
    a = math.atan2(current[1] - previous[1], current[0] - previous[0])
    b = math.atan2(candidate[1] - current[1], candidate[0] - current[0])
    return abs((b - a + math.pi) % (2 * math.pi) - math.pi)


def order_ridge_pixels(component: Iterable[Pixel]) -> RidgePath:
    """
    Walk a 1-px-wide component from one end to the other.

    The walk starts at the endpoint (exactly one neighbour) with the smallest
    row-major index; a component without endpoints is a closed loop and is cut
    at its smallest row-major pixel. At every step the next pixel is the
    unvisited neighbour ranked by (diagonal step last, smallest turn, smallest
    row-major index). Pixels the walk never reaches are left off the path;
    `split_component` walks them separately.

    Raises:
        ValueError: If the component has fewer than 2 pixels
    """
    component = frozenset(component)
    if len(component) < 2:
        raise ValueError(f"Component of {len(component)} pixel(s) cannot form a ridge")

    ordered = sorted(component, key=_row_major)
    endpoints = [p for p in ordered if len(_neighbors(p, component)) == 1]
    current = endpoints[0] if endpoints else ordered[0]

    path = [current]
    visited = {current}
    previous = None
    while True:
        candidates = [p for p in _neighbors(current, component) if p not in visited]
        if not candidates:
            break
        step = min(candidates, key=lambda p: (
            p[0] != current[0] and p[1] != current[1],
            round(_turn(previous, current, p), 9),
            _row_major(p),
        ))
        previous, current = current, step
        path.append(current)
        visited.add(current)

    if len(path) < len(component):
        logger.debug(f"Ridge walk reached {len(path)} of {len(component)} pixels")
    return RidgePath(tuple(path))


def _pieces(pixels: Iterable[Pixel]) -> List[Component]:
    """8-connected pieces of a pixel set, ordered by their smallest row-major pixel."""
    remaining = set(pixels)
    pieces = []
    for seed in sorted(remaining, key=_row_major):
        if seed not in remaining:
            continue
        remaining.discard(seed)
        piece = {seed}
        stack = [seed]
        while stack:
            for n in _neighbors(stack.pop(), remaining):
                remaining.discard(n)
                piece.add(n)
                stack.append(n)
        pieces.append(frozenset(piece))
    return pieces


def _attach_stray(stray: Pixel, paths: List[List[Pixel]]) -> None:
    """Extend a path end next to `stray`, or else start a 2-pixel spur from a neighbour."""
    for path in paths:
        if max(abs(path[-1][0] - stray[0]), abs(path[-1][1] - stray[1])) == 1:
            path.append(stray)
            return
        if max(abs(path[0][0] - stray[0]), abs(path[0][1] - stray[1])) == 1:
            path.insert(0, stray)
            return
    walked = frozenset(p for path in paths for p in path)
    anchor = min(_neighbors(stray, walked), key=_row_major)
    paths.append([anchor, stray])


def split_component(component: Iterable[Pixel]) -> List[RidgePath]:
    """
    Cover a component with ridge paths, branches included.

    The component is walked with `order_ridge_pixels`; whatever the walk
    misses is split into its own 8-connected pieces, each walked the same
    way, until every pixel is on a path. Pieces are pairwise disjoint. A
    piece of a single pixel cannot be walked: it extends a path whose end
    touches it, or else becomes a 2-pixel spur that shares its neighbour
    on an existing path.

    Raises:
        ValueError: If the component has fewer than 2 pixels
    """
    component = frozenset(component)
    if len(component) < 2:
        raise ValueError(f"Component of {len(component)} pixel(s) cannot form a ridge")

    paths: List[List[Pixel]] = []
    strays: List[Pixel] = []
    pending = [component]
    while pending:
        piece = pending.pop(0)
        if len(piece) == 1:
            strays.extend(piece)
            continue
        walked = order_ridge_pixels(piece).points
        paths.append(list(walked))
        pending = _pieces(piece.difference(walked)) + pending

    for stray in sorted(strays, key=_row_major):
        _attach_stray(stray, paths)
    if len(paths) > 1:
        logger.debug(f"Component of {len(component)} px split into {len(paths)} ridges")
    return [RidgePath(tuple(p)) for p in paths]


def extract_ridges(skeleton: BinaryImage,
                   min_ridge_px: int = DEFAULT_MIN_RIDGE_PX) -> RidgeExtraction:
    """
    Minutiae -> disconnect -> label -> split into paths, on an already thinned image.

    Every pixel of a kept component lies on some path, so rendering the
    paths gives back `ridge_pixels` exactly. Single-pixel components are
    never kept, whatever `min_ridge_px` says.
    """
    minutiae = find_minutiae(skeleton)
    separated = disconnect_at_minutiae(skeleton, minutiae)
    components = label_components(separated, max(min_ridge_px, 2))

    bits = np.zeros_like(separated.bits)
    paths = []
    for component in components:
        xs, ys = zip(*component)
        bits[list(ys), list(xs)] = True
        paths.extend(split_component(component))
    logger.info(f"Extracted {len(paths)} ridges from {len(components)} components")
    return RidgeExtraction(skeleton=skeleton, minutiae=minutiae, separated=separated,
                           ridge_pixels=BinaryImage(width=separated.width,
                                                    height=separated.height, bits=bits),
                           paths=paths)


def render_ridges(paths: Iterable[RidgePath], width: int, height: int) -> BinaryImage:
    """Image drawn from the ridge coordinates alone."""
    bits = np.zeros((height, width), dtype=bool)
    for path in paths:
        xs, ys = zip(*path.points)
        bits[list(ys), list(xs)] = True
    return BinaryImage(width=width, height=height, bits=bits)


def format_ridge_dump(paths: Iterable[RidgePath]) -> str:
    """One line per ridge: 'id: (x,y) (x,y) ...'."""
    lines = []
    for i, path in enumerate(paths):
        coords = ' '.join(f"({x},{y})" for x, y in path.points)
        lines.append(f"{i}: {coords}")
    return '\n'.join(lines) + ('\n' if lines else '')
