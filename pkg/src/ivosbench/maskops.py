"""Pixel-level mask primitives shared by every other module.

Masks are plain numpy arrays: a label mask is a 2-D integer grid where 0 is
background and positive values are object ids; a binary mask is a 2-D boolean
grid of the same shape. Coordinates are (x, y) pairs with x indexing columns
and y indexing rows. Every tie anywhere in this module is broken by (y, x)
ascending so repeated runs are bit-for-bit identical.

Distance convention: Euclidean distance between pixel centers, measured to
the nearest false cell, with everything outside the frame counting as false.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import ndimage

LabelMask = np.ndarray
BinaryMask = np.ndarray
PixelCoord = tuple[int, int]

_STRUCT_4 = np.array([[0, 1, 0], [1, 1, 1], [0, 1, 0]], dtype=bool)
_STRUCT_8 = np.ones((3, 3), dtype=bool)


def round_half_up(value: float) -> int:
    """Round a non-negative value with .5 going up (never banker's)."""
    return int(np.floor(value + 0.5))


@dataclass(frozen=True)
class Region:
    """One connected component: its pixels, area, and tight bounding box."""

    pixels: tuple[PixelCoord, ...]  # sorted by (y, x)
    area: int
    bounding_box: tuple[int, int, int, int]  # (x_min, y_min, x_max, y_max) inclusive

    @classmethod
    def from_pixels(cls, pixels) -> "Region":
        pts = tuple(sorted(((int(x), int(y)) for x, y in pixels), key=lambda p: (p[1], p[0])))
        if not pts:
            raise ValueError("a region must contain at least one pixel")
        xs = [p[0] for p in pts]
        ys = [p[1] for p in pts]
        return cls(pixels=pts, area=len(pts), bounding_box=(min(xs), min(ys), max(xs), max(ys)))


def as_binary(mask) -> BinaryMask:
    m = np.asarray(mask)
    if m.ndim != 2:
        raise ValueError(f"mask must be 2-D, got shape {m.shape}")
    return m.astype(bool)


def object_mask(labels: LabelMask, object_id: int) -> BinaryMask:
    """Binary view of one object id in a label mask."""
    if object_id < 1:
        raise ValueError(f"object_id must be >= 1, got {object_id}")
    arr = np.asarray(labels)
    if arr.ndim != 2:
        raise ValueError(f"label mask must be 2-D, got shape {arr.shape}")
    return arr == object_id


def connected_components(mask: BinaryMask, connectivity: int = 8) -> list[Region]:
    """Maximal connected regions of the true pixels.

    Returned in area-descending order, ties broken by (y_min, x_min)
    ascending. An empty mask yields an empty list.
    """
    if connectivity not in (4, 8):
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    m = as_binary(mask)
    structure = _STRUCT_8 if connectivity == 8 else _STRUCT_4
    labeled, count = ndimage.label(m, structure=structure)
    regions: list[Region] = []
    for lbl, sl in enumerate(ndimage.find_objects(labeled), start=1):
        ys, xs = np.nonzero(labeled[sl] == lbl)
        ys = ys + sl[0].start
        xs = xs + sl[1].start
        # np.nonzero is row-major, i.e. already sorted by (y, x)
        pixels = tuple((int(x), int(y)) for x, y in zip(xs, ys))
        regions.append(
            Region(
                pixels=pixels,
                area=len(pixels),
                bounding_box=(int(xs.min()), int(ys.min()), int(xs.max()), int(ys.max())),
            )
        )
    regions.sort(key=lambda r: (-r.area, r.bounding_box[1], r.bounding_box[0]))
    return regions


def region_to_mask(region: Region, shape: tuple[int, int]) -> BinaryMask:
    """Paint a region back onto an all-false canvas of the given (h, w) shape."""
    out = np.zeros(shape, dtype=bool)
    for x, y in region.pixels:
        out[y, x] = True
    return out


def component_containing(mask: BinaryMask, position: PixelCoord, connectivity: int = 8) -> BinaryMask:
    """The connected component of ``mask`` containing ``position``, as a mask."""
    if connectivity not in (4, 8):
        raise ValueError(f"connectivity must be 4 or 8, got {connectivity}")
    m = as_binary(mask)
    x, y = position
    labeled, _ = ndimage.label(m, structure=_STRUCT_8 if connectivity == 8 else _STRUCT_4)
    label = labeled[y, x]
    if label == 0:
        raise ValueError(f"no component contains ({x}, {y})")
    return labeled == label


def boundary(mask: BinaryMask) -> BinaryMask:
    """Pixels that are true and 4-adjacent to a false or out-of-bounds cell."""
    m = as_binary(mask)
    padded = np.pad(m, 1, constant_values=False)
    interior = (
        padded[:-2, 1:-1] & padded[2:, 1:-1] & padded[1:-1, :-2] & padded[1:-1, 2:]
    )
    return m & ~interior


def distance_transform(mask: BinaryMask) -> np.ndarray:
    """Euclidean distance of each true pixel to the nearest false cell.

    Out-of-bounds counts as false, so a lone true pixel has distance 1.
    False pixels map to 0. Exact (scipy's exact EDT, not a chamfer
    approximation).
    """
    m = as_binary(mask)
    padded = np.pad(m, 1, constant_values=False)
    dist = ndimage.distance_transform_edt(padded)
    return dist[1:-1, 1:-1]


def interior_center(region: Region, within: BinaryMask) -> PixelCoord:
    """Deepest interior pixel of a region: the member with maximal distance
    to the outside of ``within``, ties broken by (y, x) ascending."""
    w = as_binary(within)
    for x, y in region.pixels:
        if not w[y, x]:
            raise ValueError(f"region pixel ({x}, {y}) lies outside the containing mask")
    dist = distance_transform(w)
    best: PixelCoord | None = None
    best_d = -1.0
    for x, y in region.pixels:  # (y, x) order, so the first strict max wins ties
        d = dist[y, x]
        if d > best_d:
            best_d = d
            best = (x, y)
    assert best is not None
    return best


def dilate(mask: BinaryMask, radius: int) -> BinaryMask:
    """Chebyshev (square structuring element) dilation by ``radius`` pixels."""
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    m = as_binary(mask)
    if radius == 0:
        return m.copy()
    out = ndimage.maximum_filter(m.astype(np.uint8), size=2 * radius + 1, mode="constant", cval=0)
    return out.astype(bool)


def erode(mask: BinaryMask, radius: int) -> BinaryMask:
    """Chebyshev erosion by ``radius`` pixels; out-of-bounds counts as false."""
    if radius < 0:
        raise ValueError(f"radius must be >= 0, got {radius}")
    m = as_binary(mask)
    if radius == 0:
        return m.copy()
    out = ndimage.minimum_filter(m.astype(np.uint8), size=2 * radius + 1, mode="constant", cval=0)
    return out.astype(bool)


def _neighbor_views(padded: np.ndarray):
    # p2..p9 clockwise starting north of each cell
    return (
        padded[:-2, 1:-1],  # N
        padded[:-2, 2:],    # NE
        padded[1:-1, 2:],   # E
        padded[2:, 2:],     # SE
        padded[2:, 1:-1],   # S
        padded[2:, :-2],    # SW
        padded[1:-1, :-2],  # W
        padded[:-2, :-2],   # NW
    )


def _thin(mask: BinaryMask) -> BinaryMask:
    """Two-subiteration thinning to a 1-pixel-wide skeleton."""
    img = as_binary(mask).copy()
    while True:
        changed = False
        for step in (0, 1):
            padded = np.pad(img, 1, constant_values=False)
            p2, p3, p4, p5, p6, p7, p8, p9 = _neighbor_views(padded)
            seq = np.stack([p2, p3, p4, p5, p6, p7, p8, p9])
            b = seq.sum(axis=0)
            transitions = ((~seq) & np.roll(seq, -1, axis=0)).sum(axis=0)
            if step == 0:
                cond = ~(p2 & p4 & p6) & ~(p4 & p6 & p8)
            else:
                cond = ~(p2 & p4 & p8) & ~(p2 & p6 & p8)
            delete = img & (b >= 2) & (b <= 6) & (transitions == 1) & cond
            if delete.any():
                img &= ~delete
                changed = True
        if not changed:
            return img


def _skeleton_path(skeleton: BinaryMask) -> list[PixelCoord]:
    """Order skeleton pixels by walking from the endpoint with smallest (y, x)."""
    ys, xs = np.nonzero(skeleton)
    points = [(int(x), int(y)) for x, y in zip(xs, ys)]
    points.sort(key=lambda p: (p[1], p[0]))
    remaining = set(points)

    def neighbors(p: PixelCoord) -> list[PixelCoord]:
        x, y = p
        out = []
        for dy in (-1, 0, 1):
            for dx in (-1, 0, 1):
                if dx == 0 and dy == 0:
                    continue
                q = (x + dx, y + dy)
                if q in remaining:
                    out.append(q)
        out.sort(key=lambda q: (q[1], q[0]))
        return out

    degree = {p: len(neighbors(p)) for p in points}
    path: list[PixelCoord] = []
    while remaining:
        candidates = sorted(
            (p for p in points if p in remaining), key=lambda p: (degree[p] > 1, p[1], p[0])
        )
        stack = [candidates[0]]
        while stack:
            p = stack.pop()
            if p not in remaining:
                continue
            remaining.discard(p)
            path.append(p)
            for q in reversed(neighbors(p)):
                stack.append(q)
    return path


def skeletonize(region: Region, within: BinaryMask) -> list[PixelCoord]:
    """Thin a region to a 1-pixel-wide path, ordered by a deterministic walk.

    The result is always nonempty and contained in the region; small blobs
    that thinning would annihilate fall back to the deepest interior pixel.
    """
    w = as_binary(within)
    sub = region_to_mask(region, w.shape)
    skeleton = _thin(sub)
    if not skeleton.any():
        return [interior_center(region, sub)]
    return _skeleton_path(skeleton)
