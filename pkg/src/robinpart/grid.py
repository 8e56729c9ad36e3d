"""Uniform Cartesian grids and cell sets.

A :class:`GridSpec` discretizes the box ``D = [0, extent_0] x ... x [0, extent_{d-1}]``
into cubes of side ``h``. Cell ``(i_0, ..., i_{d-1})`` has center ``(i_j + 1/2) h``.
A :class:`CellSet` is a subset of those cells, stored as a boolean mask over the
grid. Adjacency is by shared faces (``2d`` neighbours); the exterior of the grid
is treated as outside of every set.
"""
from __future__ import annotations

from dataclasses import dataclass
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np
from scipy import ndimage

from .errors import (
    DimensionMismatch,
    EmptyBall,
    NonPositiveSpacing,
    SelfIntersectingPolygon,
    SpacingTooCoarse,
)

# face-neighbour directions: (axis, side) with side = +1 / -1
def directions(d: int) -> list[tuple[int, int]]:
    return [(axis, side) for axis in range(d) for side in (1, -1)]


@dataclass(frozen=True)
class GridSpec:
    d: int
    extent: tuple[float, ...]
    h: float
    n: tuple[int, ...]

    @property
    def shape(self) -> tuple[int, ...]:
        return self.n

    @property
    def cell_volume(self) -> float:
        return self.h**self.d

    @property
    def face_area(self) -> float:
        return self.h ** (self.d - 1)

    def centers(self) -> list[np.ndarray]:
        """Cell-center coordinate arrays (``indexing='ij'``), one per axis."""
        axes = [(np.arange(nj) + 0.5) * self.h for nj in self.n]
        return np.meshgrid(*axes, indexing="ij")

    def center_of(self, cell: Sequence[int]) -> np.ndarray:
        return (np.asarray(cell, dtype=float) + 0.5) * self.h

    def full(self) -> "CellSet":
        return CellSet(self, np.ones(self.n, dtype=bool))

    def empty(self) -> "CellSet":
        return CellSet(self, np.zeros(self.n, dtype=bool))

    def to_json(self) -> dict:
        return {"h": self.h, "extent": list(self.extent)}


def make_grid(extent: Sequence[float] | float, h: float) -> GridSpec:
    """Build a grid on ``[0, extent]``; each extent is snapped to ``round(extent/h) * h``."""
    extent = np.atleast_1d(np.asarray(extent, dtype=float))
    if extent.ndim != 1 or not 1 <= extent.size <= 3:
        raise DimensionMismatch(f"grid dimension must be 1, 2 or 3, got extent {extent.tolist()}")
    if not h > 0:
        raise NonPositiveSpacing(f"grid spacing must be positive, got {h}")
    if np.any(extent <= 0):
        raise NonPositiveSpacing(f"box side lengths must be positive, got {extent.tolist()}")
    if h > extent.min() / 2:
        raise SpacingTooCoarse(f"h={h} exceeds half the smallest side {extent.min()}")
    n = tuple(int(round(e / h)) for e in extent)
    if min(n) < 2:
        raise SpacingTooCoarse(f"h={h} gives fewer than 2 cells on an axis")
    return GridSpec(d=extent.size, extent=tuple(nj * h for nj in n), h=float(h), n=n)


class CellSet:
    """A set of grid cells, stored as a read-only boolean mask of shape ``grid.n``."""

    def __init__(self, grid: GridSpec, mask: np.ndarray):
        mask = np.array(mask, dtype=bool, copy=True)
        if mask.shape != grid.n:
            raise DimensionMismatch(f"mask shape {mask.shape} does not match grid {grid.n}")
        mask.setflags(write=False)
        self.grid = grid
        self.mask = mask

    @classmethod
    def from_cells(cls, grid: GridSpec, cells: Iterable[Sequence[int]]) -> "CellSet":
        mask = np.zeros(grid.n, dtype=bool)
        cells = [tuple(c) for c in cells]
        if cells:
            idx = np.array(cells, dtype=int).reshape(len(cells), grid.d)
            if np.any(idx < 0) or np.any(idx >= np.array(grid.n)):
                raise DimensionMismatch("cell index outside the grid")
            mask[tuple(idx.T)] = True
        return cls(grid, mask)

    @cached_property
    def cells(self) -> list[tuple[int, ...]]:
        """Cell indices in lexicographic order."""
        return [tuple(int(v) for v in row) for row in np.argwhere(self.mask)]

    def __len__(self) -> int:
        return int(np.count_nonzero(self.mask))

    def __bool__(self) -> bool:
        return bool(self.mask.any())

    def __contains__(self, cell) -> bool:
        cell = tuple(cell)
        if len(cell) != self.grid.d or any(c < 0 or c >= n for c, n in zip(cell, self.grid.n)):
            return False
        return bool(self.mask[cell])

    def __iter__(self):
        return iter(self.cells)

    def __eq__(self, other) -> bool:
        if not isinstance(other, CellSet):
            return NotImplemented
        return self.grid == other.grid and np.array_equal(self.mask, other.mask)

    def __hash__(self):
        return hash((self.grid, self.mask.tobytes()))

    def __repr__(self) -> str:
        return f"CellSet(n={self.grid.n}, h={self.grid.h}, cells={len(self)})"

    def __and__(self, other: "CellSet") -> "CellSet":
        return CellSet(self.grid, self.mask & other.mask)

    def __or__(self, other: "CellSet") -> "CellSet":
        return CellSet(self.grid, self.mask | other.mask)

    def __sub__(self, other: "CellSet") -> "CellSet":
        return CellSet(self.grid, self.mask & ~other.mask)


def neighbor_mask(mask: np.ndarray, axis: int, side: int) -> np.ndarray:
    """``out[c] = mask[c + side * e_axis]``, False where the neighbour is off-grid."""
    out = np.zeros_like(mask)
    src = [slice(None)] * mask.ndim
    dst = [slice(None)] * mask.ndim
    if side > 0:
        dst[axis], src[axis] = slice(None, -1), slice(1, None)
    else:
        dst[axis], src[axis] = slice(1, None), slice(None, -1)
    out[tuple(dst)] = mask[tuple(src)]
    return out


def boundary_faces(S: CellSet) -> dict[tuple[int, int], np.ndarray]:
    """Boolean masks of cells of ``S`` whose ``(axis, side)`` face is a boundary face."""
    return {
        (axis, side): S.mask & ~neighbor_mask(S.mask, axis, side)
        for axis, side in directions(S.grid.d)
    }


def interior_face_pairs(mask: np.ndarray, axis: int) -> np.ndarray:
    """Mask over lower cells ``c`` such that ``c`` and ``c + e_axis`` are both in the set."""
    return mask & neighbor_mask(mask, axis, 1)


def face_weights(S: CellSet, weighting: str = "staircase", sigma: float = 1.0) -> dict[tuple[int, int], np.ndarray]:
    """Per-face weights (dimensionless, multiply by ``h**(d-1)``) of the boundary faces of ``S``.

    ``"staircase"`` gives weight 1 to every boundary face, so face sums converge to the
    l1 perimeter. ``"isotropic"`` divides by the l1 norm of an estimated unit normal,
    taken from the gradient of the Gaussian-smoothed indicator (``sigma`` in cells);
    face sums then approximate the Euclidean surface measure. Flat axis-aligned
    boundaries get weight exactly 1 away from corners.
    """
    faces = boundary_faces(S)
    if weighting == "staircase":
        return {key: f.astype(float) for key, f in faces.items()}
    if weighting != "isotropic":
        raise ValueError(f"unknown boundary weighting {weighting!r}")
    d = S.grid.d
    if d == 1:
        return {key: f.astype(float) for key, f in faces.items()}
    pad = int(np.ceil(4 * sigma)) + 2
    smooth = ndimage.gaussian_filter(np.pad(S.mask.astype(float), pad), sigma, mode="constant")
    grads = np.gradient(smooth)
    out = {}
    for (axis, side), f in faces.items():
        w = np.zeros(S.grid.n)
        idx = np.argwhere(f)
        if len(idx):
            inner = idx + pad
            outer = inner.copy()
            outer[:, axis] += side
            normal = np.empty((len(idx), d))
            for j in range(d):
                if j == axis:
                    normal[:, j] = side * (smooth[tuple(outer.T)] - smooth[tuple(inner.T)])
                else:
                    normal[:, j] = 0.5 * (grads[j][tuple(inner.T)] + grads[j][tuple(outer.T)])
            norm = np.linalg.norm(normal, axis=1)
            # the axis component is strictly negative across a boundary face, so norm > 0
            normal /= norm[:, None]
            w[tuple(idx.T)] = 1.0 / np.abs(normal).sum(axis=1)
        out[(axis, side)] = w
    return out


def volume(S: CellSet) -> float:
    return S.grid.cell_volume * len(S)


def boundary_measure(S: CellSet, weighting: str = "staircase") -> float:
    """Discrete ``H^{d-1}(boundary of S)``, faces to the grid exterior included."""
    weights = face_weights(S, weighting)
    return S.grid.face_area * float(sum(w.sum() for w in weights.values()))


def rasterize_ball(grid: GridSpec, center: Sequence[float], radius: float) -> CellSet:
    """Cells whose centers lie strictly inside the open ball."""
    center = np.atleast_1d(np.asarray(center, dtype=float))
    if center.size != grid.d:
        raise DimensionMismatch(f"center has {center.size} coordinates, grid has d={grid.d}")
    if not radius > 0:
        raise ValueError("radius must be positive")
    dist2 = sum((x - c) ** 2 for x, c in zip(grid.centers(), center))
    return CellSet(grid, dist2 < radius**2)


def rasterize_box(grid: GridSpec, lower: Sequence[float], upper: Sequence[float]) -> CellSet:
    """Cells whose centers lie strictly inside the axis-aligned box ``(lower, upper)``."""
    inside = np.ones(grid.n, dtype=bool)
    for x, lo, hi in zip(grid.centers(), lower, upper):
        inside &= (x > lo) & (x < hi)
    return CellSet(grid, inside)


def _segments_cross(p1, p2, q1, q2) -> bool:
    def orient(a, b, c):
        v = (b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0])
        return 0 if abs(v) < 1e-14 else (1 if v > 0 else -1)

    def on_segment(a, b, c):
        return min(a[0], b[0]) - 1e-14 <= c[0] <= max(a[0], b[0]) + 1e-14 and min(a[1], b[1]) - 1e-14 <= c[1] <= max(a[1], b[1]) + 1e-14

    o1, o2, o3, o4 = orient(p1, p2, q1), orient(p1, p2, q2), orient(q1, q2, p1), orient(q1, q2, p2)
    if o1 != o2 and o3 != o4:
        return True
    return (
        (o1 == 0 and on_segment(p1, p2, q1))
        or (o2 == 0 and on_segment(p1, p2, q2))
        or (o3 == 0 and on_segment(q1, q2, p1))
        or (o4 == 0 and on_segment(q1, q2, p2))
    )


def check_simple_polygon(vertices: np.ndarray) -> None:
    n = len(vertices)
    if n < 3:
        raise SelfIntersectingPolygon("a polygon needs at least 3 vertices")
    if len({tuple(v) for v in vertices.tolist()}) != n:
        raise SelfIntersectingPolygon("repeated vertex")
    edges = [(vertices[i], vertices[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if _segments_cross(*edges[i], *edges[j]):
                raise SelfIntersectingPolygon(f"edges {i} and {j} intersect")


def polygon_area(vertices: Sequence[Sequence[float]]) -> float:
    v = np.asarray(vertices, dtype=float)
    x, y = v[:, 0], v[:, 1]
    return 0.5 * float(np.dot(x, np.roll(y, -1)) - np.dot(y, np.roll(x, -1)))


def rasterize_polygon(grid: GridSpec, vertices: Sequence[Sequence[float]]) -> CellSet:
    """Cells whose centers are strictly inside a simple polygon (even-odd rule)."""
    if grid.d != 2:
        raise DimensionMismatch("polygon rasterization needs a 2D grid")
    v = np.asarray(vertices, dtype=float)
    if v.ndim != 2 or v.shape[1] != 2:
        raise DimensionMismatch("vertices must be a list of 2D points")
    check_simple_polygon(v)
    x, y = grid.centers()
    inside = np.zeros(grid.n, dtype=bool)
    on_edge = np.zeros(grid.n, dtype=bool)
    for (x1, y1), (x2, y2) in zip(v, np.roll(v, -1, axis=0)):
        crosses = (y1 > y) != (y2 > y)
        with np.errstate(divide="ignore", invalid="ignore"):
            xint = x1 + (y - y1) * (x2 - x1) / (y2 - y1)
        inside ^= crosses & (x < xint)
        # centers exactly on an edge are not strictly inside
        cross = (x2 - x1) * (y - y1) - (y2 - y1) * (x - x1)
        within = (np.minimum(x1, x2) <= x) & (x <= np.maximum(x1, x2)) & (np.minimum(y1, y2) <= y) & (y <= np.maximum(y1, y2))
        on_edge |= within & (np.abs(cross) <= 1e-12 * max(1.0, np.hypot(x2 - x1, y2 - y1)))
    return CellSet(grid, inside & ~on_edge)


def regular_polygon(n_sides: int, area: float = 1.0, center=(0.0, 0.0), rotation: float = 0.0) -> np.ndarray:
    """Vertices (counter-clockwise) of a regular polygon with the given area."""
    circumradius = np.sqrt(2 * area / (n_sides * np.sin(2 * np.pi / n_sides)))
    angles = rotation + 2 * np.pi * np.arange(n_sides) / n_sides
    return np.column_stack([center[0] + circumradius * np.cos(angles), center[1] + circumradius * np.sin(angles)])


def _label(mask: np.ndarray) -> tuple[np.ndarray, int]:
    # default structuring element = face adjacency
    return ndimage.label(mask)


def connected_components(S: CellSet) -> list[CellSet]:
    """Face-adjacency components, largest first; ties by smallest lexicographic cell."""
    labels, count = _label(S.mask)
    if count == 0:
        return []
    flat = labels.ravel()
    sizes = np.bincount(flat, minlength=count + 1)[1:]
    nz = np.flatnonzero(flat)
    first = np.full(count, flat.size)
    np.minimum.at(first, flat[nz] - 1, nz)
    order = sorted(range(count), key=lambda c: (-sizes[c], first[c]))
    return [CellSet(S.grid, labels == c + 1) for c in order]


def is_connected(S: CellSet) -> bool:
    return _label(S.mask)[1] == 1


def relative_isoperimetric_ratio(S: CellSet, ball: CellSet) -> float:
    """``min(|B n S|, |B \\ S|)^((d-1)/d) / H^{d-1}(boundary of S inside B)``.

    A boundary face of ``S`` counts as inside ``B`` when both cells sharing it lie in ``B``.
    """
    if not ball:
        raise EmptyBall("the probing ball contains no cells")
    grid = S.grid
    d = grid.d
    inner = volume(S & ball)
    outer = volume(ball - S)
    numerator = min(inner, outer) ** ((d - 1) / d)
    if numerator == 0:
        return 0.0
    count = 0
    for (axis, side), faces in boundary_faces(S).items():
        count += int(np.count_nonzero(faces & ball.mask & neighbor_mask(ball.mask, axis, side)))
    if count == 0:
        return float("inf")
    return numerator / (grid.face_area * count)
