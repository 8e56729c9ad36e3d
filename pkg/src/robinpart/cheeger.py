"""Cheeger constants of convex planar sets via the inner parallel body.

For a convex planar set the Cheeger constant is ``1/t`` where ``t`` is the unique
positive root of ``|Omega_{-t}| = pi t^2`` (``Omega_{-t}``: points at distance at
least ``t`` from the complement).
"""
from __future__ import annotations

import math
from typing import Callable, Sequence

import numpy as np

from .errors import NotConvex
from .grid import polygon_area


def _orient_ccw(vertices: np.ndarray) -> np.ndarray:
    return vertices if polygon_area(vertices) > 0 else vertices[::-1]


def check_convex(vertices: Sequence[Sequence[float]]) -> np.ndarray:
    """Return the vertices in counter-clockwise order; raise NotConvex otherwise."""
    v = np.asarray(vertices, dtype=float)
    if v.ndim != 2 or v.shape[1] != 2 or len(v) < 3:
        raise NotConvex("need at least three 2D vertices")
    if abs(polygon_area(v)) <= 0:
        raise NotConvex("degenerate polygon")
    v = _orient_ccw(v)
    edges = np.roll(v, -1, axis=0) - v
    cross = edges[:, 0] * np.roll(edges, -1, axis=0)[:, 1] - edges[:, 1] * np.roll(edges, -1, axis=0)[:, 0]
    scale = np.max(np.abs(v)) ** 2
    if np.any(cross < -1e-12 * scale):
        raise NotConvex("polygon has a reflex vertex")
    # a star polygon can have all left turns and still wind more than once
    turning = np.sum(np.arctan2(cross, np.einsum("ij,ij->i", edges, np.roll(edges, -1, axis=0))))
    if abs(turning - 2 * math.pi) > 1e-6:
        raise NotConvex("polygon winds more than once")
    return v


def _clip(poly: list[tuple[float, float]], nx: float, ny: float, offset: float) -> list[tuple[float, float]]:
    """Keep the part of a convex polygon with ``(nx, ny) . x <= offset``."""
    out = []
    n = len(poly)
    for i in range(n):
        px, py = poly[i]
        qx, qy = poly[(i + 1) % n]
        fp = nx * px + ny * py - offset
        fq = nx * qx + ny * qy - offset
        if fp <= 0:
            out.append((px, py))
        if (fp < 0 < fq) or (fq < 0 < fp):
            s = fp / (fp - fq)
            out.append((px + s * (qx - px), py + s * (qy - py)))
    return out


def _shoelace(poly: list[tuple[float, float]]) -> float:
    total = 0.0
    for (x0, y0), (x1, y1) in zip(poly, poly[1:] + poly[:1]):
        total += x0 * y1 - x1 * y0
    return 0.5 * abs(total)


def inner_parallel_area(vertices: np.ndarray, t: float) -> float:
    """Area of the inner parallel body at distance ``t`` of a convex ccw polygon."""
    v = vertices
    edges = np.roll(v, -1, axis=0) - v
    lengths = np.linalg.norm(edges, axis=1)
    # outward normals of a ccw polygon
    normals = np.column_stack([edges[:, 1], -edges[:, 0]]) / lengths[:, None]
    offsets = np.einsum("ij,ij->i", normals, v)
    poly = [(float(x), float(y)) for x, y in v]
    for (nx, ny), off in zip(normals.tolist(), offsets.tolist()):
        poly = _clip(poly, nx, ny, off - t)
        if len(poly) < 3:
            return 0.0
    return _shoelace(poly)


def inradius(vertices: np.ndarray) -> float:
    lo, hi = 0.0, math.sqrt(abs(polygon_area(vertices)))
    while True:
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            return lo
        if inner_parallel_area(vertices, mid) > 0:
            lo = mid
        else:
            hi = mid


def _cheeger_from_area(area_at: Callable[[float], float], t_max: float) -> float:
    """Bisection for ``area_at(t) = pi t^2`` on ``(0, t_max)``, returning ``h = 1/t``."""
    lo, hi = 0.0, t_max
    for _ in range(300):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi:
            break
        if area_at(mid) - math.pi * mid * mid > 0:
            lo = mid
        else:
            hi = mid
    return 1.0 / (0.5 * (lo + hi))


def cheeger_convex_polygon(vertices: Sequence[Sequence[float]]) -> float:
    """Cheeger constant of a convex polygon."""
    v = check_convex(vertices)
    return _cheeger_from_area(lambda t: inner_parallel_area(v, t), inradius(v))


def cheeger_disk(radius: float) -> float:
    """Cheeger constant of a disk (``2/R``), through the same defining equation."""
    return _cheeger_from_area(lambda t: math.pi * max(radius - t, 0.0) ** 2, radius)


def defining_residual(vertices: Sequence[Sequence[float]], h: float) -> float:
    """``| |Omega_{-1/h}| - pi/h^2 |``."""
    v = check_convex(vertices)
    return abs(inner_parallel_area(v, 1.0 / h) - math.pi / h**2)
