import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from robinpart.errors import EmptyBall, NonPositiveSpacing, SelfIntersectingPolygon, SpacingTooCoarse, DimensionMismatch
from robinpart.grid import (
    CellSet,
    boundary_measure,
    connected_components,
    face_weights,
    make_grid,
    polygon_area,
    rasterize_ball,
    rasterize_box,
    rasterize_polygon,
    regular_polygon,
    relative_isoperimetric_ratio,
    volume,
)


def test_make_grid_exact_division():
    g = make_grid([1.0, 1.0], 0.25)
    assert g.n == (4, 4)
    assert g.extent == (1.0, 1.0)


def test_make_grid_snaps_extent():
    g = make_grid([1.0], 0.3)
    assert g.n == (3,)
    assert g.extent[0] == pytest.approx(0.9)


@pytest.mark.parametrize("extent,h,exc", [([1.0, 1.0], 2.0, SpacingTooCoarse), ([1.0], 0.0, NonPositiveSpacing), ([1.0], -0.1, NonPositiveSpacing)])
def test_make_grid_rejects(extent, h, exc):
    with pytest.raises(exc):
        make_grid(extent, h)


def test_ball_area_within_boundary_band():
    g = make_grid([1.0, 1.0], 1 / 64)
    S = rasterize_ball(g, [0.5, 0.5], 0.4)
    assert abs(volume(S) - math.pi * 0.16) <= 4 * (2 * math.pi * 0.4) * g.h


def test_tiny_ball_is_empty():
    g = make_grid([1.0, 1.0], 0.1)
    assert len(rasterize_ball(g, [0.5, 0.5], 0.001)) == 0


def test_ball_1d_enumeration():
    g = make_grid([1.0], 0.25)
    assert rasterize_ball(g, [0.5], 0.3).cells == [(1,), (2,)]


def test_unit_square_polygon_fills_grid():
    g = make_grid([1.0, 1.0], 1 / 64)
    S = rasterize_polygon(g, [[0, 0], [1, 0], [1, 1], [0, 1]])
    assert len(S) == 4096


def test_hexagon_area_converges():
    g = make_grid([2.0, 2.0], 1 / 128)
    hexagon = regular_polygon(6, area=1.0, center=(1.0, 1.0))
    assert polygon_area(hexagon) == pytest.approx(1.0)
    assert abs(volume(rasterize_polygon(g, hexagon)) - 1.0) < 0.02


def test_polygon_repeated_vertex():
    g = make_grid([1.0, 1.0], 0.1)
    with pytest.raises(SelfIntersectingPolygon):
        rasterize_polygon(g, [[0.1, 0.1], [0.9, 0.1], [0.9, 0.1], [0.5, 0.8]])


def test_polygon_bowtie():
    g = make_grid([1.0, 1.0], 0.1)
    with pytest.raises(SelfIntersectingPolygon):
        rasterize_polygon(g, [[0.1, 0.1], [0.9, 0.9], [0.9, 0.1], [0.1, 0.9]])


def test_polygon_needs_2d():
    with pytest.raises(DimensionMismatch):
        rasterize_polygon(make_grid([1.0], 0.1), [[0, 0], [1, 0], [0, 1]])


def test_volume_and_perimeter_full_grid():
    g = make_grid([1.0, 1.0], 0.25)
    assert volume(g.full()) == 1.0
    assert boundary_measure(g.full()) == 4.0
    assert volume(g.empty()) == 0.0


def test_single_cell_perimeter():
    g = make_grid([1.0, 1.0], 0.125)
    assert boundary_measure(CellSet.from_cells(g, [(3, 4)])) == pytest.approx(4 * g.h)


def test_disk_volume_refinement():
    errors = []
    for n in (64, 128, 256):
        g = make_grid([1.0, 1.0], 1 / n)
        errors.append(abs(volume(rasterize_ball(g, [0.5, 0.5], 0.4)) - math.pi * 0.16) / (math.pi * 0.16))
    assert errors[-1] < 0.01
    assert errors[-1] < errors[0]


@pytest.mark.parametrize("n", [64, 256])
def test_disk_staircase_perimeter_is_bounding_box_perimeter(n):
    # a digitized disk is orthogonally convex: its l1 perimeter is that of its bounding box
    g = make_grid([1.0, 1.0], 1 / n)
    S = rasterize_ball(g, [0.5, 0.5], 0.4)
    idx = np.argwhere(S.mask)
    width = (idx.max(axis=0) - idx.min(axis=0) + 1) * g.h
    assert boundary_measure(S) == pytest.approx(2 * width.sum())
    assert abs(boundary_measure(S) - 3.2) <= 4 * g.h


def test_isotropic_perimeter_of_disk():
    g = make_grid([1.0, 1.0], 1 / 128)
    S = rasterize_ball(g, [0.5, 0.5], 0.4)
    assert boundary_measure(S, "isotropic") == pytest.approx(2 * math.pi * 0.4, rel=0.01)


def test_isotropic_weights_exact_on_flat_sides():
    g = make_grid([1.0, 1.0], 1 / 32)
    S = rasterize_box(g, [0.2, 0.2], [0.8, 0.8])
    w = face_weights(S, "isotropic")[(0, 1)]
    faces = np.argwhere(w > 0)
    middle = faces[(faces[:, 1] > faces[:, 1].min() + 4) & (faces[:, 1] < faces[:, 1].max() - 4)]
    assert np.all(w[tuple(middle.T)] == 1.0)


def test_components_two_blocks():
    g = make_grid([1.0, 1.0], 0.125)
    S = CellSet.from_cells(g, [(0, 0), (0, 1), (1, 0), (1, 1), (4, 4), (4, 5), (5, 4), (5, 5)])
    comps = connected_components(S)
    assert [len(c) for c in comps] == [4, 4]
    assert (0, 0) in comps[0]


def test_components_empty():
    assert connected_components(make_grid([1.0, 1.0], 0.25).empty()) == []


def test_annulus_is_one_component():
    g = make_grid([1.0, 1.0], 1 / 64)
    ring = rasterize_ball(g, [0.5, 0.5], 0.4) - rasterize_ball(g, [0.5, 0.5], 0.2)
    assert len(connected_components(ring)) == 1


def test_components_ordering_ties_lexicographic():
    g = make_grid([1.0, 1.0], 0.125)
    S = CellSet.from_cells(g, [(6, 6), (0, 3)])
    assert [c.cells for c in connected_components(S)] == [[(0, 3)], [(6, 6)]]


@settings(max_examples=40, deadline=None)
@given(arrays(bool, (8, 8)))
def test_components_partition_the_set(mask):
    g = make_grid([1.0, 1.0], 0.125)
    S = CellSet(g, mask)
    comps = connected_components(S)
    union = np.zeros_like(mask)
    for c in comps:
        assert not np.any(union & c.mask)
        union |= c.mask
    assert np.array_equal(union, mask)
    assert connected_components(S) == comps


@settings(max_examples=40, deadline=None)
@given(arrays(bool, (8, 8)))
def test_nonempty_proper_subset_has_boundary(mask):
    g = make_grid([1.0, 1.0], 0.125)
    S = CellSet(g, mask)
    if 0 < len(S):
        assert boundary_measure(S) > 0
        # discrete isoperimetry in the l1 metric: perimeter >= 4 sqrt(area)
        assert boundary_measure(S) >= 4 * math.sqrt(volume(S)) - 1e-12


def test_relative_isoperimetric_half_disk():
    g = make_grid([1.0, 1.0], 1 / 128)
    ball = rasterize_ball(g, [0.5, 0.5], 0.4)
    half = rasterize_box(g, [0.0, 0.0], [0.5, 1.0])
    ratio = relative_isoperimetric_ratio(half, ball)
    # half the disk area against a cut of length ~ one diameter
    assert ratio == pytest.approx(math.sqrt(math.pi * 0.16 / 2) / 0.8, rel=0.03)


def test_relative_isoperimetric_degenerate_cases():
    g = make_grid([1.0, 1.0], 1 / 32)
    ball = rasterize_ball(g, [0.5, 0.5], 0.2)
    far = rasterize_box(g, [0.9, 0.9], [1.0, 1.0])
    assert relative_isoperimetric_ratio(far, ball) == 0.0
    assert relative_isoperimetric_ratio(g.full(), ball) == 0.0
    with pytest.raises(EmptyBall):
        relative_isoperimetric_ratio(g.full(), g.empty())


def test_rasterization_deterministic():
    g = make_grid([1.0, 1.0], 1 / 50)
    assert rasterize_ball(g, [0.3, 0.6], 0.25) == rasterize_ball(g, [0.3, 0.6], 0.25)
