import math

import numpy as np
import pytest

from robinpart.analysis import (
    ahlfors_probe,
    boundary_cells,
    density_probe,
    faber_krahn_gap,
    hexagon_cheeger_target,
    honeycomb_scaling,
    matched_disk_and_square,
    probe_state,
    state_hash,
    unit_ball_volume,
)
from robinpart.cheeger import cheeger_convex_polygon, cheeger_disk, defining_residual, inradius
from robinpart.eigen import robin_eigenvalue
from robinpart.errors import ConfigError, EmptyProbeSet, NotConvex
from robinpart.grid import CellSet, make_grid, rasterize_box, regular_polygon

SQRT_PI = math.sqrt(math.pi)


# Cheeger oracle ------------------------------------------------------------------------


def test_unit_square():
    square = [(0, 0), (1, 0), (1, 1), (0, 1)]
    assert cheeger_convex_polygon(square) == pytest.approx(2 + SQRT_PI, rel=1e-10)


def test_rectangle_quadratic():
    a, b = 1.0, 2.0
    # (a - 2t)(b - 2t) = pi t^2, smaller root
    A, B, C = 4 - math.pi, -2 * (a + b), a * b
    t = (-B - math.sqrt(B * B - 4 * A * C)) / (2 * A)
    assert cheeger_convex_polygon([(0, 0), (a, 0), (a, b), (0, b)]) == pytest.approx(1 / t, rel=1e-10)


@pytest.mark.parametrize("n", [3, 5, 6, 64])
def test_regular_polygon_closed_form(n):
    v = regular_polygon(n, area=1.0)
    rho = math.cos(math.pi / n) * math.sqrt(2 / (n * math.sin(2 * math.pi / n)))
    assert inradius(v) == pytest.approx(rho, rel=1e-12)
    h = cheeger_convex_polygon(v)
    assert h == pytest.approx(1 / rho + SQRT_PI, rel=1e-10)
    assert defining_residual(v, h) <= 1e-9


def test_scalene_triangle():
    tri = [(0, 0), (3, 0), (0, 4)]
    # inradius of the 3-4-5 triangle is 1; its inner parallel bodies are scaled copies
    assert cheeger_convex_polygon(tri) == pytest.approx(1 + math.sqrt(math.pi / 6), rel=1e-10)


def test_orientation_independent():
    v = regular_polygon(6, area=2.0)
    assert cheeger_convex_polygon(v[::-1]) == pytest.approx(cheeger_convex_polygon(v), rel=1e-14)


def test_disk():
    assert cheeger_disk(1 / SQRT_PI) == pytest.approx(2 * SQRT_PI, rel=1e-9)
    assert cheeger_disk(3.0) == pytest.approx(2 / 3, rel=1e-9)


def test_hexagon_target():
    assert hexagon_cheeger_target(1.0) == pytest.approx(3.633663569, abs=1e-9)
    assert hexagon_cheeger_target(0.5) == pytest.approx(0.5 * 3.633663569, abs=1e-9)


def test_not_convex():
    with pytest.raises(NotConvex):
        cheeger_convex_polygon([(0, 0), (2, 0), (1, 0.3), (2, 2), (0, 2)])
    star = [(math.cos(4 * math.pi * i / 5), math.sin(4 * math.pi * i / 5)) for i in range(5)]
    with pytest.raises(NotConvex):
        cheeger_convex_polygon(star)
    with pytest.raises(NotConvex):
        cheeger_convex_polygon([(0, 0), (1, 1)])


# Faber-Krahn ---------------------------------------------------------------------------


def test_matched_sets_same_volume():
    square, disk = matched_disk_and_square(0.25, 1 / 64)
    assert len(square) == len(disk) == 32 * 32


def test_faber_krahn_positive():
    res = faber_krahn_gap(1.0, math.pi * 0.16, 1 / 128)
    assert res.gap > 0
    assert res.lambda_disk == pytest.approx(res.lambda_disk_analytic, rel=0.01)


def test_faber_krahn_small_beta_oracle():
    res = faber_krahn_gap(1e-4, math.pi * 0.16, 1 / 128)
    assert abs(res.lambda_disk - res.lambda_disk_analytic) <= 0.03 * res.lambda_disk_analytic


def test_faber_krahn_errors():
    with pytest.raises(ConfigError):
        faber_krahn_gap(0.0, 1.0, 0.1)


# probes --------------------------------------------------------------------------------


def test_unit_ball_volume():
    assert [unit_ball_volume(d) for d in (1, 2, 3)] == pytest.approx([2, math.pi, 4 * math.pi / 3])


def test_density_full_box():
    g = make_grid([1.0, 1.0], 1 / 64)
    rep = density_probe(g.full(), [(0.5, 0.5), (0.3, 0.6)], [4 * g.h, 8 * g.h, 16 * g.h])
    assert all(abs(v - math.pi) <= 0.1 * math.pi for v in rep.ratio_min + rep.ratio_max)
    assert rep.passed


def test_density_half_plane():
    g = make_grid([1.0, 1.0], 1 / 128)
    S = rasterize_box(g, [0, 0], [0.5, 1])
    cells = [c for c in boundary_cells(S) if 0.3 < g.center_of(c)[1] < 0.7]
    rep = density_probe(S, [g.center_of(c) for c in cells], [16 * g.h])
    assert rep.ratio_min[0] == pytest.approx(math.pi / 2, rel=0.1)
    assert rep.ratio_max[0] == pytest.approx(math.pi / 2, rel=0.1)


def test_density_errors():
    g = make_grid([1.0, 1.0], 1 / 16)
    with pytest.raises(EmptyProbeSet):
        density_probe(g.full(), [], [4 * g.h])
    with pytest.raises(ConfigError):
        density_probe(g.full(), [(0.5, 0.5)], [g.h])
    with pytest.raises(ConfigError):
        density_probe(g.full(), [(0.5, 0.5)], [8 * g.h, 4 * g.h])


def test_ahlfors_half_plane():
    g = make_grid([1.0, 1.0], 1 / 128)
    S = rasterize_box(g, [0, 0], [0.5, 1])
    rep = ahlfors_probe(S, [4 * g.h, 8 * g.h, 16 * g.h])
    for lo, hi in zip(rep.ratio_min, rep.ratio_max):
        assert lo == pytest.approx(2.0, rel=0.15) and hi == pytest.approx(2.0, rel=0.15)
    assert rep.observed < 1.3 and rep.passed


def test_ahlfors_single_cell_flagged():
    g = make_grid([1.0, 1.0], 1 / 300)
    S = CellSet.from_cells(g, [(150, 150)])
    radii = [m * g.h for m in (4, 8, 16, 32, 64, 128)]
    rep = ahlfors_probe(S, radii)
    assert rep.ratio_max == pytest.approx([4 * g.h / r for r in radii])
    assert rep.observed == pytest.approx(32.0)
    assert not rep.passed


def test_ahlfors_no_interior_boundary():
    g = make_grid([1.0, 1.0], 1 / 16)
    with pytest.raises(EmptyProbeSet):
        ahlfors_probe(g.full(), [4 * g.h])


def test_probes_on_k4(k4_run):
    _, state, _ = k4_run
    reports = probe_state(state)
    assert len(reports) == 8
    for _, rep in reports:
        assert rep.passed, rep
        assert rep.provenance == state_hash(state)
        assert all(v > 0 for v in rep.ratio_min)


def test_state_hash_sensitive(k2_run):
    _, state, _ = k2_run
    assert state_hash(state) == state_hash(state.permuted([0, 1]))
    assert state_hash(state) != state_hash(state.permuted([1, 0]))


# honeycomb -----------------------------------------------------------------------------


def test_honeycomb_k1_row():
    g = make_grid([1.0, 1.0], 1 / 16)
    table = honeycomb_scaling(1.0, 1.0, [1], 1 / 16, [0, 1], workers=1)
    row = table.rows[0]
    assert row.scaled == pytest.approx(robin_eigenvalue(g.full(), 1.0).lam, rel=1e-8)
    assert row.ratio_to_limit == pytest.approx(row.scaled / table.target)


def test_honeycomb_workers_identical():
    a = honeycomb_scaling(1.0, 1.0, [1, 4], 1 / 16, [0, 1], workers=1)
    b = honeycomb_scaling(1.0, 1.0, [1, 4], 1 / 16, [0, 1], workers=2)
    assert [r.energies for r in a.rows] == [r.energies for r in b.rows]


def test_honeycomb_beta_doubling():
    low = honeycomb_scaling(0.5, 1.0, [4], 1 / 32, [0, 1], workers=1).rows[0].scaled
    high = honeycomb_scaling(1.0, 1.0, [4], 1 / 32, [0, 1], workers=1).rows[0].scaled
    assert 2 * 0.7 <= high / low <= 2 * 1.3


def test_honeycomb_validation():
    with pytest.raises(ConfigError):
        honeycomb_scaling(1.0, 1.0, [4, 1], 1 / 16, [0, 1])
    with pytest.raises(ConfigError):
        honeycomb_scaling(1.0, 1.0, [1], 1 / 16, [0])
