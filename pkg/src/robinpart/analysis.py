"""Experiments confronting computed partitions with quantitative properties of optimal ones.

* :func:`faber_krahn_gap` compares a disk with a square of the same discrete area,
* :func:`density_probe` and :func:`ahlfors_probe` measure volume and surface density of a
  phase in small balls,
* :func:`honeycomb_scaling` tabulates the scaled optimal energies ``|D|^(1/2) r_k / k^(3/2)``
  against ``beta h(H)``, ``H`` the unit-area regular hexagon.

Probe thresholds are heuristics; the observed constants are what the reports carry.
"""
from __future__ import annotations

import hashlib
import json
import math
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .cheeger import cheeger_convex_polygon
from .eigen import analytic_lambda_disk, robin_eigenvalue
from .energy import PartitionState
from .errors import ConfigError, EmptyProbeSet
from .grid import CellSet, GridSpec, boundary_faces, make_grid, neighbor_mask, rasterize_ball, regular_polygon
from .optimizer import OptimizerConfig, optimize

DENSITY_FLOOR = 0.05
AHLFORS_SPREAD = 20.0


def unit_ball_volume(d: int) -> float:
    return math.pi ** (d / 2) / math.gamma(d / 2 + 1)


def state_hash(state: PartitionState) -> str:
    digest = hashlib.sha256()
    digest.update(json.dumps({"h": state.grid.h, "extent": state.grid.extent, "beta": state.beta}).encode())
    for u in state.phases:
        digest.update(np.ascontiguousarray(u.values).tobytes())
    return digest.hexdigest()[:16]


# Faber-Krahn -----------------------------------------------------------------------


@dataclass
class FaberKrahnResult:
    beta: float
    h: float
    lambda_disk: float
    lambda_square: float
    lambda_disk_analytic: float
    area_square: float
    area_disk: float

    @property
    def gap(self) -> float:
        return self.lambda_square - self.lambda_disk


def matched_disk_and_square(area: float, h: float) -> tuple[CellSet, CellSet]:
    """A rasterized square and a rasterized disk with the same number of cells.

    The square has ``round(sqrt(area)/h)`` cells per side; the disk center is offset
    from the grid lattice so that the cell count grows one cell at a time with the
    radius, and the radius is chosen to hit the square's count exactly.
    """
    side_cells = max(2, int(round(math.sqrt(area) / h)))
    target = side_cells**2
    radius = math.sqrt(area / math.pi)
    margin = 4
    n_box = max(side_cells, int(math.ceil(2 * radius / h)) + 2) + 2 * margin
    grid = make_grid([n_box * h, n_box * h], h)
    lo = (n_box - side_cells) // 2
    square = np.zeros(grid.n, dtype=bool)
    square[lo : lo + side_cells, lo : lo + side_cells] = True

    center = np.array(grid.extent) / 2 + np.array([0.2137, 0.3671]) * h
    x, y = grid.centers()
    dist = np.hypot(x - center[0], y - center[1])
    order = np.sort(dist.ravel())
    r_cut = 0.5 * (order[target - 1] + order[target])
    disk = dist < r_cut
    return CellSet(grid, square), CellSet(grid, disk)


def faber_krahn_gap(beta: float, area: float, h: float, boundary: str = "isotropic") -> FaberKrahnResult:
    if not (beta > 0 and area > 0 and h > 0):
        raise ConfigError("beta, area and h must be positive")
    square, disk = matched_disk_and_square(area, h)
    lam_square = robin_eigenvalue(square, beta, boundary).lam
    lam_disk = robin_eigenvalue(disk, beta, boundary).lam
    discrete_area = len(square) * h * h
    return FaberKrahnResult(
        beta=beta,
        h=h,
        lambda_disk=lam_disk,
        lambda_square=lam_square,
        lambda_disk_analytic=analytic_lambda_disk(math.sqrt(discrete_area / math.pi), beta),
        area_square=discrete_area,
        area_disk=len(disk) * h * h,
    )


# probes ----------------------------------------------------------------------------


@dataclass
class ProbeReport:
    name: str
    radii: list[float]
    ratio_min: list[float]
    ratio_max: list[float]
    threshold: float
    passed: bool
    observed: float
    points: int
    provenance: str = ""
    extra: dict = field(default_factory=dict)

    def rows(self) -> list[list]:
        return [[self.name, r, lo, hi] for r, lo, hi in zip(self.radii, self.ratio_min, self.ratio_max)]


def _check_radii(radii: Sequence[float], minimum: float) -> list[float]:
    radii = [float(r) for r in radii]
    if not radii:
        raise ConfigError("no radii given")
    if any(b <= a for a, b in zip(radii, radii[1:])):
        raise ConfigError("radii must be strictly increasing")
    if radii[0] < minimum * (1 - 1e-12):
        raise ConfigError(f"radii must be at least {minimum}")
    return radii


def boundary_cells(S: CellSet, interior_only: bool = True) -> list[tuple[int, ...]]:
    """Cells of ``S`` with a face on ``boundary(S)``; faces on the box boundary optionally ignored."""
    flag = np.zeros(S.grid.n, dtype=bool)
    for (axis, side), faces in boundary_faces(S).items():
        if interior_only:
            inside_grid = neighbor_mask(np.ones(S.grid.n, dtype=bool), axis, side)
            faces = faces & inside_grid
        flag |= faces
    return [tuple(int(v) for v in c) for c in np.argwhere(flag)]


def sample_cells(cells: Sequence[tuple[int, ...]], count: int, seed: int = 0) -> list[tuple[int, ...]]:
    if len(cells) <= count:
        return list(cells)
    rng = np.random.default_rng(seed)
    pick = np.sort(rng.choice(len(cells), size=count, replace=False))
    return [cells[i] for i in pick]


def density_probe(
    S: CellSet,
    points: Sequence[Sequence[float]],
    radii: Sequence[float],
    provenance: str = "",
) -> ProbeReport:
    """Minimum and maximum of ``|S n B_rho(x)| / rho^d`` over the given points, per radius."""
    grid = S.grid
    radii = _check_radii(radii, 3 * grid.h)
    if len(points) == 0:
        raise EmptyProbeSet("density probe needs at least one point")
    omega = unit_ball_volume(grid.d)
    lo, hi = [], []
    for rho in radii:
        ratios = [
            np.count_nonzero(S.mask & rasterize_ball(grid, x, rho).mask) * grid.cell_volume / rho**grid.d
            for x in points
        ]
        lo.append(float(min(ratios)))
        hi.append(float(max(ratios)))
    observed = min(lo)
    return ProbeReport(
        name="density",
        radii=radii,
        ratio_min=lo,
        ratio_max=hi,
        threshold=DENSITY_FLOOR * omega,
        passed=observed >= DENSITY_FLOOR * omega,
        observed=observed,
        points=len(points),
        provenance=provenance,
        extra={"observed_over_omega_d": observed / omega},
    )


def _face_centers(S: CellSet, interior_only: bool) -> np.ndarray:
    h = S.grid.h
    out = []
    full = np.ones(S.grid.n, dtype=bool)
    for (axis, side), faces in boundary_faces(S).items():
        if interior_only:
            faces = faces & neighbor_mask(full, axis, side)
        idx = np.argwhere(faces).astype(float)
        if len(idx):
            centers = (idx + 0.5) * h
            centers[:, axis] += 0.5 * side * h
            out.append(centers)
    return np.concatenate(out) if out else np.zeros((0, S.grid.d))


def ahlfors_probe(
    S: CellSet,
    radii: Sequence[float],
    points: Sequence[Sequence[float]] | None = None,
    max_points: int = 64,
    seed: int = 0,
    provenance: str = "",
) -> ProbeReport:
    """Surface density ``H^{d-1}(boundary(S) n B_rho(x)) / rho^(d-1)`` at boundary points.

    Probe points are centers of boundary faces of ``S`` inside the box (sampled with
    ``seed`` when there are more than ``max_points``). A (point, radius) pair is used
    only when the ball lies inside the box. Faces count when their center is in the ball.
    """
    grid = S.grid
    radii = _check_radii(radii, 4 * grid.h)
    faces = _face_centers(S, interior_only=False)
    if points is None:
        candidates = _face_centers(S, interior_only=True)
        if len(candidates) > max_points:
            rng = np.random.default_rng(seed)
            candidates = candidates[np.sort(rng.choice(len(candidates), size=max_points, replace=False))]
        points = candidates
    points = np.asarray(points, dtype=float).reshape(-1, grid.d)
    extent = np.asarray(grid.extent)
    lo, hi, used = [], [], 0
    for rho in radii:
        ratios = []
        for x in points:
            if np.any(x - rho < 0) or np.any(x + rho > extent):
                continue
            count = np.count_nonzero(np.sum((faces - x) ** 2, axis=1) < rho**2)
            ratios.append(count * grid.face_area / rho ** (grid.d - 1))
        used += len(ratios)
        lo.append(float(min(ratios)) if ratios else float("nan"))
        hi.append(float(max(ratios)) if ratios else float("nan"))
    if used == 0:
        raise EmptyProbeSet("no boundary point admits a ball inside the box")
    finite_lo = [v for v in lo if np.isfinite(v)]
    finite_hi = [v for v in hi if np.isfinite(v)]
    spread = max(finite_hi) / min(finite_lo) if min(finite_lo) > 0 else float("inf")
    return ProbeReport(
        name="ahlfors",
        radii=radii,
        ratio_min=lo,
        ratio_max=hi,
        threshold=AHLFORS_SPREAD,
        passed=spread <= AHLFORS_SPREAD,
        observed=spread,
        points=len(points),
        provenance=provenance,
        extra={"k_lower": min(finite_lo), "k_upper": 1.0 / max(finite_hi)},
    )


def probe_state(state: PartitionState, h_multiples: Sequence[int] = (4, 8, 16), points_per_phase: int = 16, seed: int = 0):
    """Density and Ahlfors probes on every phase of a partition."""
    h = state.grid.h
    radii = [m * h for m in h_multiples]
    tag = state_hash(state)
    reports = []
    for i, u in enumerate(state.phases):
        S = u.support
        cells = sample_cells(boundary_cells(S), points_per_phase, seed + i)
        points = [state.grid.center_of(c) for c in cells]
        reports.append((i, density_probe(S, points, radii, tag)))
        reports.append((i, ahlfors_probe(S, radii, max_points=points_per_phase, seed=seed + i, provenance=tag)))
    return reports


# honeycomb -------------------------------------------------------------------------


def hexagon_cheeger_target(beta: float) -> float:
    """``beta * h(H)`` for the unit-area regular hexagon."""
    return beta * cheeger_convex_polygon(regular_polygon(6, area=1.0))


@dataclass
class HoneycombRow:
    k: int
    best_energy: float
    scaled: float
    ratio_to_limit: float
    best_seed: int
    energies: dict


@dataclass
class HoneycombTable:
    beta: float
    side: float
    h: float
    target: float
    rows: list[HoneycombRow]
    states: dict = field(default_factory=dict, repr=False)


def _run_cell(args):
    extent, h, k, beta, seed = args
    config = OptimizerConfig(grid=make_grid(extent, h), k=k, beta=beta, seed=seed)
    state, trace = optimize(config)
    return (k, seed), trace.energies[-1], state


def worker_count() -> int:
    value = int(os.environ.get("ROBINPART_THREADS", "0") or 0)
    return value if value > 0 else (os.cpu_count() or 1)


def honeycomb_scaling(
    beta: float,
    side: float,
    k_values: Sequence[int],
    h: float,
    seeds: Sequence[int],
    workers: int | None = None,
) -> HoneycombTable:
    """Best-over-seeds optimal energies on the square ``[0, side]^2``, scaled by ``|D|^(1/2)/k^(3/2)``."""
    k_values = list(k_values)
    if any(b <= a for a, b in zip(k_values, k_values[1:])):
        raise ConfigError("k values must be increasing")
    if len(seeds) < 2:
        raise ConfigError("need at least two seeds per k")
    jobs = [([side, side], h, k, beta, s) for k in k_values for s in seeds]
    workers = worker_count() if workers is None else workers
    if workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_cell, jobs))
    else:
        results = [_run_cell(job) for job in jobs]
    by_key = {key: (energy, state) for key, energy, state in results}
    target = hexagon_cheeger_target(beta)
    area = side * side
    rows, states = [], {}
    for k in k_values:
        energies = {s: by_key[(k, s)][0] for s in seeds}
        best_seed = min(seeds, key=lambda s: (energies[s], s))
        best = energies[best_seed]
        scaled = math.sqrt(area) * best / k**1.5
        rows.append(HoneycombRow(k, best, scaled, scaled / target, best_seed, energies))
        for s in seeds:
            states[(k, s)] = by_key[(k, s)][1]
    return HoneycombTable(beta, side, h, target, rows, states)
