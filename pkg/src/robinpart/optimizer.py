"""Descent on the discrete multiphase energy by single-cell reassignment.

A sweep walks the interface cells in lexicographic order. For each cell it prices
every admissible move (to a face-adjacent phase, or to unassigned space) with the
current eigenfunctions held fixed, applies the best strictly improving one, and
updates the two affected quotients incrementally. Afterwards the modified phases
get fresh eigenpairs, and the sweep is kept only if the true total energy went
down. Frozen fields give an upper bound of each new eigenvalue, so accepted sweeps
are genuine descent steps.
"""
from __future__ import annotations

import math
import time
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np
from scipy import ndimage

from .eigen import DEFAULT_TOL, assemble, smallest_eigenpair
from .energy import PartitionState, PhaseField, phase_energy, total_energy
from .errors import ConfigError, DisconnectedPhase, TooManyPhases
from .grid import CellSet, GridSpec, boundary_measure, connected_components, make_grid, volume


@dataclass(frozen=True)
class OptimizerConfig:
    grid: GridSpec
    k: int = 2
    beta: float = 1.0
    seed: int = 42
    max_sweeps: int = 500
    energy_tol: float = 1e-7
    min_phase_cells: int = 9
    eig_tol: float = DEFAULT_TOL
    allow_unassigned: bool = True

    def __post_init__(self):
        if self.k < 1:
            raise ConfigError("k must be at least 1")
        if self.min_phase_cells < 1:
            raise ConfigError("min_phase_cells must be at least 1")
        if not (self.beta > 0 and self.energy_tol > 0 and self.eig_tol > 0):
            raise ConfigError("beta and tolerances must be positive")
        if self.max_sweeps < 0:
            raise ConfigError("max_sweeps must be nonnegative")
        if self.k * self.min_phase_cells > int(np.prod(self.grid.n)):
            raise TooManyPhases(
                f"k={self.k} phases of at least {self.min_phase_cells} cells do not fit in {int(np.prod(self.grid.n))} cells"
            )

    def to_dict(self) -> dict:
        out = asdict(self)
        out.pop("grid")
        out["extent"] = list(self.grid.extent)
        out["h"] = self.grid.h
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "OptimizerConfig":
        data = dict(data)
        extent = data.pop("extent", [1.0, 1.0])
        h = data.pop("h", 1 / 64)
        known = {f for f in cls.__dataclass_fields__} - {"grid"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config fields: {sorted(unknown)}")
        return cls(grid=make_grid(extent, h), **data)


@dataclass
class SweepRecord:
    sweep: int
    total_energy: float
    lambdas: list[float]
    moved: int
    seconds: float


@dataclass
class OptimizerTrace:
    records: list[SweepRecord] = field(default_factory=list)

    @property
    def energies(self) -> list[float]:
        return [r.total_energy for r in self.records]

    def csv_rows(self) -> list[list]:
        return [[r.sweep, r.total_energy, *r.lambdas, r.moved, r.seconds] for r in self.records]


def _solve_phase(grid: GridSpec, mask: np.ndarray, beta: float, tol: float) -> tuple[np.ndarray, float]:
    op = assemble(grid, CellSet(grid, mask), beta)
    res = smallest_eigenpair(op, tol=tol)
    return np.array(res.u.values), res.lam


class _Workspace:
    """Mutable labels, frozen fields and quotient parts used inside a sweep."""

    def __init__(self, grid: GridSpec, beta: float, labels: np.ndarray, values: list[np.ndarray], lambdas: list[float]):
        self.grid = grid
        self.beta = beta
        self.labels = labels.copy()
        self.values = [v.copy() for v in values]
        self.lambdas = list(lambdas)
        self.sizes = [int(np.count_nonzero(labels == i)) for i in range(len(values))]
        h, d = grid.h, grid.d
        self.c_grad = h ** (d - 2)
        self.c_jump = beta * h ** (d - 1)
        self.c_mass = h**d
        self.num = []
        self.den = []
        for i, v in enumerate(values):
            e = _phase_parts(grid, v, beta)
            self.num.append(e[0])
            self.den.append(e[1])
        self.d = d
        self.n = grid.n

    def neighbors(self, cell: tuple[int, ...]):
        """Face neighbours inside the grid, plus the count of faces on the grid boundary."""
        out = []
        outside = 0
        for axis in range(self.d):
            for side in (1, -1):
                j = cell[axis] + side
                if 0 <= j < self.n[axis]:
                    nb = list(cell)
                    nb[axis] = j
                    out.append(tuple(nb))
                else:
                    outside += 1
        return out, outside

    def removal(self, p: int, cell, nbs) -> tuple[float, float]:
        vals = self.values[p]
        uc = vals[cell]
        # every face of cell to non-p (exterior included) was charged c_jump * uc^2
        n_faces = 2 * self.d
        n_p = sum(1 for nb in nbs if self.labels[nb] == p)
        dn = -self.c_jump * uc * uc * (n_faces - n_p) + sum(
            -self.c_grad * (uc - vals[nb]) ** 2 + self.c_jump * vals[nb] ** 2 for nb in nbs if self.labels[nb] == p
        )
        return self.num[p] + dn, self.den[p] - self.c_mass * uc * uc

    def addition(self, q: int, cell, nbs) -> tuple[float, float, float]:
        """Best value for the cell joining phase ``q``, and the resulting quotient parts."""
        vals = self.values[q]
        inq = [vals[nb] for nb in nbs if self.labels[nb] == q]
        m = 2 * self.d - len(inq)
        a = len(inq) * self.c_grad + m * self.c_jump
        b = self.c_grad * sum(inq)
        c = sum((self.c_grad - self.c_jump) * un * un for un in inq)
        N, D, hd = self.num[q], self.den[q], self.c_mass
        # stationary point of (N + a x^2 - 2 b x + c) / (D + hd x^2), x > 0
        p_coef = a * D - hd * (N + c)
        if b > 0:
            x = (-p_coef + math.sqrt(p_coef * p_coef + 4 * b * b * hd * D)) / (2 * b * hd)
        else:
            x = 0.0
        return N + a * x * x - 2 * b * x + c, D + hd * x * x, x

    def still_connected(self, p: int, cell, nbs) -> bool:
        same = [nb for nb in nbs if self.labels[nb] == p]
        if len(same) <= 1:
            return True
        lo = [max(0, c - 1) for c in cell]
        hi = [min(n, c + 2) for c, n in zip(cell, self.n)]
        window = tuple(slice(a, b) for a, b in zip(lo, hi))
        local = self.labels[window] == p
        local[tuple(c - a for c, a in zip(cell, lo))] = False
        lab, _ = ndimage.label(local)
        ids = {lab[tuple(nb[j] - lo[j] for j in range(self.d))] for nb in same}
        if len(ids) == 1:
            return True
        mask = self.labels == p
        mask[cell] = False
        return ndimage.label(mask)[1] == 1


def _phase_parts(grid: GridSpec, values: np.ndarray, beta: float) -> tuple[float, float]:
    e = phase_energy(grid, PhaseField(grid, values), beta)
    return e.dirichlet + e.jump, e.mass


def _interface_cells(labels: np.ndarray) -> list[tuple[int, ...]]:
    flag = np.zeros(labels.shape, dtype=bool)
    for axis in range(labels.ndim):
        a = np.swapaxes(labels, 0, axis)
        diff = a[1:] != a[:-1]
        f = np.swapaxes(flag, 0, axis)
        f[1:] |= diff
        f[:-1] |= diff
    # cells in unassigned space whose neighbours are all unassigned are not interface cells
    return [tuple(int(v) for v in c) for c in np.argwhere(flag)]


def _state_from(grid: GridSpec, beta: float, values: list[np.ndarray]) -> PartitionState:
    return PartitionState(grid, beta, [PhaseField(grid, v) for v in values])


def init_partition(config: OptimizerConfig) -> PartitionState:
    """Voronoi partition around ``k`` random distinct seed cells, each phase set to its eigenfunction.

    A draw whose regions are not all connected with at least ``min_phase_cells`` cells is
    discarded and the seeds are redrawn from the same random stream.
    """
    grid = config.grid
    ncell = int(np.prod(grid.n))
    rng = np.random.default_rng(config.seed)
    coords = np.stack([c.ravel() for c in grid.centers()], axis=1)
    for _attempt in range(100):
        seeds: list[int] = []
        while len(seeds) < config.k:
            s = int(rng.integers(ncell))
            if s not in seeds:
                seeds.append(s)
        dist = np.stack([np.sum((coords - coords[s]) ** 2, axis=1) for s in seeds])
        labels = np.argmin(dist, axis=0).reshape(grid.n)
        ok = True
        for i in range(config.k):
            region = labels == i
            n_comp = ndimage.label(region)[1]
            if n_comp != 1 or np.count_nonzero(region) < config.min_phase_cells:
                ok = False
                break
        if ok:
            break
    else:
        raise TooManyPhases(f"no admissible Voronoi partition with k={config.k} after 100 draws")
    values = []
    for i in range(config.k):
        v, _ = _solve_phase(grid, labels == i, config.beta, config.eig_tol)
        values.append(v)
    return _state_from(grid, config.beta, values)


def _lambdas(state: PartitionState) -> list[float]:
    return total_energy(state).quotients


def sweep(state: PartitionState, config: OptimizerConfig) -> tuple[PartitionState, int]:
    grid = state.grid
    labels = state.labels()
    values = [np.array(u.values) for u in state.phases]
    lambdas = _lambdas(state)
    ws = _Workspace(grid, state.beta, labels, values, lambdas)
    total_before = sum(n / d for n, d in zip(ws.num, ws.den))
    threshold = 1e-13 * total_before
    moved = 0
    touched: set[int] = set()
    for cell in _interface_cells(labels):
        p = int(ws.labels[cell])
        nbs, _ = ws.neighbors(cell)
        targets = sorted({int(ws.labels[nb]) for nb in nbs} - {p, -1})
        if config.allow_unassigned and p >= 0:
            targets = [-1] + targets
        if not targets:
            continue
        if p >= 0:
            if ws.sizes[p] - 1 < config.min_phase_cells:
                continue
            num_p, den_p = ws.removal(p, cell, nbs)
            delta_p = num_p / den_p - ws.num[p] / ws.den[p]
        else:
            delta_p = 0.0
        best = None
        for q in targets:
            if q < 0:
                delta = delta_p
                add = None
            else:
                add = ws.addition(q, cell, nbs)
                delta = delta_p + add[0] / add[1] - ws.num[q] / ws.den[q]
            # strict improvement; ties keep the lowest target (unassigned first)
            if delta < -threshold and (best is None or delta < best[0]):
                best = (delta, q, add)
        if best is None:
            continue
        if p >= 0 and not ws.still_connected(p, cell, nbs):
            continue
        _, q, add = best
        if p >= 0:
            ws.num[p], ws.den[p] = num_p, den_p
            ws.values[p][cell] = 0.0
            ws.sizes[p] -= 1
            touched.add(p)
        if q >= 0:
            ws.num[q], ws.den[q], x = add
            ws.values[q][cell] = x
            ws.sizes[q] += 1
            touched.add(q)
        ws.labels[cell] = q
        moved += 1
    if moved == 0:
        return state, 0
    new_values = list(values)
    for i in sorted(touched):
        mask = ws.labels == i
        if ndimage.label(mask)[1] != 1:
            raise DisconnectedPhase(f"phase {i} became disconnected during a sweep")
        new_values[i], lambdas[i] = _solve_phase(grid, mask, state.beta, config.eig_tol)
    if sum(lambdas) < total_before:
        return _state_from(grid, state.beta, new_values), moved
    return state, 0


def optimize(config: OptimizerConfig, initial: PartitionState | None = None) -> tuple[PartitionState, OptimizerTrace]:
    start = time.perf_counter()
    state = initial if initial is not None else init_partition(config)
    trace = OptimizerTrace()
    lambdas = _lambdas(state)
    energy = sum(lambdas)
    trace.records.append(SweepRecord(0, energy, lambdas, 0, time.perf_counter() - start))
    for n_sweep in range(1, config.max_sweeps + 1):
        t0 = time.perf_counter()
        state, moved = sweep(state, config)
        lambdas = _lambdas(state)
        new_energy = sum(lambdas)
        trace.records.append(SweepRecord(n_sweep, new_energy, lambdas, moved, time.perf_counter() - t0))
        if moved == 0 or (energy - new_energy) < config.energy_tol * energy:
            break
        energy = new_energy
    return state, trace


@dataclass
class PhaseReport:
    volume: float
    boundary_measure: float
    lam: float
    alpha_hat: float
    max_value: float
    cells: int


def extract_open_sets(state: PartitionState) -> tuple[list[CellSet], list[PhaseReport]]:
    """One connected cell set per phase, with per-phase geometry and bounds."""
    sets, reports = [], []
    lambdas = _lambdas(state)
    for i, u in enumerate(state.phases):
        comps = connected_components(u.support)
        if len(comps) != 1:
            raise DisconnectedPhase(f"phase {i} has {len(comps)} connected components")
        S = comps[0]
        sets.append(S)
        reports.append(
            PhaseReport(
                volume=volume(S),
                boundary_measure=boundary_measure(S),
                lam=lambdas[i],
                alpha_hat=u.min_on_support() / u.max(),
                max_value=u.max(),
                cells=len(S),
            )
        )
    return sets, reports
