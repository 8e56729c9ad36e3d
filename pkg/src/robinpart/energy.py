"""The multiphase relaxed energy on grid fields, and competitor constructions.

Each phase is a nonnegative field on the grid, extended by zero. Its energy is the
discrete Robin Rayleigh quotient

    (sum_interior_faces h^(d-2) (u_a - u_b)^2 + beta sum_boundary_faces h^(d-1) u_cell^2)
    / (h^d sum u^2)

where a face is interior when both adjacent cells carry the phase. A face shared
with another phase (or unassigned space, or the outside of the box) is a jump
face; each phase pays its own one-sided trace there, so an interface between two
phases is charged to both.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .errors import DisjointnessViolation, ZeroMass, ZeroMassPhase
from .grid import CellSet, GridSpec, face_weights, neighbor_mask


class PhaseField:
    """Nonnegative values on the grid; the support is ``{values > 0}``.

    Zero-valued cells are not part of the support, so pruning is automatic.
    """

    def __init__(self, grid: GridSpec, values: np.ndarray):
        values = np.array(values, dtype=float, copy=True)
        if values.shape != grid.n:
            raise ValueError(f"values shape {values.shape} does not match grid {grid.n}")
        if np.any(values < 0) or not np.all(np.isfinite(values)):
            raise ValueError("phase values must be finite and nonnegative")
        values.setflags(write=False)
        self.grid = grid
        self.values = values

    @classmethod
    def constant(cls, S: CellSet, value: float = 1.0) -> "PhaseField":
        return cls(S.grid, np.where(S.mask, value, 0.0))

    @classmethod
    def on_cells(cls, S: CellSet, cell_values: np.ndarray) -> "PhaseField":
        """Field taking ``cell_values`` (in lexicographic cell order) on ``S``."""
        values = np.zeros(S.grid.n)
        values[S.mask] = cell_values
        return cls(S.grid, values)

    @property
    def support(self) -> CellSet:
        return CellSet(self.grid, self.values > 0)

    @property
    def mass(self) -> float:
        return self.grid.cell_volume * float(np.sum(self.values**2))

    def max(self) -> float:
        return float(self.values.max())

    def min_on_support(self) -> float:
        pos = self.values[self.values > 0]
        return float(pos.min()) if pos.size else 0.0

    def scaled(self, c: float) -> "PhaseField":
        return PhaseField(self.grid, abs(c) * self.values)

    def __repr__(self) -> str:
        return f"PhaseField(cells={np.count_nonzero(self.values)}, max={self.max():.4g})"


class EmptyResult:
    """Returned by a competitor construction that removes the whole support."""

    _instance = None

    def __new__(cls):
        if cls._instance is None:
            cls._instance = super().__new__(cls)
        return cls._instance

    def __repr__(self) -> str:
        return "EmptyResult"

    def __bool__(self) -> bool:
        return False


EMPTY = EmptyResult()


@dataclass(frozen=True)
class PhaseEnergy:
    dirichlet: float
    jump: float
    mass: float

    @property
    def quotient(self) -> float:
        return (self.dirichlet + self.jump) / self.mass


@dataclass(frozen=True)
class EnergyBreakdown:
    phases: tuple[PhaseEnergy, ...]

    @property
    def total(self) -> float:
        return float(sum(p.quotient for p in self.phases))

    @property
    def quotients(self) -> list[float]:
        return [p.quotient for p in self.phases]

    def to_json(self) -> dict:
        return {
            "total": self.total,
            "phases": [
                {"dirichlet": p.dirichlet, "jump": p.jump, "mass": p.mass, "quotient": p.quotient}
                for p in self.phases
            ],
        }


def phase_energy(grid: GridSpec, u: PhaseField, beta: float, boundary: str = "staircase") -> PhaseEnergy:
    """Dirichlet, jump and mass terms of a single phase."""
    v = u.values
    support = v > 0
    if not support.any():
        raise ZeroMass("phase has zero mass")
    h, d = grid.h, grid.d
    dirichlet = 0.0
    for axis in range(d):
        both = support & neighbor_mask(support, axis, 1)
        diff = np.diff(v, axis=axis)
        pad = [(0, 0)] * d
        pad[axis] = (0, 1)
        diff = np.pad(diff, pad)
        dirichlet += float(np.sum(diff[both] ** 2))
    dirichlet *= h ** (d - 2)
    weights = face_weights(CellSet(grid, support), boundary)
    jump = beta * grid.face_area * float(sum(np.sum(w * v**2) for w in weights.values()))
    return PhaseEnergy(dirichlet=dirichlet, jump=jump, mass=grid.cell_volume * float(np.sum(v**2)))


@dataclass
class PartitionState:
    grid: GridSpec
    beta: float
    phases: list[PhaseField] = field(default_factory=list)

    @property
    def k(self) -> int:
        return len(self.phases)

    def labels(self) -> np.ndarray:
        """Integer label map: phase index, or -1 for unassigned cells."""
        out = np.full(self.grid.n, -1, dtype=int)
        for i, u in enumerate(self.phases):
            out[(u.values > 0) & (out < 0)] = i
        return out

    def supports(self) -> list[CellSet]:
        return [u.support for u in self.phases]

    def permuted(self, order: Sequence[int]) -> "PartitionState":
        return PartitionState(self.grid, self.beta, [self.phases[i] for i in order])


def disjointness_check(state: PartitionState) -> tuple[bool, tuple[int, ...] | None, tuple[int, int] | None]:
    """``(ok, first offending cell, phase pair)``; the cell is the lexicographically smallest."""
    best = None
    masks = [u.values > 0 for u in state.phases]
    for i in range(len(masks)):
        for j in range(i + 1, len(masks)):
            both = masks[i] & masks[j]
            if both.any():
                flat = int(np.flatnonzero(both)[0])
                if best is None or flat < best[0] or (flat == best[0] and (i, j) < best[1]):
                    best = (flat, (i, j))
    if best is None:
        return True, None, None
    cell = tuple(int(c) for c in np.unravel_index(best[0], state.grid.n))
    return False, cell, best[1]


def total_energy(state: PartitionState) -> EnergyBreakdown:
    ok, cell, pair = disjointness_check(state)
    if not ok:
        raise DisjointnessViolation(f"phases {pair} overlap at cell {cell}")
    rows = []
    for i, u in enumerate(state.phases):
        if not np.any(u.values > 0):
            raise ZeroMassPhase(f"phase {i} has zero mass")
        rows.append(phase_energy(state.grid, u, state.beta))
    return EnergyBreakdown(tuple(rows))


def competitor_truncate(u: PhaseField, eps: float) -> PhaseField | EmptyResult:
    """Drop the cells where ``u < eps``."""
    if not eps > 0:
        raise ValueError("eps must be positive")
    values = np.where(u.values >= eps, u.values, 0.0)
    return PhaseField(u.grid, values) if values.any() else EMPTY


def competitor_cap(u: PhaseField, M: float) -> PhaseField:
    """Replace values by ``min(u, M)``; support unchanged."""
    if not M > 0:
        raise ValueError("M must be positive")
    return PhaseField(u.grid, np.minimum(u.values, M))


def competitor_remove_ball(u: PhaseField, x: Sequence[float], rho: float) -> PhaseField | EmptyResult:
    """Zero the field on cells whose centers lie in the open ball ``B_rho(x)``."""
    if not rho > 0:
        raise ValueError("rho must be positive")
    dist2 = sum((c - xi) ** 2 for c, xi in zip(u.grid.centers(), x))
    values = np.where(dist2 < rho**2, 0.0, u.values)
    return PhaseField(u.grid, values) if values.any() else EMPTY


def replace_phase(state: PartitionState, i: int, u: PhaseField) -> PartitionState:
    phases = list(state.phases)
    phases[i] = u
    return PartitionState(state.grid, state.beta, phases)
