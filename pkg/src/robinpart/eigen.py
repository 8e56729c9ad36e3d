"""Discrete Robin Laplacian and its first eigenpair.

The operator on a cell set ``S`` is the pencil ``(K + beta B, M)``:

* ``K`` couples face-adjacent cells of ``S`` with weight ``h^(d-2)``
  (two-point flux on interior faces),
* ``B`` is diagonal, ``B_a = h^(d-1) * (weighted number of boundary faces of a)``,
  i.e. the trace on a boundary face is the adjacent cell value and the outer
  trace is zero,
* ``M = h^d I``.

Also hosts the analytic first eigenvalues of an interval and a disk used as
oracles, and the ball scaling check ``lambda(rB, beta) = r^-2 lambda(B, beta r)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Sequence

import numpy as np
import scipy.sparse as sp
from scipy.sparse.linalg import cg

from .energy import PhaseField
from .errors import (
    ConfigError,
    EmptySupport,
    NoConvergence,
    NonPositiveBeta,
    NotConnected,
    SignPatternViolation,
    ZeroFunction,
)
from .grid import CellSet, GridSpec, face_weights, interior_face_pairs, is_connected, make_grid, rasterize_ball

DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 500


@dataclass(frozen=True)
class RobinOperator:
    S: CellSet
    beta: float
    stiffness: sp.csr_matrix
    boundary_mass: np.ndarray
    cell_mass: float
    index: np.ndarray  # flat grid index of each dense unknown, lexicographic
    boundary: str = "staircase"

    @property
    def grid(self) -> GridSpec:
        return self.S.grid

    @property
    def size(self) -> int:
        return self.index.size

    @property
    def mass(self) -> np.ndarray:
        return np.full(self.size, self.cell_mass)

    def matrix(self, shift: float = 0.0) -> sp.csr_matrix:
        """``K + beta B - shift M``."""
        diag = self.beta * self.boundary_mass - shift * self.cell_mass
        return (self.stiffness + sp.diags(diag)).tocsr()

    def restrict(self, u: PhaseField | np.ndarray) -> np.ndarray:
        if isinstance(u, PhaseField):
            return u.values.ravel()[self.index]
        u = np.asarray(u, dtype=float)
        if u.shape == self.grid.n:
            return u.ravel()[self.index]
        if u.shape != (self.size,):
            raise ValueError(f"vector of shape {u.shape} does not fit an operator of size {self.size}")
        return u

    def extend(self, vec: np.ndarray) -> np.ndarray:
        """Dense unknowns -> grid array (zero off ``S``)."""
        out = np.zeros(self.grid.n)
        out.ravel()[self.index] = vec
        return out


def assemble(grid: GridSpec, S: CellSet, beta: float, boundary: str = "staircase") -> RobinOperator:
    if S.grid != grid:
        raise ConfigError("cell set lives on a different grid")
    if not S:
        raise EmptySupport("cannot assemble on an empty cell set")
    if not beta > 0:
        raise NonPositiveBeta(f"beta must be positive, got {beta}")
    h, d = grid.h, grid.d
    numbering = np.full(grid.n, -1, dtype=np.int64)
    index = np.flatnonzero(S.mask)
    numbering.ravel()[index] = np.arange(index.size)

    rows, cols = [], []
    for axis in range(d):
        pairs = interior_face_pairs(S.mask, axis)
        lower = numbering[pairs]
        upper = np.roll(numbering, -1, axis=axis)[pairs]
        rows.append(lower)
        cols.append(upper)
    rows = np.concatenate(rows)
    cols = np.concatenate(cols)
    n = index.size
    coupling = sp.coo_matrix((np.full(rows.size, h ** (d - 2)), (rows, cols)), shape=(n, n))
    coupling = (coupling + coupling.T).tocsr()
    degree = np.asarray(coupling.sum(axis=1)).ravel()
    stiffness = (sp.diags(degree) - coupling).tocsr()

    weights = face_weights(S, boundary)
    per_cell = sum(weights.values())
    boundary_mass = grid.face_area * per_cell.ravel()[index]
    return RobinOperator(S, float(beta), stiffness, boundary_mass, grid.cell_volume, index, boundary)


def rayleigh_quotient(op: RobinOperator, u: PhaseField | np.ndarray) -> float:
    vec = op.restrict(u)
    if not np.any(vec):
        raise ZeroFunction("the Rayleigh quotient of the zero function is undefined")
    # the quotient is scale invariant; normalizing avoids underflow for tiny inputs
    vec = vec / np.max(np.abs(vec))
    numerator = vec @ (op.stiffness @ vec) + op.beta * np.sum(op.boundary_mass * vec**2)
    return float(numerator / (op.cell_mass * (vec @ vec)))


@dataclass
class EigenResult:
    lam: float
    u: PhaseField
    iterations: int
    residual: float
    beta: float = float("nan")
    history: list[float] = field(default_factory=list, repr=False)

    @property
    def cells(self) -> int:
        return int(np.count_nonzero(self.u.values))

    def to_json(self) -> dict:
        return {
            "lambda": self.lam,
            "iterations": self.iterations,
            "residual": self.residual,
            "h": self.u.grid.h,
            "beta": self.beta,
            "cells": self.cells,
        }


def _residual(A: sp.csr_matrix, m: float, u: np.ndarray) -> tuple[float, np.ndarray, float]:
    Au = A @ u
    lam = float(u @ Au) / (m * float(u @ u))
    r = Au - lam * m * u
    return lam, r, float(np.linalg.norm(r) / (m * np.linalg.norm(u)))


def smallest_eigenpair(op: RobinOperator, tol: float = DEFAULT_TOL, max_iter: int = DEFAULT_MAX_ITER) -> EigenResult:
    """Smallest eigenpair of ``(K + beta B, M)`` by shifted inverse iteration.

    Starts from the all-ones vector. Each outer step solves
    ``(A - sigma M) w = M u`` by Jacobi-preconditioned CG (relative tolerance ``tol/10``).
    The shift is 0 for the first three steps; afterwards it is the Rayleigh quotient
    lowered by the residual bound ``||r||_{M^-1}``, which keeps the shifted matrix
    positive definite once the iterate is dominated by the first eigenvector.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if not is_connected(op.S):
        raise NotConnected(f"cell set has more than one connected component ({len(op.S)} cells)")
    A = op.matrix()
    m = op.cell_mass
    n = op.size
    diag = A.diagonal()
    u = np.ones(n) / math.sqrt(m * n)
    history = []
    lam, r, res = _residual(A, m, u)
    iterations = 0
    while res > tol:
        if iterations >= max_iter:
            raise NoConvergence(max_iter, res)
        iterations += 1
        if iterations <= 3:
            shift = 0.0
        else:
            shift = max(0.0, lam - float(np.linalg.norm(r)) / math.sqrt(m))
        shifted = A - sp.diags(np.full(n, shift * m)) if shift else A
        precond = sp.diags(1.0 / (diag - shift * m))
        guess = u / max(lam - shift, 1e-300)
        w, info = cg(shifted, m * u, x0=guess, rtol=tol / 10, atol=0.0, maxiter=20 * n, M=precond)
        if info < 0 or not np.all(np.isfinite(w)):
            raise NoConvergence(iterations, res)
        u = w / math.sqrt(m * float(w @ w))
        lam, r, res = _residual(A, m, u)
        history.append(lam)

    if u.sum() < 0:
        u = -u
    if u.min() < -tol:
        raise SignPatternViolation(f"eigenvector has entry {u.min():.3e} below -tol")
    if u.min() < 0:
        u = np.maximum(u, 0.0)
        u /= math.sqrt(m * float(u @ u))
        lam, r, res = _residual(A, m, u)
    return EigenResult(
        lam=lam,
        u=PhaseField(op.grid, op.extend(u)),
        iterations=iterations,
        residual=res,
        beta=op.beta,
        history=history,
    )


def robin_eigenvalue(S: CellSet, beta: float, boundary: str = "staircase", tol: float = DEFAULT_TOL) -> EigenResult:
    """Convenience wrapper: assemble on ``S`` and solve."""
    return smallest_eigenpair(assemble(S.grid, S, beta, boundary), tol=tol)


# analytic oracles ---------------------------------------------------------------


def _bisect(f, lo: float, hi: float, rtol: float = 1e-15) -> float:
    """Root of an increasing function ``f`` on ``(lo, hi)`` with ``f(lo) < 0 < f(hi)``."""
    for _ in range(400):
        mid = 0.5 * (lo + hi)
        if mid <= lo or mid >= hi or hi - lo <= rtol * abs(mid):
            break
        if f(mid) < 0:
            lo = mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def analytic_lambda_interval(L: float, beta: float) -> float:
    """First Robin eigenvalue of an interval of length ``L``.

    Root in ``(0, (pi/L)^2)`` of ``sqrt(lam) tan(sqrt(lam) L / 2) = beta`` (even eigenfunction
    ``cos(sqrt(lam) x)`` centered on the interval).
    """
    if not (L > 0 and beta > 0):
        raise ConfigError("L and beta must be positive")
    # s tan(s L/2) is increasing on (0, pi/L); bisect in s
    s = _bisect(lambda s: s * math.tan(0.5 * s * L) - beta, 0.0, math.pi / L)
    return s * s


def bessel_j(order: int, x: float) -> float:
    """``J_0`` or ``J_1`` by the power series; accurate to ~1e-15 for ``|x| <= 10``."""
    if order not in (0, 1):
        raise ValueError("only J_0 and J_1 are provided")
    half = 0.5 * x
    term = 1.0 if order == 0 else half
    total = term
    q = -half * half
    for m in range(1, 200):
        term *= q / (m * (m + order))
        total += term
        if abs(term) <= 1e-17 * abs(total):
            break
    return total


def bessel_j0_first_zero() -> float:
    """First positive zero of ``J_0`` (about 2.4048)."""
    return _bisect(lambda x: -bessel_j(0, x), 2.0, 3.0)


def analytic_lambda_disk(R: float, beta: float) -> float:
    """First Robin eigenvalue of the disk of radius ``R``.

    Smallest root of ``sqrt(lam) J_1(sqrt(lam) R) = beta J_0(sqrt(lam) R)``, which lies
    below the Dirichlet value ``(j_{0,1}/R)^2``.
    """
    if not (R > 0 and beta > 0):
        raise ConfigError("R and beta must be positive")
    j01 = bessel_j0_first_zero()
    # in x = s R: x J_1(x) - beta R J_0(x) increases from -beta R to j01 J_1(j01) on (0, j01)
    x = _bisect(lambda x: x * bessel_j(1, x) - beta * R * bessel_j(0, x), 0.0, j01)
    return (x / R) ** 2


# ball scaling identity ------------------------------------------------------------


@dataclass
class ScalingRow:
    h: float
    lam_ball: float
    lam_unit_scaled: float
    mismatch: float
    discretization_error: float = float("nan")


@dataclass
class ScalingReport:
    R: float
    beta: float
    rows: list[ScalingRow]
    passed: bool


def _ball_grid(h: float, radius: float, extent: float | None, d: int) -> tuple[GridSpec, CellSet]:
    side = extent if extent is not None else 2 * radius + 8 * h
    grid = make_grid([side] * d, h)
    center = [0.5 * e for e in grid.extent]
    if any(c - radius < 0 or c + radius > e for c, e in zip(center, grid.extent)):
        raise EmptySupport(f"ball of radius {radius} does not fit in a box of side {side}")
    return grid, rasterize_ball(grid, center, radius)


def check_scaling(
    R: float,
    beta: float,
    resolutions: Sequence[float],
    *,
    d: int = 2,
    extent: float | None = None,
    boundary: str = "isotropic",
    tol: float = DEFAULT_TOL,
) -> ScalingReport:
    """Compare ``lambda_h(B_R, beta)`` with ``R^-2 lambda_h(B_1, beta R)`` at each ``h``.

    ``extent`` fixes the box side for both balls; by default the box just contains
    each ball. The check passes when the relative mismatch shrinks under refinement
    and, at the finest ``h``, is at most twice the discretization-error estimate
    (relative change of the eigenvalues between the two finest resolutions).
    """
    if not (R > 0 and beta > 0):
        raise ConfigError("R and beta must be positive")
    resolutions = sorted(resolutions, reverse=True)
    if len(resolutions) < 2:
        raise ConfigError("need at least two resolutions")
    rows: list[ScalingRow] = []
    for h in resolutions:
        _, ball = _ball_grid(h, R, extent, d)
        _, unit = _ball_grid(h, 1.0, extent, d)
        lam_ball = robin_eigenvalue(ball, beta, boundary, tol).lam
        if R == 1.0:
            lam_unit = lam_ball
        else:
            lam_unit = robin_eigenvalue(unit, beta * R, boundary, tol).lam / R**2
        mismatch = abs(lam_ball - lam_unit) / lam_ball
        row = ScalingRow(h, lam_ball, lam_unit, mismatch)
        if rows:
            prev = rows[-1]
            row.discretization_error = max(
                abs(lam_ball - prev.lam_ball) / lam_ball,
                abs(lam_unit - prev.lam_unit_scaled) / lam_unit,
            )
        rows.append(row)
    mismatches = [r.mismatch for r in rows]
    shrinking = all(b <= a for a, b in zip(mismatches, mismatches[1:]))
    passed = shrinking and rows[-1].mismatch <= 2 * rows[-1].discretization_error
    return ScalingReport(R, beta, rows, passed)
