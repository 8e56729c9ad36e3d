"""Verification suites run by ``robinpart verify``.

Each suite returns a list of :class:`Check` rows; a suite passes when every row does.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .analysis import faber_krahn_gap, probe_state
from .eigen import check_scaling
from .energy import (
    EmptyResult,
    PartitionState,
    competitor_cap,
    competitor_remove_ball,
    competitor_truncate,
    replace_phase,
    total_energy,
)

SUITES = ("faber-krahn", "scaling", "probes", "competitors")


@dataclass
class Check:
    suite: str
    name: str
    value: float
    threshold: float
    passed: bool
    detail: str = ""

    def row(self) -> list:
        return [self.suite, self.name, float(self.value), float(self.threshold), bool(self.passed), self.detail]


CHECK_HEADER = ["suite", "check", "value", "threshold", "passed", "detail"]


def faber_krahn_suite(
    betas: Sequence[float] = (0.1, 1.0, 10.0),
    area: float = 0.25,
    resolutions: Sequence[float] = (1 / 128, 1 / 256),
) -> list[Check]:
    """Disk beats the equal-area square, by more than twice the resolution drift."""
    coarse_h, fine_h = sorted(resolutions, reverse=True)[-2:]
    checks = []
    for beta in betas:
        coarse = faber_krahn_gap(beta, area, coarse_h)
        fine = faber_krahn_gap(beta, area, fine_h)
        drift = max(abs(fine.lambda_disk - coarse.lambda_disk), abs(fine.lambda_square - coarse.lambda_square))
        checks.append(
            Check(
                "faber-krahn",
                f"gap beta={beta:g}",
                fine.gap,
                2 * drift,
                fine.gap > 0 and fine.gap > 2 * drift,
                f"lambda_disk={fine.lambda_disk:.10g} lambda_square={fine.lambda_square:.10g} h={fine_h:g}",
            )
        )
    return checks


def scaling_suite(R: float = 0.5, beta: float = 1.0, resolutions: Sequence[float] = (1 / 64, 1 / 128)) -> list[Check]:
    report = check_scaling(R, beta, resolutions)
    last = report.rows[-1]
    return [
        Check(
            "scaling",
            f"ball scaling R={R:g} beta={beta:g}",
            last.mismatch,
            2 * last.discretization_error,
            report.passed,
            " ".join(f"h={r.h:g}:mismatch={r.mismatch:.3e}" for r in report.rows),
        )
    ]


def probes_suite(state: PartitionState) -> list[Check]:
    checks = []
    for i, rep in probe_state(state):
        cmp = ">=" if rep.name == "density" else "<="
        checks.append(
            Check(
                "probes",
                f"{rep.name} phase={i}",
                rep.observed,
                rep.threshold,
                rep.passed,
                f"observed {cmp} threshold; " + " ".join(f"rho={r:g}:[{lo:.4g},{hi:.4g}]" for r, lo, hi in zip(rep.radii, rep.ratio_min, rep.ratio_max)),
            )
        )
    return checks


def competitors_suite(state: PartitionState, n_points: int = 5, seed: int = 0, slack: float = 1e-6) -> list[Check]:
    """Each competitor modification of one phase must not lower the total energy."""
    optimum = total_energy(state).total
    floor = optimum - slack * optimum
    h = state.grid.h
    rng = np.random.default_rng(seed)
    checks = []

    def record(name, competitor, i):
        if isinstance(competitor, EmptyResult):
            checks.append(Check("competitors", name, math.inf, floor, True, "phase annihilated"))
            return
        energy = total_energy(replace_phase(state, i, competitor)).total
        checks.append(Check("competitors", name, energy, floor, energy >= floor))

    for i, u in enumerate(state.phases):
        alpha = u.min_on_support()
        top = u.max()
        record(f"truncate phase={i} eps={0.5 * alpha:.4g}", competitor_truncate(u, 0.5 * alpha), i)
        record(f"cap phase={i} M=0.5max", competitor_cap(u, 0.5 * top), i)
        identity = competitor_cap(u, top)
        same = np.array_equal(identity.values, u.values)
        checks.append(Check("competitors", f"cap phase={i} M=max is identity", float(same), 1.0, same))
        cells = np.argwhere(u.values > 0)
        picks = cells[np.sort(rng.choice(len(cells), size=min(n_points, len(cells)), replace=False))]
        for cell in picks:
            x = state.grid.center_of(cell)
            for mult in (4, 8):
                record(
                    f"remove_ball phase={i} cell={tuple(int(c) for c in cell)} rho={mult}h",
                    competitor_remove_ball(u, x, mult * h),
                    i,
                )
    return checks
