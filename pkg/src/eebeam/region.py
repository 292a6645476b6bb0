"""Energy-efficiency region sweeps: solve each scheme across a weight grid
and compare the resulting boundaries."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .scenario import Scenario, WeightVector
from .schemes import individual_ee, noma_as_rsma, sdma_as_rsma
from .sca import ScaOptions, SolveResult, SubproblemFailure, sca_solve, solve_scheme

__all__ = [
    "WeightSweep",
    "RegionPoint",
    "RegionBoundary",
    "sweep",
    "sweep_all",
    "region_dominates",
    "boundary_csv_rows",
    "REGION_CSV_COLUMNS",
]

REGION_CSV_COLUMNS = (
    "scheme", "gamma", "theta", "p_dyn_dbm", "u2",
    "ee1", "ee2", "wsr", "power_w", "iterations", "converged",
)


def _default_exponents() -> tuple[float, ...]:
    interior = np.round(np.arange(-1.0, 1.0 + 1e-9, 0.05), 10)
    return tuple([-3.0] + [float(e) for e in interior] + [3.0])


@dataclass(frozen=True)
class WeightSweep:
    """User-2 weight grid: u2 = 10^e with u1 fixed to 1."""

    exponents: tuple[float, ...] = field(default_factory=_default_exponents)

    def __post_init__(self):
        if not self.exponents:
            raise ValueError("exponent list must be nonempty")

    def weights(self) -> list[WeightVector]:
        return [WeightVector(1.0, 10.0**e) for e in self.exponents]


@dataclass(frozen=True)
class RegionPoint:
    u2: float
    ee1: float
    ee2: float
    wsr: float
    power_w: float
    iterations: int
    converged: bool
    valid: bool = True


@dataclass(frozen=True)
class RegionBoundary:
    scheme: str
    points: tuple[RegionPoint, ...]

    def valid_points(self) -> list[RegionPoint]:
        return [p for p in self.points if p.valid]


def _solve_point(
    scheme: str,
    scenario: Scenario,
    weights: WeightVector,
    options: ScaOptions,
    dominance_seeds: list[SolveResult],
) -> SolveResult:
    result = solve_scheme(scheme, scenario, weights, options)
    if scheme == "rsma":
        for seed in dominance_seeds:
            if seed.scheme == "sdma":
                warm = sdma_as_rsma(seed.precoders)
            elif seed.scheme == "noma":
                warm = noma_as_rsma(seed.precoders, seed.order, scenario)
            else:
                continue
            try:
                candidate = sca_solve("rsma", scenario, weights, options, warm_start=warm)
            except SubproblemFailure:
                continue
            if candidate.ee > result.ee:
                result = candidate
    return result


def sweep(
    scheme: str,
    scenario: Scenario,
    weight_sweep: WeightSweep = WeightSweep(),
    options: ScaOptions = ScaOptions(),
) -> RegionBoundary:
    """Solve one scheme at every weight point; failed points are recorded as
    invalid and the sweep continues."""
    boundaries = sweep_all([scheme], scenario, weight_sweep, options)
    return boundaries[scheme]


def sweep_all(
    schemes: list[str],
    scenario: Scenario,
    weight_sweep: WeightSweep = WeightSweep(),
    options: ScaOptions = ScaOptions(),
    dominance_warm_starts: bool = True,
) -> dict[str, RegionBoundary]:
    """Sweep several schemes over the same weights.

    When rate splitting is swept together with the baselines and
    dominance_warm_starts is on, each converged baseline point additionally
    seeds the rate-splitting solve at the same weight, which makes the
    boundary containment hold by construction rather than by luck.
    """
    ordered = [s for s in ("sdma", "noma", "rsma") if s in schemes]
    if set(schemes) - set(ordered):
        raise ValueError(f"unknown schemes: {sorted(set(schemes) - set(ordered))}")
    points: dict[str, list[RegionPoint]] = {s: [] for s in ordered}
    for weights in weight_sweep.weights():
        seeds: list[SolveResult] = []
        for scheme in ordered:
            dominance_seeds = seeds if (scheme == "rsma" and dominance_warm_starts) else []
            try:
                result = _solve_point(scheme, scenario, weights, options, dominance_seeds)
            except SubproblemFailure:
                points[scheme].append(
                    RegionPoint(weights.u2, 0.0, 0.0, 0.0, 0.0, 0, False, valid=False)
                )
                continue
            seeds.append(result)
            ee1, ee2 = individual_ee(
                result.scheme, result.precoders, scenario,
                split=result.split, order=result.order,
            )
            points[scheme].append(
                RegionPoint(
                    u2=weights.u2,
                    ee1=ee1,
                    ee2=ee2,
                    wsr=result.wsr,
                    power_w=result.transmit_power,
                    iterations=result.iterations,
                    converged=result.converged,
                )
            )
    return {s: RegionBoundary(s, tuple(points[s])) for s in ordered}


def region_dominates(
    a: RegionBoundary, b: RegionBoundary, tol: float = 1e-6
) -> tuple[bool, list[RegionPoint]]:
    """True when every valid point of b is weakly dominated (within tol, both
    coordinates) by some valid point of a; also returns the violating points."""
    a_pts = a.valid_points()
    violations = []
    for q in b.valid_points():
        if not any(p.ee1 >= q.ee1 - tol and p.ee2 >= q.ee2 - tol for p in a_pts):
            violations.append(q)
    return not violations, violations


def boundary_csv_rows(
    boundary: RegionBoundary, gamma: float, theta: float, p_dyn_dbm: float
) -> list[dict]:
    rows = []
    for p in boundary.points:
        rows.append(
            {
                "scheme": boundary.scheme,
                "gamma": gamma,
                "theta": theta,
                "p_dyn_dbm": p_dyn_dbm,
                "u2": p.u2,
                "ee1": p.ee1,
                "ee2": p.ee2,
                "wsr": p.wsr,
                "power_w": p.power_w,
                "iterations": p.iterations,
                "converged": p.converged and p.valid,
            }
        )
    return rows


def pareto_staircase(points: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """Nondominated subset sorted by first coordinate; plotting helper only."""
    pts = sorted(points, key=lambda p: (-p[0], -p[1]))
    frontier = []
    best_second = -np.inf
    for p in pts:
        if p[1] > best_second:
            frontier.append(p)
            best_second = p[1]
    return sorted(frontier)


def convex_hull_frontier(points: list[tuple[float, float]]) -> list[tuple[float, float]]:
    """Upper-right convex hull of the point cloud (the time-sharing boundary).

    Plotting helper only; no region claim is tested against it.
    """
    pts = pareto_staircase(points)
    if len(pts) <= 2:
        return pts
    hull: list[tuple[float, float]] = []
    for p in pts:  # x ascending, y ascending on a Pareto staircase
        while len(hull) >= 2:
            (x1, y1), (x2, y2) = hull[-2], hull[-1]
            # keep the boundary concave from above: drop points under the chord
            if (x2 - x1) * (p[1] - y1) - (p[0] - x1) * (y2 - y1) >= 0:
                hull.pop()
            else:
                break
        hull.append(p)
    return hull
