"""Brute-force reference optimizers used to validate the iterative solver.

At a single transmit antenna every SINR depends on stream powers only, so an
exhaustive power/split grid is a genuine optimum oracle up to step size. For
more antennas the search is restricted to the span of the two channels and
certifies only a feasible lower bound.
"""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np

from .scenario import Scenario, WeightVector, total_power
from .schemes import (
    BOTH_ORDERS,
    CommonRateSplit,
    DecodingOrder,
    PrecoderSet,
    evaluate_ee,
)

__all__ = ["GridSpec", "GridTooLarge", "OraclePoint", "grid_ee_nt1", "grid_ee_span"]


class GridTooLarge(RuntimeError):
    """The requested grid census exceeds the evaluation cap."""


@dataclass(frozen=True)
class GridSpec:
    power_steps: int = 101
    split_steps: int = 51
    span_coeff_steps: int = 5
    phase_steps: int = 8
    max_evaluations: float = 1e8

    def __post_init__(self):
        if self.power_steps < 2 or self.split_steps < 2 or self.span_coeff_steps < 2:
            raise ValueError("power, split and span coefficient axes need at least 2 steps")
        if self.phase_steps < 1:
            raise ValueError("phase_steps must be >= 1")


@dataclass(frozen=True)
class OraclePoint:
    precoders: PrecoderSet
    split: CommonRateSplit
    order: DecodingOrder | None
    ee: float

    def to_json_dict(self) -> dict:
        return {
            "ee": self.ee,
            "power_w": self.precoders.transmit_power(),
            "split": [self.split.c1, self.split.c2],
            "order": None if self.order is None else [self.order.first, self.order.second],
        }


def _rate(sinr, w):
    return w * np.log2(1.0 + sinr)


def grid_ee_nt1(
    scheme: str, scenario: Scenario, weights: WeightVector, grid: GridSpec = GridSpec()
) -> tuple[float, OraclePoint]:
    """Exhaustive power / split search at nt=1 (phases cannot matter there).

    Ties go to the lexicographically smallest grid index in (split, power)
    order, which makes the reduction deterministic.
    """
    if scenario.nt != 1:
        raise ValueError("grid_ee_nt1 requires nt=1")
    g1 = float(abs(scenario.channels[0][0]) ** 2)
    g2 = float(abs(scenario.channels[1][0]) ** 2)
    n1, n2 = scenario.noise_power
    w = scenario.bandwidth
    u1, u2 = weights.u1, weights.u2
    axis = np.linspace(0.0, scenario.p_t, grid.power_steps)

    def ee_from_wsr(wsr, ptran):
        return wsr / (ptran / scenario.eta + scenario.p_cir)

    if scheme == "sdma":
        p1, p2 = np.meshgrid(axis, axis, indexing="ij")
        mask = p1 + p2 <= scenario.p_t * (1.0 + 1e-12)
        r1 = _rate(g1 * p1 / (g1 * p2 + n1), w)
        r2 = _rate(g2 * p2 / (g2 * p1 + n2), w)
        ee = np.where(mask, ee_from_wsr(u1 * r1 + u2 * r2, p1 + p2), -np.inf)
        idx = np.unravel_index(int(np.argmax(ee)), ee.shape)
        best = OraclePoint(
            precoders=PrecoderSet(private=(np.array([np.sqrt(p1[idx])]), np.array([np.sqrt(p2[idx])]))),
            split=CommonRateSplit(),
            order=None,
            ee=float(ee[idx]),
        )
        return best.ee, best

    if scheme == "noma":
        p1, p2 = np.meshgrid(axis, axis, indexing="ij")
        mask = p1 + p2 <= scenario.p_t * (1.0 + 1e-12)
        best = None
        for order in BOTH_ORDERS:
            gf, gs = (g1, g2) if order.first == 1 else (g2, g1)
            nf, ns = (n1, n2) if order.first == 1 else (n2, n1)
            uf, us = (u1, u2) if order.first == 1 else (u2, u1)
            pf, ps = (p1, p2) if order.first == 1 else (p2, p1)
            r_first = np.minimum(
                _rate(gf * pf / (gf * ps + nf), w),
                _rate(gs * pf / (gs * ps + ns), w),
            )
            r_second = _rate(gs * ps / ns, w)
            ee = np.where(mask, ee_from_wsr(uf * r_first + us * r_second, p1 + p2), -np.inf)
            idx = np.unravel_index(int(np.argmax(ee)), ee.shape)
            if best is None or ee[idx] > best.ee:
                best = OraclePoint(
                    precoders=PrecoderSet(
                        private=(np.array([np.sqrt(p1[idx])]), np.array([np.sqrt(p2[idx])]))
                    ),
                    split=CommonRateSplit(),
                    order=order,
                    ee=float(ee[idx]),
                )
        return best.ee, best

    if scheme == "rsma":
        pc, p1, p2 = np.meshgrid(axis, axis, axis, indexing="ij")
        mask = pc + p1 + p2 <= scenario.p_t * (1.0 + 1e-12)
        ptran = pc + p1 + p2
        r1 = _rate(g1 * p1 / (g1 * p2 + n1), w)
        r2 = _rate(g2 * p2 / (g2 * p1 + n2), w)
        rc = np.minimum(
            _rate(g1 * pc / (g1 * (p1 + p2) + n1), w),
            _rate(g2 * pc / (g2 * (p1 + p2) + n2), w),
        )
        best_ee = -np.inf
        best_idx = None
        best_f = 0.0
        for f in np.linspace(0.0, 1.0, grid.split_steps):
            wsr = u1 * (f * rc + r1) + u2 * ((1.0 - f) * rc + r2)
            ee = np.where(mask, ee_from_wsr(wsr, ptran), -np.inf)
            idx = np.unravel_index(int(np.argmax(ee)), ee.shape)
            if ee[idx] > best_ee:
                best_ee = float(ee[idx])
                best_idx = idx
                best_f = float(f)
        rc_star = float(rc[best_idx])
        best = OraclePoint(
            precoders=PrecoderSet(
                private=(np.array([np.sqrt(p1[best_idx])]), np.array([np.sqrt(p2[best_idx])])),
                common=np.array([np.sqrt(pc[best_idx])]),
            ),
            split=CommonRateSplit(best_f * rc_star, (1.0 - best_f) * rc_star),
            order=None,
            ee=best_ee,
        )
        return best.ee, best

    raise ValueError(f"unknown scheme {scheme!r}")


def _span_basis(scenario: Scenario) -> list[np.ndarray]:
    h1, h2 = scenario.channels
    basis = []
    n1 = np.linalg.norm(h1)
    if n1 > 0:
        basis.append(h1 / n1)
    residual = h2 - (basis[0].conj() @ h2) * basis[0] if basis else h2
    nr = np.linalg.norm(residual)
    if nr > 1e-9 * max(np.linalg.norm(h2), 1.0):
        basis.append(residual / nr)
    if not basis:
        n2 = np.linalg.norm(h2)
        basis.append(h2 / n2)
    return basis


def _stream_candidates(scenario: Scenario, basis, grid: GridSpec):
    """Per-stream candidate table: complex span coefficients and their power.

    The first coefficient is taken real nonnegative (a per-stream global
    phase never changes SINRs); the second carries a phase axis.
    """
    fractions = np.linspace(0.0, 1.0, grid.span_coeff_steps)
    amps = np.sqrt(scenario.p_t * fractions)
    if len(basis) == 1:
        c1 = amps
        c2 = np.zeros_like(amps)
    else:
        phases = np.exp(1j * np.linspace(0.0, 2.0 * np.pi, grid.phase_steps, endpoint=False))
        c1, c2m, ph = np.meshgrid(amps, amps, phases, indexing="ij")
        c1 = c1.reshape(-1)
        c2 = (c2m * ph).reshape(-1)
    power = c1**2 + np.abs(c2) ** 2
    # h_k^H p for a candidate = c1 * (h_k^H e1) + c2 * (h_k^H e2)
    proj = np.array([[np.vdot(scenario.channels[k], e) for e in basis] for k in range(2)])
    cross = []
    for k in range(2):
        val = proj[k, 0] * c1
        if len(basis) > 1:
            val = val + proj[k, 1] * c2
        cross.append(val)
    return c1, c2, power, cross  # cross[k][cand] = h_k^H p_cand


def _span_census(scheme: str, n_cand: int, grid: GridSpec) -> float:
    streams = {"rsma": 3, "sdma": 2, "noma": 2}[scheme]
    census = float(n_cand) ** streams
    if scheme == "rsma":
        census *= grid.split_steps
    if scheme == "noma":
        census *= 2
    return census


def grid_ee_span(
    scheme: str,
    scenario: Scenario,
    weights: WeightVector,
    grid: GridSpec = GridSpec(),
    include_points: list[tuple[PrecoderSet, CommonRateSplit | None, DecodingOrder | None]] | None = None,
    chunk: int = 1 << 18,
) -> tuple[float, OraclePoint]:
    """Coarse search over precoders restricted to span{h1, h2}; the result is
    a feasible lower bound on the optimum, never a tightness claim.

    include_points adds explicit candidate operating points (evaluated with
    the exact forward model) to the comparison, so callers can check that a
    solver output is not dominated by the grid.
    """
    if scenario.nt < 2:
        raise ValueError("grid_ee_span requires nt >= 2; use grid_ee_nt1")
    basis = _span_basis(scenario)
    c1, c2, power, cross = _stream_candidates(scenario, basis, grid)
    n_cand = len(power)
    census = _span_census(scheme, n_cand, grid)
    if census > grid.max_evaluations:
        raise GridTooLarge(f"census {census:.3g} exceeds cap {grid.max_evaluations:.3g}")

    n1, n2 = scenario.noise_power
    w = scenario.bandwidth
    u1, u2 = weights.u1, weights.u2
    denom_cir = scenario.p_cir

    def ee_of(wsr, ptran):
        return wsr / (ptran / scenario.eta + denom_cir)

    def vec_of(idx: int) -> np.ndarray:
        v = c1[idx] * basis[0]
        if len(basis) > 1:
            v = v + c2[idx] * basis[1]
        return v

    best_ee = -np.inf
    best_point: OraclePoint | None = None

    if scheme == "sdma":
        stream_axes = 2
    elif scheme == "noma":
        stream_axes = 2
    else:
        stream_axes = 3

    gain = [np.abs(cross[k]) ** 2 for k in range(2)]  # gain[k][cand]

    # chunked cartesian product over stream candidate indices
    def chunked_indices():
        total = n_cand**stream_axes
        for start in range(0, total, chunk):
            flat = np.arange(start, min(start + chunk, total))
            idxs = []
            rest = flat
            for _ in range(stream_axes):
                idxs.append(rest % n_cand)
                rest = rest // n_cand
            yield tuple(idxs[::-1])  # first stream is the most significant axis

    if scheme == "sdma":
        for i1, i2 in chunked_indices():
            ptran = power[i1] + power[i2]
            mask = ptran <= scenario.p_t * (1.0 + 1e-12)
            r1 = _rate(gain[0][i1] / (gain[0][i2] + n1), w)
            r2 = _rate(gain[1][i2] / (gain[1][i1] + n2), w)
            ee = np.where(mask, ee_of(u1 * r1 + u2 * r2, ptran), -np.inf)
            j = int(np.argmax(ee))
            if ee[j] > best_ee:
                best_ee = float(ee[j])
                best_point = OraclePoint(
                    PrecoderSet(private=(vec_of(i1[j]), vec_of(i2[j]))),
                    CommonRateSplit(), None, best_ee,
                )
    elif scheme == "noma":
        for order in BOTH_ORDERS:
            f, s = order.first - 1, order.second - 1
            gf, gs = gain[f], gain[s]
            nf, ns = scenario.noise_power[f], scenario.noise_power[s]
            uf = (u1, u2)[f]
            us = (u1, u2)[s]
            for i_f, i_s in chunked_indices():
                ptran = power[i_f] + power[i_s]
                mask = ptran <= scenario.p_t * (1.0 + 1e-12)
                r_first = np.minimum(
                    _rate(gf[i_f] / (gf[i_s] + nf), w),
                    _rate(gs[i_f] / (gs[i_s] + ns), w),
                )
                r_second = _rate(gs[i_s] / ns, w)
                ee = np.where(mask, ee_of(uf * r_first + us * r_second, ptran), -np.inf)
                j = int(np.argmax(ee))
                if ee[j] > best_ee:
                    private = [None, None]
                    private[f] = vec_of(i_f[j])
                    private[s] = vec_of(i_s[j])
                    best_ee = float(ee[j])
                    best_point = OraclePoint(
                        PrecoderSet(private=(private[0], private[1])),
                        CommonRateSplit(), order, best_ee,
                    )
    else:  # rsma
        fractions = np.linspace(0.0, 1.0, grid.split_steps)
        for ic, i1, i2 in chunked_indices():
            ptran = power[ic] + power[i1] + power[i2]
            mask = ptran <= scenario.p_t * (1.0 + 1e-12)
            r1 = _rate(gain[0][i1] / (gain[0][i2] + n1), w)
            r2 = _rate(gain[1][i2] / (gain[1][i1] + n2), w)
            rc = np.minimum(
                _rate(gain[0][ic] / (gain[0][i1] + gain[0][i2] + n1), w),
                _rate(gain[1][ic] / (gain[1][i1] + gain[1][i2] + n2), w),
            )
            for frac in fractions:
                wsr = u1 * (frac * rc + r1) + u2 * ((1.0 - frac) * rc + r2)
                ee = np.where(mask, ee_of(wsr, ptran), -np.inf)
                j = int(np.argmax(ee))
                if ee[j] > best_ee:
                    rc_j = float(rc[j])
                    best_ee = float(ee[j])
                    best_point = OraclePoint(
                        PrecoderSet(
                            private=(vec_of(i1[j]), vec_of(i2[j])), common=vec_of(ic[j])
                        ),
                        CommonRateSplit(frac * rc_j, (1.0 - frac) * rc_j),
                        None, best_ee,
                    )

    for extra in include_points or []:
        precoders, split, order = extra
        ee = evaluate_ee(scheme, precoders, weights, scenario, split=split, order=order)
        if ee > best_ee:
            best_ee = ee
            best_point = OraclePoint(precoders, split or CommonRateSplit(), order, ee)

    return best_ee, best_point


def oracle_report(
    scheme: str,
    scenario: Scenario,
    weights: WeightVector,
    grid: GridSpec,
    sca_ee: float,
    use_span: bool = False,
) -> dict:
    """JSON-ready comparison of the grid optimum against a solver value."""
    t0 = time.perf_counter()
    if use_span:
        best_ee, point = grid_ee_span(scheme, scenario, weights, grid)
        census = _span_census(scheme, len(_stream_candidates(scenario, _span_basis(scenario), grid)[2]), grid)
    else:
        best_ee, point = grid_ee_nt1(scheme, scenario, weights, grid)
        census = float(grid.power_steps) ** (3 if scheme == "rsma" else 2)
        if scheme == "rsma":
            census *= grid.split_steps
        if scheme == "noma":
            census *= 2
    elapsed = time.perf_counter() - t0
    rel_gap = abs(sca_ee - best_ee) / best_ee if best_ee > 0 else 0.0
    return {
        "oracle_ee": best_ee,
        "best_ee": best_ee,
        "sca_ee": sca_ee,
        "rel_gap": rel_gap,
        "best_point": point.to_json_dict(),
        "grid_census": census,
        "wall_time_s": elapsed,
        "span": use_span,
    }
