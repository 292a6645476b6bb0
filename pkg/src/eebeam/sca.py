"""Successive convex approximation for the energy-efficiency problems.

The fractional objective is lifted into an epigraph form with surrogate
variables (omega for the root of the weighted sum rate, z for total consumed
power, t for their ratio, alpha/theta/beta chains linking rates to SINRs),
and the two non-convex pieces, omega^2/z and |h^H p|^2/beta, are replaced by
their first-order lower bounds around the current iterate. Each iteration
solves one conic program; the objective sequence is nondecreasing and the
loop stops when it stalls within epsilon.

The same builder covers all three schemes: the plain multi-user scheme drops
the common stream entirely, and superposition coding with a fixed decoding
order is expressed by carrying the first-decoded user's message on the
common stream with that user's private stream switched off.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace

import numpy as np

from . import conic
from .conic import Affine, ConicProgram
from .scenario import Scenario, WeightVector, total_power
from .schemes import (
    BOTH_ORDERS,
    CommonRateSplit,
    DecodingOrder,
    PrecoderSet,
    evaluate_ee,
    noma_as_rsma,
    rsma_common_rates,
)

__all__ = [
    "IterateState",
    "ScaOptions",
    "SolveResult",
    "TraceRow",
    "SubproblemFailure",
    "DegenerateChannel",
    "linearize_ratio",
    "linearize_qol",
    "build_subproblem",
    "initialize",
    "sca_solve",
    "solve_noma",
    "solve_scheme",
    "state_to_assignment",
    "trace_csv_rows",
]

SCHEMES = ("rsma", "sdma", "noma")


class SubproblemFailure(RuntimeError):
    """A per-iteration conic solve did not return an optimum."""

    def __init__(self, iteration: int, status: str):
        super().__init__(f"subproblem failed at iteration {iteration}: {status}")
        self.iteration = iteration
        self.status = status


class DegenerateChannel(ValueError):
    """No usable channel direction to initialize from."""


# ---------------------------------------------------------------------------
# linearizations

@dataclass(frozen=True)
class RatioLowerBound:
    """Affine lower bound of omega^2 / z around (omega_bar, z_bar):
    (2 omega_bar / z_bar) omega - (omega_bar / z_bar)^2 z."""

    coef_omega: float
    coef_z: float

    def evaluate(self, omega: float, z: float) -> float:
        return self.coef_omega * omega + self.coef_z * z


def linearize_ratio(omega_bar: float, z_bar: float) -> RatioLowerBound:
    if z_bar <= 0.0:
        raise ValueError("z_bar must be positive")
    ratio = omega_bar / z_bar
    return RatioLowerBound(coef_omega=2.0 * ratio, coef_z=-(ratio**2))


@dataclass(frozen=True)
class QolLowerBound:
    """Affine lower bound of |h^H p|^2 / beta around (p_bar, beta_bar).

    The form is 2 Re(conj(h^H p_bar) * h^H p) / beta_bar + coef_beta * beta;
    it is tight at the expansion point and never exceeds the true ratio for
    beta > 0.
    """

    h: np.ndarray
    gain_bar: complex  # h^H p_bar
    beta_bar: float
    coef_beta: float

    def evaluate(self, p: np.ndarray, beta: float) -> float:
        cross = complex(np.vdot(self.h, np.asarray(p, dtype=complex)))
        return 2.0 * (self.gain_bar.conjugate() * cross).real / self.beta_bar + self.coef_beta * beta

    def precoder_coeffs(self) -> np.ndarray:
        """Real coefficient vector over the interleaved [Re(p); Im(p)] layout."""
        a = np.concatenate([self.h.real, self.h.imag])  # Re(h^H p)
        b = np.concatenate([-self.h.imag, self.h.real])  # Im(h^H p)
        return (2.0 / self.beta_bar) * (self.gain_bar.real * a + self.gain_bar.imag * b)


def linearize_qol(p_bar: np.ndarray, beta_bar: float, h: np.ndarray) -> QolLowerBound:
    if beta_bar <= 0.0:
        raise ValueError("beta_bar must be positive")
    h = np.asarray(h, dtype=complex).reshape(-1)
    gain_bar = complex(np.vdot(h, np.asarray(p_bar, dtype=complex).reshape(-1)))
    return QolLowerBound(
        h=h, gain_bar=gain_bar, beta_bar=float(beta_bar),
        coef_beta=-((abs(gain_bar) / beta_bar) ** 2),
    )


# ---------------------------------------------------------------------------
# scheme layout and iterate state

@dataclass(frozen=True)
class SchemeLayout:
    has_common: bool
    active_privates: tuple[int, ...]  # 0-based users with a live private stream
    split_users: tuple[int, ...]  # 0-based users with a free common-rate share


def _layout(scheme: str, order: DecodingOrder | None) -> SchemeLayout:
    if scheme == "rsma":
        return SchemeLayout(True, (0, 1), (0, 1))
    if scheme == "sdma":
        return SchemeLayout(False, (0, 1), ())
    if scheme == "noma":
        if order is None:
            raise ValueError("noma requires a decoding order")
        return SchemeLayout(True, (order.second - 1,), (order.first - 1,))
    raise ValueError(f"unknown scheme {scheme!r}")


@dataclass(frozen=True)
class IterateState:
    """One accepted iterate: the expansion point plus its surrogate values."""

    scheme: str
    order: DecodingOrder | None
    precoders: PrecoderSet  # internal shape: common stream present for rsma/noma
    split: CommonRateSplit
    omega: float
    z: float
    t: float
    alpha: np.ndarray  # per-user private-rate surrogate (0 where stream is off)
    theta_priv: np.ndarray  # per-user 1+SINR surrogate (1 where off)
    beta: np.ndarray  # per-user interference-plus-noise (noise floor where off)
    alpha_c: np.ndarray | None = None
    theta_c: np.ndarray | None = None
    beta_c: np.ndarray | None = None


def _gains(h: np.ndarray, p: np.ndarray) -> float:
    return float(abs(np.vdot(h, p)) ** 2)


def _state_from_point(
    scheme: str,
    scenario: Scenario,
    weights: WeightVector,
    precoders: PrecoderSet,
    split: CommonRateSplit,
    order: DecodingOrder | None,
) -> IterateState:
    """Surrogates set by replacing every defining inequality with equality at
    the given feasible point; t becomes the point's exact energy efficiency."""
    lay = _layout(scheme, order)
    w = scenario.bandwidth
    u = weights.as_array()
    pc = precoders.common_or_zero()
    g = np.array([[_gains(scenario.channels[k], precoders.private[j]) for j in range(2)] for k in range(2)])
    gc = np.array([_gains(scenario.channels[k], pc) for k in range(2)])
    noise = np.asarray(scenario.noise_power)

    beta = noise.copy()
    alpha = np.zeros(2)
    theta = np.ones(2)
    for k in lay.active_privates:
        interf = sum(g[k, j] for j in lay.active_privates if j != k)
        beta[k] = noise[k] + interf
        theta[k] = 1.0 + g[k, k] / beta[k]
        alpha[k] = w * np.log2(theta[k])

    alpha_c = theta_c = beta_c = None
    shares = np.zeros(2)
    if lay.has_common:
        beta_c = noise + np.array([sum(g[k, j] for j in lay.active_privates) for k in range(2)])
        theta_c = 1.0 + gc / beta_c
        alpha_c = w * np.log2(theta_c)
        common_rate = float(min(alpha_c))
        shares = np.array([split.c1, split.c2])
        for k in range(2):
            if k not in lay.split_users:
                shares[k] = 0.0
        total = shares.sum()
        if total > common_rate:  # clip solver slack; reject grossly infeasible splits
            if total > common_rate + 1e-6:
                raise ValueError(
                    f"warm-start split {total:.6g} exceeds decodable common rate {common_rate:.6g}"
                )
            shares *= common_rate / total if total > 0 else 0.0

    wsr = float(u @ (shares + alpha))
    omega = float(np.sqrt(max(wsr, 0.0)))
    z = total_power(precoders.transmit_power(), scenario)
    z = max(z, 1e-12)
    return IterateState(
        scheme=scheme,
        order=order,
        precoders=precoders,
        split=CommonRateSplit(float(shares[0]), float(shares[1])),
        omega=omega,
        z=z,
        t=wsr / z,
        alpha=alpha,
        theta_priv=theta,
        beta=beta,
        alpha_c=alpha_c,
        theta_c=theta_c,
        beta_c=beta_c,
    )


def _unit(v: np.ndarray) -> np.ndarray | None:
    n = np.linalg.norm(v)
    return None if n == 0.0 else v / n


def _common_direction(h1: np.ndarray, h2: np.ndarray) -> np.ndarray | None:
    for candidate in (h1 + h2, h1, h2):
        d = _unit(candidate)
        if d is not None:
            return d
    return None


def initialize(
    scheme: str,
    scenario: Scenario,
    weights: WeightVector,
    order: DecodingOrder | None = None,
) -> IterateState:
    """Matched-filter start: each live stream points at its channel (the
    common stream at the channel sum), transmit power split uniformly across
    live streams so the budget holds with equality, and the decodable common
    rate shared half-and-half."""
    lay = _layout(scheme, order)
    h1, h2 = scenario.channels
    directions: dict[str, np.ndarray | None] = {}
    if lay.has_common:
        directions["c"] = _common_direction(h1, h2)
    for k in lay.active_privates:
        directions[f"p{k}"] = _unit(scenario.channels[k])
    live = [key for key, d in directions.items() if d is not None]
    if not live:
        raise DegenerateChannel("all candidate stream directions are zero")
    amp = np.sqrt(scenario.p_t / len(live))

    private = [np.zeros(scenario.nt, dtype=complex), np.zeros(scenario.nt, dtype=complex)]
    common = None
    for key in live:
        if key == "c":
            common = amp * directions["c"]
        else:
            k = int(key[1:])
            private[k] = amp * directions[key]
    precoders = PrecoderSet(private=(private[0], private[1]), common=common)

    split = CommonRateSplit()
    if lay.has_common:
        common_rate = min(rsma_common_rates(precoders, scenario))
        shares = np.zeros(2)
        if len(lay.split_users) == 2:
            shares[list(lay.split_users)] = common_rate / 2.0
        elif lay.split_users:
            shares[lay.split_users[0]] = common_rate
        split = CommonRateSplit(float(shares[0]), float(shares[1]))
    return _state_from_point(scheme, scenario, weights, precoders, split, order)


# ---------------------------------------------------------------------------
# subproblem

def _lin_from_vec(name: str, vec: np.ndarray) -> Affine:
    return Affine({(name, i): float(v) for i, v in enumerate(vec) if v != 0.0})


def _channel_forms(h: np.ndarray, name: str) -> tuple[Affine, Affine]:
    """Real and imaginary parts of h^H p as affine forms over the real-expanded precoder."""
    re_vec = np.concatenate([h.real, h.imag])
    im_vec = np.concatenate([-h.imag, h.real])
    return _lin_from_vec(name, re_vec), _lin_from_vec(name, im_vec)


def _alpha_cap(scenario: Scenario, k: int) -> float:
    h = scenario.channels[k]
    top = float(np.vdot(h, h).real) * scenario.p_t / scenario.noise_power[k]
    return scenario.bandwidth * float(np.log2(1.0 + top))


def _add_pwl_rate_link(prog: ConicProgram, alpha: Affine, theta: Affine, w: float, cap: float, segments: int):
    # chord (secant) upper bounds of 2^(a/w) on [0, cap]; a convex function
    # lies below each chord on its own segment, so theta >= every chord plus
    # 0 <= alpha <= cap is a conservative inner approximation of the cone link
    grid = np.linspace(0.0, max(cap, 1e-9), segments + 1)
    vals = np.exp2(grid / w)
    for i in range(segments):
        slope = (vals[i + 1] - vals[i]) / (grid[i + 1] - grid[i])
        prog.add_leq_zero(vals[i] + slope * (alpha - grid[i]) - theta, label="rate_link_pwl")
    prog.add_leq_zero(-alpha, label="alpha_lo")
    prog.add_leq_zero(alpha - grid[-1], label="alpha_hi")


def build_subproblem(
    scheme: str,
    scenario: Scenario,
    weights: WeightVector,
    state: IterateState,
    *,
    exp_mode: str = "cone",
    pwl_segments: int = 128,
    backend=None,
) -> ConicProgram:
    """One convex restriction of the lifted problem around the given iterate."""
    lay = _layout(scheme, state.order)
    nt = scenario.nt
    w = scenario.bandwidth
    u = weights.as_array()
    noise = scenario.noise_power
    prog = ConicProgram(name=f"{scheme}_iter")

    pvars: list[str] = []
    if lay.has_common:
        prog.add_variable("pc", 2 * nt)
        pvars.append("pc")
    for k in lay.active_privates:
        prog.add_variable(f"p{k + 1}", 2 * nt)
        pvars.append(f"p{k + 1}")
    for k in lay.split_users:
        prog.add_variable(f"c{k + 1}")
    for name in ("omega", "z", "t"):
        prog.add_variable(name)
    for k in lay.active_privates:
        for stem in ("alpha", "theta", "beta"):
            prog.add_variable(f"{stem}{k + 1}")
    if lay.has_common:
        for k in range(2):
            for stem in ("alpha_c", "theta_c", "beta_c"):
                prog.add_variable(f"{stem}{k + 1}")

    omega, z, t = prog.slot("omega"), prog.slot("z"), prog.slot("t")
    prog.set_objective_max(t)

    ratio = linearize_ratio(state.omega, state.z)
    prog.add_leq_zero(t - ratio.coef_omega * omega - ratio.coef_z * z, label="ee_epigraph")

    all_comps = [a for name in pvars for a in prog.slots(name)]
    conic.add_power_constraint(prog, pvars, scenario.p_t)
    prog.add_sum_squares_leq(
        all_comps, scenario.eta * z - scenario.eta * scenario.p_cir, label="power_surrogate"
    )

    wsr = Affine()
    for k in lay.split_users:
        wsr = wsr + u[k] * prog.slot(f"c{k + 1}")
    for k in lay.active_privates:
        wsr = wsr + u[k] * prog.slot(f"alpha{k + 1}")
    prog.add_sum_squares_leq([omega], wsr, label="wsr_surrogate")

    def rate_link(alpha: Affine, theta: Affine, cap: float):
        if exp_mode == "cone":
            conic.add_exp_rate_link(prog, alpha, theta, w, backend=backend)
        elif exp_mode == "pwl":
            _add_pwl_rate_link(prog, alpha, theta, w, cap, pwl_segments)
        else:
            raise ValueError(f"unknown exp_mode {exp_mode!r}")

    for k in lay.active_privates:
        h = scenario.channels[k]
        pname = f"p{k + 1}"
        alpha_k = prog.slot(f"alpha{k + 1}")
        theta_k = prog.slot(f"theta{k + 1}")
        beta_k = prog.slot(f"beta{k + 1}")

        psi = linearize_qol(state.precoders.private[k], float(state.beta[k]), h)
        psi_aff = _lin_from_vec(pname, psi.precoder_coeffs()) + psi.coef_beta * beta_k
        prog.add_leq_zero(theta_k - 1.0 - psi_aff, label=f"sinr_link_{k + 1}")
        rate_link(alpha_k, theta_k, _alpha_cap(scenario, k))

        interferers = []
        for j in lay.active_privates:
            if j != k:
                re, im = _channel_forms(h, f"p{j + 1}")
                interferers.extend([re, im])
        if interferers:
            prog.add_sum_squares_leq(interferers, beta_k - noise[k], label=f"interference_{k + 1}")
        prog.add_leq_zero(noise[k] - beta_k, label=f"beta_floor_{k + 1}")
        prog.add_leq_zero(1.0 - theta_k, label=f"theta_floor_{k + 1}")

    if lay.has_common:
        share_total = Affine()
        for k in lay.split_users:
            share_total = share_total + prog.slot(f"c{k + 1}")
            prog.add_leq_zero(-prog.slot(f"c{k + 1}"), label=f"share_nonneg_{k + 1}")
        for k in range(2):
            h = scenario.channels[k]
            alpha_ck = prog.slot(f"alpha_c{k + 1}")
            theta_ck = prog.slot(f"theta_c{k + 1}")
            beta_ck = prog.slot(f"beta_c{k + 1}")

            psi = linearize_qol(state.precoders.common_or_zero(), float(state.beta_c[k]), h)
            psi_aff = _lin_from_vec("pc", psi.precoder_coeffs()) + psi.coef_beta * beta_ck
            prog.add_leq_zero(theta_ck - 1.0 - psi_aff, label=f"common_sinr_link_{k + 1}")
            rate_link(alpha_ck, theta_ck, _alpha_cap(scenario, k))

            interferers = []
            for j in lay.active_privates:
                re, im = _channel_forms(h, f"p{j + 1}")
                interferers.extend([re, im])
            if interferers:
                prog.add_sum_squares_leq(interferers, beta_ck - noise[k], label=f"common_interference_{k + 1}")
            prog.add_leq_zero(noise[k] - beta_ck, label=f"common_beta_floor_{k + 1}")
            prog.add_leq_zero(1.0 - theta_ck, label=f"common_theta_floor_{k + 1}")
            prog.add_leq_zero(share_total - alpha_ck, label=f"share_cap_{k + 1}")

    return prog


# ---------------------------------------------------------------------------
# solve loop

@dataclass(frozen=True)
class TraceRow:
    iteration: int
    t: float
    wsr: float
    power_w: float
    status: str


@dataclass(frozen=True)
class ScaOptions:
    """Knobs for the outer loop.

    epsilon is the absolute stall threshold on the objective sequence,
    extra_starts adds seeded random unitary rotations of the initial
    precoders, corner_starts adds one start per single live stream at full
    power. exp_mode "pwl" replaces exponential-cone rate links by a static
    piecewise-linear inner approximation for backends without exponential
    support (sca_solve falls back to it automatically for such backends).
    """

    epsilon: float = 1e-4
    max_iter: int = 100
    extra_starts: int = 1
    corner_starts: bool = False
    seed: int = 0
    exp_mode: str = "cone"
    pwl_segments: int = 128
    backend: object = None

    def __post_init__(self):
        if self.epsilon <= 0.0:
            raise ValueError("epsilon must be positive")
        if self.max_iter < 1:
            raise ValueError("max_iter must be >= 1")


@dataclass(frozen=True)
class SolveResult:
    """Converged operating point in scheme-native form plus the iteration trace."""

    scheme: str
    precoders: PrecoderSet
    split: CommonRateSplit
    order: DecodingOrder | None
    ee: float
    wsr: float
    transmit_power: float
    trace_rows: tuple[TraceRow, ...]
    iterations: int
    converged: bool
    weights: WeightVector = WeightVector(1.0, 1.0)

    @property
    def trace(self) -> list[float]:
        return [row.t for row in self.trace_rows]


def _internal_to_native(
    scheme: str, precoders: PrecoderSet, split: CommonRateSplit, order: DecodingOrder | None
) -> tuple[PrecoderSet, CommonRateSplit]:
    if scheme != "noma":
        return precoders, split
    f, sec = order.first - 1, order.second - 1
    private = [None, None]
    private[f] = precoders.common_or_zero()
    private[sec] = precoders.private[sec]
    return PrecoderSet(private=(private[0], private[1]), common=None), CommonRateSplit()


def _snap_point(
    scheme: str, precoders: PrecoderSet, split: CommonRateSplit, scenario: Scenario
) -> tuple[PrecoderSet, CommonRateSplit]:
    """Pull a solver output inside the exact feasible set (power budget and
    split), absorbing interior-point slack before forward evaluation."""
    power = precoders.transmit_power()
    if power > scenario.p_t:
        scale = np.sqrt(scenario.p_t / power)
        precoders = PrecoderSet(
            private=tuple(scale * p for p in precoders.private),
            common=None if precoders.common is None else scale * precoders.common,
        )
    if scheme == "rsma" and split.total > 0.0:
        common_rate = min(rsma_common_rates(precoders, scenario))
        if split.total > common_rate:
            factor = max(common_rate, 0.0) / split.total
            split = CommonRateSplit(split.c1 * factor, split.c2 * factor)
    return precoders, split


def _native_metrics(
    scheme: str,
    scenario: Scenario,
    weights: WeightVector,
    precoders_internal: PrecoderSet,
    split: CommonRateSplit,
    order: DecodingOrder | None,
) -> tuple[PrecoderSet, CommonRateSplit, float, float, float]:
    native, native_split = _internal_to_native(scheme, precoders_internal, split, order)
    native, native_split = _snap_point(scheme, native, native_split, scenario)
    ee = evaluate_ee(scheme, native, weights, scenario, split=native_split, order=order)
    power = native.transmit_power()
    wsr = ee * total_power(power, scenario)
    return native, native_split, ee, wsr, power


def _extract_state(
    scheme: str,
    scenario: Scenario,
    assignment: dict,
    order: DecodingOrder | None,
    objective: float,
) -> IterateState:
    lay = _layout(scheme, order)
    nt = scenario.nt
    noise = scenario.noise_power

    def as_complex(name):
        x = np.asarray(assignment[name], dtype=float)
        return x[:nt] + 1j * x[nt:]

    private = [np.zeros(nt, dtype=complex), np.zeros(nt, dtype=complex)]
    for k in lay.active_privates:
        private[k] = as_complex(f"p{k + 1}")
    common = as_complex("pc") if lay.has_common else None
    precoders = PrecoderSet(private=(private[0], private[1]), common=common)

    shares = np.zeros(2)
    for k in lay.split_users:
        shares[k] = max(float(assignment[f"c{k + 1}"][0]), 0.0)
    split = CommonRateSplit(float(shares[0]), float(shares[1]))

    alpha = np.zeros(2)
    theta = np.ones(2)
    beta = np.asarray(noise, dtype=float).copy()
    for k in lay.active_privates:
        alpha[k] = max(float(assignment[f"alpha{k + 1}"][0]), 0.0)
        theta[k] = max(float(assignment[f"theta{k + 1}"][0]), 1.0)
        beta[k] = max(float(assignment[f"beta{k + 1}"][0]), noise[k])
    alpha_c = theta_c = beta_c = None
    if lay.has_common:
        alpha_c = np.array([max(float(assignment[f"alpha_c{k + 1}"][0]), 0.0) for k in range(2)])
        theta_c = np.array([max(float(assignment[f"theta_c{k + 1}"][0]), 1.0) for k in range(2)])
        beta_c = np.array([max(float(assignment[f"beta_c{k + 1}"][0]), noise[k]) for k in range(2)])

    omega = abs(float(assignment["omega"][0]))
    z = max(float(assignment["z"][0]), scenario.p_cir, 1e-12)
    return IterateState(
        scheme=scheme, order=order, precoders=precoders, split=split,
        omega=omega, z=z, t=float(objective),
        alpha=alpha, theta_priv=theta, beta=beta,
        alpha_c=alpha_c, theta_c=theta_c, beta_c=beta_c,
    )


def _run_descent(
    scheme: str,
    scenario: Scenario,
    weights: WeightVector,
    options: ScaOptions,
    state: IterateState,
    order: DecodingOrder | None,
) -> SolveResult:
    backend = options.backend or conic.default_backend()
    exp_mode = options.exp_mode
    if exp_mode == "cone" and not getattr(backend, "supports_exponential", False):
        exp_mode = "pwl"

    _, _, ee0, wsr0, power0 = _native_metrics(scheme, scenario, weights, state.precoders, state.split, order)
    rows = [TraceRow(0, state.t, wsr0, power0, "init")]
    converged = False
    iteration = 0
    for iteration in range(1, options.max_iter + 1):
        prog = build_subproblem(
            scheme, scenario, weights, state,
            exp_mode=exp_mode, pwl_segments=options.pwl_segments, backend=backend,
        )
        status = backend.solve(prog)
        if not status.is_optimal:
            raise SubproblemFailure(iteration, status.status)
        prev_t = state.t
        state = _extract_state(scheme, scenario, status.assignment, order, status.objective_value)
        _, _, ee_n, wsr_n, power_n = _native_metrics(
            scheme, scenario, weights, state.precoders, state.split, order
        )
        rows.append(TraceRow(iteration, state.t, wsr_n, power_n, "optimal"))
        if abs(state.t - prev_t) < options.epsilon:
            converged = True
            break

    native, native_split, ee, wsr, power = _native_metrics(
        scheme, scenario, weights, state.precoders, state.split, order
    )
    return SolveResult(
        scheme=scheme,
        precoders=native,
        split=native_split,
        order=order,
        ee=ee,
        wsr=wsr,
        transmit_power=power,
        trace_rows=tuple(rows),
        iterations=iteration,
        converged=converged,
        weights=weights,
    )


def _rotated_state(
    scheme: str,
    scenario: Scenario,
    weights: WeightVector,
    base: IterateState,
    order: DecodingOrder | None,
    rng: np.random.Generator,
) -> IterateState:
    g = rng.standard_normal((scenario.nt, scenario.nt)) + 1j * rng.standard_normal((scenario.nt, scenario.nt))
    q, _ = np.linalg.qr(g)
    private = tuple(q @ p for p in base.precoders.private)
    common = None if base.precoders.common is None else q @ base.precoders.common
    precoders = PrecoderSet(private=private, common=common)
    return _state_from_point(
        scheme, scenario, weights, precoders,
        _uniform_split(scheme, precoders, scenario, order), order,
    )


def _uniform_split(
    scheme: str, precoders: PrecoderSet, scenario: Scenario, order: DecodingOrder | None
) -> CommonRateSplit:
    lay = _layout(scheme, order)
    if not lay.has_common:
        return CommonRateSplit()
    common_rate = min(rsma_common_rates(precoders, scenario))
    shares = np.zeros(2)
    if len(lay.split_users) == 2:
        shares[list(lay.split_users)] = common_rate / 2.0
    elif lay.split_users:
        shares[lay.split_users[0]] = common_rate
    return CommonRateSplit(float(shares[0]), float(shares[1]))


def _corner_states(
    scheme: str, scenario: Scenario, weights: WeightVector, order: DecodingOrder | None
) -> list[IterateState]:
    """Single-stream full-power starts; they let the descent explore the
    one-user (and all-common) branches that the symmetric start cannot reach."""
    lay = _layout(scheme, order)
    nt = scenario.nt
    states = []
    candidates: list[tuple[str, np.ndarray | None]] = []
    for k in lay.active_privates:
        candidates.append((f"p{k}", _unit(scenario.channels[k])))
    if lay.has_common:
        h1, h2 = scenario.channels
        candidates.append(("c", _common_direction(h1, h2)))
    for key, direction in candidates:
        if direction is None:
            continue
        private = [np.zeros(nt, dtype=complex), np.zeros(nt, dtype=complex)]
        common = None
        vec = np.sqrt(scenario.p_t) * direction
        if key == "c":
            common = vec
        else:
            private[int(key[1:])] = vec
        if lay.has_common and common is None:
            common = np.zeros(nt, dtype=complex)
        precoders = PrecoderSet(private=(private[0], private[1]), common=common)
        states.append(
            _state_from_point(
                scheme, scenario, weights, precoders,
                _uniform_split(scheme, precoders, scenario, order), order,
            )
        )
    return states


def sca_solve(
    scheme: str,
    scenario: Scenario,
    weights: WeightVector,
    options: ScaOptions = ScaOptions(),
    warm_start: tuple[PrecoderSet, CommonRateSplit] | None = None,
    order: DecodingOrder | None = None,
) -> SolveResult:
    """Run the descent from the default start (or the given warm start) plus
    any configured extra starts, returning the best final point.

    The primary start must complete; failures of opportunistic extra starts
    are ignored. A warm start from a feasible point never finishes below that
    point's energy efficiency (each subproblem contains its own expansion
    point).
    """
    if scheme not in SCHEMES:
        raise ValueError(f"unknown scheme {scheme!r}")
    if scheme == "noma" and order is None:
        raise ValueError("sca_solve on noma requires an explicit decoding order; see solve_noma")

    if warm_start is not None:
        precoders, split = warm_start
        if scheme == "noma":
            precoders, split = noma_as_rsma(precoders, order, scenario)
        primary = _state_from_point(scheme, scenario, weights, precoders, split, order)
    else:
        primary = initialize(scheme, scenario, weights, order)

    extra: list[IterateState] = []
    if options.corner_starts:
        extra.extend(_corner_states(scheme, scenario, weights, order))
    if options.extra_starts > 0:
        rng = np.random.default_rng(options.seed)
        for _ in range(options.extra_starts):
            extra.append(_rotated_state(scheme, scenario, weights, primary, order, rng))

    best = _run_descent(scheme, scenario, weights, options, primary, order)
    for state in extra:
        try:
            candidate = _run_descent(scheme, scenario, weights, options, state, order)
        except SubproblemFailure:
            continue
        if candidate.ee > best.ee:
            best = candidate
    return best


def solve_noma(
    scenario: Scenario, weights: WeightVector, options: ScaOptions = ScaOptions()
) -> SolveResult:
    """Solve both decoding orders and keep the better one; near-exact ties go
    to order (1, 2)."""
    first = sca_solve("noma", scenario, weights, options, order=BOTH_ORDERS[0])
    second = sca_solve("noma", scenario, weights, options, order=BOTH_ORDERS[1])
    if second.ee > first.ee * (1.0 + 1e-12) + 1e-12:
        return second
    return first


def solve_scheme(
    scheme: str, scenario: Scenario, weights: WeightVector, options: ScaOptions = ScaOptions()
) -> SolveResult:
    if scheme == "noma":
        return solve_noma(scenario, weights, options)
    return sca_solve(scheme, scenario, weights, options)


def state_to_assignment(state: IterateState, scenario: Scenario) -> dict[str, np.ndarray]:
    """Variable assignment representing the iterate, for re-checking it
    against a subproblem with the conic evaluator."""
    lay = _layout(state.scheme, state.order)
    nt = scenario.nt
    out: dict[str, np.ndarray] = {}

    def expand(p: np.ndarray) -> np.ndarray:
        return np.concatenate([p.real, p.imag])

    if lay.has_common:
        out["pc"] = expand(state.precoders.common_or_zero())
    for k in lay.active_privates:
        out[f"p{k + 1}"] = expand(state.precoders.private[k])
    shares = (state.split.c1, state.split.c2)
    for k in lay.split_users:
        out[f"c{k + 1}"] = np.array([shares[k]])
    out["omega"] = np.array([state.omega])
    out["z"] = np.array([state.z])
    out["t"] = np.array([state.t])
    for k in lay.active_privates:
        out[f"alpha{k + 1}"] = np.array([state.alpha[k]])
        out[f"theta{k + 1}"] = np.array([state.theta_priv[k]])
        out[f"beta{k + 1}"] = np.array([state.beta[k]])
    if lay.has_common:
        for k in range(2):
            out[f"alpha_c{k + 1}"] = np.array([state.alpha_c[k]])
            out[f"theta_c{k + 1}"] = np.array([state.theta_c[k]])
            out[f"beta_c{k + 1}"] = np.array([state.beta_c[k]])
    return out


def trace_csv_rows(result: SolveResult) -> list[dict]:
    """Trace rows as dicts matching the documented CSV schema."""
    return [
        {
            "iteration": row.iteration,
            "t": row.t,
            "wsr": row.wsr,
            "power_w": row.power_w,
            "status": row.status,
        }
        for row in result.trace_rows
    ]
