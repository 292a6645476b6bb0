"""Forward model: SINRs, achievable rates and energy efficiency per scheme.

Given fixed precoders (and, for the rate-splitting scheme, a common-rate
split) these functions evaluate exactly what a receiver would achieve; no
optimization happens here. Rates are in bit/s (log base 2, explicit
bandwidth prefactor), energy efficiency in bit/joule.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .scenario import Scenario, WeightVector, total_power

__all__ = [
    "PrecoderSet",
    "CommonRateSplit",
    "RateReport",
    "DecodingOrder",
    "SplitExceedsCommonRate",
    "PowerBudgetViolation",
    "sdma_rates",
    "noma_rates",
    "rsma_rates",
    "evaluate_ee",
    "individual_ee",
    "sdma_as_rsma",
    "noma_as_rsma",
]

SPLIT_TOL = 1e-9  # absolute slack (bit/s) on the common-rate split check
POWER_TOL = 1e-8  # relative slack on the transmit power budget


class SplitExceedsCommonRate(ValueError):
    """The supplied (c1, c2) cannot be carried by the common stream."""


class PowerBudgetViolation(ValueError):
    """Precoders exceed the transmit power budget beyond tolerance."""


@dataclass(frozen=True)
class PrecoderSet:
    """Beamforming vectors: optional common stream plus two private streams."""

    private: tuple[np.ndarray, np.ndarray]
    common: np.ndarray | None = None

    def __post_init__(self):
        priv = tuple(np.asarray(p, dtype=complex).reshape(-1) for p in self.private)
        if len(priv) != 2 or priv[0].shape != priv[1].shape:
            raise ValueError("exactly two private precoders of equal length are required")
        object.__setattr__(self, "private", priv)
        if self.common is not None:
            com = np.asarray(self.common, dtype=complex).reshape(-1)
            if com.shape != priv[0].shape:
                raise ValueError("common precoder length must match the private ones")
            object.__setattr__(self, "common", com)
        if not np.isfinite(self.transmit_power()):
            raise ValueError("precoder power must be finite")

    def transmit_power(self) -> float:
        p = sum(float(np.vdot(v, v).real) for v in self.private)
        if self.common is not None:
            p += float(np.vdot(self.common, self.common).real)
        return p

    def common_or_zero(self) -> np.ndarray:
        if self.common is None:
            return np.zeros_like(self.private[0])
        return self.common

    def is_feasible(self, scenario: Scenario, tol: float = POWER_TOL) -> bool:
        return self.transmit_power() <= scenario.p_t * (1.0 + tol)


@dataclass(frozen=True)
class CommonRateSplit:
    """Per-user shares (c1, c2) of the common rate, in bit/s."""

    c1: float = 0.0
    c2: float = 0.0

    def __post_init__(self):
        if self.c1 < 0.0 or self.c2 < 0.0:
            raise ValueError("common-rate shares must be nonnegative")

    @property
    def total(self) -> float:
        return self.c1 + self.c2


@dataclass(frozen=True)
class DecodingOrder:
    """Which user's message is decoded (and cancelled) first. Users are 1-based."""

    first: int
    second: int

    def __post_init__(self):
        if {self.first, self.second} != {1, 2}:
            raise ValueError("decoding order must be a permutation of users {1, 2}")


BOTH_ORDERS = (DecodingOrder(1, 2), DecodingOrder(2, 1))


@dataclass(frozen=True)
class RateReport:
    """Achieved rates plus the energy-efficiency summary of one operating point."""

    per_user_rate: tuple[float, float]
    weighted_sum_rate: float
    energy_efficiency: float
    transmit_power: float
    common_rate: float | None = None

    def to_json_dict(self) -> dict:
        return {
            "rate_user1": self.per_user_rate[0],
            "rate_user2": self.per_user_rate[1],
            "common_rate": self.common_rate,
            "wsr": self.weighted_sum_rate,
            "ee": self.energy_efficiency,
            "power_w": self.transmit_power,
        }


def _gain(h: np.ndarray, p: np.ndarray) -> float:
    """|h^H p|^2."""
    return float(abs(np.vdot(h, p)) ** 2)


def _rate(sinr: float, bandwidth: float) -> float:
    return bandwidth * float(np.log2(1.0 + sinr))


def _require_no_common(p: PrecoderSet, what: str):
    if p.common is not None and np.linalg.norm(p.common) > 0.0:
        raise ValueError(f"{what} uses private streams only; common precoder must be absent or zero")


def sdma_rates(p: PrecoderSet, s: Scenario) -> tuple[float, float]:
    """Rates when each user decodes its own stream, treating the other as noise."""
    _require_no_common(p, "sdma_rates")
    rates = []
    for k in range(2):
        j = 1 - k
        sinr = _gain(s.channels[k], p.private[k]) / (
            _gain(s.channels[k], p.private[j]) + s.noise_power[k]
        )
        rates.append(_rate(sinr, s.bandwidth))
    return rates[0], rates[1]


def noma_rates(p: PrecoderSet, order: DecodingOrder, s: Scenario) -> tuple[float, float]:
    """Rates under superposition coding with successive cancellation.

    The first-decoded user's stream must be decodable at both receivers, so
    its rate is the min of the two decoding rates; the second user decodes
    interference-free after cancellation. Returned tuple is indexed by user
    (not by decoding position).
    """
    _require_no_common(p, "noma_rates")
    f, sec = order.first - 1, order.second - 1
    h_f, h_s = s.channels[f], s.channels[sec]
    p_f, p_s = p.private[f], p.private[sec]
    sinr_first_at_own = _gain(h_f, p_f) / (_gain(h_f, p_s) + s.noise_power[f])
    sinr_first_at_other = _gain(h_s, p_f) / (_gain(h_s, p_s) + s.noise_power[sec])
    sinr_second = _gain(h_s, p_s) / s.noise_power[sec]
    r_first = min(_rate(sinr_first_at_own, s.bandwidth), _rate(sinr_first_at_other, s.bandwidth))
    r_second = _rate(sinr_second, s.bandwidth)
    rates = [0.0, 0.0]
    rates[f], rates[sec] = r_first, r_second
    return rates[0], rates[1]


def rsma_common_rates(p: PrecoderSet, s: Scenario) -> tuple[float, float]:
    """Per-user decoding rates of the common stream (private streams as noise)."""
    pc = p.common_or_zero()
    out = []
    for k in range(2):
        h = s.channels[k]
        denom = _gain(h, p.private[0]) + _gain(h, p.private[1]) + s.noise_power[k]
        out.append(_rate(_gain(h, pc) / denom, s.bandwidth))
    return out[0], out[1]


def rsma_rates(
    p: PrecoderSet,
    c: CommonRateSplit,
    s: Scenario,
    weights: WeightVector = WeightVector(1.0, 1.0),
) -> RateReport:
    """Full rate report for rate splitting: common stream decoded first at both
    users, then each private stream after cancellation of the common one.

    Raises SplitExceedsCommonRate when c1 + c2 exceeds the rate at which the
    worse user can decode the common stream.
    """
    rc1, rc2 = rsma_common_rates(p, s)
    common_rate = min(rc1, rc2)
    if c.total > common_rate + SPLIT_TOL:
        raise SplitExceedsCommonRate(
            f"split total {c.total:.6g} bit/s exceeds decodable common rate {common_rate:.6g} bit/s"
        )
    private = sdma_rates(PrecoderSet(private=p.private), s)
    per_user = (c.c1 + private[0], c.c2 + private[1])
    wsr = weights.u1 * per_user[0] + weights.u2 * per_user[1]
    power = p.transmit_power()
    return RateReport(
        per_user_rate=per_user,
        weighted_sum_rate=wsr,
        energy_efficiency=wsr / total_power(power, s),
        transmit_power=power,
        common_rate=common_rate,
    )


def _per_user_rates(
    scheme: str,
    p: PrecoderSet,
    s: Scenario,
    split: CommonRateSplit | None,
    order: DecodingOrder | None,
) -> tuple[float, float]:
    if scheme == "sdma":
        return sdma_rates(p, s)
    if scheme == "noma":
        if order is None:
            raise ValueError("noma evaluation requires a decoding order")
        return noma_rates(p, order, s)
    if scheme == "rsma":
        report = rsma_rates(p, split or CommonRateSplit(), s)
        return report.per_user_rate
    raise ValueError(f"unknown scheme {scheme!r}")


def _check_budget(p: PrecoderSet, s: Scenario):
    power = p.transmit_power()
    if power > s.p_t * (1.0 + POWER_TOL):
        raise PowerBudgetViolation(
            f"transmit power {power:.9g} W exceeds budget {s.p_t:.9g} W"
        )


def evaluate_ee(
    scheme: str,
    p: PrecoderSet,
    weights: WeightVector,
    s: Scenario,
    split: CommonRateSplit | None = None,
    order: DecodingOrder | None = None,
) -> float:
    """Weighted sum rate of the operating point divided by total consumed power."""
    _check_budget(p, s)
    r1, r2 = _per_user_rates(scheme, p, s, split, order)
    wsr = weights.u1 * r1 + weights.u2 * r2
    return wsr / total_power(p.transmit_power(), s)


def individual_ee(
    scheme: str,
    p: PrecoderSet,
    s: Scenario,
    split: CommonRateSplit | None = None,
    order: DecodingOrder | None = None,
) -> tuple[float, float]:
    """Per-user rate divided by the total consumed power; sums to the
    unit-weight energy efficiency."""
    _check_budget(p, s)
    r1, r2 = _per_user_rates(scheme, p, s, split, order)
    denom = total_power(p.transmit_power(), s)
    return r1 / denom, r2 / denom


def sdma_as_rsma(p: PrecoderSet) -> tuple[PrecoderSet, CommonRateSplit]:
    """Embed an SDMA point into the rate-splitting feasible set (zero common
    stream, zero split); energy efficiency is unchanged."""
    return PrecoderSet(private=p.private, common=None), CommonRateSplit(0.0, 0.0)


def noma_as_rsma(
    p: PrecoderSet, order: DecodingOrder, s: Scenario
) -> tuple[PrecoderSet, CommonRateSplit]:
    """Embed a NOMA point into the rate-splitting feasible set.

    The first-decoded user's stream becomes the common stream carrying that
    user's whole rate; its private stream is switched off. Both users then
    see exactly the SINRs of the original NOMA point.
    """
    f, sec = order.first - 1, order.second - 1
    private = [np.zeros_like(p.private[0]), np.zeros_like(p.private[0])]
    private[sec] = p.private[sec]
    embedded = PrecoderSet(private=(private[0], private[1]), common=p.private[f])
    common_rate = min(rsma_common_rates(embedded, s))
    shares = [0.0, 0.0]
    shares[f] = common_rate
    return embedded, CommonRateSplit(shares[0], shares[1])
