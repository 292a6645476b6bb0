"""Problem instances: channels, noise, power budget and the linear power model.

All internal computation is in linear units (watts, hertz, bit/s). dBm only
appears at the configuration boundary.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field

import numpy as np

__all__ = [
    "Scenario",
    "WeightVector",
    "dbm_to_watts",
    "watts_to_dbm",
    "make_channels",
    "total_power",
    "scenario_from_config",
    "scenario_from_json",
]


def dbm_to_watts(value_dbm: float) -> float:
    """Convert a power level in dBm to watts: 10^((dBm - 30)/10)."""
    return 10.0 ** ((value_dbm - 30.0) / 10.0)


def watts_to_dbm(value_w: float) -> float:
    """Inverse of :func:`dbm_to_watts`; requires value_w > 0."""
    if value_w <= 0.0:
        raise ValueError("watts_to_dbm requires a strictly positive power")
    return 10.0 * np.log10(value_w) + 30.0


def make_channels(gamma: float, theta: float, nt: int) -> tuple[np.ndarray, np.ndarray]:
    """Two-user channel pair with controllable gain disparity and angle.

    User 1 sees the all-ones vector; user 2 sees gamma * [1, e^{j theta},
    e^{j 2 theta}, ...]. gamma scales the gain gap between the users, theta
    steers user 2 from aligned (theta=0) toward orthogonal.
    """
    if nt < 1:
        raise ValueError("nt must be >= 1")
    if gamma < 0.0:
        raise ValueError("gamma must be nonnegative")
    h1 = np.ones(nt, dtype=complex)
    h2 = gamma * np.exp(1j * theta * np.arange(nt))
    return h1, h2


@dataclass(frozen=True)
class Scenario:
    """One problem instance of the two-user downlink.

    channels are the per-user vectors h_1, h_2 (length nt); noise_power holds
    the per-user noise N_{0,k} = bandwidth * noise variance, in watts.
    """

    nt: int
    channels: tuple[np.ndarray, np.ndarray]
    p_t: float
    eta: float = 0.35
    p_dyn: float = 0.0
    p_sta: float = 0.0
    bandwidth: float = 1.0
    noise_power: tuple[float, float] = (1.0, 1.0)

    def __post_init__(self):
        if self.nt < 1:
            raise ValueError("nt must be a positive integer")
        if len(self.channels) != 2:
            raise ValueError("exactly two channel vectors are required")
        chans = tuple(np.asarray(h, dtype=complex).reshape(-1) for h in self.channels)
        for h in chans:
            if h.shape != (self.nt,):
                raise ValueError("channel vectors must have length nt")
            if not np.all(np.isfinite(h.view(float))):
                raise ValueError("channel entries must be finite")
        if all(np.linalg.norm(h) == 0.0 for h in chans):
            raise ValueError("at least one channel must be nonzero")
        object.__setattr__(self, "channels", chans)
        if not (len(self.noise_power) == 2 and all(n > 0.0 for n in self.noise_power)):
            raise ValueError("noise_power entries must be strictly positive")
        object.__setattr__(self, "noise_power", (float(self.noise_power[0]), float(self.noise_power[1])))
        if self.bandwidth <= 0.0:
            raise ValueError("bandwidth must be positive")
        if self.p_t <= 0.0:
            raise ValueError("p_t must be positive")
        if not (0.0 < self.eta <= 1.0):
            raise ValueError("eta must be in (0, 1]")
        if self.p_dyn < 0.0 or self.p_sta < 0.0:
            raise ValueError("p_dyn and p_sta must be nonnegative")

    @property
    def p_cir(self) -> float:
        """Circuit power: nt * p_dyn + p_sta."""
        return self.nt * self.p_dyn + self.p_sta


@dataclass(frozen=True)
class WeightVector:
    """Nonnegative per-user rate weights with u1 + u2 > 0."""

    u1: float = 1.0
    u2: float = 1.0

    def __post_init__(self):
        if self.u1 < 0.0 or self.u2 < 0.0:
            raise ValueError("weights must be nonnegative")
        if self.u1 + self.u2 <= 0.0:
            raise ValueError("at least one weight must be positive")

    def as_array(self) -> np.ndarray:
        return np.array([self.u1, self.u2])


def total_power(transmit_power: float, scenario: Scenario) -> float:
    """Total consumed power: transmit power over amplifier efficiency plus circuit power."""
    if transmit_power < 0.0:
        raise ValueError("transmit_power must be nonnegative")
    return transmit_power / scenario.eta + scenario.p_cir


_CONFIG_KEYS = {
    "nt",
    "gamma",
    "theta",
    "channels",
    "p_t_dbm",
    "p_dyn_dbm",
    "p_sta_dbm",
    "eta",
    "bandwidth_hz",
    "noise_power",
}


def scenario_from_config(config: dict) -> Scenario:
    """Build a Scenario from a JSON-style configuration dict.

    Either (gamma, theta) for the parametric channel model or explicit
    "channels" as two arrays of [re, im] pairs must be given. Unknown keys
    are rejected.
    """
    unknown = set(config) - _CONFIG_KEYS
    if unknown:
        raise ValueError(f"unknown configuration keys: {sorted(unknown)}")
    nt = int(config.get("nt", 4))
    if "channels" in config:
        if "gamma" in config or "theta" in config:
            raise ValueError("give either explicit channels or (gamma, theta), not both")
        raw = config["channels"]
        if len(raw) != 2:
            raise ValueError("channels must hold two vectors")
        chans = tuple(np.array([complex(re, im) for re, im in vec]) for vec in raw)
    else:
        gamma = float(config.get("gamma", 1.0))
        theta = float(config.get("theta", 0.0))
        chans = make_channels(gamma, theta, nt)
    noise = config.get("noise_power", [1.0, 1.0])
    return Scenario(
        nt=nt,
        channels=chans,
        p_t=dbm_to_watts(float(config.get("p_t_dbm", 40.0))),
        eta=float(config.get("eta", 0.35)),
        p_dyn=dbm_to_watts(float(config["p_dyn_dbm"])) if "p_dyn_dbm" in config else 0.0,
        p_sta=dbm_to_watts(float(config["p_sta_dbm"])) if "p_sta_dbm" in config else 0.0,
        bandwidth=float(config.get("bandwidth_hz", 1.0)),
        noise_power=(float(noise[0]), float(noise[1])),
    )


def scenario_from_json(path: str) -> Scenario:
    with open(path, "r", encoding="utf-8") as fh:
        return scenario_from_config(json.load(fh))
