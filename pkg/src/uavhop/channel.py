"""Linear relay geometry and the hybrid LoS/NLoS air-to-ground channel.

All quantities are linear (watts, power ratios, meters). Unit conversion from
dB/dBm happens only in :mod:`uavhop.config`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace
from typing import Optional, Sequence

import numpy as np


@dataclass(frozen=True)
class NetworkScenario:
    """Geometry and channel constants of one source-destination relay line.

    Defaults reproduce the urban 2 GHz setup (D = 300 m, alpha = 3,
    beta = 2.5 / 2.8, B = 0.136, C = 11.95, eta = -20 dB, sigma^2 = -70 dBm,
    L = 10). ``uav_ground_offset=None`` puts the UAV above the midpoint.
    """

    distance_sd: float = 300.0
    hops: int = 7
    uav_height: float = 300.0
    uav_ground_offset: Optional[float] = None
    path_loss_terrestrial: float = 3.0
    path_loss_los: float = 2.5
    path_loss_nlos: float = 2.8
    env_b: float = 0.136
    env_c: float = 11.95
    excess_nlos: float = 0.01
    noise_normalized: float = 1e-10
    codeword_length: int = 10
    ref_path_loss: float = 1e-4

    def __post_init__(self):
        if not self.distance_sd > 0:
            raise ValueError("distance_sd must be positive")
        if not self.uav_height > 0:
            raise ValueError("uav_height must be positive")
        if int(self.hops) != self.hops or self.hops < 1:
            raise ValueError(f"hops must be a positive integer, got {self.hops!r}")
        if int(self.codeword_length) != self.codeword_length or self.codeword_length < 1:
            raise ValueError("codeword_length must be a positive integer")
        for name in ("path_loss_terrestrial", "path_loss_los", "path_loss_nlos"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if not self.env_b > 0 or not self.env_c > 0:
            raise ValueError("env_b and env_c must be positive")
        if not 0 < self.excess_nlos <= 1:
            raise ValueError("excess_nlos must lie in (0, 1]")
        if not self.noise_normalized > 0:
            raise ValueError("noise_normalized must be positive")
        if not self.ref_path_loss > 0:
            raise ValueError("ref_path_loss must be positive")
        if self.uav_ground_offset is not None and not (
            0 <= self.uav_ground_offset <= self.distance_sd
        ):
            raise ValueError("uav_ground_offset must lie in [0, distance_sd]")

    @property
    def ground_offset(self) -> float:
        if self.uav_ground_offset is None:
            return self.distance_sd / 2.0
        return float(self.uav_ground_offset)

    @property
    def hop_length(self) -> float:
        return self.distance_sd / self.hops

    @property
    def noise_floor(self) -> float:
        """Absolute receiver noise power sigma_0^2 in watts."""
        return self.noise_normalized * self.ref_path_loss

    @property
    def terrestrial_loss(self) -> float:
        """``d_tr**alpha * sigma^2``, the per-hop connection coefficient."""
        return self.hop_length ** self.path_loss_terrestrial * self.noise_normalized

    def with_hops(self, hops: int) -> "NetworkScenario":
        return replace(self, hops=int(hops))


@dataclass(frozen=True)
class HopChannel:
    index: int
    dist_uav: float
    elevation_deg: float
    p_los: float
    secrecy_coeff: float
    covert_coeff: float


def _check_hop(scenario: NetworkScenario, n: int) -> None:
    if int(n) != n or not 1 <= n <= scenario.hops:
        raise ValueError(f"hop index must be in [1, {scenario.hops}], got {n!r}")


def transmitter_position(scenario: NetworkScenario, n: int) -> float:
    """Axis coordinate of the hop-``n`` transmitter (node ``n-1``)."""
    _check_hop(scenario, n)
    return (n - 1) * scenario.distance_sd / scenario.hops


def uav_distance(scenario: NetworkScenario, n: int) -> float:
    pos = transmitter_position(scenario, n)
    return math.hypot(scenario.uav_height, scenario.ground_offset - pos)


def elevation_angle(height: float, dist: float) -> float:
    """Elevation angle in degrees seen from a ground node at slant range ``dist``."""
    if not 0 < height <= dist:
        raise ValueError(f"need 0 < height <= distance, got {height} and {dist}")
    return math.degrees(math.asin(height / dist))


def los_probability(theta_deg, b: float, c: float):
    """Logistic LoS probability ``1 / (1 + C exp(-B (theta - C)))``."""
    if not b > 0 or not c > 0:
        raise ValueError("B and C must be positive")
    theta = np.asarray(theta_deg, dtype=float)
    out = 1.0 / (1.0 + c * np.exp(-b * (theta - c)))
    return float(out) if out.ndim == 0 else out


def _secrecy_coeff(p_los, d, scenario: NetworkScenario):
    s2 = scenario.noise_normalized
    return s2 * (
        p_los * d ** scenario.path_loss_los
        + (1.0 - p_los) * d ** scenario.path_loss_nlos / scenario.excess_nlos
    )


def _covert_coeff(p_los, d, scenario: NetworkScenario):
    s2 = scenario.noise_normalized
    eta = scenario.excess_nlos
    return (
        0.5
        * scenario.codeword_length
        * (
            p_los * d ** (-2.0 * scenario.path_loss_los)
            + (1.0 - p_los) * eta ** 2 * d ** (-2.0 * scenario.path_loss_nlos)
        )
        / s2 ** 2
    )


def hop_channels(scenario: NetworkScenario) -> list[HopChannel]:
    """Per-hop UAV distance, elevation, LoS probability and both coefficients."""
    out = []
    for n in range(1, scenario.hops + 1):
        d = uav_distance(scenario, n)
        theta = elevation_angle(scenario.uav_height, d)
        p = los_probability(theta, scenario.env_b, scenario.env_c)
        out.append(
            HopChannel(
                index=n,
                dist_uav=d,
                elevation_deg=theta,
                p_los=p,
                secrecy_coeff=float(_secrecy_coeff(p, d, scenario)),
                covert_coeff=float(_covert_coeff(p, d, scenario)),
            )
        )
    return out


def secrecy_coefficients(channels: Sequence[HopChannel]) -> np.ndarray:
    return np.array([ch.secrecy_coeff for ch in channels], dtype=float)


def covert_coefficients(channels: Sequence[HopChannel]) -> np.ndarray:
    return np.array([ch.covert_coeff for ch in channels], dtype=float)


def _check_powers(powers) -> np.ndarray:
    p = np.atleast_1d(np.asarray(powers, dtype=float))
    if p.size == 0:
        raise ValueError("need at least one hop power")
    if np.any(~(p > 0)):
        raise ValueError("all transmit powers must be positive")
    return p


def connection_probability(powers, gamma_c: float, scenario: NetworkScenario) -> float:
    """Probability that every hop's Rayleigh link clears SNR ``gamma_c``."""
    p = _check_powers(powers)
    if gamma_c < 0:
        raise ValueError("gamma_c must be nonnegative")
    if gamma_c == 0:
        return 1.0
    return math.exp(-gamma_c * scenario.terrestrial_loss * float(np.sum(1.0 / p)))


def secrecy_outage_probability(powers, gamma_e: float, channels: Sequence[HopChannel]) -> float:
    """End-to-end secrecy outage with the per-hop LoS/NLoS mixture averaged
    inside the exponent (the tractable approximation used by the optimizer).
    """
    p = _check_powers(powers)
    b = secrecy_coefficients(channels)
    if p.shape != b.shape:
        raise ValueError("powers and channels must have one entry per hop")
    if not gamma_e > 0:
        raise ValueError("gamma_e must be positive")
    if math.isinf(gamma_e):
        return 0.0
    # 1 - prod(1 - e^{-x}) evaluated in log space
    x = gamma_e * b / p
    with np.errstate(divide="ignore"):
        log_secure = np.sum(np.log(-np.expm1(-x)))
    return float(-np.expm1(log_secure))
