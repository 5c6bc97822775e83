"""Secrecy-outage-constrained power, rate and hop-count optimization.

For a fixed hop count the optimum has a closed form:

* ``t_n = ln(sum_k b_n / (b_k zeta)) / b_n`` makes the per-hop leakage
  terms ``exp(-b_n t_n)`` sum to ``zeta``,
* ``gamma_e = P_T / sum_n 1/t_n`` and ``p_n = gamma_e / t_n`` spend the whole
  power budget,
* ``R_s = W0(gamma_e / (A_1 (gamma_e + 1))) / ln 2`` maximizes
  ``P_c * R_s`` along the resulting one-dimensional curve.

The hop count is then found by direct search.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .channel import (
    HopChannel,
    NetworkScenario,
    connection_probability,
    hop_channels,
    secrecy_coefficients,
    secrecy_outage_probability,
)
from .errors import InfeasibleError
from ._util import frozen_array as _frozen, ordered_map as _map
from .numerics import RootBracket, bisect, lambert_w0

LN2 = math.log(2.0)


@dataclass(frozen=True)
class SecrecyConstraints:
    zeta: float
    power_total: float

    def __post_init__(self):
        if not 0 < self.zeta < 1:
            raise ValueError(f"zeta must lie in (0, 1), got {self.zeta!r}")
        if not self.power_total > 0:
            raise ValueError("power_total must be positive")


@dataclass(frozen=True)
class SecrecySolution:
    hops: int
    powers: np.ndarray
    gamma_e: float
    rate_tx: float
    rate_secret: float
    rate_redundancy: float
    p_connect: float
    p_secrecy_outage: float
    throughput: float
    a1: float


def leakage_sum(powers, gamma_e: float, channels: Sequence[HopChannel]) -> float:
    """Sum of per-hop secrecy outage terms, the linearized outage constraint."""
    b = secrecy_coefficients(channels)
    return float(np.sum(np.exp(-gamma_e * b / np.asarray(powers, dtype=float))))


def allocate_secrecy_power(channels: Sequence[HopChannel], constraints: SecrecyConstraints):
    """Closed-form optimal wiretap threshold and per-hop powers.

    Returns
    -------
    gamma_e : float
        Optimal eavesdropper SNR threshold ``2**R_e - 1``.
    powers : numpy.ndarray
        Per-hop transmit powers in watts, summing to ``power_total``.
    t : numpy.ndarray
        ``gamma_e / p_n`` for each hop.
    """
    if len(channels) < 1:
        raise ValueError("need at least one hop")
    b = secrecy_coefficients(channels)
    zeta = constraints.zeta
    inv_sum = float(np.sum(1.0 / b))
    arg = b * inv_sum / zeta
    t = np.log(arg) / b
    if np.any(~(t > 0)) or not np.all(np.isfinite(t)):
        bad = [i + 1 for i in np.flatnonzero(~(t > 0) | ~np.isfinite(t))]
        raise InfeasibleError(
            f"zeta={zeta} leaves no positive leakage exponent for hop(s) {bad}"
        )
    gamma_e = constraints.power_total / float(np.sum(1.0 / t))
    powers = gamma_e / t
    return gamma_e, _frozen(powers), _frozen(t)


def optimal_secrecy_rate(gamma_e: float, a1: float) -> float:
    """Secrecy rate (bits/s/Hz) maximizing ``exp(-((g+1) 2**R - 1) A_1 / g) * R``."""
    if not gamma_e > 0 or not a1 > 0:
        raise ValueError("gamma_e and a1 must be positive")
    return lambert_w0(gamma_e / (a1 * (gamma_e + 1.0))) / LN2


def secrecy_rate_objective(rate, gamma_e: float, a1: float):
    """``P_c * R_s`` as a function of the secrecy rate at fixed power split."""
    rate = np.asarray(rate, dtype=float)
    return np.exp(-((gamma_e + 1.0) * 2.0 ** rate - 1.0) * a1 / gamma_e) * rate


def _assemble(scenario, channels, gamma_e, powers) -> SecrecySolution:
    n = scenario.hops
    # A_1 = d_tr^alpha sigma^2 sum_n gamma_e / p_n
    a1 = scenario.terrestrial_loss * gamma_e * float(np.sum(1.0 / np.asarray(powers)))
    rs = optimal_secrecy_rate(gamma_e, a1)
    re = math.log2(gamma_e + 1.0)
    gamma_c = (gamma_e + 1.0) * 2.0 ** rs - 1.0
    pc = connection_probability(powers, gamma_c, scenario)
    pso = secrecy_outage_probability(powers, gamma_e, channels)
    return SecrecySolution(
        hops=n,
        powers=_frozen(powers),
        gamma_e=float(gamma_e),
        rate_tx=re + rs,
        rate_secret=float(rs),
        rate_redundancy=re,
        p_connect=pc,
        p_secrecy_outage=pso,
        throughput=pc * rs / n,
        a1=a1,
    )


def _resolve_channels(scenario, channels):
    if channels is None:
        return hop_channels(scenario)
    if len(channels) != scenario.hops:
        raise ValueError(f"expected {scenario.hops} hop channels, got {len(channels)}")
    return list(channels)


def evaluate_secrecy(
    scenario: NetworkScenario,
    constraints: SecrecyConstraints,
    channels: Optional[Sequence[HopChannel]] = None,
) -> SecrecySolution:
    """Optimal allocation, rates and secrecy throughput for ``scenario.hops``.

    ``channels`` overrides the geometry-derived hop coefficients, which is
    mainly useful for constructing synthetic cases.
    """
    channels = _resolve_channels(scenario, channels)
    gamma_e, powers, _ = allocate_secrecy_power(channels, constraints)
    return _assemble(scenario, channels, gamma_e, powers)


def equal_power_secrecy(
    scenario: NetworkScenario,
    constraints: SecrecyConstraints,
    channels: Optional[Sequence[HopChannel]] = None,
) -> SecrecySolution:
    """Benchmark with ``p_n = P_T / N`` on every hop.

    The wiretap threshold is the smallest ``gamma_e`` meeting the linearized
    outage constraint with equality; rates are then optimized as usual.
    """
    channels = _resolve_channels(scenario, channels)
    n = scenario.hops
    b = secrecy_coefficients(channels)
    zeta = constraints.zeta
    p = constraints.power_total / n

    def excess(g):
        return float(np.sum(np.exp(-g * b / p))) - zeta

    hi = p * math.log(n / zeta) / float(np.min(b))
    if n == 1:
        gamma_e = hi
    else:
        gamma_e = bisect(excess, RootBracket(0.0, hi, tol=hi * 1e-15, max_iter=400))
    if not gamma_e > 0:
        raise InfeasibleError(f"no positive wiretap threshold for zeta={zeta}")
    return _assemble(scenario, channels, gamma_e, np.full(n, p))


def search_hops_secrecy(
    scenario: NetworkScenario,
    constraints: SecrecyConstraints,
    n_max: int,
    *,
    equal_power: bool = False,
    threads: int = 1,
):
    """Best hop count in ``1..n_max`` by secrecy throughput.

    ``scenario.hops`` is ignored. Ties go to the smaller hop count.

    Returns
    -------
    (int, SecrecySolution)
    """
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    evaluate = equal_power_secrecy if equal_power else evaluate_secrecy
    sols = _map(lambda n: evaluate(scenario.with_hops(n), constraints), range(1, n_max + 1), threads)
    best = max(range(n_max), key=lambda i: (sols[i].throughput, -i))
    return best + 1, sols[best]
