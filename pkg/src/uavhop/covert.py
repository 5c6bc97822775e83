"""Covert (low probability of detection) power allocation and hop search.

The warden's relative-entropy budget ``2 eps^2`` is enforced through the
quadratic upper bound ``sum_n c_n p_n^2``. Maximizing the connection
probability then reduces to

    minimize    sum_n 1/p_n
    subject to  sum_n c_n p_n^2 <= 2 eps^2,   sum_n p_n <= P_T,

a two-constraint convex program solved here by active-set enumeration on
its KKT system ``-1/p_n^2 + 2 lam c_n p_n + mu = 0``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import NamedTuple, Optional, Sequence

import numpy as np

from .channel import (
    HopChannel,
    NetworkScenario,
    connection_probability,
    covert_coefficients,
    hop_channels,
)
from ._util import frozen_array as _frozen, ordered_map as _map
from .numerics import RootBracket, bisect, lambert_w0, positive_cubic_root

LN2 = math.log(2.0)


@dataclass(frozen=True)
class CovertConstraints:
    epsilon: float
    power_total: float

    def __post_init__(self):
        if not 0 < self.epsilon < 1:
            raise ValueError(f"epsilon must lie in (0, 1), got {self.epsilon!r}")
        if not self.power_total > 0:
            raise ValueError("power_total must be positive")

    @property
    def kl_budget(self) -> float:
        return 2.0 * self.epsilon ** 2


@dataclass(frozen=True)
class CovertSolution:
    hops: int
    powers: np.ndarray
    rate_tx: float
    p_connect: float
    kl_bound: float
    throughput: float
    a2: float
    multipliers: tuple
    active: str

    @property
    def average_power(self) -> float:
        return float(np.mean(self.powers))


class CovertAllocation(NamedTuple):
    powers: np.ndarray
    kl_multiplier: float
    power_multiplier: float
    active: str


def kl_bound(powers, channels: Sequence[HopChannel]) -> float:
    """Quadratic upper bound on the warden's relative entropy, in nats."""
    p = np.asarray(powers, dtype=float)
    if np.any(p < 0):
        raise ValueError("powers must be nonnegative")
    return float(np.sum(covert_coefficients(channels) * p * p))


def _powers_given(lam: float, mu: float, c: np.ndarray) -> np.ndarray:
    return positive_cubic_root(np.full_like(c, mu), 2.0 * lam * c)


def _solve_both_active(c: np.ndarray, budget: float, power_total: float):
    """Both constraints tight: outer bisection on ``mu``, inner on ``log lam``."""
    # mu at which lam -> 0 with the quadratic constraint tight (equal powers)
    mu_max = float(np.sum(c)) / budget
    # lam of the quadratic-only solution; any mu > 0 lowers powers further
    lam_q = 0.5 * (float(np.sum(np.cbrt(c))) / budget) ** 1.5
    log_hi = math.log(lam_q) + 1e-6

    def lam_for(mu: float) -> float:
        if mu == 0.0:
            return lam_q
        def g(log_lam):
            p = _powers_given(math.exp(log_lam), mu, c)
            return float(np.sum(c * p * p)) / budget - 1.0

        log_lo = log_hi - 20.0
        while g(log_lo) <= 0.0:
            log_lo -= 20.0
            if log_lo < log_hi - 1400.0:
                return 0.0
        log_lam = bisect(g, RootBracket(log_lo, log_hi, tol=1e-15, max_iter=400))
        # keep the side of the bracket that is primal feasible
        if g(log_lam) > 0.0:
            log_lam = math.nextafter(log_lam, math.inf)
            while g(log_lam) > 0.0:
                log_lam += 1e-15 * max(1.0, abs(log_lam))
        return math.exp(log_lam)

    def h(mu: float) -> float:
        p = _powers_given(lam_for(mu), mu, c)
        return float(np.sum(p)) / power_total - 1.0

    mu = bisect(h, RootBracket(0.0, mu_max, tol=mu_max * 1e-16, max_iter=400))
    if h(mu) > 0.0:
        step = mu_max * 1e-16
        while h(mu) > 0.0:
            mu += step
            step *= 2.0
    lam = lam_for(mu)
    return _powers_given(lam, mu, c), lam, mu


def allocate_covert_power(
    channels: Sequence[HopChannel], constraints: CovertConstraints
) -> CovertAllocation:
    """Globally optimal per-hop powers for the covert throughput problem.

    Three active sets are tried in order: relative-entropy bound only, sum
    power only, and both. The first whose solution satisfies the remaining
    constraint is optimal because the program is convex.
    """
    n = len(channels)
    if n < 1:
        raise ValueError("need at least one hop")
    c = covert_coefficients(channels)
    budget = constraints.kl_budget
    pt = constraints.power_total

    cbrt_c = np.cbrt(c)
    p = math.sqrt(budget / float(np.sum(cbrt_c))) / cbrt_c
    if float(np.sum(p)) <= pt:
        lam = 0.5 * (float(np.sum(cbrt_c)) / budget) ** 1.5
        return CovertAllocation(_frozen(p), lam, 0.0, "kl")

    p = np.full(n, pt / n)
    if float(np.sum(c * p * p)) <= budget:
        return CovertAllocation(_frozen(p), 0.0, (n / pt) ** 2, "power")

    p, lam, mu = _solve_both_active(c, budget, pt)
    return CovertAllocation(_frozen(p), lam, mu, "both")


def kkt_residuals(
    allocation: CovertAllocation,
    channels: Sequence[HopChannel],
    constraints: CovertConstraints,
) -> dict:
    """Scale-free KKT residuals of an allocation.

    Stationarity is reported as ``max_n |2 lam c_n p_n^3 + mu p_n^2 - 1|``
    (the gradient condition multiplied by ``p_n^2``); primal terms are
    relative constraint violations; complementary slackness weights each
    relative slack by the multiplier's share of the stationarity balance.
    """
    p = np.asarray(allocation.powers, dtype=float)
    c = covert_coefficients(channels)
    lam, mu = allocation.kl_multiplier, allocation.power_multiplier
    kl_share = 2.0 * lam * c * p ** 3
    pow_share = mu * p * p
    kl_slack = float(np.sum(c * p * p)) / constraints.kl_budget - 1.0
    pow_slack = float(np.sum(p)) / constraints.power_total - 1.0
    return {
        "stationarity": float(np.max(np.abs(kl_share + pow_share - 1.0))),
        "primal_kl": max(0.0, kl_slack),
        "primal_power": max(0.0, pow_slack),
        "dual": max(0.0, -lam, -mu),
        "slack_kl": float(np.max(kl_share)) * abs(kl_slack),
        "slack_power": float(np.max(pow_share)) * abs(pow_slack),
    }


def optimal_covert_rate(a2: float) -> float:
    """Transmission rate maximizing ``exp(-(2**R - 1) A_2) * R``."""
    if not a2 > 0:
        raise ValueError("a2 must be positive")
    return lambert_w0(1.0 / a2) / LN2


def covert_rate_objective(rate, a2: float):
    rate = np.asarray(rate, dtype=float)
    return np.exp(-(2.0 ** rate - 1.0) * a2) * rate


def _assemble(scenario, channels, alloc: CovertAllocation) -> CovertSolution:
    n = scenario.hops
    p = np.asarray(alloc.powers)
    a2 = scenario.terrestrial_loss * float(np.sum(1.0 / p))
    rate = optimal_covert_rate(a2)
    pc = connection_probability(p, 2.0 ** rate - 1.0, scenario)
    return CovertSolution(
        hops=n,
        powers=_frozen(p),
        rate_tx=rate,
        p_connect=pc,
        kl_bound=kl_bound(p, channels),
        throughput=pc * rate / n,
        a2=a2,
        multipliers=(alloc.kl_multiplier, alloc.power_multiplier),
        active=alloc.active,
    )


def _resolve_channels(scenario, channels):
    if channels is None:
        return hop_channels(scenario)
    if len(channels) != scenario.hops:
        raise ValueError(f"expected {scenario.hops} hop channels, got {len(channels)}")
    return list(channels)


def evaluate_covert(
    scenario: NetworkScenario,
    constraints: CovertConstraints,
    channels: Optional[Sequence[HopChannel]] = None,
) -> CovertSolution:
    channels = _resolve_channels(scenario, channels)
    return _assemble(scenario, channels, allocate_covert_power(channels, constraints))


def equal_power_covert(
    scenario: NetworkScenario,
    constraints: CovertConstraints,
    channels: Optional[Sequence[HopChannel]] = None,
) -> CovertSolution:
    """Benchmark: the largest common power meeting both constraints."""
    channels = _resolve_channels(scenario, channels)
    n = scenario.hops
    c = covert_coefficients(channels)
    p_kl = math.sqrt(constraints.kl_budget / float(np.sum(c)))
    p_pow = constraints.power_total / n
    if p_kl <= p_pow:
        alloc = CovertAllocation(np.full(n, p_kl), 0.0, 0.0, "kl")
    else:
        alloc = CovertAllocation(np.full(n, p_pow), 0.0, 0.0, "power")
    return _assemble(scenario, channels, alloc)


def search_hops_covert(
    scenario: NetworkScenario,
    constraints: CovertConstraints,
    n_max: int,
    *,
    equal_power: bool = False,
    threads: int = 1,
):
    """Best hop count in ``1..n_max`` by transmit throughput (ties to fewer hops)."""
    if n_max < 1:
        raise ValueError("n_max must be >= 1")
    evaluate = equal_power_covert if equal_power else evaluate_covert
    sols = _map(lambda n: evaluate(scenario.with_hops(n), constraints), range(1, n_max + 1), threads)
    best = max(range(n_max), key=lambda i: (sols[i].throughput, -i))
    return best + 1, sols[best]
