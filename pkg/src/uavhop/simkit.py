"""Independent oracles for the closed forms.

Nothing here reuses the optimizers' approximations: outage events are
sampled from their definitions, relative entropy is integrated numerically,
and the warden is simulated as a likelihood-ratio detector with full
statistical knowledge.

Random streams are keyed by ``(seed, purpose, chunk index)`` with a fixed
chunk size, so results do not depend on how many threads process the chunks.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy import integrate
from scipy.special import gammaln, logsumexp

from ._util import ordered_map
from .channel import NetworkScenario, hop_channels
from .errors import ConvergenceError

_Z95 = 1.959963984540054
_CHUNK = 16384
KL_RTOL = 1e-8

_STREAM_CONNECT = 1
_STREAM_SECRECY = 2
_STREAM_WARDEN_H0 = 3
_STREAM_WARDEN_H1 = 4


@dataclass(frozen=True)
class OracleEstimate:
    value: float
    trials: int
    half_width_95: float
    seed: int

    def covers(self, x: float, k: float = 3.0) -> bool:
        """Whether ``x`` lies within ``k`` half-widths of the estimate."""
        return abs(self.value - x) <= k * self.half_width_95


@dataclass(frozen=True)
class WardenObservation:
    """Per-hop received samples of one message, shape ``(hops, L)``."""

    samples: np.ndarray
    hypothesis: int

    def __post_init__(self):
        if self.hypothesis not in (0, 1):
            raise ValueError("hypothesis must be 0 or 1")
        if np.ndim(self.samples) != 2:
            raise ValueError("samples must be a (hops, L) array")


def _rng(seed: int, stream: int, chunk: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(int(seed), spawn_key=(stream, chunk)))


def _chunks(trials: int, size: int = _CHUNK):
    return [(i, min(size, trials - i * size)) for i in range((trials + size - 1) // size)]


def _count_chunks(fn: Callable, trials: int, threads: int, size: int = _CHUNK) -> int:
    return int(sum(ordered_map(lambda ck: fn(*ck), _chunks(trials, size), threads)))


def _proportion(hits: int, trials: int, seed: int) -> OracleEstimate:
    p = hits / trials
    return OracleEstimate(p, trials, _Z95 * math.sqrt(p * (1.0 - p) / trials), int(seed))


def _check_trials(trials: int, minimum: int = 1) -> int:
    if int(trials) != trials or trials < minimum:
        raise ValueError(f"trials must be an integer >= {minimum}")
    return int(trials)


def _powers(scenario: NetworkScenario, powers) -> np.ndarray:
    p = np.asarray(powers, dtype=float).reshape(-1)
    if p.size != scenario.hops:
        raise ValueError(f"expected {scenario.hops} powers, got {p.size}")
    if np.any(p < 0):
        raise ValueError("powers must be nonnegative")
    return p


def mc_connection(
    scenario: NetworkScenario, powers, rate_tx: float, trials: int = 100_000, seed: int = 0,
    threads: int = 1,
) -> OracleEstimate:
    """Monte Carlo probability that every hop decodes at rate ``rate_tx``."""
    trials = _check_trials(trials)
    p = _powers(scenario, powers)
    gamma_c = 2.0 ** rate_tx - 1.0
    # decode iff |h_n|^2 > gamma_c d^alpha sigma^2 / p_n
    thresh = gamma_c * scenario.terrestrial_loss / p

    def chunk(idx, size):
        g = _rng(seed, _STREAM_CONNECT, idx).standard_exponential((size, p.size))
        return int(np.count_nonzero(np.all(g > thresh, axis=1)))

    return _proportion(_count_chunks(chunk, trials, threads), trials, seed)


def _eve_gains(scenario: NetworkScenario):
    ch = hop_channels(scenario)
    d = np.array([c.dist_uav for c in ch])
    p_los = np.array([c.p_los for c in ch])
    s2 = scenario.noise_normalized
    g_los = d ** (-scenario.path_loss_los) / s2
    g_nlos = scenario.excess_nlos * d ** (-scenario.path_loss_nlos) / s2
    return p_los, g_los, g_nlos


def mc_secrecy_outage(
    scenario: NetworkScenario, powers, rate_redundancy: float, trials: int = 100_000,
    seed: int = 0, threads: int = 1,
) -> OracleEstimate:
    """Monte Carlo secrecy outage from its definition.

    Every hop draws its LoS state and Rayleigh gain; an outage occurs when
    any hop's eavesdropper SNR exceeds ``2**rate_redundancy - 1``.
    """
    trials = _check_trials(trials)
    p = _powers(scenario, powers)
    gamma_e = 2.0 ** rate_redundancy - 1.0
    p_los, g_los, g_nlos = _eve_gains(scenario)

    def chunk(idx, size):
        rng = _rng(seed, _STREAM_SECRECY, idx)
        los = rng.random((size, p.size)) < p_los
        fade = rng.standard_exponential((size, p.size))
        snr = p * np.where(los, g_los, g_nlos) * fade
        return int(np.count_nonzero(np.any(snr > gamma_e, axis=1)))

    return _proportion(_count_chunks(chunk, trials, threads), trials, seed)


def exact_secrecy_outage(scenario: NetworkScenario, powers, gamma_e: float) -> float:
    """Secrecy outage with the LoS/NLoS mixture kept outside the exponential."""
    p = _powers(scenario, powers)
    p_los, g_los, g_nlos = _eve_gains(scenario)
    with np.errstate(divide="ignore"):
        secure = p_los * -np.expm1(-gamma_e / (p * g_los)) + (1.0 - p_los) * -np.expm1(
            -gamma_e / (p * g_nlos)
        )
        return float(-np.expm1(np.sum(np.log(secure))))


def _snrs(scenario: NetworkScenario, power: float, n: int):
    ch = hop_channels(scenario)[n - 1]
    s2 = scenario.noise_normalized
    s_los = power * ch.dist_uav ** (-scenario.path_loss_los) / s2
    s_nlos = scenario.excess_nlos * power * ch.dist_uav ** (-scenario.path_loss_nlos) / s2
    return ch.p_los, s_los, s_nlos


def gaussian_kl(snr):
    """``D(CN(0, 1+snr) || CN(0, 1)) = snr - ln(1 + snr)``, cancellation-free."""
    s = np.asarray(snr, dtype=float)
    small = np.abs(s) < 1e-3
    series = s * s * (0.5 - s * (1.0 / 3.0 - s * (0.25 - s * 0.2)))
    with np.errstate(invalid="ignore"):
        direct = s - np.log1p(s)
    out = np.where(small, series, direct)
    return float(out) if out.ndim == 0 else out


def _phi(delta):
    """``u ln u - u + 1`` at ``u = 1 + delta``; nonnegative, stable near 0."""
    if delta <= -1.0:
        return 1.0
    if abs(delta) < 1e-3:
        d = delta
        return d * d * (0.5 - d * (1.0 / 6.0 - d * (1.0 / 12.0 - d * (1.0 / 20.0 - d / 30.0))))
    return (1.0 + delta) * math.log1p(delta) - delta


def mixture_kl_bound(scenario: NetworkScenario, power: float, n: int) -> float:
    """``L [P_los D_los + P_nlos D_nlos]``: relative entropy after moving the
    LoS/NLoS mixture outside (the convexity step), before the quadratic bound.
    """
    p_los, s_los, s_nlos = _snrs(scenario, power, n)
    return scenario.codeword_length * (
        p_los * gaussian_kl(s_los) + (1.0 - p_los) * gaussian_kl(s_nlos)
    )


def true_kl_per_hop(
    scenario: NetworkScenario, power: float, n: int, *, coherent_block: bool = True
) -> float:
    """Relative entropy between the warden's hop-``n`` observations under H1
    and H0, in nats, by one-dimensional quadrature.

    With ``coherent_block`` the LoS state is drawn once per hop and shared by
    all ``L`` samples; the energy ``sum_l |y_l|^2`` is then sufficient and is
    Gamma distributed. Otherwise the state is redrawn per sample and the
    result is ``L`` times the single-sample divergence of ``|y|^2``.
    """
    if power < 0:
        raise ValueError("power must be nonnegative")
    if power == 0:
        return 0.0
    p_los, s_los, s_nlos = _snrs(scenario, power, n)
    w = np.array([p_los, 1.0 - p_los])
    s = np.array([s_los, s_nlos])
    keep = w > 0
    w, s = w[keep], s[keep]
    shape = scenario.codeword_length if coherent_block else 1
    k = s / (1.0 + s)
    log_scale = shape * np.log1p(s)
    lg = gammaln(shape)

    log_w = np.log(w)

    def integrand(t):
        if t > 0:
            log_q0 = (shape - 1) * math.log(t) - t - lg
        elif shape == 1:
            log_q0 = 0.0
        else:
            return 0.0
        log_u = t * k - log_scale
        if float(np.max(log_u)) < 30.0:
            # likelihood ratio q1/q0 minus one, without cancellation
            delta = float(np.sum(w * np.expm1(log_u)))
            return math.exp(log_q0) * _phi(delta)
        lu = float(logsumexp(log_w + log_u))
        return math.exp(log_q0 + lu) * (lu - 1.0) + math.exp(log_q0)

    v = 1.0 + float(np.max(s))
    mean = shape * v
    sd = math.sqrt(shape) * v
    upper = mean + 60.0 * sd + 60.0 * v
    # the H0 and H1 energy distributions may sit decades apart
    pts = set(np.geomspace(0.05 * shape, upper, 24)[:-1].tolist())
    pts.update((shape * (1.0 + s)).tolist())
    pts = sorted(x for x in pts if 0 < x < upper)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", integrate.IntegrationWarning)
        val, err = integrate.quad(integrand, 0.0, upper, points=pts, epsabs=0.0,
                                  epsrel=1e-10, limit=1000)
    if err > KL_RTOL * abs(val) and err > 1e-300:
        raise ConvergenceError(f"KL quadrature error {err:.3g} exceeds tolerance for {val:.6g}")
    if coherent_block:
        return float(val)
    return float(scenario.codeword_length * val)


def simulate_warden_observation(
    scenario: NetworkScenario, powers, hypothesis: int, rng: np.random.Generator
) -> WardenObservation:
    """One message's worth of complex baseband samples at the UAV."""
    p = _powers(scenario, powers)
    L = scenario.codeword_length
    sigma0 = scenario.noise_floor
    noise = math.sqrt(sigma0 / 2.0) * (
        rng.standard_normal((p.size, L)) + 1j * rng.standard_normal((p.size, L))
    )
    if hypothesis == 0:
        return WardenObservation(noise, 0)
    p_los, g_los, g_nlos = _eve_gains(scenario)
    los = rng.random(p.size) < p_los
    # a_n^2 = lambda_0 * gain * sigma^2 in absolute units
    a2 = np.where(los, g_los, g_nlos) * scenario.noise_normalized * scenario.ref_path_loss
    h = math.sqrt(0.5) * (
        rng.standard_normal((p.size, L)) + 1j * rng.standard_normal((p.size, L))
    )
    phase = np.exp(2j * math.pi * rng.random((p.size, L)))
    signal = np.sqrt(p * a2)[:, None] * h * phase
    return WardenObservation(signal + noise, 1)


def _warden_llr(scenario: NetworkScenario, p: np.ndarray, energy: np.ndarray) -> np.ndarray:
    """Log-likelihood ratio from normalized per-hop energies, shape (trials, hops)."""
    p_los, g_los, g_nlos = _eve_gains(scenario)
    L = scenario.codeword_length
    v_los = 1.0 + p * g_los
    v_nlos = 1.0 + p * g_nlos
    with np.errstate(divide="ignore"):
        terms = np.stack(
            [
                np.log(p_los) - L * np.log(v_los) - energy / v_los,
                np.log1p(-p_los) - L * np.log(v_nlos) - energy / v_nlos,
            ]
        )
    return np.sum(logsumexp(terms, axis=0) + energy, axis=1)


def warden_detection_error(
    scenario: NetworkScenario, powers, trials: int = 200_000, seed: int = 0, threads: int = 1
) -> OracleEstimate:
    """Smallest empirical ``P_FA + P_MD`` of the optimal warden.

    Half the trials are drawn under each hypothesis. The warden knows every
    power, the geometry and the LoS statistics, and thresholds the exact
    log-likelihood ratio of all ``hops * L`` samples; the threshold is swept
    over every observed value.
    """
    trials = _check_trials(trials, 2)
    p = _powers(scenario, powers)
    L = scenario.codeword_length
    n0 = trials // 2
    n1 = trials - n0
    p_los, g_los, g_nlos = _eve_gains(scenario)
    size = max(256, (1 << 21) // (p.size * L))

    def energies(idx, count, hyp):
        rng = _rng(seed, _STREAM_WARDEN_H1 if hyp else _STREAM_WARDEN_H0, idx)
        y = rng.standard_normal((count, p.size, L, 2))
        if hyp:
            los = rng.random((count, p.size)) < p_los
            var = 1.0 + p * np.where(los, g_los, g_nlos)
        else:
            var = np.ones((count, p.size))
        # |y|^2 / sigma_0^2 with unit-variance complex noise plus signal
        e = 0.5 * np.sum(y * y, axis=(2, 3))
        return e * var

    def llr_chunk(hyp):
        def run(idx, count):
            return _warden_llr(scenario, p, energies(idx, count, hyp))
        return run

    llr0 = np.sort(np.concatenate(
        ordered_map(lambda ck: llr_chunk(0)(*ck), _chunks(n0, size), threads)))
    llr1 = np.sort(np.concatenate(
        ordered_map(lambda ck: llr_chunk(1)(*ck), _chunks(n1, size), threads)))

    # decide H1 when llr > tau
    taus = np.concatenate([[-np.inf], np.unique(np.concatenate([llr0, llr1]))])
    p_fa = 1.0 - np.searchsorted(llr0, taus, side="right") / n0
    p_md = np.searchsorted(llr1, taus, side="right") / n1
    total = p_fa + p_md
    i = int(np.argmin(total))
    hw = _Z95 * math.sqrt(p_fa[i] * (1 - p_fa[i]) / n0 + p_md[i] * (1 - p_md[i]) / n1)
    return OracleEstimate(float(total[i]), trials, hw, int(seed))
