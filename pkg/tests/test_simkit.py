import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from uavhop import simkit
from uavhop.channel import NetworkScenario, connection_probability, hop_channels, secrecy_outage_probability
from uavhop.covert import CovertConstraints, evaluate_covert
from uavhop.secrecy import SecrecyConstraints, evaluate_secrecy


class TestConnection:
    def test_zero_rate_always_connects(self, default_scenario):
        est = simkit.mc_connection(default_scenario, np.full(7, 0.1), 0.0, 1000, seed=3)
        assert est.value == 1.0 and est.half_width_95 == 0.0

    def test_unit_exponent(self):
        s = NetworkScenario(hops=1)
        rate = 3.0
        p = (2 ** rate - 1) * s.terrestrial_loss
        est = simkit.mc_connection(s, [p], rate, 100_000, seed=11)
        assert est.covers(math.exp(-1.0))

    def test_mixed_powers_match_closed_form(self):
        s = NetworkScenario(hops=5)
        p = np.array([0.02, 0.5, 0.1, 0.07, 0.3])
        rate = 4.0
        est = simkit.mc_connection(s, p, rate, 100_000, seed=5)
        assert est.covers(connection_probability(p, 2 ** rate - 1, s))

    def test_deterministic_across_threads(self, default_scenario):
        p = np.full(7, 0.05)
        a = simkit.mc_connection(default_scenario, p, 8.0, 70_000, seed=9, threads=1)
        b = simkit.mc_connection(default_scenario, p, 8.0, 70_000, seed=9, threads=4)
        c = simkit.mc_connection(default_scenario, p, 8.0, 70_000, seed=10)
        assert a == b
        assert a.value != c.value

    def test_bad_inputs(self, default_scenario):
        with pytest.raises(ValueError):
            simkit.mc_connection(default_scenario, np.full(7, 0.1), 1.0, 0)
        with pytest.raises(ValueError):
            simkit.mc_connection(default_scenario, np.full(6, 0.1), 1.0, 10)

    def test_estimate_bounds(self, default_scenario):
        est = simkit.mc_connection(default_scenario, np.full(7, 0.01), 9.0, 5000, seed=1)
        assert 0 <= est.value <= 1 and est.half_width_95 >= 0 and est.trials == 5000 and est.seed == 1


class TestSecrecyOutage:
    def test_huge_threshold(self, default_scenario):
        est = simkit.mc_secrecy_outage(default_scenario, np.full(7, 0.1), 200.0, 10_000, seed=2)
        assert est.value == 0.0

    def test_collapse_matches_approximation(self):
        s = NetworkScenario(hops=4, excess_nlos=1.0, path_loss_nlos=2.5)
        p = np.array([0.3, 0.1, 0.2, 0.4])
        g = 600.0
        est = simkit.mc_secrecy_outage(s, p, math.log2(g + 1), 100_000, seed=4)
        assert est.covers(secrecy_outage_probability(p, g, hop_channels(s)))

    def test_matches_exact_mixture(self, default_scenario):
        sol = evaluate_secrecy(default_scenario, SecrecyConstraints(0.1, 1.0))
        est = simkit.mc_secrecy_outage(default_scenario, sol.powers, sol.rate_redundancy, 100_000, seed=6)
        assert est.covers(simkit.exact_secrecy_outage(default_scenario, sol.powers, sol.gamma_e))

    def test_exact_outage_exceeds_approximation(self, default_scenario):
        # averaging the LoS state inside the exponent understates the outage
        sol = evaluate_secrecy(default_scenario, SecrecyConstraints(0.1, 1.0))
        exact = simkit.exact_secrecy_outage(default_scenario, sol.powers, sol.gamma_e)
        assert exact > sol.p_secrecy_outage
        est = simkit.mc_secrecy_outage(default_scenario, sol.powers, sol.rate_redundancy, 100_000, seed=8)
        assert est.value >= sol.p_secrecy_outage - 3 * est.half_width_95

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 10), st.floats(1e-3, 1.0), st.floats(1.0, 1e5))
    def test_exact_never_below_approximation(self, n, p, g):
        s = NetworkScenario(hops=n)
        powers = np.full(n, p)
        approx = secrecy_outage_probability(powers, g, hop_channels(s))
        assert simkit.exact_secrecy_outage(s, powers, g) >= approx - 1e-15

    def test_deterministic_across_threads(self, default_scenario):
        p = np.full(7, 0.1)
        a = simkit.mc_secrecy_outage(default_scenario, p, 10.0, 50_000, seed=1, threads=1)
        b = simkit.mc_secrecy_outage(default_scenario, p, 10.0, 50_000, seed=1, threads=3)
        assert a == b


class TestKL:
    def test_zero_power(self, default_scenario):
        assert simkit.true_kl_per_hop(default_scenario, 0.0, 1) == 0.0

    def test_negative_power(self, default_scenario):
        with pytest.raises(ValueError):
            simkit.true_kl_per_hop(default_scenario, -1.0, 1)

    @pytest.mark.parametrize("coherent", [True, False])
    @pytest.mark.parametrize("p", [1e-6, 1e-3, 0.05, 1.0])
    def test_pure_los_matches_gaussian(self, p, coherent):
        s = NetworkScenario(hops=3, env_b=50.0)
        ch = hop_channels(s)[1]
        snr = p * ch.dist_uav ** -2.5 / s.noise_normalized
        expect = s.codeword_length * (snr - math.log1p(snr))
        got = simkit.true_kl_per_hop(s, p, 2, coherent_block=coherent)
        assert got == pytest.approx(expect, rel=1e-8)

    def test_gaussian_kl_small_snr(self):
        assert simkit.gaussian_kl(1e-9) == pytest.approx(0.5e-18, rel=1e-9)
        assert simkit.gaussian_kl(0.0) == 0.0

    def test_chain_reference_point(self):
        s = NetworkScenario(hops=3)
        ch = hop_channels(s)[1]
        p = 0.01
        true = simkit.true_kl_per_hop(s, p, 2)
        mix = simkit.mixture_kl_bound(s, p, 2)
        assert 0 < true <= mix * (1 + simkit.KL_RTOL)
        assert mix <= ch.covert_coeff * p * p * (1 + simkit.KL_RTOL)

    @settings(max_examples=40, deadline=None)
    @given(st.integers(1, 8), st.floats(1e-8, 10.0), st.floats(50.0, 1000.0), st.booleans())
    def test_inequality_chain(self, n, p, h, coherent):
        s = NetworkScenario(hops=n, uav_height=h)
        for ch in hop_channels(s):
            true = simkit.true_kl_per_hop(s, p, ch.index, coherent_block=coherent)
            mix = simkit.mixture_kl_bound(s, p, ch.index)
            assert true >= 0
            assert true <= mix * (1 + simkit.KL_RTOL) + 1e-300
            assert mix <= ch.covert_coeff * p * p * (1 + 1e-12)

    def test_coherent_block_is_larger(self):
        # sharing the LoS state across the block reveals more than redrawing it
        s = NetworkScenario(hops=3, uav_height=200.0)
        a = simkit.true_kl_per_hop(s, 0.2, 1, coherent_block=True)
        b = simkit.true_kl_per_hop(s, 0.2, 1, coherent_block=False)
        assert a >= b


class TestWarden:
    def test_zero_power(self, default_scenario):
        est = simkit.warden_detection_error(default_scenario, np.zeros(7), 40_000, seed=1)
        assert est.value >= 1 - 3 * est.half_width_95 - 1e-3
        assert est.value <= 1.0

    def test_large_power(self, default_scenario):
        est = simkit.warden_detection_error(default_scenario, np.full(7, 1.0), 20_000, seed=1)
        assert est.value < 0.01

    def test_pinsker_chain(self):
        s = NetworkScenario(hops=5)
        eps = 0.05
        sol = evaluate_covert(s, CovertConstraints(eps, 1.0))
        total = sum(simkit.true_kl_per_hop(s, float(p), i + 1) for i, p in enumerate(sol.powers))
        est = simkit.warden_detection_error(s, sol.powers, 200_000, seed=12)
        pinsker = 1 - math.sqrt(total / 2)
        assert pinsker >= 1 - eps - 1e-12
        assert est.value >= pinsker - 3 * est.half_width_95

    def test_detects_above_budget(self):
        # ten times the allowed power must be visible to the warden
        s = NetworkScenario(hops=5)
        sol = evaluate_covert(s, CovertConstraints(0.05, 1.0))
        est = simkit.warden_detection_error(s, 10 * np.asarray(sol.powers), 100_000, seed=3)
        assert est.value < 0.95 - 3 * est.half_width_95

    def test_deterministic_across_threads(self, default_scenario):
        p = np.full(7, 1e-4)
        a = simkit.warden_detection_error(default_scenario, p, 30_000, seed=5, threads=1)
        b = simkit.warden_detection_error(default_scenario, p, 30_000, seed=5, threads=4)
        assert a == b

    def test_needs_two_trials(self, default_scenario):
        with pytest.raises(ValueError):
            simkit.warden_detection_error(default_scenario, np.zeros(7), 1)

    def test_observation_shapes(self, default_scenario):
        rng = np.random.default_rng(0)
        obs0 = simkit.simulate_warden_observation(default_scenario, np.full(7, 0.1), 0, rng)
        obs1 = simkit.simulate_warden_observation(default_scenario, np.full(7, 0.1), 1, rng)
        assert obs0.samples.shape == obs1.samples.shape == (7, default_scenario.codeword_length)
        assert obs0.hypothesis == 0 and obs1.hypothesis == 1
        with pytest.raises(ValueError):
            simkit.WardenObservation(obs0.samples, 2)

    def test_observation_noise_level(self):
        s = NetworkScenario(hops=1, codeword_length=200_000)
        obs = simkit.simulate_warden_observation(s, [0.0], 0, np.random.default_rng(1))
        assert np.mean(np.abs(obs.samples) ** 2) == pytest.approx(s.noise_floor, rel=0.02)


def test_oracle_estimate_covers():
    est = simkit.OracleEstimate(0.5, 100, 0.01, 0)
    assert est.covers(0.529) and est.covers(0.471) and not est.covers(0.531)
