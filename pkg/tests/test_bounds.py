"""Memory-time thresholds, capacity brackets, overhead bounds, stability."""

import math

import numpy as np
import pytest

import chcon.linalg as la
from chcon.bounds import (
    CapacityBracket,
    MemoryTimeBound,
    capacity_bracket,
    coherent_info_lower,
    coherent_information,
    entropy_bits,
    memory_time_bound,
    overhead_lower_bound,
    verify_stability_lemma,
)
from chcon.channels import (
    ChannelError,
    amplitude_damping,
    completely_depolarizing,
    dephasing,
    depolarizing,
    identity_channel,
)
from chcon.decompose import p_constant
from chcon.sampling import random_near_identity_qubit_channel

from conftest import seeded


class TestMemoryTimeBound:
    def test_pinned_values(self):
        assert memory_time_bound(1, 0.5).threshold == pytest.approx(16.0)
        assert memory_time_bound(2, 0.5).threshold == pytest.approx(256.0)

    def test_depolarizing_pipeline(self):
        rep = p_constant(depolarizing(0.2))
        mb = memory_time_bound(1, rep)
        assert mb.threshold == pytest.approx((2 / 0.3) ** 2, rel=1e-9)

    def test_log_form_avoids_overflow(self):
        mb = memory_time_bound(4, 1e-4)
        assert mb.log2_threshold == pytest.approx(8 * math.log2(2e4))
        assert math.isinf(mb.threshold) or mb.threshold > 1e30

    def test_monotone_in_n_and_p(self):
        assert memory_time_bound(2, 0.5).log2_threshold > memory_time_bound(1, 0.5).log2_threshold
        assert memory_time_bound(1, 0.2).log2_threshold > memory_time_bound(1, 0.5).log2_threshold

    def test_threshold_floor(self):
        # (2/p)^(2n) >= 16 for any constant p <= 1/2; at p = 1 the floor is 4.
        for p in (0.1, 0.3, 0.5):
            assert memory_time_bound(1, p).threshold >= 16.0 - 1e-9
        assert memory_time_bound(1, 1.0).threshold == pytest.approx(4.0)

    def test_invalid_p_rejected(self):
        with pytest.raises(ChannelError):
            memory_time_bound(1, 0.0)


class TestCoherentInformation:
    def test_identity_is_one(self):
        assert coherent_info_lower(identity_channel(), restarts=4) == pytest.approx(1.0, abs=1e-6)

    def test_completely_depolarizing_is_zero(self):
        assert coherent_info_lower(completely_depolarizing(), restarts=4) == pytest.approx(
            0.0, abs=1e-6
        )

    def test_amplitude_damping_positive_and_matches_sweep(self):
        ch = amplitude_damping(0.25)
        best = coherent_info_lower(ch, restarts=8, seed=1)
        assert best > 0.1
        # One-dimensional sweep over diagonal inputs: the symmetry of the
        # channel makes the diagonal family contain the maximizer.
        grid = np.linspace(1e-6, 1 - 1e-6, 2001)
        sweep = max(
            coherent_information(ch, np.diag([1 - a, a]).astype(complex)) for a in grid
        )
        assert best == pytest.approx(sweep, abs=1e-5)

    def test_entropy_convention(self):
        assert entropy_bits(np.diag([1.0, 0.0])) == pytest.approx(0.0)
        assert entropy_bits(np.eye(2) / 2) == pytest.approx(1.0)


class TestCapacityBracket:
    def test_noisy_depolarizing_is_impossible_region(self):
        br = capacity_bracket(depolarizing(0.4), restarts=4)
        assert br.lower == 0.0 and br.upper == 0.0
        assert "depolarizing" in br.upper_provenance

    def test_identity_bracket(self):
        br = capacity_bracket(identity_channel(), restarts=4)
        assert br.lower == pytest.approx(1.0, abs=1e-6)
        assert br.upper == 1.0

    def test_amplitude_damping_bracket(self):
        br = capacity_bracket(amplitude_damping(0.25), restarts=6)
        assert 0.0 < br.lower <= br.upper == 1.0
        assert br.upper_provenance == "trivial_log_d"

    def test_inconsistent_user_upper_rejected(self):
        with pytest.raises(ChannelError, match="below the computed lower"):
            capacity_bracket(identity_channel(), user_upper=0.5, restarts=4)

    def test_user_upper_tightens(self):
        br = capacity_bracket(amplitude_damping(0.25), user_upper=0.8, restarts=6)
        assert br.upper == pytest.approx(0.8)
        assert br.upper_provenance == "user_certificate"

    def test_low_noise_depolarizing_keeps_trivial_upper(self):
        br = capacity_bracket(depolarizing(0.05), restarts=4)
        assert br.upper == 1.0


def trivial_bracket() -> CapacityBracket:
    return CapacityBracket(0.0, 1.0, "none", "trivial_log_d")


class TestOverheadBound:
    def test_impossible_for_zero_capacity(self):
        br = capacity_bracket(depolarizing(0.4), restarts=4)
        ob = overhead_lower_bound(10, math.log2(100), 0.6, br)
        assert ob.impossible
        assert ob.bound_value is None

    def test_log_term_pinned(self):
        ob = overhead_lower_bound(1, 40.0, 0.5, trivial_bracket())
        assert ob.alpha == pytest.approx(0.25)
        assert ob.bound_value == pytest.approx(10.0)
        assert ob.capacity_term_vacuous

    def test_capacity_term_dominates_for_wide_circuits(self):
        br = CapacityBracket(0.8, 0.9, "x", "user_certificate")
        ob = overhead_lower_bound(100, 4.0, 0.5, br)
        assert ob.bound_value == pytest.approx(100 / 0.9)
        assert not ob.capacity_term_vacuous

    def test_monotone_grid(self):
        vals = {}
        for n in range(1, 6):
            for t in range(1, 6):
                vals[(n, t)] = overhead_lower_bound(n, 10.0 * t, 0.5, trivial_bracket()).bound_value
        for n in range(2, 6):
            for t in range(1, 6):
                assert vals[(n, t)] >= vals[(n - 1, t)] - 1e-12
        for n in range(1, 6):
            for t in range(2, 6):
                assert vals[(n, t)] >= vals[(n, t - 1)] - 1e-12


class TestStabilityLemma:
    def test_identity_all_zero(self):
        rep = verify_stability_lemma(identity_channel(), restarts=4)
        assert rep.epsilon == pytest.approx(0.0, abs=1e-9)
        assert rep.passed

    def test_depolarizing_closed_form_epsilon(self):
        rep = verify_stability_lemma(depolarizing(0.01), restarts=8)
        assert rep.epsilon == pytest.approx(0.01, abs=1e-9)
        assert rep.extended_estimate <= math.sqrt(0.02) + 1e-6
        assert rep.passed

    def test_dephasing_near_identity(self):
        rep = verify_stability_lemma(dephasing(0.02), restarts=8)
        assert rep.passed
        assert rep.doubled_estimate <= rep.doubled_bound + 1e-6

    def test_random_near_identity_corpus(self):
        for i in range(30):
            ch = random_near_identity_qubit_channel(seeded(90, i), 0.05)
            rep = verify_stability_lemma(ch, restarts=8, seed=i)
            if rep.epsilon > 0.1:
                continue
            assert rep.passed
