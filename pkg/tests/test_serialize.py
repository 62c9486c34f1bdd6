"""Wire-format round trips and determinism of emitted documents."""

import json
import math

import numpy as np
import pytest

from chcon import serialize as ser
from chcon.channels import ChannelError, amplitude_damping, bell_state, choi_distance, depolarizing
from chcon.contraction import eta_tr, eta_tr_upper_minoutev
from chcon.decompose import p2_certificate, p_constant
from chcon.sampling import random_channel, random_density
from chcon.separability import BipartiteState, CcQqState, local_product_channel

from conftest import seeded


class TestMatrices:
    def test_complex_pairs_row_major(self):
        m = np.array([[1 + 2j, 3], [0, -1j]])
        enc = ser.matrix_to_json(m)
        assert enc == [[[1.0, 2.0], [3.0, 0.0]], [[0.0, 0.0], [-0.0, -1.0]]] or enc[0][0] == [1.0, 2.0]
        back = ser.matrix_from_json(enc)
        assert np.allclose(back, m)

    def test_malformed_matrix_rejected(self):
        with pytest.raises(ChannelError, match="malformed"):
            ser.matrix_from_json([[1.0, 2.0]])


class TestChannels:
    def test_round_trip(self):
        for i in range(5):
            ch = random_channel(seeded(100, i), 3)
            back = ser.channel_from_json(ser.channel_to_json(ch))
            assert choi_distance(ch, back) < 1e-12

    def test_preset_spec(self):
        ch = ser.channel_from_json({"preset": "depolarizing", "p": 0.25})
        assert choi_distance(ch, depolarizing(0.25)) < 1e-12
        ad = ser.channel_from_json({"preset": "amplitude_damping", "gamma": 0.3})
        assert choi_distance(ad, amplitude_damping(0.3)) < 1e-12

    def test_dim_mismatch_rejected(self):
        doc = ser.channel_to_json(depolarizing(0.25))
        doc["in_dim"] = 3
        with pytest.raises(ChannelError, match="disagrees"):
            ser.channel_from_json(doc)

    def test_missing_fields_rejected(self):
        with pytest.raises(ChannelError, match="preset' or 'kraus"):
            ser.channel_from_json({"dims": 2})


class TestStates:
    def test_bipartite_round_trip(self):
        st = BipartiteState.from_matrix(bell_state().matrix, 2, 2)
        back = ser.bipartite_state_from_json(ser.bipartite_state_to_json(st))
        assert np.allclose(back.matrix, st.matrix)

    def test_ccqq_round_trip(self):
        rng = seeded(101)
        s = CcQqState.from_blocks(
            2, 2,
            [((0,), (1,), 0.3, random_density(rng, 4)), ((1,), (0,), 0.7, random_density(rng, 4))],
        )
        back = ser.ccqq_from_json(ser.ccqq_to_json(s))
        assert back.dim_a == 2 and back.dim_b == 2
        for a, b in zip(s.blocks, back.blocks):
            assert a.x == b.x and a.y == b.y
            assert a.prob == pytest.approx(b.prob)
            assert np.allclose(a.rho, b.rho)


class TestReports:
    def test_contraction_report_fields(self):
        rep = eta_tr(amplitude_damping(0.36))
        doc = ser.contraction_report_to_json(rep)
        assert doc["value"] == pytest.approx(0.8)
        assert doc["kind"] == "eta_tr_estimate"
        assert set(doc["witness"]) == {"psi", "phi"}
        assert json.dumps(doc)  # serializable

    def test_infinity_encoding(self):
        assert ser._json_float(math.inf) == "inf"
        assert ser._json_float(1.5) == 1.5

    def test_certificate_round_trip(self):
        cert = p2_certificate(amplitude_damping(0.3), candidates=4, seed=1)
        doc = ser.certificate_to_json(cert)
        q, m = ser.certificate_from_json(doc)
        assert q == pytest.approx(cert.q)
        assert choi_distance(m, cert.m) < 1e-12

    def test_separable_channel_round_trip(self):
        sep = local_product_channel(depolarizing(0.3), amplitude_damping(0.2))
        back = ser.separable_channel_from_json(ser.separable_channel_to_json(sep))
        assert choi_distance(back.channel, sep.channel) < 1e-12

    def test_overhead_impossible_is_tagged(self):
        from chcon.bounds import capacity_bracket, overhead_lower_bound

        br = capacity_bracket(depolarizing(0.4), restarts=4)
        ob = overhead_lower_bound(3, 10.0, 0.5, br)
        doc = ser.overhead_to_json(ob)
        assert doc["bound"] == {"kind": "impossible"}

    def test_p_report_json(self):
        doc = ser.p_report_to_json(p_constant(depolarizing(0.2)))
        assert doc["certification"] == "exact_p1"
        assert doc["p"] == pytest.approx(0.3, abs=1e-6)


class TestDeterminism:
    def test_canonical_dump_is_stable(self):
        rep1 = ser.contraction_report_to_json(eta_tr_upper_minoutev(amplitude_damping(0.3), seed=5))
        rep2 = ser.contraction_report_to_json(eta_tr_upper_minoutev(amplitude_damping(0.3), seed=5))
        assert ser.dumps_canonical(rep1) == ser.dumps_canonical(rep2)

    def test_compact_lines_sorted_keys(self):
        line = ser.dumps_compact({"b": 1, "a": 2})
        assert line == '{"a":2,"b":1}'
