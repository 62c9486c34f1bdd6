"""Channel representations, conversions, and validation."""

import numpy as np
import pytest

import chcon.linalg as la
from chcon.channels import (
    BlochAffine,
    ChannelError,
    ChoiMatrix,
    DensityState,
    KrausChannel,
    adjoint,
    amplitude_damping,
    bell_state,
    bloch_transfer,
    canonical_kraus,
    choi_distance,
    choi_tensor,
    choi_to_kraus,
    completely_depolarizing,
    compose,
    dephasing,
    depolarizing,
    extremality_gap,
    identity_channel,
    is_extreme_point,
    is_unitary_channel,
    kraus_to_choi,
    preset,
    stinespring,
    tensor,
    to_bloch_affine,
    unitary_channel,
    validate_channel,
)
from chcon.sampling import random_channel, random_pure

from conftest import seeded


def brute_force_choi(ch: KrausChannel) -> np.ndarray:
    """Element-by-element Choi construction, independent of the vec trick."""
    d_in, d_out = ch.in_dim, ch.out_dim
    c = np.zeros((d_out * d_in, d_out * d_in), dtype=complex)
    for i in range(d_in):
        for j in range(d_in):
            e = np.zeros((d_in, d_in), dtype=complex)
            e[i, j] = 1.0
            c += np.kron(ch.apply(e), e)
    return c


class TestValidation:
    def test_identity_passes_with_zero_residuals(self):
        rep = validate_channel(identity_channel())
        assert rep.ok
        assert rep.tp_residual == 0.0
        assert rep.choi_min_eigenvalue >= -1e-15

    def test_scaled_identity_fails_tp(self):
        rep = validate_channel(KrausChannel.from_kraus([0.9 * np.eye(2)]))
        assert not rep.ok
        assert rep.tp_residual == pytest.approx(0.19, abs=1e-12)

    def test_amplitude_damping_passes(self):
        ch = amplitude_damping(0.3)
        acc = sum(la.dag(k) @ k for k in ch.kraus)
        assert np.allclose(acc, np.eye(2))
        assert validate_channel(ch).ok

    def test_dimension_mismatch_rejected(self):
        with pytest.raises(ChannelError, match="inconsistent"):
            KrausChannel.from_kraus([np.eye(2), np.eye(3)])


class TestChoi:
    def test_identity_choi_rank_one_eigenvalue_two(self):
        c = kraus_to_choi(identity_channel())
        w = c.eigenvalues()
        assert w[-1] == pytest.approx(2.0, abs=1e-12)
        assert c.rank() == 1

    def test_completely_depolarizing_choi_is_half_identity(self):
        c = kraus_to_choi(completely_depolarizing())
        assert np.allclose(c.matrix, np.eye(4) / 2)

    def test_amplitude_damping_choi_matches_brute_force(self):
        ch = amplitude_damping(0.5)
        c = kraus_to_choi(ch)
        ref = brute_force_choi(ch)
        assert np.allclose(c.matrix, ref, atol=1e-12)
        assert np.allclose(np.linalg.eigvalsh(c.matrix), np.linalg.eigvalsh(ref), atol=1e-12)

    def test_trace_equals_input_dimension(self):
        for d in (2, 3, 4):
            ch = random_channel(seeded(d), d)
            assert np.trace(kraus_to_choi(ch).matrix) == pytest.approx(d, abs=1e-9)

    def test_choi_to_kraus_identity_single_kraus_up_to_phase(self):
        ch = choi_to_kraus(kraus_to_choi(identity_channel()))
        assert len(ch.kraus) == 1
        k = ch.kraus[0]
        phase = k[0, 0] / abs(k[0, 0])
        assert np.allclose(k / phase, np.eye(2), atol=1e-12)

    def test_full_rank_choi_gives_four_kraus(self):
        ch = choi_to_kraus(ChoiMatrix(in_dim=2, out_dim=2, matrix=np.eye(4) / 2))
        assert len(ch.kraus) == 4

    def test_non_psd_choi_rejected(self):
        bad = np.diag([1.0, 1.0, 1.0, -0.5])
        with pytest.raises(ChannelError, match="not PSD"):
            choi_to_kraus(ChoiMatrix(in_dim=2, out_dim=2, matrix=bad))

    def test_two_kraus_channel_recovers_rank_two(self):
        ch = random_channel(seeded(5), 2, env_dim=2)
        minimal = canonical_kraus(ch)
        assert len(minimal.kraus) == 2
        assert choi_distance(ch, minimal) < 1e-9


class TestRoundTrips:
    @pytest.mark.parametrize("dim", [2, 3, 4])
    def test_choi_round_trip_preserves_action(self, dim):
        for i in range(200):
            ch = random_channel(seeded(dim, i), dim)
            back = canonical_kraus(ch)
            rng = seeded(dim, i, 1)
            for _ in range(3):
                v = random_pure(rng, dim)
                rho = np.outer(v, v.conj())
                assert np.linalg.norm(ch.apply(rho) - back.apply(rho)) < 1e-7
            c = kraus_to_choi(ch)
            assert la.min_eig(c.matrix) >= -1e-9
            out_traced = la.partial_trace(c.matrix, (ch.out_dim, ch.in_dim), keep=(1,))
            assert np.linalg.norm(out_traced - np.eye(dim)) < 1e-9
            assert np.trace(c.matrix).real == pytest.approx(dim, abs=1e-9)


class TestStinespring:
    def test_identity_env_one(self):
        iso = stinespring(identity_channel())
        assert iso.env_dim == 1
        rho = np.array([[0.7, 0.2], [0.2, 0.3]], dtype=complex)
        assert np.allclose(iso.apply(rho), rho)

    def test_completely_depolarizing_env_four(self):
        assert stinespring(completely_depolarizing()).env_dim == 4

    def test_dephasing_env_two(self):
        assert stinespring(dephasing(0.5)).env_dim == 2

    def test_isometry_and_reconstruction(self):
        for i in range(20):
            ch = random_channel(seeded(31, i), 3)
            iso = stinespring(ch)
            assert np.linalg.norm(la.dag(iso.v) @ iso.v - np.eye(3)) < 1e-9
            assert iso.env_dim <= 9
            v = random_pure(seeded(31, i, 2), 3)
            rho = np.outer(v, v.conj())
            assert np.linalg.norm(iso.apply(rho) - ch.apply(rho)) < 1e-7


class TestBlochAffine:
    def test_identity(self):
        aff = to_bloch_affine(identity_channel())
        assert np.allclose(aff.t, 0)
        assert np.allclose(aff.lam, [1, 1, 1])

    def test_depolarizing(self):
        aff = to_bloch_affine(depolarizing(0.3))
        assert np.allclose(aff.t, 0, atol=1e-12)
        assert np.allclose(aff.lam, [0.7, 0.7, 0.7], atol=1e-12)
        assert aff.unital

    def test_amplitude_damping_closed_form(self):
        gamma = 0.4
        aff = to_bloch_affine(amplitude_damping(gamma))
        root = np.sqrt(1 - gamma)
        assert np.allclose(aff.t, [0, 0, gamma], atol=1e-12)
        assert np.allclose(aff.lam, [root, root, 1 - gamma], atol=1e-12)
        assert not aff.unital

    def test_unital_iff_t_zero(self):
        for i in range(40):
            ch = random_channel(seeded(77, i), 2)
            aff = to_bloch_affine(ch)
            assert aff.unital == ch.is_unital(1e-9)

    def test_reconstruction_on_random_channels(self):
        from chcon.divergences import trace_distance

        axes = [np.array(v) for v in
                ([1, 0, 0], [-1, 0, 0], [0, 1, 0], [0, -1, 0], [0, 0, 1], [0, 0, -1])]
        for i in range(200):
            ch = random_channel(seeded(78, i), 2)
            rec = to_bloch_affine(ch).to_channel()
            worst = max(
                trace_distance(ch.apply(la.bloch_state(r)), rec.apply(la.bloch_state(r)))
                for r in axes
            )
            assert worst < 1e-7


class TestAlgebra:
    def test_compose_with_identity(self):
        ch = amplitude_damping(0.3)
        assert choi_distance(compose(identity_channel(), ch), ch) < 1e-12
        assert choi_distance(compose(ch, identity_channel()), ch) < 1e-12

    def test_tensor_dimensions(self):
        t = tensor(depolarizing(0.5), dephasing(0.2))
        assert t.in_dim == 4 and t.out_dim == 4
        assert validate_channel(t).ok

    def test_adjoint_of_tp_is_unital(self):
        adj = adjoint(depolarizing(0.3))
        assert np.allclose(adj.apply(np.eye(2)), np.eye(2))

    def test_compose_matches_choi_of_sequential_action(self):
        for i in range(10):
            a = random_channel(seeded(9, i), 2)
            b = random_channel(seeded(9, i, 1), 2)
            combined = compose(a, b)
            seq = KrausChannel.from_kraus(combined.kraus)
            rho = np.outer(random_pure(seeded(9, i, 2), 2), random_pure(seeded(9, i, 2), 2).conj())
            rho = la.herm_part(rho) + np.eye(2)
            rho /= np.trace(rho)
            assert np.linalg.norm(seq.apply(rho) - a.apply(b.apply(rho))) < 1e-10

    def test_tensor_commutes_with_choi_up_to_factor_swap(self):
        for i in range(10):
            a = random_channel(seeded(10, i), 2)
            b = random_channel(seeded(10, i, 1), 2)
            direct = kraus_to_choi(tensor(a, b))
            assembled = choi_tensor(kraus_to_choi(a), kraus_to_choi(b))
            assert np.linalg.norm(direct.matrix - assembled.matrix) < 1e-9


class TestExtremePoints:
    def test_unitary_is_extreme(self):
        assert is_extreme_point(identity_channel())
        assert is_extreme_point(unitary_channel(la.PAULI_X))

    def test_amplitude_damping_is_extreme(self):
        for gamma in (0.1, 0.5, 0.9):
            assert is_extreme_point(amplitude_damping(gamma))
            assert extremality_gap(amplitude_damping(gamma)) > 1e-4

    def test_depolarizing_is_not_extreme(self):
        for p in (0.2, 0.7):
            assert not is_extreme_point(depolarizing(p))

    def test_unitary_detection(self):
        assert is_unitary_channel(identity_channel())
        assert not is_unitary_channel(depolarizing(0.1))


class TestPresets:
    def test_depolarizing_zero_is_identity(self):
        assert choi_distance(depolarizing(0.0), identity_channel()) < 1e-12

    def test_depolarizing_one_maps_to_maximally_mixed(self):
        ch = depolarizing(1.0)
        for i in range(5):
            v = random_pure(seeded(3, i), 2)
            out = ch.apply(np.outer(v, v.conj()))
            assert np.allclose(out, np.eye(2) / 2, atol=1e-12)

    def test_amplitude_damping_one_maps_to_ground(self):
        ch = amplitude_damping(1.0)
        for i in range(5):
            v = random_pure(seeded(4, i), 2)
            out = ch.apply(np.outer(v, v.conj()))
            assert np.allclose(out, np.diag([1.0, 0.0]), atol=1e-12)

    def test_preset_dispatch_and_errors(self):
        assert choi_distance(preset("dephasing", p=0.5), dephasing(0.5)) < 1e-12
        with pytest.raises(ChannelError, match="unknown preset"):
            preset("nonsense")
        with pytest.raises(ChannelError, match="must be in"):
            depolarizing(1.5)
        with pytest.raises(ChannelError, match="not unitary"):
            unitary_channel(np.array([[1, 0], [0, 0.5]]))


def test_bell_state_is_maximally_entangled():
    rho = bell_state().matrix
    assert np.trace(rho).real == pytest.approx(1.0)
    red = la.partial_trace(rho, (2, 2), keep=(0,))
    assert np.allclose(red, np.eye(2) / 2)
