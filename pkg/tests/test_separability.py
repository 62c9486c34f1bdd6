"""Separability distances, the cc-qq block formula, separable channels."""

import math

import numpy as np
import pytest

import chcon.linalg as la
from chcon.channels import (
    ChannelError,
    bell_state,
    completely_depolarizing,
    depolarizing,
    identity_channel,
)
from chcon.sampling import haar_unitary, random_channel, random_density, random_pure
from chcon.separability import (
    BipartiteState,
    CcQqState,
    SepConfig,
    apply_separable_to_ccqq,
    chisep,
    chisep_ccqq,
    chisep_ccqq_blockdiag,
    chisep_upper_ensemble,
    dsep,
    dsep_upper_ensemble,
    is_ppt,
    local_product_channel,
    make_separable_channel,
    mixture_of_local_pairs,
    ppt_min_eigenvalue,
    project_pt_trace,
    separable_twirl,
    verify_contraction_step,
)

from conftest import seeded


def bell() -> BipartiteState:
    return BipartiteState.from_matrix(bell_state().matrix, 2, 2)


def werner(w: float) -> BipartiteState:
    mat = w * bell_state().matrix + (1 - w) * np.eye(4) / 4
    return BipartiteState.from_matrix(mat, 2, 2)


def werner_chisep(w: float) -> float:
    """Closed form from the twirling argument: the optimal separable state
    is the boundary Werner state, where the pair commutes."""
    if w <= 1 / 3:
        return 0.0
    return (1 + 3 * w) ** 2 / 8 + 9 * (1 - w) ** 2 / 8 - 1


def werner_dsep(w: float) -> float:
    return max(1.5 * (w - 1 / 3), 0.0)


def product_state(rng) -> BipartiteState:
    a, b = random_pure(rng, 2), random_pure(rng, 2)
    v = np.kron(a, b)
    return BipartiteState.from_matrix(np.outer(v, v.conj()), 2, 2)


class TestPpt:
    def test_product_states_pass(self):
        for i in range(10):
            assert is_ppt(product_state(seeded(70, i)))

    def test_bell_minus_half(self):
        assert not is_ppt(bell())
        assert ppt_min_eigenvalue(bell()) == pytest.approx(-0.5, abs=1e-12)

    def test_strong_werner_mixture_fails(self):
        assert not is_ppt(werner(0.9))
        assert is_ppt(werner(1 / 3))


class TestProjection:
    def test_pt_trace_projection_feasible(self):
        for i in range(20):
            rng = seeded(71, i)
            x = rng.standard_normal((4, 4)) + 1j * rng.standard_normal((4, 4))
            x = la.herm_part(x)
            z = project_pt_trace(x, 2, 2)
            assert np.trace(z).real == pytest.approx(1.0, abs=1e-9)
            assert la.min_eig(la.partial_transpose(z, 2, 2)) >= -1e-10

    def test_twirl_is_separable_and_full_rank(self):
        t = separable_twirl(bell_state().matrix, 2, 2)
        st = BipartiteState.from_matrix(t, 2, 2)
        assert is_ppt(st)
        assert np.linalg.eigvalsh(t)[0] > 1e-3


class TestDsep:
    def test_product_state_zero(self):
        assert dsep(product_state(seeded(72))).value == 0.0

    def test_bell_at_least_half(self):
        assert dsep(bell()).value >= 0.5

    def test_bell_exact_via_sandwich(self):
        lower = dsep(bell())
        upper = dsep_upper_ensemble(bell(), SepConfig(fw_iters=220))
        assert upper.value >= lower.value - 1e-9
        assert upper.value - lower.value <= 1e-4
        assert lower.value == pytest.approx(1.0, abs=1e-6)

    def test_werner_closed_form(self):
        for w in (0.5, 0.75, 0.95):
            assert dsep(werner(w)).value == pytest.approx(werner_dsep(w), abs=1e-6)

    def test_method_tags(self):
        assert dsep(bell()).method == "ppt_exact_2x2"
        cheap = SepConfig(fw_iters=5, admm_iters=50)
        assert dsep_upper_ensemble(bell(), cheap).method == "ensemble_upper_bound"

    def test_oversize_rejected(self):
        big = BipartiteState.from_matrix(np.eye(32) / 32, 4, 8)
        with pytest.raises(ChannelError, match="capped"):
            dsep(big)


class TestChisep:
    def test_product_state_zero_with_note(self):
        res = chisep(product_state(seeded(73)))
        assert res.value == 0.0
        assert "closure" in res.extras["note"]

    def test_bell_below_dimensional_bound(self):
        assert chisep(bell()).value <= 3.0 + 1e-9

    def test_bell_exact_via_sandwich(self):
        lower = chisep(bell())
        up_val, ensemble = chisep_upper_ensemble(bell(), SepConfig(fw_iters=100))
        assert lower.value == pytest.approx(1.0, abs=1e-6)
        assert up_val >= lower.value - 1e-9
        assert up_val - lower.value <= 1e-3
        weights = [w for w, _, _ in ensemble]
        assert sum(weights) == pytest.approx(1.0, abs=1e-9)

    def test_werner_closed_forms(self):
        for w in (0.45, 0.6, 0.8, 1.0):
            assert chisep(werner(w)).value == pytest.approx(werner_chisep(w), abs=1e-6)

    def test_dsep_squared_below_chisep(self):
        for i in range(15):
            rho = random_density(seeded(74, i), 4)
            st = BipartiteState.from_matrix(rho, 2, 2)
            if is_ppt(st):
                continue
            assert dsep(st).value ** 2 <= chisep(st).value + 1e-6

    def test_monotone_under_separable_channels(self):
        # 200 random separable channels over 50 entangled inputs; each input's
        # distance is computed once and compared against four channel outputs.
        cfg = SepConfig(obj_tol=1e-7)
        checked = 0
        for i in range(50):
            rng = seeded(75, i)
            w = rng.uniform(0.45, 1.0)
            u = np.kron(haar_unitary(rng, 2), haar_unitary(rng, 2))
            mat = u @ werner(w).matrix @ la.dag(u)
            st = BipartiteState.from_matrix(mat, 2, 2)
            chi_in = chisep(st, cfg).value
            for j in range(4):
                crng = seeded(75, i, j)
                if j % 2 == 0:
                    sep = local_product_channel(random_channel(crng, 2), random_channel(crng, 2))
                else:
                    sep = mixture_of_local_pairs(
                        [(0.5, random_channel(crng, 2), random_channel(crng, 2)),
                         (0.5, random_channel(crng, 2), random_channel(crng, 2))]
                    )
                out = BipartiteState.from_matrix(sep.apply(st.matrix), 2, 2)
                assert chisep(out, cfg).value <= chi_in + 1e-6
                checked += 1
        assert checked == 200


class TestCcQq:
    def test_single_block_collapses_to_chisep(self):
        s = CcQqState.single(bell())
        assert chisep_ccqq(s).value == pytest.approx(chisep(bell()).value, abs=1e-9)

    def test_two_product_blocks_zero(self):
        blocks = []
        for b in range(2):
            st = product_state(seeded(76, b))
            blocks.append(((b,), (b,), 0.5, st.matrix))
        s = CcQqState.from_blocks(2, 2, blocks)
        assert chisep_ccqq(s).value == pytest.approx(0.0, abs=1e-9)

    def test_bell_product_mixture_formula_vs_direct(self):
        prod = product_state(seeded(77))
        s = CcQqState.from_blocks(
            2, 2, [((0,), (0,), 0.5, bell_state().matrix), ((1,), (1,), 0.5, prod.matrix)]
        )
        formula = chisep_ccqq(s)
        direct = chisep_ccqq_blockdiag(s)
        assert abs(formula.value - direct.value) < 1e-3
        # Closed form: blocks contribute sqrt(2)/2 and 1/2 to the mixture sum.
        expected = (0.5 * math.sqrt(2.0) + 0.5) ** 2 - 1.0
        assert formula.value == pytest.approx(expected, abs=1e-6)
        q = formula.extras["q_weights"]
        assert q[0] == pytest.approx(math.sqrt(2.0) / (math.sqrt(2.0) + 1.0), abs=1e-6)

    def test_optimal_weights_match_direct_traces(self):
        s = CcQqState.from_blocks(
            2, 2,
            [((0,), (0,), 0.4, werner(0.9).matrix), ((1,), (1,), 0.6, werner(0.7).matrix)],
        )
        formula = chisep_ccqq(s)
        direct = chisep_ccqq_blockdiag(s)
        assert abs(formula.value - direct.value) < 1e-3
        np.testing.assert_allclose(
            formula.extras["q_weights"], direct.extras["block_traces"], atol=1e-3
        )

    def test_dimensional_bound(self):
        fast = SepConfig(obj_tol=1e-6, max_iter=2000, barrier_stages=(1e-4, 1e-6, 1e-8))
        for i in range(40):
            rng = seeded(78, i)
            p = rng.dirichlet((1, 1))
            blocks = [((b,), (b,), p[b], random_density(rng, 4)) for b in range(2)]
            s = CcQqState.from_blocks(2, 2, blocks)
            assert chisep_ccqq(s, fast).value <= 3.0 + 1e-6

    def test_probability_validation(self):
        with pytest.raises(ChannelError, match="sum"):
            CcQqState.from_blocks(2, 2, [((0,), (0,), 0.7, np.eye(4) / 4)])


class TestSeparableChannels:
    def test_identity_pair(self):
        sep = make_separable_channel([(np.eye(2), np.eye(2))])
        rho = bell_state().matrix
        assert np.allclose(sep.apply(rho), rho)

    def test_local_depolarizing_product(self):
        sep = local_product_channel(depolarizing(0.3), depolarizing(0.5))
        assert sep.channel.tp_residual() < 1e-12
        out = sep.apply(bell_state().matrix)
        expected = 0.7 * 0.5 * bell_state().matrix + (1 - 0.7 * 0.5) * np.eye(4) / 4
        assert np.allclose(out, expected, atol=1e-12)

    def test_non_tp_factor_list_rejected(self):
        with pytest.raises(ChannelError, match="TP residual"):
            make_separable_channel([(0.5 * np.eye(2), np.eye(2))])

    def test_swap_cannot_be_expressed(self):
        # SWAP has no product-form Kraus pair of local 2x2 factors; the
        # nearest attempt (a single identity pair) simply is not SWAP.
        sep = make_separable_channel([(np.eye(2), np.eye(2))])
        swap = np.eye(4)[[0, 2, 1, 3]].astype(complex)
        v = np.kron(np.array([1, 0]), np.array([0, 1])).astype(complex)
        rho = np.outer(v, v.conj())
        assert not np.allclose(sep.apply(rho), swap @ rho @ swap.conj().T)

    def test_mixture_of_local_pairs_is_tp(self):
        rng = seeded(79)
        sep = mixture_of_local_pairs(
            [(0.3, random_channel(rng, 2), random_channel(rng, 2)),
             (0.7, random_channel(rng, 2), random_channel(rng, 2))]
        )
        assert sep.channel.tp_residual() < 1e-10


class TestContractionStep:
    def test_identity_channel_trivially_holds(self):
        s = CcQqState.single(bell())
        t = local_product_channel(identity_channel(), identity_channel())
        rep = verify_contraction_step(s, t, 1 / 16)
        assert rep.passed
        assert rep.chi_out == pytest.approx(rep.chi_in, abs=1e-6)

    def test_completely_depolarizing_zeroes_output(self):
        s = CcQqState.single(bell())
        t = local_product_channel(completely_depolarizing(), completely_depolarizing())
        rep = verify_contraction_step(s, t, 0.1)
        assert rep.passed
        assert rep.chi_out == pytest.approx(0.0, abs=1e-9)

    def test_local_depolarizing_numeric(self):
        s = CcQqState.single(bell())
        t = local_product_channel(depolarizing(0.5), depolarizing(0.5))
        rep = verify_contraction_step(s, t, 1 / 16)
        assert rep.passed
        assert rep.chi_out < rep.chi_in
        assert rep.eta_chi_diagnostic <= rep.eta_upper + 1e-6

    def test_precondition_enforced(self):
        s = CcQqState.single(werner(0.4))
        t = local_product_channel(identity_channel(), identity_channel())
        with pytest.raises(ChannelError, match="precondition"):
            verify_contraction_step(s, t, 0.9)
