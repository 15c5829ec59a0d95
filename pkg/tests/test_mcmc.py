import math

import numpy as np
import pytest
import scipy.stats
from hypothesis import given, settings
from hypothesis import strategies as st

from loopwalk import mcmc
from loopwalk.errors import (
    NotReversible,
    Reducible,
    SchemaError,
    StateSpaceTooLarge,
    ZeroGap,
)
from loopwalk.geometry import LoopState


def two_state_space():
    """L = 1 with a one-bit backbone register and a trivial chi register."""
    return mcmc.StateSpace(L=1, b1=1, b2=0)


def two_state_chain(temperature=1.0):
    """Energies {0, T ln 2}, so the Boltzmann law is exactly (2/3, 1/3)."""
    energies = np.array([0.0, temperature * math.log(2.0)])
    P = mcmc.build_transition_matrix(two_state_space(), energies, temperature)
    return P, energies


class TestStateSpace:
    def test_sizes(self):
        space = mcmc.StateSpace(L=2, b1=2, b2=1)
        assert space.size == 2 ** 6
        assert space.n_moves == 2 * (4 + 2)

    def test_paper_move_count(self):
        assert mcmc.StateSpace(L=10, b1=8, b2=8).n_moves == 5120

    def test_index_round_trip(self):
        space = mcmc.StateSpace(L=3, b1=2, b2=1)
        for idx in range(space.size):
            assert space.index_of(space.state_of(idx)) == idx

    def test_little_endian_layout(self):
        # residue 1 occupies the lowest bits, i1 below i2
        space = mcmc.StateSpace(L=2, b1=2, b2=1)
        state = LoopState(i1=(3, 0), i2=(0, 1))
        assert space.index_of(state) == 3 + (1 << (2 + 2 + 1))


class TestMoves:
    def test_apply_move_is_involution(self):
        state = LoopState(i1=(0b0101, 2), i2=(1, 3))
        move = mcmc.Move(j=0, k=0, mask=0b0011)
        once = mcmc.apply_move(state, move)
        assert once.i1 == (0b0110, 2)
        assert mcmc.apply_move(once, move) == state

    def test_zero_mask_is_identity(self):
        state = LoopState(i1=(2,), i2=(1,))
        assert mcmc.apply_move(state, mcmc.Move(j=0, k=1, mask=0)) == state

    @given(st.integers(0, 2**31 - 1))
    @settings(max_examples=40, deadline=None)
    def test_involution_property(self, seed):
        rng = np.random.default_rng(seed)
        space = mcmc.StateSpace(L=3, b1=3, b2=2)
        state = space.state_of(int(rng.integers(space.size)))
        move = mcmc.propose_move(space, rng)
        assert mcmc.apply_move(mcmc.apply_move(state, move), move) == state

    def test_propose_move_uniform_chi_squared(self):
        space = mcmc.StateSpace(L=1, b1=1, b2=1)
        assert space.n_moves == 4
        rng = np.random.default_rng(123)
        counts = np.zeros(4)
        per_residue = (1 << space.b1) + (1 << space.b2)
        for _ in range(100_000):
            mv = mcmc.propose_move(space, rng)
            counts[mv.j * per_residue + (mv.k << space.b1) + mv.mask] += 1
        assert scipy.stats.chisquare(counts).pvalue > 0.001

    def test_propose_move_deterministic(self):
        space = mcmc.StateSpace(L=2, b1=2, b2=2)
        rng1, rng2 = np.random.default_rng(9), np.random.default_rng(9)
        moves1 = [mcmc.propose_move(space, rng1) for _ in range(50)]
        moves2 = [mcmc.propose_move(space, rng2) for _ in range(50)]
        assert moves1 == moves2

    def test_move_set_zero_mask_first(self):
        space = mcmc.StateSpace(L=2, b1=1, b2=1)
        moves = mcmc.MoveSet.from_space(space)
        assert moves.masks[0] == 0
        assert len(moves) == space.n_moves
        assert len(set(zip(moves.masks, [ (m.j, m.k) for m in moves.moves]))) == len(moves)


class TestMHAccept:
    def test_downhill_always_accepts(self):
        rng = np.random.default_rng(0)
        for d_energy in (0.0, -1.0, -1e6):
            ok, p = mcmc.mh_accept(d_energy, 1.0, rng)
            assert ok and p == 1.0

    def test_half_probability_at_t_ln2(self):
        rng = np.random.default_rng(0)
        _, p = mcmc.mh_accept(2.0 * math.log(2.0), 2.0, rng)
        assert abs(p - 0.5) < 1e-15

    def test_large_uphill_never_accepts(self):
        rng = np.random.default_rng(0)
        ok, p = mcmc.mh_accept(1e6, 1.0, rng)
        assert p == 0.0 and not ok

    def test_empirical_rate_matches_probability(self):
        rng = np.random.default_rng(77)
        p_target = 0.5
        hits = sum(mcmc.mh_accept(math.log(2.0), 1.0, rng)[0] for _ in range(40_000))
        assert abs(hits / 40_000 - p_target) < 0.01


class TestRunChain:
    def test_flat_oracle_accepts_everything(self):
        space = two_state_space()
        cfg = mcmc.ChainConfig(temperature=1.0, steps=500, seed=1)
        res = mcmc.run_chain(space, LoopState(i1=(0,), i2=(0,)), cfg, lambda s: 0.0)
        assert res.acceptance_rate == 1.0

    def test_two_state_sampling_matches_exact_boltzmann(self):
        space = two_state_space()
        temperature = 1.0
        energies = np.array([0.0, math.log(2.0)])
        oracle = lambda s: energies[space.index_of(s)]
        cfg = mcmc.ChainConfig(temperature=temperature, steps=100_000, seed=42, burn_in=1000)
        res = mcmc.run_chain(space, LoopState(i1=(0,), i2=(0,)), cfg, oracle)
        empirical = mcmc.empirical_distribution(res.samples, space)
        assert mcmc.total_variation(empirical, [2.0 / 3.0, 1.0 / 3.0]) < 0.02

    def test_no_samples_when_burn_in_swallows_run(self):
        space = two_state_space()
        cfg = mcmc.ChainConfig(temperature=1.0, steps=10, seed=3, burn_in=10)
        res = mcmc.run_chain(space, LoopState(i1=(0,), i2=(0,)), cfg, lambda s: 0.0)
        assert res.samples == ()

    def test_seed_determinism(self):
        space = mcmc.StateSpace(L=2, b1=2, b2=1)
        energies = np.random.default_rng(0).uniform(0, 2, space.size)
        oracle = lambda s: energies[space.index_of(s)]
        cfg = mcmc.ChainConfig(temperature=0.7, steps=2000, seed=99, burn_in=100, thin=3)
        r1 = mcmc.run_chain(space, space.state_of(0), cfg, oracle)
        r2 = mcmc.run_chain(space, space.state_of(0), cfg, oracle)
        np.testing.assert_array_equal(r1.energies, r2.energies)
        np.testing.assert_array_equal(r1.accepted, r2.accepted)
        assert r1.samples == r2.samples

    def test_oracle_error_carries_step(self):
        space = two_state_space()

        def oracle(state):
            if space.index_of(state) == 1:
                raise ValueError("boom")
            return 0.0

        cfg = mcmc.ChainConfig(temperature=1.0, steps=100, seed=0)
        with pytest.raises(ValueError) as err:
            mcmc.run_chain(space, space.state_of(0), cfg, oracle)
        assert getattr(err.value, "chain_step") >= 1

    def test_thinning_counts(self):
        space = two_state_space()
        cfg = mcmc.ChainConfig(temperature=1.0, steps=100, seed=1, burn_in=20, thin=7)
        res = mcmc.run_chain(space, space.state_of(0), cfg, lambda s: 0.0)
        assert len(res.samples) == math.ceil(80 / 7)


class TestTransitionMatrix:
    def test_columns_stochastic_and_nonnegative(self):
        P, _ = two_state_chain()
        m = P.matrix
        assert np.max(np.abs(m.sum(axis=0) - 1.0)) < 1e-12
        assert np.min(m) >= 0.0

    def test_two_state_values_by_hand(self):
        # moves: zero mask (k=0), flip mask, and the trivial chi mask; the
        # uphill flip accepts with probability 1/2, so P[1,0] = 1/6
        P, _ = two_state_chain()
        expected = np.array([[5.0 / 6.0, 1.0 / 3.0], [1.0 / 6.0, 2.0 / 3.0]])
        np.testing.assert_allclose(P.matrix, expected, atol=1e-15)

    def test_flat_energies_doubly_stochastic_uniform(self):
        space = mcmc.StateSpace(L=1, b1=1, b2=1)
        P = mcmc.build_transition_matrix(space, np.zeros(space.size), 1.0)
        assert np.max(np.abs(P.matrix.sum(axis=1) - 1.0)) < 1e-12
        pi = mcmc.stationary_exact(P)
        np.testing.assert_allclose(pi, np.full(4, 0.25), atol=1e-12)

    def test_detailed_balance_against_boltzmann(self):
        P, energies = two_state_chain()
        pi = mcmc.boltzmann(energies, 1.0)
        assert mcmc.detailed_balance_residual(P, pi) < 1e-15

    def test_leading_eigenvalue_is_one(self):
        space = mcmc.StateSpace(L=1, b1=2, b2=1)
        energies = np.random.default_rng(5).uniform(0, 3, space.size)
        P = mcmc.build_transition_matrix(space, energies, 1.3)
        eigs = np.linalg.eigvals(P.matrix)
        assert abs(np.max(eigs.real) - 1.0) < 1e-10

    def test_cap_enforced(self):
        with pytest.raises(StateSpaceTooLarge):
            mcmc.build_transition_matrix(
                mcmc.StateSpace(L=4, b1=2, b2=2), np.zeros(2**16), 1.0
            )

    def test_callable_energies(self):
        space = two_state_space()
        P = mcmc.build_transition_matrix(space, lambda s: float(s.i1[0]), 10.0)
        assert P.matrix.shape == (2, 2)


class TestStationaryAndGap:
    def test_stationary_matches_boltzmann(self):
        space = mcmc.StateSpace(L=1, b1=2, b2=1)
        energies = np.random.default_rng(8).uniform(0.0, 2.0, space.size)
        temperature = 0.9
        P = mcmc.build_transition_matrix(space, energies, temperature)
        pi = mcmc.stationary_exact(P)
        np.testing.assert_allclose(pi, mcmc.boltzmann(energies, temperature), atol=1e-8)
        assert abs(pi.sum() - 1.0) < 1e-12

    def test_two_state_exact(self):
        P, _ = two_state_chain()
        np.testing.assert_allclose(
            mcmc.stationary_exact(P), [2.0 / 3.0, 1.0 / 3.0], atol=1e-12
        )

    def test_identity_chain_is_reducible(self):
        with pytest.raises(Reducible):
            mcmc.stationary_exact(np.eye(4))

    def test_closed_form_gap(self):
        # column-stochastic 2-state chain has eigenvalues 1 and 1 - p - q
        p, q = 0.23, 0.41
        P = np.array([[1.0 - p, q], [p, 1.0 - q]])
        assert abs(mcmc.spectral_gap(P) - (p + q)) < 1e-12

    def test_gap_agrees_with_dense_eigensolve(self):
        space = mcmc.StateSpace(L=1, b1=1, b2=1)
        P = mcmc.build_transition_matrix(space, np.zeros(space.size), 1.0)
        gap = mcmc.spectral_gap(P)
        eigs = np.sort(np.linalg.eigvals(P.matrix).real)[::-1]
        assert abs(gap - (eigs[0] - eigs[1])) < 1e-9

    def test_non_reversible_detected(self):
        # biased 3-cycle: irreducible, uniform stationary, no detailed balance
        P = np.array(
            [[0.1, 0.8, 0.1], [0.1, 0.1, 0.8], [0.8, 0.1, 0.1]]
        )
        with pytest.raises(NotReversible):
            mcmc.spectral_gap(P)

    def test_single_register_move_set(self):
        space = mcmc.StateSpace(L=1, b1=1, b2=0)
        moves = mcmc.MoveSet.single_register(1)
        energies = np.array([0.0, math.log(2.0)])
        P = mcmc.build_transition_matrix(space, energies, 1.0, moves=moves)
        # two moves: stay and flip; uphill flip accepted with probability 1/2
        expected = np.array([[0.75, 0.5], [0.25, 0.5]])
        np.testing.assert_allclose(P.matrix, expected, atol=1e-15)
