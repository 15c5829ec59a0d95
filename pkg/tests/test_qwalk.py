import math

import numpy as np
import pytest

from loopwalk import mcmc, qwalk
from loopwalk.errors import (
    NonPowerOfTwo,
    ResolutionTooCoarse,
    SchemaError,
    StateSpaceTooLarge,
)


def toy_instances():
    """Flat, two-level and random energies on the smallest residue space."""
    rng = np.random.default_rng(2024)
    ws = qwalk.WalkSpace.from_loop(1, 1)
    return [
        ("flat", ws, np.zeros(ws.size)),
        ("two-level", ws, np.array([0.0, 0.9, 0.0, 0.9])),
        ("random", ws, rng.uniform(0.0, 2.0, ws.size)),
    ]


class TestWalkSpace:
    def test_dimensions(self):
        ws = qwalk.WalkSpace.from_loop(1, 1)
        assert (ws.size, ws.n_moves, ws.dim) == (4, 4, 32)

    def test_paper_move_dimension(self):
        ws = qwalk.WalkSpace.from_loop(2, 2, cap=2**20)
        assert ws.n_moves == 2 * 2 * 2**2

    def test_cap(self):
        with pytest.raises(StateSpaceTooLarge):
            qwalk.WalkSpace.from_loop(2, 2, cap=64)

    def test_single_register_minimal_instance(self):
        ws = qwalk.WalkSpace.single_register(1)
        assert (ws.size, ws.n_moves, ws.dim) == (2, 2, 8)


class TestBuildV:
    def test_two_move_register_is_hadamard(self):
        ws = qwalk.WalkSpace.single_register(1)
        v = qwalk.build_V(ws)
        h = np.array([[1, 1], [1, -1]]) / math.sqrt(2.0)
        np.testing.assert_allclose(v, np.kron(np.eye(2), np.kron(h, np.eye(2))), atol=1e-15)

    def test_zero_move_column_is_uniform(self):
        ws = qwalk.WalkSpace.from_loop(1, 1)
        v = qwalk.build_V(ws)
        col = v[:, ws.index(2, 0, 0)].reshape(ws.size, ws.n_moves, 2)
        np.testing.assert_allclose(col[2, :, 0], np.full(4, 0.5), atol=1e-15)
        assert np.max(np.abs(col[[0, 1, 3]])) == 0.0
        assert np.max(np.abs(col[:, :, 1])) == 0.0

    def test_unitary(self):
        ws = qwalk.WalkSpace.from_loop(1, 1)
        assert qwalk.unitarity_defect(qwalk.build_V(ws)) < 1e-12

    def test_non_power_of_two_rejected(self):
        space = mcmc.StateSpace(L=3, b1=1, b2=1)
        ws = qwalk.WalkSpace(system=space, moves=mcmc.MoveSet.from_space(space))
        with pytest.raises(NonPowerOfTwo):
            qwalk.build_V(ws)


class TestBuildB:
    def test_flat_energies_flip_every_coin(self):
        ws = qwalk.WalkSpace.from_loop(1, 1)
        b = qwalk.build_B(ws, np.zeros(ws.size), 1.0)
        for x in range(ws.size):
            for m in range(ws.n_moves):
                i0, i1 = ws.index(x, m, 0), ws.index(x, m, 1)
                assert b[i1, i0] == 1.0 and b[i0, i0] == 0.0

    def test_uphill_amplitudes_are_sqrt_half(self):
        ws = qwalk.WalkSpace.single_register(1)
        energies = np.array([0.0, math.log(2.0)])
        b = qwalk.build_B(ws, energies, 1.0)
        i0 = ws.index(0, 1, 0)  # state 0, flip move, coin 0
        root_half = math.sqrt(0.5)
        assert abs(b[i0, i0] - root_half) < 1e-12
        assert abs(b[ws.index(0, 1, 1), i0] - root_half) < 1e-12

    def test_real_orthogonal(self):
        ws = qwalk.WalkSpace.from_loop(1, 1)
        energies = np.random.default_rng(1).uniform(0, 2, ws.size)
        b = qwalk.build_B(ws, energies, 0.8)
        assert np.isrealobj(b)
        assert float(np.max(np.abs(b.T @ b - np.eye(ws.dim)))) < 1e-12


class TestBuildF:
    def test_involution(self):
        ws = qwalk.WalkSpace.from_loop(1, 1)
        f = qwalk.build_F(ws)
        np.testing.assert_array_equal(f @ f, np.eye(ws.dim))

    def test_coin_zero_is_identity(self):
        ws = qwalk.WalkSpace.from_loop(1, 1)
        f = qwalk.build_F(ws)
        for x in range(ws.size):
            for m in range(ws.n_moves):
                i0 = ws.index(x, m, 0)
                col = f[:, i0]
                assert col[i0] == 1.0 and col.sum() == 1.0

    def test_hand_picked_shift(self):
        # move index 3 on the L=1, b=1 space is (j=0, k=1, mask=1): XOR bit 1
        ws = qwalk.WalkSpace.from_loop(1, 1)
        assert ws.moves.masks[3] == 0b10
        f = qwalk.build_F(ws)
        src = ws.index(0b01, 3, 1)
        dst = ws.index(0b11, 3, 1)
        assert f[dst, src] == 1.0


class TestBuildR:
    def test_trace(self):
        ws = qwalk.WalkSpace.from_loop(1, 1)
        r = qwalk.build_R(ws)
        assert np.trace(r) == ws.dim - 2 * ws.size

    def test_involution_and_diagonal(self):
        ws = qwalk.WalkSpace.from_loop(1, 1)
        r = qwalk.build_R(ws)
        np.testing.assert_array_equal(r @ r, np.eye(ws.dim))
        flipped = np.where(np.diag(r) < 0)[0]
        assert set(flipped) == {ws.index(x, 0, 0) for x in range(ws.size)}

    def test_commutes_with_system_operators(self):
        ws = qwalk.WalkSpace.from_loop(1, 1)
        r = qwalk.build_R(ws)
        d_sys = np.kron(
            np.diag(np.random.default_rng(0).uniform(1, 2, ws.size)),
            np.eye(ws.n_moves * 2),
        )
        assert np.max(np.abs(r @ d_sys - d_sys @ r)) == 0.0


class TestBuildWalk:
    def test_minimal_two_state_instance(self):
        ws = qwalk.WalkSpace.single_register(1)
        walk = qwalk.build_walk(ws, np.zeros(2), 1.0)
        assert walk.w.shape == (8, 8)
        assert qwalk.unitarity_defect(walk.w) < 1e-10

    def test_all_operators_unitary(self):
        for _, ws, energies in toy_instances():
            walk = qwalk.build_walk(ws, energies, 1.0)
            for op in (walk.v, walk.b, walk.f, walk.r, walk.w):
                assert qwalk.unitarity_defect(op) < 1e-10

    def test_spectral_containment(self):
        for name, ws, energies in toy_instances():
            walk = qwalk.build_walk(ws, energies, 1.0)
            spectrum = qwalk.walk_spectrum(walk)
            assert spectrum.max_residual < 1e-8, name

    def test_stationary_coherent_state_is_eigenvector(self):
        for name, ws, energies in toy_instances():
            walk = qwalk.build_walk(ws, energies, 1.0)
            assert abs(abs(walk.sigma) - 1.0) < 1e-10, name
            assert walk.sigma_residual < 1e-8, name
            # the verbatim zero-move reflection sign makes sigma = -1
            assert abs(walk.sigma + 1.0) < 1e-10, name

    def test_bigger_instance_spectral_containment(self):
        ws = qwalk.WalkSpace.from_loop(2, 1)
        energies = np.random.default_rng(5).uniform(0, 1.5, ws.size)
        walk = qwalk.build_walk(ws, energies, 0.7)
        assert ws.dim == 256
        assert qwalk.walk_spectrum(walk).max_residual < 1e-8


class TestPhaseGap:
    def test_half_gap_values(self):
        exact, approx = qwalk.phase_gap(0.5)
        assert abs(exact - math.pi / 3.0) < 1e-12
        assert approx == 1.0

    def test_small_gap_agreement(self):
        exact, approx = qwalk.phase_gap(0.02)
        assert abs(exact - approx) / exact < 0.01

    def test_limit_to_zero(self):
        exact, approx = qwalk.phase_gap(1e-12)
        assert exact < 2e-6 and approx < 2e-6

    def test_domain(self):
        with pytest.raises(SchemaError):
            qwalk.phase_gap(0.0)
        with pytest.raises(SchemaError):
            qwalk.phase_gap(1.5)


class TestQPESample:
    def walk(self):
        ws = qwalk.WalkSpace.from_loop(1, 1)
        energies = np.array([0.0, 0.8, 0.3, 1.1])
        return qwalk.build_walk(ws, energies, 1.0)

    def test_stationary_input_succeeds_exactly(self):
        walk = self.walk()
        res = qwalk.qpe_sample(
            walk, qwalk.stationary_coherent_state(walk), 0.25, np.random.default_rng(0)
        )
        assert abs(res.success_probability - 1.0) < 1e-10
        assert res.success and res.sample is not None
        assert res.tv_to_stationary < 1e-10

    def test_uniform_input_overlap_bound(self):
        walk = self.walk()
        initial = qwalk.uniform_coherent_state(walk)
        res = qwalk.qpe_sample(walk, initial, 0.25, np.random.default_rng(1))
        overlap = float(np.sum(np.sqrt(walk.stationary)) / math.sqrt(walk.space.size)) ** 2
        assert res.success_probability >= overlap - 1e-12
        if res.success:
            assert res.tv_to_stationary < 0.01

    def test_resolution_guard(self):
        walk = self.walk()
        gap, _ = qwalk.phase_gap(walk.delta)
        with pytest.raises(ResolutionTooCoarse):
            qwalk.qpe_sample(
                walk, qwalk.stationary_coherent_state(walk), gap * 1.01, np.random.default_rng(0)
            )

    def test_unnormalised_input_rejected(self):
        walk = self.walk()
        bad = np.ones(walk.space.dim)
        with pytest.raises(SchemaError):
            qwalk.qpe_sample(walk, bad, 0.25, np.random.default_rng(0))

    def test_sampling_statistics_follow_pi(self):
        walk = self.walk()
        initial = qwalk.stationary_coherent_state(walk)
        rng = np.random.default_rng(7)
        counts = np.zeros(walk.space.size)
        for _ in range(4000):
            res = qwalk.qpe_sample(walk, initial, 0.25, rng)
            counts[res.sample] += 1
        empirical = counts / counts.sum()
        assert mcmc.total_variation(empirical, walk.stationary) < 0.03


class TestSpectrumReport:
    def test_json_serialisable(self):
        import json

        _, ws, energies = toy_instances()[2]
        walk = qwalk.build_walk(ws, energies, 1.0)
        doc = qwalk.walk_spectrum(walk).to_dict()
        text = json.dumps(doc, sort_keys=True)
        assert "phase_gap_exact" in doc and "sigma" in doc
        assert json.loads(text)["sigma"] == walk.sigma

    def test_phase_gap_consistency(self):
        _, ws, energies = toy_instances()[1]
        walk = qwalk.build_walk(ws, energies, 1.0)
        spectrum = qwalk.walk_spectrum(walk)
        assert abs(spectrum.phase_gap_exact - math.acos(1.0 - walk.delta)) < 1e-12
        assert abs(spectrum.phase_gap_approx - math.sqrt(2.0 * walk.delta)) < 1e-12
