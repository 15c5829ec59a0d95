"""Metropolis-Hastings sampling over the dihedral-index state space.

States pack into integers little-endian: residue 1 occupies the lowest
``b1 + b2`` bits (i1 below i2), residue 2 the next block, and so on.  A move
XORs a mask into one register of one residue; the full move set has
``L * (2**b1 + 2**b2)`` members (the paper's ``2 L 2**b`` when b1 == b2),
including the zero mask, so every chain has self-loops and is aperiodic.

Besides running chains, this module builds the exact dense transition matrix
of small instances, its stationary law, and the spectral gap via the
similarity transform that makes a reversible chain symmetric.
"""

import math
from dataclasses import dataclass

import numpy as np
from scipy.sparse import csr_matrix
from scipy.sparse.csgraph import connected_components

from .errors import (
    NotReversible,
    Reducible,
    SchemaError,
    StateSpaceTooLarge,
    ZeroGap,
)
from .geometry import LoopState

DEFAULT_STATE_CAP = 4096


@dataclass(frozen=True)
class StateSpace:
    """Enumerable space of loop states for L residues and b1/b2-bit tables."""

    L: int
    b1: int
    b2: int

    def __post_init__(self):
        if self.L < 1 or self.b1 < 0 or self.b2 < 0:
            raise SchemaError("need L >= 1 and non-negative register widths")

    @property
    def bits_per_residue(self):
        return self.b1 + self.b2

    @property
    def size(self):
        return 1 << (self.L * self.bits_per_residue)

    @property
    def n_moves(self):
        return self.L * ((1 << self.b1) + (1 << self.b2))

    def register_offset(self, j, k):
        """Bit offset of residue j's (0-based) register k in the packed state."""
        return j * self.bits_per_residue + (self.b1 if k == 1 else 0)

    def index_of(self, state):
        if state.L != self.L:
            raise SchemaError(f"state has {state.L} residues, space expects {self.L}")
        idx = 0
        for j in range(self.L):
            idx |= state.i1[j] << self.register_offset(j, 0)
            idx |= state.i2[j] << self.register_offset(j, 1)
        return idx

    def state_of(self, idx):
        mask1 = (1 << self.b1) - 1
        mask2 = (1 << self.b2) - 1
        i1, i2 = [], []
        for j in range(self.L):
            i1.append((idx >> self.register_offset(j, 0)) & mask1)
            i2.append((idx >> self.register_offset(j, 1)) & mask2)
        return LoopState(i1=tuple(i1), i2=tuple(i2))

    def states(self):
        return (self.state_of(i) for i in range(self.size))


@dataclass(frozen=True)
class Move:
    """XOR ``mask`` into register ``k`` (0: phi/psi, 1: chi1) of residue ``j``."""

    j: int
    k: int
    mask: int


@dataclass(frozen=True)
class MoveSet:
    """Uniformly proposed XOR masks over packed state integers.

    ``moves`` carries the residue-structured labels when the set came from a
    :class:`StateSpace`; custom sets (e.g. a bare n-bit register for tiny walk
    instances) may leave it None.  Mask 0 always sits at index 0.
    """

    masks: tuple
    moves: tuple | None = None

    def __len__(self):
        return len(self.masks)

    @classmethod
    def from_space(cls, space):
        masks, moves = [], []
        for j in range(space.L):
            for k in (0, 1):
                width = space.b1 if k == 0 else space.b2
                offset = space.register_offset(j, k)
                for mask in range(1 << width):
                    masks.append(mask << offset)
                    moves.append(Move(j=j, k=k, mask=mask))
        return cls(masks=tuple(masks), moves=tuple(moves))

    @classmethod
    def single_register(cls, n_bits):
        return cls(masks=tuple(range(1 << n_bits)))


def move_from_index(space, m):
    """Decode a flat move index (j-major, then k, then mask)."""
    per_residue = (1 << space.b1) + (1 << space.b2)
    j, rem = divmod(int(m), per_residue)
    if not 0 <= j < space.L:
        raise SchemaError(f"move index {m} outside 0..{space.n_moves - 1}")
    if rem < (1 << space.b1):
        return Move(j=j, k=0, mask=rem)
    return Move(j=j, k=1, mask=rem - (1 << space.b1))


def propose_move(space, rng):
    """Draw one move uniformly from all ``space.n_moves`` possibilities."""
    return move_from_index(space, rng.integers(space.n_moves))


def apply_move(state, move):
    """XOR the move's mask into the selected register; an involution."""
    if move.k == 0:
        i1 = list(state.i1)
        i1[move.j] ^= move.mask
        return LoopState(i1=tuple(i1), i2=state.i2)
    i2 = list(state.i2)
    i2[move.j] ^= move.mask
    return LoopState(i1=state.i1, i2=tuple(i2))


def mh_accept(d_energy, temperature, rng):
    """Metropolis-Hastings decision: (accepted, acceptance probability).

    Probability is min(1, exp(-dE/T)); the decision consumes exactly one
    uniform draw regardless of dE, keeping RNG streams aligned.
    """
    if temperature <= 0.0:
        raise SchemaError("temperature must be positive")
    prob = 1.0 if d_energy <= 0.0 else math.exp(-d_energy / temperature)
    return bool(rng.random() < prob), prob


@dataclass(frozen=True)
class ChainConfig:
    temperature: float
    steps: int
    seed: int
    burn_in: int = 0
    thin: int = 1

    def __post_init__(self):
        if self.temperature <= 0.0:
            raise SchemaError("temperature must be positive")
        if self.steps < 1:
            raise SchemaError("steps must be at least 1")
        if self.burn_in < 0 or self.thin < 1:
            raise SchemaError("need burn_in >= 0 and thin >= 1")


@dataclass(frozen=True)
class ChainResult:
    samples: tuple           # thinned post-burn-in (state, energy) pairs
    energies: np.ndarray     # energy after each step
    accepted: np.ndarray     # per-step accept flag
    acceptance_rate: float
    final_state: LoopState
    final_energy: float
    best_state: LoopState
    best_energy: float
    best_step: int
    config: ChainConfig


def run_chain(space, initial, config, energy):
    """Run one Metropolis-Hastings chain; deterministic given (config, seed).

    ``energy`` maps a LoopState to a float.  The current state's energy is
    cached, so each step costs one oracle call.  Oracle exceptions propagate
    with the failing step recorded on the exception as ``chain_step``.
    """
    rng = np.random.default_rng(config.seed)

    def evaluate(state, step):
        try:
            return float(energy(state))
        except Exception as exc:
            exc.chain_step = step
            raise

    state = initial
    current = evaluate(state, 0)
    energies = np.empty(config.steps)
    accepted = np.empty(config.steps, dtype=bool)
    samples = []
    best_state, best_energy, best_step = state, current, 0
    for step in range(1, config.steps + 1):
        move = propose_move(space, rng)
        proposal = apply_move(state, move)
        proposed = evaluate(proposal, step)
        ok, _ = mh_accept(proposed - current, config.temperature, rng)
        if ok:
            state, current = proposal, proposed
        energies[step - 1] = current
        accepted[step - 1] = ok
        if current < best_energy:
            best_state, best_energy, best_step = state, current, step
        if step > config.burn_in and (step - config.burn_in - 1) % config.thin == 0:
            samples.append((state, current))
    return ChainResult(
        samples=tuple(samples),
        energies=energies,
        accepted=accepted,
        acceptance_rate=float(np.mean(accepted)),
        final_state=state,
        final_energy=current,
        best_state=best_state,
        best_energy=best_energy,
        best_step=best_step,
        config=config,
    )


# ---------------------------------------------------------------------------
# Exact dense machinery


@dataclass(frozen=True)
class TransitionMatrix:
    """Dense column-stochastic matrix, columns indexed by packed states."""

    matrix: np.ndarray
    space: StateSpace | None = None
    moves: MoveSet | None = None

    def __post_init__(self):
        m = np.asarray(self.matrix, dtype=float)
        if m.ndim != 2 or m.shape[0] != m.shape[1]:
            raise SchemaError("transition matrix must be square")
        if np.min(m) < -1e-12:
            raise SchemaError("transition matrix has negative entries")
        col_err = np.max(np.abs(m.sum(axis=0) - 1.0))
        if col_err > 1e-9:
            raise SchemaError(f"columns deviate from stochasticity by {col_err:.2e}")
        object.__setattr__(self, "matrix", m)

    @property
    def size(self):
        return self.matrix.shape[0]


def _as_matrix(P):
    return P.matrix if isinstance(P, TransitionMatrix) else np.asarray(P, dtype=float)


def state_energies(space, energy):
    """Evaluate an energy oracle over the whole enumerated space."""
    return np.array([float(energy(s)) for s in space.states()])


def build_transition_matrix(space, energies, temperature, moves=None, cap=DEFAULT_STATE_CAP):
    """Exact Metropolis-Hastings transition matrix of a toy instance.

    ``energies`` is a length-``space.size`` vector (or a callable over
    states).  Off-diagonal mass is acceptance-weighted uniform proposal;
    rejected mass accumulates on the diagonal so columns sum to one.
    """
    if space.size > cap:
        raise StateSpaceTooLarge(f"|Omega| = {space.size} exceeds cap {cap}")
    if callable(energies):
        energies = state_energies(space, energies)
    energies = np.asarray(energies, dtype=float)
    if energies.shape != (space.size,):
        raise SchemaError(f"need one energy per state, got shape {energies.shape}")
    if temperature <= 0.0:
        raise SchemaError("temperature must be positive")
    if moves is None:
        moves = MoveSet.from_space(space)
    n_moves = len(moves)
    xs = np.arange(space.size)
    P = np.zeros((space.size, space.size))
    for mask in moves.masks:
        x2 = xs ^ mask
        d_energy = energies[x2] - energies[xs]
        accept = np.exp(-np.maximum(d_energy, 0.0) / temperature)
        P[x2, xs] += accept / n_moves
    P[xs, xs] += 1.0 - P.sum(axis=0)
    return TransitionMatrix(matrix=P, space=space, moves=moves)


def boltzmann(energies, temperature):
    """Normalised Boltzmann weights exp(-E/T) / Z."""
    energies = np.asarray(energies, dtype=float)
    w = np.exp(-(energies - energies.min()) / temperature)
    return w / w.sum()


def stationary_exact(P):
    """Stationary distribution of an irreducible column-stochastic matrix.

    Irreducibility is verified by strong connectivity of the positive-entry
    digraph; the eigenvector for eigenvalue one comes from the SVD null space
    of (P - I).
    """
    m = _as_matrix(P)
    n_comp, _ = connected_components(csr_matrix(m > 0.0), directed=True, connection="strong")
    if n_comp != 1:
        raise Reducible(f"transition graph splits into {n_comp} strongly connected components")
    _, _, vh = np.linalg.svd(m - np.eye(m.shape[0]))
    pi = np.real(vh[-1])
    pi = pi * np.sign(pi.sum())
    pi = np.clip(pi, 0.0, None)
    total = pi.sum()
    if total <= 0.0:
        raise Reducible("failed to extract a positive stationary vector")
    return pi / total


def detailed_balance_residual(P, pi):
    """max |pi_x P_{x'x} - pi_{x'} P_{xx'}| over all state pairs."""
    m = _as_matrix(P)
    flow = m * pi[None, :]
    return float(np.max(np.abs(flow - flow.T)))


def reversible_spectrum(P, pi=None, tol=1e-10):
    """All eigenvalues (descending) of a reversible chain, via symmetrization.

    The similarity transform S = D^(1/2) P D^(-1/2), D = diag(pi), is
    symmetric exactly when detailed balance holds; that is checked first.
    """
    m = _as_matrix(P)
    if pi is None:
        pi = stationary_exact(m)
    if detailed_balance_residual(m, pi) > tol:
        raise NotReversible(
            f"detailed balance violated beyond {tol:.0e}; "
            "the symmetrized spectrum would be meaningless"
        )
    s = m * np.sqrt(pi[None, :] / pi[:, None])
    s = 0.5 * (s + s.T)
    return np.linalg.eigvalsh(s)[::-1]


def spectral_gap(P, pi=None):
    """Difference between the largest and second largest eigenvalues."""
    w = reversible_spectrum(P, pi)
    if len(w) < 2:
        raise ZeroGap("a single-state chain has no spectral gap")
    gap = float(w[0] - w[1])
    if gap < 1e-12:
        raise ZeroGap(f"spectral gap {gap:.2e} is numerically zero")
    return gap


def total_variation(p, q):
    """Total variation distance between two distributions."""
    return 0.5 * float(np.sum(np.abs(np.asarray(p, dtype=float) - np.asarray(q, dtype=float))))


def empirical_distribution(samples, space):
    """Histogram of sampled states over the enumerated space."""
    counts = np.zeros(space.size)
    for state, _ in samples:
        counts[space.index_of(state)] += 1.0
    if counts.sum() == 0:
        raise SchemaError("no samples to histogram")
    return counts / counts.sum()
