"""Exact dense simulation of the quantized Metropolis-Hastings walk.

The walk acts on System (packed loop states) x Move x Coin registers, basis
index ``(x * n_moves + m) * 2 + c``, and is the product R V^T B^T F B V of

  V  Hadamards on the move register (uniform move proposal),
  B  a coin rotation per (state, move) with sin(theta) = sqrt(A) from the
     Metropolis-Hastings acceptance A,
  F  the conditional shift applying the move's XOR mask when the coin is 1,
  R  a phase flip on (move, coin) = (0, 0).

With this verbatim reflection sign the stationary coherent state
|pi>|0>|0> is an exact eigenvector with eigenvalue sigma = -1, and the walk
spectrum contains sigma * exp(+-i arccos(lambda)) for every eigenvalue
lambda of the classical chain.  Spectrum reports therefore quote eigenphases
relative to sigma (the phase QPE must resolve is the gap around sigma's
phase, which this convention makes explicit); sigma itself is measured and
recorded, never assumed.
"""

import math
from dataclasses import dataclass
from functools import reduce

import numpy as np
import scipy.linalg

from .errors import (
    NonPowerOfTwo,
    ResolutionTooCoarse,
    SchemaError,
    StateSpaceTooLarge,
)
from .mcmc import (
    MoveSet,
    StateSpace,
    build_transition_matrix,
    reversible_spectrum,
    spectral_gap,
    stationary_exact,
    total_variation,
)

DEFAULT_DIM_CAP = 8192


@dataclass(frozen=True)
class WalkSpace:
    """System x Move x Coin dimensions for one walk instance."""

    system: StateSpace
    moves: MoveSet
    cap: int = DEFAULT_DIM_CAP

    def __post_init__(self):
        if self.dim > self.cap:
            raise StateSpaceTooLarge(
                f"walk dimension {self.dim} exceeds cap {self.cap}"
            )

    @property
    def size(self):
        return self.system.size

    @property
    def n_moves(self):
        return len(self.moves)

    @property
    def dim(self):
        return self.size * self.n_moves * 2

    def index(self, x, m, c):
        return (x * self.n_moves + m) * 2 + c

    @classmethod
    def from_loop(cls, L, b, cap=DEFAULT_DIM_CAP):
        """Residue-structured instance: |M| = 2 L 2**b moves on L residues."""
        space = StateSpace(L=L, b1=b, b2=b)
        return cls(system=space, moves=MoveSet.from_space(space), cap=cap)

    @classmethod
    def single_register(cls, n_bits, cap=DEFAULT_DIM_CAP):
        """Minimal instance: one n-bit register, all 2**n masks as moves."""
        space = StateSpace(L=1, b1=n_bits, b2=0)
        return cls(system=space, moves=MoveSet.single_register(n_bits), cap=cap)


def _acceptance_grid(wspace, energies, temperature):
    """A[x, m]: Metropolis-Hastings acceptance of move m out of state x."""
    energies = np.asarray(energies, dtype=float)
    if energies.shape != (wspace.size,):
        raise SchemaError(f"need one energy per state, got shape {energies.shape}")
    if temperature <= 0.0:
        raise SchemaError("temperature must be positive")
    xs = np.arange(wspace.size)
    grid = np.empty((wspace.size, wspace.n_moves))
    for m, mask in enumerate(wspace.moves.masks):
        d_energy = energies[xs ^ mask] - energies[xs]
        grid[:, m] = np.exp(-np.maximum(d_energy, 0.0) / temperature)
    return grid


def build_V(wspace):
    """Hadamard transform of the move register, identity elsewhere."""
    n_moves = wspace.n_moves
    n_qubits = n_moves.bit_length() - 1
    if n_moves != 1 << n_qubits:
        raise NonPowerOfTwo(f"move count {n_moves} is not a power of two")
    h = np.array([[1.0, 1.0], [1.0, -1.0]]) / math.sqrt(2.0)
    h_move = reduce(np.kron, [h] * n_qubits) if n_qubits else np.eye(1)
    return np.kron(np.eye(wspace.size), np.kron(h_move, np.eye(2)))


def build_B(wspace, energies, temperature):
    """Coin rotations encoding acceptance amplitudes; real orthogonal."""
    grid = _acceptance_grid(wspace, energies, temperature)
    root_a = np.sqrt(grid)
    root_r = np.sqrt(np.clip(1.0 - grid, 0.0, None))
    b = np.zeros((wspace.dim, wspace.dim))
    xs = np.arange(wspace.size)
    for m in range(wspace.n_moves):
        i0 = (xs * wspace.n_moves + m) * 2
        i1 = i0 + 1
        b[i0, i0] = root_r[:, m]
        b[i1, i0] = root_a[:, m]
        b[i0, i1] = -root_a[:, m]
        b[i1, i1] = root_r[:, m]
    return b


def build_F(wspace):
    """Conditional shift: XOR the move's mask into the system when coin = 1."""
    f = np.zeros((wspace.dim, wspace.dim))
    xs = np.arange(wspace.size)
    for m, mask in enumerate(wspace.moves.masks):
        i0 = (xs * wspace.n_moves + m) * 2
        f[i0, i0] = 1.0
        i1 = i0 + 1
        j1 = ((xs ^ mask) * wspace.n_moves + m) * 2 + 1
        f[j1, i1] = 1.0
    return f


def build_R(wspace):
    """Diagonal +-1 reflection: -1 exactly on (move, coin) = (0, 0)."""
    diag = np.ones(wspace.dim)
    xs = np.arange(wspace.size)
    diag[(xs * wspace.n_moves) * 2] = -1.0
    return np.diag(diag)


def unitarity_defect(u):
    """max |U^H U - I|."""
    u = np.asarray(u)
    return float(np.max(np.abs(u.conj().T @ u - np.eye(u.shape[0]))))


@dataclass(frozen=True)
class WalkOperators:
    """The five dense operators plus the classical data they quantize."""

    v: np.ndarray
    b: np.ndarray
    f: np.ndarray
    r: np.ndarray
    w: np.ndarray
    space: WalkSpace
    energies: np.ndarray
    temperature: float
    transition: object          # mcmc.TransitionMatrix of the same instance
    stationary: np.ndarray
    delta: float
    sigma: float                # measured eigenvalue of W on |pi>|0>|0>
    sigma_residual: float


def _coherent_zero(wspace, amplitudes):
    v = np.zeros(wspace.dim)
    v.reshape(wspace.size, wspace.n_moves, 2)[:, 0, 0] = amplitudes
    return v


def stationary_coherent_state(walk):
    """|pi>|0>|0>: sqrt of the stationary law in the coin/move-zero slice."""
    return _coherent_zero(walk.space, np.sqrt(walk.stationary))


def uniform_coherent_state(walk):
    """Uniform superposition over system states, move and coin zero."""
    return _coherent_zero(walk.space, 1.0 / math.sqrt(walk.space.size))


def build_walk(wspace, energies, temperature):
    """Assemble W = R V^T B^T F B V and measure its stationary eigenvalue."""
    energies = np.asarray(energies, dtype=float)
    transition = build_transition_matrix(
        wspace.system, energies, temperature, moves=wspace.moves, cap=wspace.size
    )
    pi = stationary_exact(transition)
    delta = spectral_gap(transition, pi)
    v = build_V(wspace)
    b = build_B(wspace, energies, temperature)
    f = build_F(wspace)
    r = build_R(wspace)
    w = r @ v.T @ b.T @ f @ b @ v
    coherent = _coherent_zero(wspace, np.sqrt(pi))
    image = w @ coherent
    sigma = float(coherent @ image)
    residual = float(np.linalg.norm(image - sigma * coherent))
    return WalkOperators(
        v=v, b=b, f=f, r=r, w=w,
        space=wspace, energies=energies, temperature=temperature,
        transition=transition, stationary=pi, delta=delta,
        sigma=sigma, sigma_residual=residual,
    )


def phase_gap(delta):
    """(arccos(1 - delta), sqrt(2 delta)): exact phase gap and its expansion."""
    if not 0.0 < delta <= 1.0:
        raise SchemaError(f"spectral gap must lie in (0, 1], got {delta}")
    return math.acos(1.0 - delta), math.sqrt(2.0 * delta)


def _wrap_phase(x):
    return (np.asarray(x) + math.pi) % (2.0 * math.pi) - math.pi


@dataclass(frozen=True)
class PhaseMatch:
    classical_eigenvalue: float
    target_phase: float      # +-arccos(lambda), relative to sigma's phase
    matched_phase: float     # arg(w / sigma) of the paired walk eigenvalue
    residual: float          # |w - sigma * exp(i * target_phase)|


@dataclass(frozen=True)
class WalkSpectrum:
    classical: np.ndarray
    walk_eigenvalues: np.ndarray
    sigma: float
    sigma_residual: float
    matches: tuple
    max_residual: float
    delta: float
    phase_gap_exact: float
    phase_gap_approx: float

    def to_dict(self):
        return {
            "classical_eigenvalues": [float(x) for x in self.classical],
            "walk_eigenvalues": [[float(z.real), float(z.imag)] for z in self.walk_eigenvalues],
            "sigma": self.sigma,
            "sigma_residual": self.sigma_residual,
            "matches": [
                {
                    "classical_eigenvalue": m.classical_eigenvalue,
                    "target_phase": m.target_phase,
                    "matched_phase": m.matched_phase,
                    "residual": m.residual,
                }
                for m in self.matches
            ],
            "max_residual": self.max_residual,
            "spectral_gap": self.delta,
            "phase_gap_exact": self.phase_gap_exact,
            "phase_gap_sqrt_approx": self.phase_gap_approx,
        }


def match_eigenphases(classical, walk_eigenvalues, sigma, endpoint_snap=1e-12):
    """Pair sigma * exp(+-i arccos(lambda)) targets with walk eigenvalues.

    Greedy nearest-neighbour in the complex plane, consuming each walk
    eigenvalue at most once; residuals are |matched - target|.  Classical
    eigenvalues within ``endpoint_snap`` of +-1 are treated as exactly +-1:
    arccos amplifies O(eps) float noise there to O(sqrt(eps)) ~ 1e-8, which
    would swamp the matching tolerance, and the Perron eigenvalue of a
    stochastic matrix is exactly one anyway.
    """
    walk_eigenvalues = np.asarray(walk_eigenvalues, dtype=complex)
    used = np.zeros(len(walk_eigenvalues), dtype=bool)
    sigma_c = complex(sigma)
    matches = []
    for lam in classical:
        lam_c = min(1.0, max(-1.0, float(lam)))
        if 1.0 - lam_c < endpoint_snap:
            theta = 0.0
        elif lam_c + 1.0 < endpoint_snap:
            theta = math.pi
        else:
            theta = math.acos(lam_c)
        branches = [theta] if theta == 0.0 or theta == math.pi else [theta, -theta]
        for phase in branches:
            target = sigma_c * complex(math.cos(phase), math.sin(phase))
            dist = np.abs(walk_eigenvalues - target)
            dist[used] = np.inf
            pick = int(np.argmin(dist))
            used[pick] = True
            matched = walk_eigenvalues[pick]
            matches.append(
                PhaseMatch(
                    classical_eigenvalue=float(lam),
                    target_phase=phase,
                    matched_phase=float(np.angle(matched / sigma_c)),
                    residual=float(abs(matched - target)),
                )
            )
    return tuple(matches)


def walk_spectrum(walk):
    """Verify the walk spectrum against the classical chain's eigenvalues."""
    classical = reversible_spectrum(walk.transition, walk.stationary)
    walk_evals = np.linalg.eigvals(walk.w)
    matches = match_eigenphases(classical, walk_evals, walk.sigma)
    exact, approx = phase_gap(min(walk.delta, 1.0))
    return WalkSpectrum(
        classical=classical,
        walk_eigenvalues=walk_evals,
        sigma=walk.sigma,
        sigma_residual=walk.sigma_residual,
        matches=matches,
        max_residual=max(m.residual for m in matches),
        delta=walk.delta,
        phase_gap_exact=exact,
        phase_gap_approx=approx,
    )


@dataclass(frozen=True)
class QPESample:
    success: bool
    sample: int | None
    success_probability: float
    system_distribution: np.ndarray | None
    tv_to_stationary: float | None
    bin_dimension: int
    resolution: float

    def to_dict(self):
        return {
            "success": self.success,
            "sample": self.sample,
            "success_probability": self.success_probability,
            "system_distribution": None
            if self.system_distribution is None
            else [float(p) for p in self.system_distribution],
            "tv_to_stationary": self.tv_to_stationary,
            "bin_dimension": self.bin_dimension,
            "resolution": self.resolution,
        }


def qpe_sample(walk, initial, resolution, rng):
    """Ideal phase estimation by spectral projection onto sigma's phase bin.

    Eigenphases within ``resolution / 2`` of sigma's phase form the success
    bin; projecting the initial state onto it succeeds with probability equal
    to the squared overlap.  On success the system-register distribution of
    the projected state is sampled and its total-variation distance to the
    stationary law reported.
    """
    initial = np.asarray(initial, dtype=complex)
    if initial.shape != (walk.space.dim,):
        raise SchemaError(f"initial state must have dimension {walk.space.dim}")
    norm = np.linalg.norm(initial)
    if abs(norm - 1.0) > 1e-9:
        raise SchemaError(f"initial state norm {norm} is not 1")
    gap, _ = phase_gap(min(walk.delta, 1.0))
    if resolution <= 0.0:
        raise SchemaError("resolution must be positive")
    if resolution >= gap:
        raise ResolutionTooCoarse(
            f"bin width {resolution} does not resolve phase gap {gap}"
        )

    t, z = scipy.linalg.schur(walk.w.astype(complex), output="complex")
    phases = np.angle(np.diag(t))
    sigma_phase = np.angle(complex(walk.sigma))
    mask = np.abs(_wrap_phase(phases - sigma_phase)) <= resolution / 2.0
    basis = z[:, mask]
    amps = basis.conj().T @ initial
    p_success = float(np.real(np.vdot(amps, amps)))

    success = bool(rng.random() < p_success)
    sample = None
    distribution = None
    tv = None
    if success:
        projected = basis @ amps
        probs = np.abs(projected.reshape(walk.space.size, -1)) ** 2
        distribution = probs.sum(axis=1)
        distribution = distribution / distribution.sum()
        sample = int(rng.choice(walk.space.size, p=distribution))
        tv = total_variation(distribution, walk.stationary)
    return QPESample(
        success=success,
        sample=sample,
        success_probability=p_success,
        system_distribution=distribution,
        tv_to_stationary=tv,
        bin_dimension=int(np.sum(mask)),
        resolution=float(resolution),
    )
