"""Dihedral-index loop representation and Cartesian reconstruction.

A loop state is a pair of lookup-table indices per residue: ``i1`` selects a
(phi, psi) backbone pair and ``i2`` a chi1 side-chain angle.  Reconstruction
chains single-atom placements, each building the next atom from the three
previous ones, a dihedral angle, a bond angle and two bond lengths.

Conventions (fixed across the package):

* Angles are radians internally; table/parameter files use degrees.
* The placement bond angle ``theta`` is the angle between the b->c direction
  and the new c->d bond, so the first local component of d is
  ``r_cd * cos(theta)``.  This is the supplement of the chemical bond angle
  at c (conventional NeRF parameterises the latter); callers converting
  chemistry-style angles should pass ``pi - angle``.
* Dihedrals are measured in [0, 2*pi) with zero at the cis (eclipsed)
  arrangement, matching the placement convention so that a placed atom
  measures back to the dihedral it was placed with.

Atom model per residue: backbone N, CA, C plus ``side_chain_atoms`` pseudo
atoms standing in for the side-chain group (the first is placed from chi1,
further ones extend trans).  The chain starts from three anchor atoms
(CA0, C0, N1) whose coordinates are inputs, and ends with one capping
nitrogen so that the last residue's psi is realised.  Atom order:

    [CA0, C0, N1, | CA1, C1, S1.., N2, | CA2, C2, S2.., N3, | ...]

i.e. three anchor atoms followed by one block of ``3 + side_chain_atoms``
atoms per residue (the block's trailing atom is the next residue's N).
"""

import csv
import math
from dataclasses import dataclass, replace

import numpy as np

from . import _kernels
from .errors import (
    IndexOutOfRange,
    InvalidGeometry,
    LengthMismatch,
    NonPowerOfTwo,
    SchemaError,
    SingularFrame,
)

# A Vec3 is any length-3 float sequence; functions return numpy arrays.

TWO_PI = 2.0 * math.pi

# The peptide-bond dihedral, fixed for every reconstruction.
OMEGA = math.pi

T1_HEADER = ["index", "phi_deg", "psi_deg"]
T2_HEADER = ["index", "chi1_deg"]


def _is_power_of_two(n):
    return n >= 1 and (n & (n - 1)) == 0


def wrap_angle(x):
    """Reduce an angle (scalar or array) to [0, 2*pi)."""
    return np.mod(x, TWO_PI)


# ---------------------------------------------------------------------------
# Domain types


@dataclass(frozen=True)
class DihedralTables:
    """Lookup tables of backbone (phi, psi) pairs and side-chain chi1 angles.

    ``phi_psi`` has shape (2**b1, 2) and ``chi1`` shape (2**b2,), both in
    radians in [0, 2*pi).  ``phi_psi_sincos``/``chi1_sincos`` optionally hold
    precomputed (sin, cos) values and must match the angles to 1e-12.
    """

    phi_psi: np.ndarray
    chi1: np.ndarray
    phi_psi_sincos: np.ndarray | None = None
    chi1_sincos: np.ndarray | None = None

    def __post_init__(self):
        phi_psi = np.asarray(self.phi_psi, dtype=float)
        chi1 = np.asarray(self.chi1, dtype=float)
        if phi_psi.ndim != 2 or phi_psi.shape[1] != 2:
            raise SchemaError("phi_psi table must have shape (n, 2)")
        if chi1.ndim != 1:
            raise SchemaError("chi1 table must be one-dimensional")
        if not _is_power_of_two(phi_psi.shape[0]):
            raise NonPowerOfTwo(f"phi_psi table length {phi_psi.shape[0]} is not a power of two")
        if not _is_power_of_two(chi1.shape[0]):
            raise NonPowerOfTwo(f"chi1 table length {chi1.shape[0]} is not a power of two")
        for name, arr in (("phi_psi", phi_psi), ("chi1", chi1)):
            if not np.all(np.isfinite(arr)):
                raise SchemaError(f"{name} table contains non-finite angles")
            if np.any(arr < 0.0) or np.any(arr >= TWO_PI):
                raise SchemaError(f"{name} table angles must lie in [0, 2*pi)")
        object.__setattr__(self, "phi_psi", phi_psi)
        object.__setattr__(self, "chi1", chi1)
        for name, sc, angles in (
            ("phi_psi_sincos", self.phi_psi_sincos, phi_psi),
            ("chi1_sincos", self.chi1_sincos, chi1),
        ):
            if sc is None:
                continue
            sc = np.asarray(sc, dtype=float)
            if sc.shape != angles.shape + (2,):
                raise SchemaError(f"{name} must have shape {angles.shape + (2,)}")
            err = max(
                np.max(np.abs(sc[..., 0] - np.sin(angles))),
                np.max(np.abs(sc[..., 1] - np.cos(angles))),
            )
            if err > 1e-12:
                raise SchemaError(f"{name} disagrees with angles by {err:.2e} (> 1e-12)")
            object.__setattr__(self, name, sc)

    @property
    def b1(self):
        return int(self.phi_psi.shape[0]).bit_length() - 1

    @property
    def b2(self):
        return int(self.chi1.shape[0]).bit_length() - 1

    def with_sincos(self):
        """Return a copy with precomputed (sin, cos) entries."""
        return replace(
            self,
            phi_psi_sincos=np.stack([np.sin(self.phi_psi), np.cos(self.phi_psi)], axis=-1),
            chi1_sincos=np.stack([np.sin(self.chi1), np.cos(self.chi1)], axis=-1),
        )


def uniform_tables(b1, b2):
    """Synthetic evenly spaced tables, mainly for toys and tests.

    phi and chi1 sweep [0, 2*pi) on a grid; psi sweeps the same grid offset
    by half a period so the two backbone angles differ.
    """
    n1, n2 = 2**b1, 2**b2
    phi = TWO_PI * np.arange(n1) / n1
    psi = wrap_angle(phi + TWO_PI * (n1 // 2) / n1) if n1 > 1 else np.zeros(1)
    chi = TWO_PI * np.arange(n2) / n2
    return DihedralTables(phi_psi=np.column_stack([phi, psi]), chi1=chi)


@dataclass(frozen=True)
class LoopState:
    """Per-residue table indices: ``i1[r]`` into phi_psi, ``i2[r]`` into chi1."""

    i1: tuple
    i2: tuple

    def __post_init__(self):
        i1 = tuple(int(v) for v in self.i1)
        i2 = tuple(int(v) for v in self.i2)
        if len(i1) != len(i2) or len(i1) < 1:
            raise SchemaError("i1 and i2 must have equal, positive length")
        if any(v < 0 for v in i1 + i2):
            raise IndexOutOfRange("table indices must be non-negative")
        object.__setattr__(self, "i1", i1)
        object.__setattr__(self, "i2", i2)

    @property
    def L(self):
        return len(self.i1)

    def validate_against(self, tables):
        n1, n2 = tables.phi_psi.shape[0], tables.chi1.shape[0]
        for r in range(self.L):
            if self.i1[r] >= n1:
                raise IndexOutOfRange(
                    f"residue {r + 1}: i1={self.i1[r]} exceeds phi_psi table length {n1}"
                )
            if self.i2[r] >= n2:
                raise IndexOutOfRange(
                    f"residue {r + 1}: i2={self.i2[r]} exceeds chi1 table length {n2}"
                )


@dataclass(frozen=True)
class PlacementStep:
    """Fixed geometry of one placement: preceding bond, new bond, bond angle."""

    r_bc: float
    r_cd: float
    theta: float

    def __post_init__(self):
        if self.r_bc <= 0.0 or self.r_cd <= 0.0:
            raise InvalidGeometry("bond lengths must be positive")
        if not 0.0 < self.theta < math.pi:
            raise InvalidGeometry("placement angle must lie strictly inside (0, pi)")


@dataclass(frozen=True)
class BondGeometry:
    """Fixed bond lengths/angles for the five placement kinds.

    Angles are in the placement convention (supplement of the chemical bond
    angle, see module docstring).  ``side_chain_atoms`` controls how many
    pseudo atoms each residue's side-chain group carries; values above 1
    emulate heavier residues (roughly 20 atoms per residue is realistic)
    for conformation-size studies.
    """

    n_to_ca: PlacementStep
    ca_to_c: PlacementStep
    c_to_n: PlacementStep
    ca_to_side: PlacementStep
    side_ext: PlacementStep
    side_chain_atoms: int = 1

    def __post_init__(self):
        if self.side_chain_atoms < 1:
            raise InvalidGeometry("side_chain_atoms must be at least 1")

    @property
    def atoms_per_residue(self):
        return 3 + self.side_chain_atoms


def default_bond_geometry(side_chain_atoms=1):
    """Standard mean backbone bond lengths/angles (Angstrom, degrees)."""
    def step(r_bc, r_cd, chemical_deg):
        return PlacementStep(r_bc=r_bc, r_cd=r_cd, theta=math.pi - math.radians(chemical_deg))

    return BondGeometry(
        n_to_ca=step(1.329, 1.458, 121.7),   # frame ...C-N, places CA
        ca_to_c=step(1.458, 1.525, 111.2),   # frame ...N-CA, places C
        c_to_n=step(1.525, 1.329, 116.2),    # frame ...CA-C, places next N
        ca_to_side=step(1.458, 1.530, 110.5),
        side_ext=step(1.530, 1.520, 114.0),
        side_chain_atoms=side_chain_atoms,
    )


def default_anchor(geom=None):
    """Default seed coordinates (CA0, C0, N1) consistent with ``geom`` bonds."""
    if geom is None:
        geom = default_bond_geometry()
    r_cn = geom.n_to_ca.r_bc
    r_cac = geom.c_to_n.r_bc
    ang = math.pi - geom.c_to_n.theta  # chemical CA-C-N angle
    n1 = np.array([0.0, 0.0, 0.0])
    c0 = np.array([-r_cn, 0.0, 0.0])
    ca0 = c0 + r_cac * np.array([math.cos(ang), math.sin(ang), 0.0])
    return np.vstack([ca0, c0, n1])


@dataclass(frozen=True)
class Conformation:
    """Ordered Cartesian atoms with residue/role/element metadata."""

    coords: np.ndarray
    residue: tuple
    role: tuple
    element: tuple

    def __post_init__(self):
        coords = np.asarray(self.coords, dtype=float)
        if coords.ndim != 2 or coords.shape[1] != 3:
            raise SchemaError("coords must have shape (n_atoms, 3)")
        n = coords.shape[0]
        if not (len(self.residue) == len(self.role) == len(self.element) == n):
            raise LengthMismatch("metadata length does not match atom count")
        if not np.all(np.isfinite(coords)):
            raise InvalidGeometry("conformation contains non-finite coordinates")
        object.__setattr__(self, "coords", coords)
        object.__setattr__(self, "residue", tuple(int(r) for r in self.residue))
        object.__setattr__(self, "role", tuple(self.role))
        object.__setattr__(self, "element", tuple(self.element))

    @property
    def n_atoms(self):
        return self.coords.shape[0]


# ---------------------------------------------------------------------------
# Single placements


def _validate_lengths(r_bc, r_cd):
    if r_bc <= 0.0 or r_cd <= 0.0:
        raise InvalidGeometry(f"bond lengths must be positive, got r_bc={r_bc}, r_cd={r_cd}")


def place_atom(a, b, c, phi, theta, r_bc, r_cd):
    """Place atom d from frame atoms a, b, c.

    d sits at distance ``r_cd`` from c, with dihedral ``phi`` about the b-c
    axis relative to a, and angle ``theta`` between the b->c direction and
    c->d.  ``r_bc`` must equal |c - b| for the frame to be orthonormal.
    """
    _validate_lengths(r_bc, r_cd)
    coords = np.zeros((4, 3))
    coords[0] = a
    coords[1] = b
    coords[2] = c
    frames = np.array([[0, 1, 2]], dtype=np.int64)
    err = _kernels.place_chain(
        coords,
        frames,
        np.array([float(phi)]),
        np.array([float(theta)]),
        np.array([float(r_bc)]),
        np.array([float(r_cd)]),
        3,
    )
    if err >= 0:
        raise SingularFrame("frame atoms a, b, c are collinear within tolerance")
    return coords[3]


def place_atom_expanded(a, b, c, phi, theta, r_bc, r_cd):
    """Algebraically expanded placement; cross-oracle for :func:`place_atom`.

    Uses the unnormalised cross products directly:

        d = (bc/r_bc) d1 + ((ab x bc) x bc)/(r_bc*Q) d2 + (ab x bc)/Q d3 + c

    with ab = b - a, bc = c - b, Q = |ab x bc|.  Agrees with the frame-matrix
    route to ~1e-12 on well-conditioned inputs.
    """
    _validate_lengths(r_bc, r_cd)
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    ab = b - a
    bc = c - b
    cr = np.cross(ab, bc)
    q = np.linalg.norm(cr)
    if q <= _kernels.SINGULAR_TOL * r_bc:
        raise SingularFrame("frame atoms a, b, c are collinear within tolerance")
    d1 = r_cd * math.cos(theta)
    d2 = r_cd * math.cos(phi) * math.sin(theta)
    d3 = r_cd * math.sin(phi) * math.sin(theta)
    return bc * (d1 / r_bc) + np.cross(cr, bc) * (d2 / (r_bc * q)) + cr * (d3 / q) + c


def measure_dihedral(a, b, c, d):
    """Dihedral angle of the four-atom chain a-b-c-d, in [0, 2*pi).

    Zero when the four atoms are coplanar with a and d on the same side of
    the b-c axis (cis).  Symmetric under reversing the chain (a<->d, b<->c).
    """
    a = np.asarray(a, dtype=float)
    b = np.asarray(b, dtype=float)
    c = np.asarray(c, dtype=float)
    d = np.asarray(d, dtype=float)
    bc = c - b
    nbc = np.linalg.norm(bc)
    if nbc <= 0.0:
        raise SingularFrame("atoms b and c coincide")
    if np.linalg.norm(np.cross(b - a, bc)) <= _kernels.SINGULAR_TOL * nbc:
        raise SingularFrame("atoms a, b, c are collinear within tolerance")
    if np.linalg.norm(np.cross(bc, d - c)) <= _kernels.SINGULAR_TOL * nbc:
        raise SingularFrame("atoms b, c, d are collinear within tolerance")
    u = bc / nbc
    va = (a - b) - np.dot(a - b, u) * u
    vd = (d - c) - np.dot(d - c, u) * u
    ang = math.atan2(np.dot(np.cross(va, vd), u), np.dot(va, vd))
    return ang % TWO_PI


def rmsd(p, q):
    """Root mean square distance between matching atoms of two conformations."""
    pc = np.asarray(getattr(p, "coords", p), dtype=float)
    qc = np.asarray(getattr(q, "coords", q), dtype=float)
    if pc.shape != qc.shape:
        raise LengthMismatch(f"conformations differ in shape: {pc.shape} vs {qc.shape}")
    return float(np.sqrt(np.mean(np.sum((pc - qc) ** 2, axis=1))))


# ---------------------------------------------------------------------------
# Chain reconstruction


def atom_index(r, kind, side_chain_atoms=1, m=1):
    """Index of residue ``r``'s atom in the refolded order (r is 1-based).

    ``kind`` is one of "N", "CA", "C", "S"; anchors CA0/C0 are indices 0/1 and
    "N" of residue L+1 addresses the capping nitrogen.  ``m`` selects a side
    chain pseudo atom (1-based) when ``kind == "S"``.
    """
    stride = 3 + side_chain_atoms
    base = 2 + stride * (r - 1)
    if kind == "N":
        return base
    if kind == "CA":
        return base + 1
    if kind == "C":
        return base + 2
    if kind == "S":
        if not 1 <= m <= side_chain_atoms:
            raise IndexOutOfRange(f"side-chain atom {m} outside 1..{side_chain_atoms}")
        return base + 2 + m
    raise IndexOutOfRange(f"unknown atom kind {kind!r}")


class RefoldProgram:
    """Precompiled placement schedule for a fixed (L, tables, geometry).

    Separating the static schedule (frame indices, bond geometry) from the
    per-state dihedral fill makes repeated refolds during sampling cheap.
    """

    def __init__(self, L, tables, geom=None, anchor=None):
        if L < 1:
            raise SchemaError("loop length L must be at least 1")
        self.L = int(L)
        self.tables = tables
        self.geom = geom if geom is not None else default_bond_geometry()
        anchor = np.asarray(
            anchor if anchor is not None else default_anchor(self.geom), dtype=float
        )
        if anchor.shape != (3, 3):
            raise SchemaError("anchor must provide three seed atoms, shape (3, 3)")
        if not np.all(np.isfinite(anchor)):
            raise InvalidGeometry("anchor contains non-finite coordinates")
        self.anchor = anchor

        g = self.geom
        k = g.side_chain_atoms
        stride = g.atoms_per_residue
        n_steps = stride * self.L
        frames = np.zeros((n_steps, 3), dtype=np.int64)
        thetas = np.zeros(n_steps)
        r_bcs = np.zeros(n_steps)
        r_cds = np.zeros(n_steps)
        ca_slots = np.zeros(self.L, dtype=np.int64)
        c_slots = np.zeros(self.L, dtype=np.int64)
        s1_slots = np.zeros(self.L, dtype=np.int64)
        n_slots = np.zeros(self.L, dtype=np.int64)
        fixed = []  # slots whose dihedral never depends on the state

        def set_step(slot, frame, step_geom):
            frames[slot] = frame
            thetas[slot] = step_geom.theta
            r_bcs[slot] = step_geom.r_bc
            r_cds[slot] = step_geom.r_cd

        for r in range(1, self.L + 1):
            base = stride * (r - 1)
            if r == 1:
                prev_ca, prev_c = 0, 1
            else:
                prev_ca = atom_index(r - 1, "CA", k)
                prev_c = atom_index(r - 1, "C", k)
            i_n = atom_index(r, "N", k)
            i_ca = atom_index(r, "CA", k)
            i_c = atom_index(r, "C", k)

            ca_slots[r - 1] = base
            set_step(base, (prev_ca, prev_c, i_n), g.n_to_ca)
            fixed.append(base)

            c_slots[r - 1] = base + 1
            set_step(base + 1, (prev_c, i_n, i_ca), g.ca_to_c)

            s1_slots[r - 1] = base + 2
            set_step(base + 2, (prev_c, i_n, i_ca), g.ca_to_side)

            side_chain = [i_n, i_ca, atom_index(r, "S", k, 1)]
            for m in range(2, k + 1):
                slot = base + 2 + (m - 1)
                if m == 2:
                    step_geom = replace(g.side_ext, r_bc=g.ca_to_side.r_cd)
                else:
                    step_geom = replace(g.side_ext, r_bc=g.side_ext.r_cd)
                set_step(slot, tuple(side_chain[-3:]), step_geom)
                side_chain.append(atom_index(r, "S", k, m))
                fixed.append(slot)

            n_slots[r - 1] = base + 2 + k
            set_step(base + 2 + k, (i_n, i_ca, i_c), g.c_to_n)

        self._frames = frames
        self._thetas = thetas
        self._r_bcs = r_bcs
        self._r_cds = r_cds
        self._ca_slots = ca_slots
        self._c_slots = c_slots
        self._s1_slots = s1_slots
        self._n_slots = n_slots
        self._fixed_slots = np.array(fixed, dtype=np.int64)
        self.n_atoms = 3 + n_steps

    def dihedrals(self, state):
        dih = np.empty(self._frames.shape[0])
        i1 = np.fromiter(state.i1, dtype=np.int64, count=self.L)
        i2 = np.fromiter(state.i2, dtype=np.int64, count=self.L)
        dih[self._fixed_slots] = OMEGA
        dih[self._c_slots] = self.tables.phi_psi[i1, 0]
        dih[self._n_slots] = self.tables.phi_psi[i1, 1]
        dih[self._s1_slots] = self.tables.chi1[i2]
        return dih

    def coords(self, state):
        """Cartesian coordinates for ``state`` as an (n_atoms, 3) array."""
        if state.L != self.L:
            raise SchemaError(f"state has {state.L} residues, program expects {self.L}")
        state.validate_against(self.tables)
        coords = np.zeros((self.n_atoms, 3))
        coords[:3] = self.anchor
        err = _kernels.place_chain(
            coords,
            self._frames,
            self.dihedrals(state),
            self._thetas,
            self._r_bcs,
            self._r_cds,
            3,
        )
        if err >= 0:
            raise SingularFrame(
                f"collinear frame while placing atom {3 + err}", atom_index=3 + err
            )
        return coords

    def metadata(self):
        """(residue, role, element) tuples matching the atom order."""
        k = self.geom.side_chain_atoms
        residue = [0, 0, 1]
        role = ["anchor", "anchor", "backbone"]
        element = ["C", "C", "N"]
        for r in range(1, self.L + 1):
            residue += [r] * (2 + k) + [r + 1]
            role += ["backbone", "backbone"] + ["side-chain"] * k + ["backbone"]
            element += ["C", "C"] + ["C"] * k + ["N"]
        return tuple(residue), tuple(role), tuple(element)

    def conformation(self, state):
        residue, role, element = self.metadata()
        return Conformation(
            coords=self.coords(state), residue=residue, role=role, element=element
        )


def refold(state, tables, geom=None, anchor=None):
    """Rebuild the Cartesian conformation encoded by ``state``.

    Deterministic: identical inputs give bit-identical coordinates, and atoms
    of residues before the first changed residue are unaffected by the change
    (placement only ever looks backwards along the chain).
    """
    return RefoldProgram(state.L, tables, geom, anchor).conformation(state)


def measure_state_dihedrals(conf, side_chain_atoms=1):
    """Re-measure (omega, phi, psi, chi1) per residue from a refolded conformation.

    Inverse check for :func:`refold`: the returned arrays reproduce the table
    angles the conformation was built from (omega is always pi).
    """
    stride = 3 + side_chain_atoms
    if (conf.n_atoms - 3) % stride:
        raise LengthMismatch("atom count does not match the residue atom model")
    L = (conf.n_atoms - 3) // stride
    x = conf.coords
    out = {"omega": np.zeros(L), "phi": np.zeros(L), "psi": np.zeros(L), "chi1": np.zeros(L)}
    for r in range(1, L + 1):
        if r == 1:
            prev_ca, prev_c = 0, 1
        else:
            prev_ca = atom_index(r - 1, "CA", side_chain_atoms)
            prev_c = atom_index(r - 1, "C", side_chain_atoms)
        i_n = atom_index(r, "N", side_chain_atoms)
        i_ca = atom_index(r, "CA", side_chain_atoms)
        i_c = atom_index(r, "C", side_chain_atoms)
        i_s = atom_index(r, "S", side_chain_atoms, 1)
        i_n_next = atom_index(r + 1, "N", side_chain_atoms)
        out["omega"][r - 1] = measure_dihedral(x[prev_ca], x[prev_c], x[i_n], x[i_ca])
        out["phi"][r - 1] = measure_dihedral(x[prev_c], x[i_n], x[i_ca], x[i_c])
        out["chi1"][r - 1] = measure_dihedral(x[prev_c], x[i_n], x[i_ca], x[i_s])
        out["psi"][r - 1] = measure_dihedral(x[i_n], x[i_ca], x[i_c], x[i_n_next])
    return out


def backbone_bonds(L, side_chain_atoms=1):
    """Covalent bond pairs (i < j) of the refolded atom model."""
    k = side_chain_atoms
    bonds = [(0, 1), (1, 2)]  # CA0-C0, C0-N1
    for r in range(1, L + 1):
        i_n = atom_index(r, "N", k)
        i_ca = atom_index(r, "CA", k)
        i_c = atom_index(r, "C", k)
        bonds.append((i_n, i_ca))
        bonds.append((i_ca, i_c))
        prev = i_ca
        for m in range(1, k + 1):
            i_s = atom_index(r, "S", k, m)
            bonds.append((prev, i_s))
            prev = i_s
        bonds.append((i_c, atom_index(r + 1, "N", k)))
    return bonds


# ---------------------------------------------------------------------------
# File formats


def _read_table_rows(path, header):
    with open(path, newline="") as fh:
        reader = csv.reader(fh)
        try:
            first = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty table file") from None
        if [h.strip() for h in first] != header:
            raise SchemaError(f"{path}: expected header {','.join(header)}")
        rows = []
        for line_no, row in enumerate(reader):
            if not row:
                continue
            if len(row) != len(header):
                raise SchemaError(f"{path}: row {line_no} has {len(row)} fields")
            rows.append([float(v) for v in row])
    if not _is_power_of_two(len(rows)):
        raise SchemaError(f"{path}: row count {len(rows)} is not a power of two")
    for n, row in enumerate(rows):
        if int(row[0]) != n or row[0] != int(row[0]):
            raise SchemaError(f"{path}: index column must run 0..{len(rows) - 1} in order")
    return rows


def load_tables(t1_path, t2_path):
    """Load dihedral tables from the two CSV files (angles in degrees)."""
    t1 = _read_table_rows(t1_path, T1_HEADER)
    t2 = _read_table_rows(t2_path, T2_HEADER)
    phi_psi = wrap_angle(np.radians([[r[1], r[2]] for r in t1]))
    chi1 = wrap_angle(np.radians([r[1] for r in t2]))
    return DihedralTables(phi_psi=phi_psi, chi1=chi1)


def save_tables(tables, t1_path, t2_path):
    """Write dihedral tables as the CSV formats read by :func:`load_tables`."""
    with open(t1_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(T1_HEADER)
        for n, (phi, psi) in enumerate(np.degrees(tables.phi_psi)):
            writer.writerow([n, f"{phi:.17g}", f"{psi:.17g}"])
    with open(t2_path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(T2_HEADER)
        for n, chi in enumerate(np.degrees(tables.chi1)):
            writer.writerow([n, f"{chi:.17g}"])


def write_xyz(conf, path, comment="loopwalk conformation"):
    """Write a conformation in plain XYZ format (Angstrom, 6 decimals)."""
    with open(path, "w") as fh:
        fh.write(f"{conf.n_atoms}\n{comment}\n")
        for el, (x, y, z) in zip(conf.element, conf.coords):
            fh.write(f"{el} {x:.6f} {y:.6f} {z:.6f}\n")


def read_xyz(path):
    """Read an XYZ file back as (elements, coords)."""
    with open(path) as fh:
        lines = fh.read().splitlines()
    n = int(lines[0])
    elements, coords = [], []
    for line in lines[2 : 2 + n]:
        parts = line.split()
        elements.append(parts[0])
        coords.append([float(v) for v in parts[1:4]])
    return elements, np.array(coords)
