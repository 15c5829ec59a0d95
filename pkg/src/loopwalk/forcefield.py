"""CHARMM-form potential energy of a conformation.

The functional form follows the classic decomposition: harmonic bonds,
angles and impropers, a cosine dihedral series, Urey-Bradley 1-3 terms, and
a non-bonded sum of Lennard-Jones plus Coulomb,

    eps * [ (R_min/r)**12 - (R_min/r)**6 ] + q_i * q_j / (eps_d * r)

implemented exactly in this form.  Note the attractive term carries no
factor 2 here, which moves the LJ minimum to -eps/4 at r = R_min * 2**(1/6)
instead of the conventional -eps at R_min; the evaluation is deliberately
faithful to that form rather than to the textbook one.

Units are reduced: energies and temperature share one unit (k_B = 1) and
distances are Angstrom.  External JSON parameter files carry angles in
degrees; everything is radians once loaded.
"""

import itertools
import json
import math
from dataclasses import dataclass

import numpy as np

from . import _kernels, geometry
from .errors import DivergentTerm, IndexOutOfRange, SchemaError

DEFAULT_DISTANCE_FLOOR = 1e-6

_FF_KEYS = {
    "atoms",
    "dielectric",
    "bonds",
    "angles",
    "dihedrals",
    "impropers",
    "urey_bradley",
    "pair_overrides",
}


def _as_term_tuple(rows, width, name):
    out = []
    for row in rows:
        row = tuple(row)
        if len(row) != width:
            raise SchemaError(f"{name} entries must have {width} fields, got {len(row)}")
        out.append(row)
    return tuple(out)


@dataclass(frozen=True)
class ForceFieldParams:
    """Parameter set: per-atom non-bonded data plus bonded term lists.

    Term layouts (indices are 0-based atom indices):
      bonds          (i, j, k_b, b0)
      angles         (i, j, k, k_theta, theta0)        theta0 in radians
      dihedrals      (i, j, k, l, k_phi, n, delta)     delta in radians
      impropers      (i, j, k, l, k_omega, omega0)     omega0 in radians
      urey_bradley   (i, k, k_u, u0)

    ``epsilon``/``r_min``/``charge`` are per-atom arrays; pair values come
    from the standard combination rule (geometric mean for epsilon,
    arithmetic mean for R_min) unless overridden in ``pair_overrides``.
    """

    epsilon: np.ndarray
    r_min: np.ndarray
    charge: np.ndarray
    dielectric: float = 1.0
    bonds: tuple = ()
    angles: tuple = ()
    dihedrals: tuple = ()
    impropers: tuple = ()
    urey_bradley: tuple = ()
    pair_overrides: tuple = ()

    def __post_init__(self):
        for name in ("epsilon", "r_min", "charge"):
            object.__setattr__(self, name, np.asarray(getattr(self, name), dtype=float))
        n = self.epsilon.shape[0]
        if not (self.r_min.shape == self.charge.shape == (n,)):
            raise SchemaError("epsilon, r_min and charge must have equal length")
        if self.dielectric <= 0.0:
            raise SchemaError("dielectric must be positive")
        object.__setattr__(self, "bonds", _as_term_tuple(self.bonds, 4, "bonds"))
        object.__setattr__(self, "angles", _as_term_tuple(self.angles, 5, "angles"))
        object.__setattr__(self, "dihedrals", _as_term_tuple(self.dihedrals, 7, "dihedrals"))
        object.__setattr__(self, "impropers", _as_term_tuple(self.impropers, 6, "impropers"))
        object.__setattr__(self, "urey_bradley", _as_term_tuple(self.urey_bradley, 4, "urey_bradley"))
        object.__setattr__(self, "pair_overrides", _as_term_tuple(self.pair_overrides, 4, "pair_overrides"))

        def check_indices(term_name, terms, n_idx):
            for term in terms:
                for idx in term[:n_idx]:
                    if idx != int(idx) or not 0 <= int(idx) < n:
                        raise IndexOutOfRange(f"{term_name} references atom {idx} outside 0..{n - 1}")

        check_indices("bonds", self.bonds, 2)
        check_indices("angles", self.angles, 3)
        check_indices("dihedrals", self.dihedrals, 4)
        check_indices("impropers", self.impropers, 4)
        check_indices("urey_bradley", self.urey_bradley, 2)
        check_indices("pair_overrides", self.pair_overrides, 2)
        for term_name, terms, k_pos in (
            ("bonds", self.bonds, 2),
            ("angles", self.angles, 3),
            ("dihedrals", self.dihedrals, 4),
            ("impropers", self.impropers, 4),
            ("urey_bradley", self.urey_bradley, 2),
        ):
            for term in terms:
                if term[k_pos] < 0.0:
                    raise SchemaError(f"{term_name} force constants must be non-negative")
        for term in self.dihedrals:
            mult = term[5]
            if mult != int(mult) or int(mult) < 1:
                raise SchemaError("dihedral multiplicity n must be a positive integer")

    @property
    def n_atoms(self):
        return self.epsilon.shape[0]

    def pair_coefficients(self, i, j):
        """(eps_ij, rmin_ij) for one pair, override-aware."""
        a, b = (i, j) if i < j else (j, i)
        for oi, oj, eps, rmin in self.pair_overrides:
            if (int(oi), int(oj)) == (a, b):
                return float(eps), float(rmin)
        return (
            math.sqrt(self.epsilon[i] * self.epsilon[j]),
            0.5 * (self.r_min[i] + self.r_min[j]),
        )


# ---------------------------------------------------------------------------
# Term evaluation


def energy_nonbonded_pair(r_ij, eps, r_min, q_i, q_j, eps_d, floor=DEFAULT_DISTANCE_FLOOR):
    """Single non-bonded term, exactly in the printed LJ + Coulomb form."""
    if r_ij < floor:
        raise DivergentTerm(f"pair distance {r_ij} below hard floor {floor}")
    x = r_min / r_ij
    x2 = x * x
    x6 = x2 * x2 * x2
    x12 = x6 * x6
    return eps * (x12 - x6) + q_i * q_j / (eps_d * r_ij)


def _wrapped_difference(angle, ref):
    """Signed angular difference in (-pi, pi] for harmonic angle terms."""
    return (angle - ref + math.pi) % (2.0 * math.pi) - math.pi


def _bond_angle(x, i, j, k):
    u = x[i] - x[j]
    v = x[k] - x[j]
    cos_t = np.dot(u, v) / (np.linalg.norm(u) * np.linalg.norm(v))
    return math.acos(min(1.0, max(-1.0, cos_t)))


@dataclass(frozen=True)
class BondedTerms:
    """Per-group bonded energies; ``total`` is their plain sum."""

    bonds: float
    angles: float
    dihedrals: float
    impropers: float
    urey_bradley: float

    @property
    def total(self):
        return self.bonds + self.angles + self.dihedrals + self.impropers + self.urey_bradley


def bonded_terms(conf, params):
    """Evaluate the five bonded groups of the potential separately."""
    x = np.asarray(getattr(conf, "coords", conf), dtype=float)
    n = x.shape[0]

    def check(idx):
        if not 0 <= idx < n:
            raise IndexOutOfRange(f"atom index {idx} outside conformation of {n} atoms")
        return idx

    e_bond = 0.0
    for i, j, k_b, b0 in params.bonds:
        b = np.linalg.norm(x[check(int(i))] - x[check(int(j))])
        e_bond += k_b * (b - b0) ** 2
    e_angle = 0.0
    for i, j, k, k_theta, theta0 in params.angles:
        theta = _bond_angle(x, check(int(i)), check(int(j)), check(int(k)))
        e_angle += k_theta * (theta - theta0) ** 2
    e_dihedral = 0.0
    for i, j, k, l, k_phi, mult, delta in params.dihedrals:
        phi = geometry.measure_dihedral(
            x[check(int(i))], x[check(int(j))], x[check(int(k))], x[check(int(l))]
        )
        e_dihedral += k_phi * (1.0 + math.cos(int(mult) * phi - delta))
    e_improper = 0.0
    for i, j, k, l, k_omega, omega0 in params.impropers:
        omega = geometry.measure_dihedral(
            x[check(int(i))], x[check(int(j))], x[check(int(k))], x[check(int(l))]
        )
        e_improper += k_omega * _wrapped_difference(omega, omega0) ** 2
    e_ub = 0.0
    for i, k, k_u, u0 in params.urey_bradley:
        u = np.linalg.norm(x[check(int(i))] - x[check(int(k))])
        e_ub += k_u * (u - u0) ** 2
    return BondedTerms(e_bond, e_angle, e_dihedral, e_improper, e_ub)


def energy_bonded(conf, params):
    """Sum of bond, angle, dihedral, improper and Urey-Bradley terms."""
    return bonded_terms(conf, params).total


def build_pairlist(conf, params):
    """All i < j pairs minus 1-2 and 1-3 bonded exclusions, lexicographic.

    ``conf`` may be a Conformation or a plain atom count; the bond topology
    comes from ``params.bonds``.
    """
    n = conf if isinstance(conf, int) else conf.n_atoms
    adjacency = [set() for _ in range(n)]
    for i, j, *_ in params.bonds:
        adjacency[int(i)].add(int(j))
        adjacency[int(j)].add(int(i))
    excluded = set()
    for i in range(n):
        for j in adjacency[i]:
            excluded.add((min(i, j), max(i, j)))
            for k in adjacency[j]:
                if k != i:
                    excluded.add((min(i, k), max(i, k)))
    return [(i, j) for i, j in itertools.combinations(range(n), 2) if (i, j) not in excluded]


def pair_parameters(params, pairs):
    """Vectorised per-pair (eps_ij, rmin_ij, q_i*q_j) arrays for a pair list."""
    eps = np.empty(len(pairs))
    rmin = np.empty(len(pairs))
    qq = np.empty(len(pairs))
    for k, (i, j) in enumerate(pairs):
        eps[k], rmin[k] = params.pair_coefficients(i, j)
        qq[k] = params.charge[i] * params.charge[j]
    return eps, rmin, qq


def energy_nonbonded(conf, params, pairs, cutoff=None, floor=DEFAULT_DISTANCE_FLOOR, _pair_arrays=None):
    """Non-bonded sum over a pair list (fixed order, hence deterministic)."""
    x = np.asarray(getattr(conf, "coords", conf), dtype=float)
    if _pair_arrays is None:
        _pair_arrays = pair_parameters(params, pairs)
    eps, rmin, qq = _pair_arrays
    pair_i = np.fromiter((p[0] for p in pairs), dtype=np.int64, count=len(pairs))
    pair_j = np.fromiter((p[1] for p in pairs), dtype=np.int64, count=len(pairs))
    total, bad = _kernels.nonbonded_sum(
        x, pair_i, pair_j, eps, rmin, qq,
        params.dielectric, floor, -1.0 if cutoff is None else float(cutoff),
    )
    if bad >= 0:
        raise DivergentTerm(
            f"pair {pairs[bad]} separation below hard floor {floor}"
        )
    return total


def energy_total(conf, params, pairs, cutoff=None, floor=DEFAULT_DISTANCE_FLOOR):
    """Bonded plus non-bonded energy; decomposes exactly into the two parts."""
    return energy_bonded(conf, params) + energy_nonbonded(conf, params, pairs, cutoff, floor)


# ---------------------------------------------------------------------------
# Parameter files


def params_from_dict(doc):
    """Build :class:`ForceFieldParams` from a JSON-style document.

    Angles (theta0, delta, omega0) are degrees in the document.  Unknown
    keys are rejected.
    """
    if not isinstance(doc, dict):
        raise SchemaError("force-field document must be a JSON object")
    unknown = sorted(set(doc) - _FF_KEYS)
    if unknown:
        raise SchemaError(f"unknown force-field keys: {', '.join(unknown)}")
    for key in ("atoms", "dielectric"):
        if key not in doc:
            raise SchemaError(f"force-field document missing required key {key!r}")
    atoms = doc["atoms"]
    try:
        atoms = np.asarray(atoms, dtype=float)
    except (TypeError, ValueError) as exc:
        raise SchemaError(f"atoms array is malformed: {exc}") from None
    if atoms.ndim != 2 or atoms.shape[1] != 3:
        raise SchemaError("atoms must be an array of [epsilon, r_min, charge] triples")

    def rad_terms(rows, positions):
        out = []
        for row in rows:
            row = list(row)
            for pos in positions:
                row[pos] = math.radians(row[pos])
            out.append(tuple(row))
        return tuple(out)

    return ForceFieldParams(
        epsilon=atoms[:, 0],
        r_min=atoms[:, 1],
        charge=atoms[:, 2],
        dielectric=float(doc["dielectric"]),
        bonds=tuple(tuple(r) for r in doc.get("bonds", ())),
        angles=rad_terms(doc.get("angles", ()), [4]),
        dihedrals=rad_terms(doc.get("dihedrals", ()), [6]),
        impropers=rad_terms(doc.get("impropers", ()), [5]),
        urey_bradley=tuple(tuple(r) for r in doc.get("urey_bradley", ())),
        pair_overrides=tuple(tuple(r) for r in doc.get("pair_overrides", ())),
    )


def params_to_dict(params):
    """Inverse of :func:`params_from_dict` (angles back to degrees)."""
    def deg_terms(terms, positions):
        out = []
        for term in terms:
            term = list(term)
            for pos in positions:
                term[pos] = math.degrees(term[pos])
            out.append(term)
        return out

    return {
        "atoms": np.column_stack([params.epsilon, params.r_min, params.charge]).tolist(),
        "dielectric": params.dielectric,
        "bonds": [list(t) for t in params.bonds],
        "angles": deg_terms(params.angles, [4]),
        "dihedrals": deg_terms(params.dihedrals, [6]),
        "impropers": deg_terms(params.impropers, [5]),
        "urey_bradley": [list(t) for t in params.urey_bradley],
        "pair_overrides": [list(t) for t in params.pair_overrides],
    }


def load_forcefield(path):
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: invalid JSON ({exc})") from None
    return params_from_dict(doc)


def save_forcefield(params, path):
    with open(path, "w") as fh:
        json.dump(params_to_dict(params), fh, indent=2, sort_keys=True)
        fh.write("\n")


def example_loop_params(L, side_chain_atoms=1, epsilon=0.05, r_min=3.2, charge=0.08):
    """A small non-bonded-only parameter set wired to the refold atom model.

    Bond terms carry zero force constants (the geometry is rigid anyway) but
    define the covalent topology used for 1-2/1-3 exclusions.  Charges
    alternate in sign so the Coulomb part is non-trivial.
    """
    n = 3 + (3 + side_chain_atoms) * L
    bonds = tuple((i, j, 0.0, 1.5) for i, j in geometry.backbone_bonds(L, side_chain_atoms))
    charges = charge * np.where(np.arange(n) % 2 == 0, 1.0, -1.0)
    return ForceFieldParams(
        epsilon=np.full(n, epsilon),
        r_min=np.full(n, r_min),
        charge=charges,
        dielectric=1.0,
        bonds=bonds,
    )
