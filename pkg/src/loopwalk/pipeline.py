"""Composition of refolding and energy evaluation into an MCMC oracle."""

from dataclasses import dataclass, field

import numpy as np

from . import forcefield, geometry
from .errors import SchemaError
from .mcmc import StateSpace


@dataclass
class LoopSystem:
    """A loop plus its tables, geometry and force field, ready to sample.

    Precomputes the placement schedule and per-pair parameter arrays once so
    that ``energy`` costs one refold kernel call and one pair-sum kernel call
    per state.
    """

    tables: geometry.DihedralTables
    params: forcefield.ForceFieldParams
    program: geometry.RefoldProgram
    pairs: list
    cutoff: float | None = None
    _pair_arrays: tuple = field(repr=False, default=None)

    @classmethod
    def build(cls, L, tables, params=None, geom=None, anchor=None, cutoff=None):
        geom = geom if geom is not None else geometry.default_bond_geometry()
        program = geometry.RefoldProgram(L, tables, geom, anchor)
        if params is None:
            params = forcefield.example_loop_params(L, geom.side_chain_atoms)
        if params.n_atoms != program.n_atoms:
            raise SchemaError(
                f"force field covers {params.n_atoms} atoms, "
                f"the refolded loop has {program.n_atoms}"
            )
        pairs = forcefield.build_pairlist(program.n_atoms, params)
        system = cls(tables=tables, params=params, program=program, pairs=pairs, cutoff=cutoff)
        system._pair_arrays = forcefield.pair_parameters(params, pairs)
        return system

    @property
    def L(self):
        return self.program.L

    def space(self):
        return StateSpace(L=self.L, b1=self.tables.b1, b2=self.tables.b2)

    def refold(self, state):
        return self.program.conformation(state)

    def energy(self, state):
        coords = self.program.coords(state)
        bonded = forcefield.energy_bonded(coords, self.params)
        nonbonded = forcefield.energy_nonbonded(
            coords, self.params, self.pairs, self.cutoff, _pair_arrays=self._pair_arrays
        )
        return bonded + nonbonded

    def state_energies(self, space=None):
        """Energy of every enumerable state, in enumeration order."""
        space = space if space is not None else self.space()
        return np.array([self.energy(s) for s in space.states()])
