"""Exception types shared across the package."""


class LoopwalkError(Exception):
    """Base class for all loopwalk errors."""


class SingularFrame(LoopwalkError):
    """Three frame atoms are (numerically) collinear, so no placement frame exists.

    ``atom_index`` is set when the failure occurred inside a chain refold and
    identifies the atom that could not be placed.
    """

    def __init__(self, message, atom_index=None):
        super().__init__(message)
        self.atom_index = atom_index


class InvalidGeometry(LoopwalkError):
    """Non-positive bond length or otherwise unusable geometric input."""


class LengthMismatch(LoopwalkError):
    """Two conformations with different atom counts were compared."""


class IndexOutOfRange(LoopwalkError):
    """An atom, residue or table index points outside its container."""


class DivergentTerm(LoopwalkError):
    """A non-bonded pair distance fell below the hard floor."""


class StateSpaceTooLarge(LoopwalkError):
    """Enumerating the state space would exceed the configured cap."""


class Reducible(LoopwalkError):
    """The transition matrix is not irreducible."""


class NotReversible(LoopwalkError):
    """The transition matrix violates detailed balance for its stationary law."""


class ZeroGap(LoopwalkError):
    """The spectral gap is numerically zero."""


class NonPowerOfTwo(LoopwalkError):
    """A register dimension that must be a power of two is not."""


class ResolutionTooCoarse(LoopwalkError):
    """The phase-estimation bin width does not resolve the phase gap."""


class UnknownOp(LoopwalkError):
    """An arithmetic operation missing from the cost table was requested."""


class UnknownVariant(LoopwalkError):
    """An unrecognised cost-model variant name."""


class SchemaError(LoopwalkError):
    """A configuration or parameter document violates its schema."""
