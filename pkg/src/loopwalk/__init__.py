"""Loop modelling in dihedral space, desk scale.

Three layers: a classical Metropolis-Hastings sampler over lookup-table
dihedral indices (with exact transition matrices and spectral gaps on toy
instances), a dense simulator of the quantized walk built from the same
chain, and a fault-tolerant cost model reproducing the reference resource
tables.  The ``loopwalk`` CLI ties them together.
"""

from . import _kernels, cli, forcefield, geometry, mcmc, pipeline, qwalk, resources
from .errors import LoopwalkError

__version__ = "0.1.0"

__all__ = [
    "LoopwalkError",
    "__version__",
    "_kernels",
    "cli",
    "forcefield",
    "geometry",
    "mcmc",
    "pipeline",
    "qwalk",
    "resources",
]
