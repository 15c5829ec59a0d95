"""Hot numeric kernels: chained atom placement and the non-bonded pair sum.

Both kernels are written as plain scalar loops and compiled with numba's
``@njit`` when available.  Setting the environment variable
``LOOPWALK_NO_NUMBA=1`` (checked once, at import time) selects the pure-Python
fallback instead; ``benchmarks/bench_kernels.py`` times the two paths against
each other.  Kernels signal failures through return codes because raising
rich exceptions from jitted code is awkward; callers translate the codes into
the package's exception types.
"""

import math
import os

_DISABLE = os.environ.get("LOOPWALK_NO_NUMBA", "").lower() in ("1", "true", "yes")

if not _DISABLE:
    try:
        from numba import njit
    except ImportError:  # pragma: no cover - numba is a declared dependency
        _DISABLE = True

if _DISABLE:
    def _jit(func):
        return func

    BACKEND = "numpy"
else:
    def _jit(func):
        return njit(cache=True)(func)

    BACKEND = "numba"


def backend():
    """Name of the active kernel backend: ``"numba"`` or ``"numpy"``."""
    return BACKEND


# Relative collinearity tolerance: a frame is singular when
# |(b-a) x (c-b)| <= SINGULAR_TOL * r_bc.
SINGULAR_TOL = 1e-9


@_jit
def place_chain(coords, frames, dihedrals, thetas, r_bcs, r_cds, start):
    """Place a chain of atoms, one per step, into ``coords[start + s]``.

    Step ``s`` reads the already-known frame atoms ``coords[frames[s, 0..2]]``
    (a, b, c) and writes atom d built from the dihedral about b-c, the angle
    ``thetas[s]`` between the b->c direction and c->d, and the bond lengths
    ``r_bcs[s]`` (= |c - b|) and ``r_cds[s]`` (= |d - c|).

    Returns -1 on success, or the index of the first step whose frame was
    collinear within tolerance.
    """
    n_steps = frames.shape[0]
    for s in range(n_steps):
        ia = frames[s, 0]
        ib = frames[s, 1]
        ic = frames[s, 2]
        abx = coords[ib, 0] - coords[ia, 0]
        aby = coords[ib, 1] - coords[ia, 1]
        abz = coords[ib, 2] - coords[ia, 2]
        bcx = coords[ic, 0] - coords[ib, 0]
        bcy = coords[ic, 1] - coords[ib, 1]
        bcz = coords[ic, 2] - coords[ib, 2]

        # n = (b - a) x (c - b); |n| is the collinearity witness
        nx = aby * bcz - abz * bcy
        ny = abz * bcx - abx * bcz
        nz = abx * bcy - aby * bcx
        nn = math.sqrt(nx * nx + ny * ny + nz * nz)

        r_bc = r_bcs[s]
        r_cd = r_cds[s]
        if nn <= SINGULAR_TOL * r_bc:
            return s

        # frame columns: M_x = bc / r_bc, M_z = n / |n|, M_y = M_z x M_x
        mxx = bcx / r_bc
        mxy = bcy / r_bc
        mxz = bcz / r_bc
        mzx = nx / nn
        mzy = ny / nn
        mzz = nz / nn
        myx = mzy * mxz - mzz * mxy
        myy = mzz * mxx - mzx * mxz
        myz = mzx * mxy - mzy * mxx

        ct = math.cos(thetas[s])
        st = math.sin(thetas[s])
        cp = math.cos(dihedrals[s])
        sp = math.sin(dihedrals[s])
        d1 = r_cd * ct
        d2 = r_cd * cp * st
        d3 = r_cd * sp * st

        coords[start + s, 0] = mxx * d1 + myx * d2 + mzx * d3 + coords[ic, 0]
        coords[start + s, 1] = mxy * d1 + myy * d2 + mzy * d3 + coords[ic, 1]
        coords[start + s, 2] = mxz * d1 + myz * d2 + mzz * d3 + coords[ic, 2]
    return -1


@_jit
def nonbonded_sum(coords, pair_i, pair_j, eps_ij, rmin_ij, qq_ij, eps_d, floor, cutoff):
    """Sum the printed LJ + Coulomb form over a fixed-order pair list.

    ``cutoff < 0`` disables the distance cutoff.  Returns ``(energy, -1)`` on
    success or ``(0.0, k)`` where ``k`` is the first pair whose separation
    fell below ``floor``.
    """
    total = 0.0
    for k in range(pair_i.shape[0]):
        i = pair_i[k]
        j = pair_j[k]
        dx = coords[i, 0] - coords[j, 0]
        dy = coords[i, 1] - coords[j, 1]
        dz = coords[i, 2] - coords[j, 2]
        r = math.sqrt(dx * dx + dy * dy + dz * dz)
        if r < floor:
            return 0.0, k
        if cutoff >= 0.0 and r > cutoff:
            continue
        x = rmin_ij[k] / r
        x2 = x * x
        x6 = x2 * x2 * x2
        x12 = x6 * x6
        total += eps_ij[k] * (x12 - x6) + qq_ij[k] / (eps_d * r)
    return total, -1
