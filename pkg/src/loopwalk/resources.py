"""Fault-tolerant cost model: Toffoli branch counts, times and qubit counts.

Counts come from leading-order formulas for reversible arithmetic on b-bit
operands, a lookup-table (QROM) primitive at k - 1 Toffolis, and closed
forms for the walk's component operators.  Branch counts are the Toffolis
on the longest path of the computational graph, i.e. wall-time lower bounds
at one Toffoli per ``toffoli_time`` seconds.

All formulas are evaluated in real arithmetic (base-2 logarithms are not
rounded) and rounded half-up to integer Toffoli counts only at the final
reporting step; times are the rounded count times ``toffoli_time``.  The
coordinate-conversion and non-bonded formulas already include their
uncomputation passes, so nothing is doubled on top of them.
"""

import math
from dataclasses import asdict, dataclass, field

from .errors import SchemaError, UnknownOp, UnknownVariant

TOFFOLI_TIME_DEFAULT = 1.7e-4  # seconds per Toffoli (one distillation factory)
SECONDS_PER_MINUTE = 60.0
SECONDS_PER_HOUR = 3600.0
SECONDS_PER_DAY = 86400.0
SECONDS_PER_YEAR = 365.25 * SECONDS_PER_DAY

# Leading-order Toffoli branch counts for b-bit arithmetic.
ARITHMETIC_OPS = {
    "ADD": lambda b: b,
    "SQR": lambda b: b * b / 2.0,
    "MUL": lambda b: 2.0 * b * b,
    "SIN": lambda b: 4.5 * b * b,
    "INVSQRT": lambda b: 18.0 * b * b,
    "REC": lambda b: 18.5 * b * b,
    "SQRT": lambda b: 20.0 * b * b,
    "ARCSIN": lambda b: 50.5 * b * b,
}

OP_EXPRESSIONS = {
    "ADD": "x + y",
    "SQR": "x^2",
    "MUL": "x * y",
    "SIN": "sin(x)",
    "INVSQRT": "1/sqrt(x)",
    "REC": "1/x",
    "SQRT": "sqrt(x)",
    "ARCSIN": "arcsin(x)",
}

QSNERF_VARIANTS = ("angle", "sincos")
MODES = ("serial", "parallel")


def round_half_up(x):
    """Round to the nearest integer, ties away from zero (positive domain)."""
    return int(math.floor(x + 0.5))


def op_cost(op, b):
    """Toffoli count of one b-bit arithmetic operation."""
    if op not in ARITHMETIC_OPS:
        raise UnknownOp(f"no cost entry for operation {op!r}")
    if b < 0:
        raise SchemaError("operand width must be non-negative")
    return round_half_up(ARITHMETIC_OPS[op](b))


def op_time(op, b, toffoli_time=TOFFOLI_TIME_DEFAULT):
    return op_cost(op, b) * toffoli_time


def qrom_cost(k):
    """Toffoli count of a length-k table lookup."""
    if k < 1:
        raise SchemaError("table length must be at least 1")
    return int(k) - 1


def qrom_time(k, toffoli_time=TOFFOLI_TIME_DEFAULT):
    return qrom_cost(k) * toffoli_time


def cost_F(L, b):
    """Conditional-shift operator: 4 L (lg L + 1) + 2 L b Toffolis."""
    if L < 1:
        raise SchemaError("L must be at least 1")
    return round_half_up(4.0 * L * (math.log2(L) + 1.0) + 2.0 * L * b)


def cost_R(L, b):
    """Zero-move reflection: 2 (lg L + b + 1) Toffolis."""
    if L < 1:
        raise SchemaError("L must be at least 1")
    return round_half_up(2.0 * (math.log2(L) + b + 1.0))


def cost_qsnerf(b_prime, variant="angle"):
    """Toffolis per coordinate placement, at b_prime-bit precision.

    The "angle" variant computes sin/cos of the dihedral in-circuit
    (91 b^2 + 13 b); "sincos" assumes the tables store sine/cosine pairs
    (77 b^2 + 13 b).
    """
    if variant not in QSNERF_VARIANTS:
        raise UnknownVariant(f"variant must be one of {QSNERF_VARIANTS}, got {variant!r}")
    if b_prime < 1:
        raise SchemaError("b_prime must be at least 1")
    lead = 91.0 if variant == "angle" else 77.0
    return round_half_up(lead * b_prime * b_prime + 13.0 * b_prime)


def cost_qsnerf_backbone(L, b_prime, variant="angle"):
    """Full dihedral-to-Cartesian pass, priced at one placement per residue."""
    if L < 1:
        raise SchemaError("L must be at least 1")
    return L * cost_qsnerf(b_prime, variant)


def cost_nonbonded_pair(b_prime):
    """Single LJ + Coulomb pair term: 52 b^2 + 7 b Toffolis."""
    if b_prime < 1:
        raise SchemaError("b_prime must be at least 1")
    return round_half_up(52.0 * b_prime * b_prime + 7.0 * b_prime)


def cost_nonbonded_total(N, b_prime, mode):
    """All-pairs non-bonded sum: serial over N(N-1)/2 pairs, or N/2 lanes."""
    if N < 2:
        raise SchemaError("need at least two atoms")
    if mode not in MODES:
        raise SchemaError(f"mode must be one of {MODES}, got {mode!r}")
    per_pair = cost_nonbonded_pair(b_prime)
    if mode == "serial":
        return per_pair * (N * (N - 1) // 2)
    return per_pair * (N - 1)


def steps_quantum(n_classical):
    """Quantum step count ceil(sqrt(2 N_c)) for N_c classical steps."""
    if n_classical < 1:
        raise SchemaError("classical step count must be at least 1")
    doubled = 2.0 * float(n_classical)
    if doubled.is_integer():
        n = int(doubled)
        root = math.isqrt(n)
        return root if root * root == n else root + 1
    return math.ceil(math.sqrt(doubled))


@dataclass(frozen=True)
class CostParams:
    """Inputs of the full estimate; defaults reproduce the reference tables."""

    L: int = 10
    N: int = 200
    b: int = 8
    b_prime: int = 16
    toffoli_time: float = TOFFOLI_TIME_DEFAULT
    mode: str = "parallel"
    n_classical: float = 4.0e9
    t_classical: float = 2.3e-4
    qsnerf_variant: str = "angle"
    count_both_states: bool = False
    factories: int = 100
    physical_per_logical: int = 1000
    qubits_per_factory: int = 150000

    def __post_init__(self):
        if self.L < 1 or self.N < 2 or self.b < 1 or self.b_prime < 1:
            raise SchemaError("need L >= 1, N >= 2, b >= 1, b_prime >= 1")
        if self.toffoli_time <= 0.0 or self.t_classical <= 0.0:
            raise SchemaError("step times must be positive")
        if self.mode not in MODES:
            raise SchemaError(f"mode must be one of {MODES}, got {self.mode!r}")
        if self.qsnerf_variant not in QSNERF_VARIANTS:
            raise UnknownVariant(f"qsnerf_variant must be one of {QSNERF_VARIANTS}")
        if self.n_classical < 1:
            raise SchemaError("n_classical must be at least 1")
        if self.factories < 0 or self.physical_per_logical < 1 or self.qubits_per_factory < 0:
            raise SchemaError("qubit accounting parameters out of range")


@dataclass(frozen=True)
class ResourceEstimate:
    """A Toffoli branch count with its wall time and additive breakdown."""

    toffoli: int
    seconds: float
    breakdown: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.breakdown and sum(self.breakdown.values()) != self.toffoli:
            raise SchemaError("breakdown does not sum to the total count")


def cost_B(params, mode=None):
    """Coin-rotation operator cost: one refold pass plus one non-bonded sum.

    Those two stages dominate the operator; the index update, table lookups,
    arcsin and the final rotation are excluded here (query them separately
    via ``qrom_cost``/``op_cost``).  ``count_both_states`` doubles the total
    to price the current and proposed configurations independently.
    """
    mode = params.mode if mode is None else mode
    factor = 2 if params.count_both_states else 1
    qsnerf = factor * cost_qsnerf_backbone(params.L, params.b_prime, params.qsnerf_variant)
    nonbonded = factor * cost_nonbonded_total(params.N, params.b_prime, mode)
    total = qsnerf + nonbonded
    return ResourceEstimate(
        toffoli=total,
        seconds=total * params.toffoli_time,
        breakdown={"qsnerf": qsnerf, "nonbonded": nonbonded},
    )


def cost_walk(params, mode=None):
    """Walk operator cost: two B applications plus F and R (V is free).

    The breakdown's "B" entry covers both applications, so entries sum to
    the total.
    """
    mode = params.mode if mode is None else mode
    b_est = cost_B(params, mode)
    f_count = cost_F(params.L, params.b)
    r_count = cost_R(params.L, params.b)
    total = 2 * b_est.toffoli + f_count + r_count
    return ResourceEstimate(
        toffoli=total,
        seconds=total * params.toffoli_time,
        breakdown={"V": 0, "B": 2 * b_est.toffoli, "F": f_count, "R": r_count},
    )


def total_runtime(params):
    """(classical seconds, {mode: quantum seconds}) for the full experiment."""
    classical = params.n_classical * params.t_classical
    steps = steps_quantum(params.n_classical)
    quantum = {mode: steps * cost_walk(params, mode).seconds for mode in MODES}
    return classical, quantum


@dataclass(frozen=True)
class QubitEstimate:
    state_space: int
    move_register: float
    coin: int
    qsnerf: int
    forcefield: int
    logical: int
    physical: int


def qubit_estimate(params, mode=None):
    """Logical/physical qubit accounting for the chosen execution mode."""
    mode = params.mode if mode is None else mode
    if mode not in MODES:
        raise SchemaError(f"mode must be one of {MODES}, got {mode!r}")
    state_space = 2 * params.L * params.b
    move_register = params.b + math.log2(params.L) + 1.0
    qsnerf = 3 * params.N * params.b_prime
    forcefield = (19 if mode == "serial" else 1900) * params.b_prime
    logical = math.ceil(state_space + move_register + 1 + qsnerf + forcefield)
    physical = logical * params.physical_per_logical + params.factories * params.qubits_per_factory
    return QubitEstimate(
        state_space=state_space,
        move_register=move_register,
        coin=1,
        qsnerf=qsnerf,
        forcefield=forcefield,
        logical=logical,
        physical=physical,
    )


def format_duration(seconds):
    """Round-trip-friendly human duration, matching the report style."""
    if seconds == 0:
        return "0 s"
    if seconds < 0.01:
        return f"{seconds:.3f} s"
    if seconds < SECONDS_PER_MINUTE:
        return f"{seconds:.2f} s"
    if seconds < SECONDS_PER_HOUR:
        return f"{seconds / SECONDS_PER_MINUTE:.1f} min"
    if seconds < SECONDS_PER_DAY:
        return f"{seconds / SECONDS_PER_HOUR:.1f} h"
    if seconds < SECONDS_PER_YEAR:
        return f"{seconds / SECONDS_PER_DAY:.1f} days"
    return f"{seconds / SECONDS_PER_YEAR:.1f} years"


# ---------------------------------------------------------------------------
# Table emission


def emit_tables(params=None):
    """All five report tables as row dictionaries, keyed table2..table6."""
    params = params if params is not None else CostParams()
    t = params.toffoli_time
    table2 = []
    for code, expr in OP_EXPRESSIONS.items():
        row = {"operation": expr, "code": code}
        for b in (16, 32):
            count = op_cost(code, b)
            row[f"toffoli_b{b}"] = count
            row[f"time_s_b{b}"] = count * t
        table2.append(row)

    table3 = [
        {"k": k, "toffoli": qrom_cost(k), "time_s": qrom_time(k, t)}
        for k in (256, 512, 1024, 8192)
    ]

    f_count = cost_F(params.L, params.b)
    r_count = cost_R(params.L, params.b)
    qsnerf_count = cost_qsnerf_backbone(params.L, params.b_prime, params.qsnerf_variant)
    table4 = [
        {"component": "state_space", "logical_qubits": 2 * params.L * params.b, "toffoli": None},
        {
            "component": "move_register",
            "logical_qubits": params.b + math.log2(params.L) + 1.0,
            "toffoli": None,
        },
        {"component": "operator_V", "logical_qubits": None, "toffoli": 0},
        {"component": "operator_F", "logical_qubits": None, "toffoli": f_count},
        {"component": "operator_R", "logical_qubits": None, "toffoli": r_count},
        {
            "component": "qsnerf",
            "logical_qubits": 3 * params.N * params.b_prime,
            "toffoli": qsnerf_count,
        },
        {
            "component": "forcefield_serial",
            "logical_qubits": 19 * params.b_prime,
            "toffoli": cost_nonbonded_total(params.N, params.b_prime, "serial"),
        },
        {
            "component": "forcefield_parallel",
            "logical_qubits": 1900 * params.b_prime,
            "toffoli": cost_nonbonded_total(params.N, params.b_prime, "parallel"),
        },
    ]

    table5 = []
    for mode in MODES:
        b_est = cost_B(params, mode)
        w_est = cost_walk(params, mode)
        f_s = f_count * t
        r_s = r_count * t
        table5.append(
            {
                "mode": mode,
                "V": "0 s",
                "B": format_duration(b_est.seconds),
                "F": format_duration(f_s),
                "R": format_duration(r_s),
                "walk": format_duration(w_est.seconds),
                "V_s": 0.0,
                "B_s": b_est.seconds,
                "F_s": f_s,
                "R_s": r_s,
                "walk_s": w_est.seconds,
                "logical_qubits": qubit_estimate(params, mode).logical,
            }
        )

    classical_s, quantum_s = total_runtime(params)
    n_q = steps_quantum(params.n_classical)
    table6 = [
        {
            "method": "classical",
            "n_steps": params.n_classical,
            "t_step_s": params.t_classical,
            "total_s": classical_s,
            "total": format_duration(classical_s),
            "logical_qubits": None,
        }
    ]
    for mode in MODES:
        w_est = cost_walk(params, mode)
        table6.append(
            {
                "method": f"quantum_{mode}",
                "n_steps": n_q,
                "t_step_s": w_est.seconds,
                "total_s": quantum_s[mode],
                "total": format_duration(quantum_s[mode]),
                "logical_qubits": qubit_estimate(params, mode).logical,
            }
        )
    return {
        "table2": table2,
        "table3": table3,
        "table4": table4,
        "table5": table5,
        "table6": table6,
    }


def report(params=None):
    """Combined machine-readable estimate for the configured mode."""
    params = params if params is not None else CostParams()
    b_est = cost_B(params)
    w_est = cost_walk(params)
    f_count = cost_F(params.L, params.b)
    r_count = cost_R(params.L, params.b)
    classical_s, quantum_s = total_runtime(params)
    qubits = qubit_estimate(params)
    return {
        "params": asdict(params),
        "per_operator": {
            "V": {"toffoli": 0, "seconds": 0.0},
            "B": {"toffoli": b_est.toffoli, "seconds": b_est.seconds},
            "F": {"toffoli": f_count, "seconds": f_count * params.toffoli_time},
            "R": {"toffoli": r_count, "seconds": r_count * params.toffoli_time},
        },
        "walk": {"toffoli": w_est.toffoli, "seconds": w_est.seconds},
        "steps": {"classical": params.n_classical, "quantum": steps_quantum(params.n_classical)},
        "totals": {
            "classical_s": classical_s,
            "quantum_s": quantum_s[params.mode],
            "classical": format_duration(classical_s),
            "quantum": format_duration(quantum_s[params.mode]),
        },
        "qubits": {"logical": qubits.logical, "physical": qubits.physical},
    }
