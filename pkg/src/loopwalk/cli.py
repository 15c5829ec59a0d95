"""Command-line entry point.

Subcommands: ``tables`` (write the five report tables), ``estimate`` (full
resource report), ``fold`` (run Metropolis-Hastings on a loop), ``refold``
(rebuild one conformation), ``walk`` (build and verify a toy quantized
walk).  Options may come from a JSON config document (``--config``) whose
keys match the long flag names with underscores; explicit flags win.
Unknown config keys are rejected before anything is written.

Exit codes: 0 success, 2 validation failure, 3 numeric failure (singular
frame, reducible chain, ...), 4 I/O failure.
"""

import argparse
import csv
import json
import math
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import forcefield, geometry, mcmc, qwalk, resources
from .errors import (
    DivergentTerm,
    IndexOutOfRange,
    InvalidGeometry,
    LengthMismatch,
    NonPowerOfTwo,
    NotReversible,
    Reducible,
    ResolutionTooCoarse,
    SchemaError,
    SingularFrame,
    StateSpaceTooLarge,
    UnknownOp,
    UnknownVariant,
    ZeroGap,
)
from .pipeline import LoopSystem

EXIT_OK = 0
EXIT_VALIDATION = 2
EXIT_NUMERIC = 3
EXIT_IO = 4

_VALIDATION_ERRORS = (
    SchemaError,
    IndexOutOfRange,
    StateSpaceTooLarge,
    NonPowerOfTwo,
    ResolutionTooCoarse,
    UnknownOp,
    UnknownVariant,
    InvalidGeometry,
    LengthMismatch,
    ValueError,
)
_NUMERIC_ERRORS = (SingularFrame, Reducible, NotReversible, ZeroGap, DivergentTerm)

_COMMON_KEYS = {"seed": int, "out": str, "format": str}
_ESTIMATOR_KEYS = {
    "L": int,
    "N": int,
    "b": int,
    "bprime": int,
    "mode": str,
    "toffoli_time": float,
    "Nc": float,
    "t_classical": float,
    "qsnerf_variant": str,
    "count_both_states": bool,
    "factories": int,
    "physical_per_logical": int,
    "qubits_per_factory": int,
}
_FOLD_KEYS = {
    "L": int,
    "b1": int,
    "b2": int,
    "t1": str,
    "t2": str,
    "ff": str,
    "flat_energy": bool,
    "temperature": float,
    "steps": int,
    "burn_in": int,
    "thin": int,
    "chains": int,
    "dump_states": bool,
}
_REFOLD_KEYS = {
    "L": int,
    "b1": int,
    "b2": int,
    "t1": str,
    "t2": str,
    "state_i1": list,
    "state_i2": list,
    "sample": bool,
    "report": bool,
}
_WALK_KEYS = {
    "L": int,
    "b": int,
    "energy": str,
    "delta": float,
    "temperature": float,
    "resolution": float,
    "initial": str,
}
_COMMAND_KEYS = {
    "tables": {**_COMMON_KEYS, **_ESTIMATOR_KEYS},
    "estimate": {**_COMMON_KEYS, **_ESTIMATOR_KEYS},
    "fold": {**_COMMON_KEYS, **_FOLD_KEYS},
    "refold": {**_COMMON_KEYS, **_REFOLD_KEYS},
    "walk": {**_COMMON_KEYS, **_WALK_KEYS},
}
_SEED_REQUIRED = {"fold", "walk"}


# ---------------------------------------------------------------------------
# Config handling


def _load_config_file(path):
    with open(path) as fh:
        try:
            doc = json.load(fh)
        except json.JSONDecodeError as exc:
            raise SchemaError(f"{path}: invalid JSON ({exc})") from None
    if not isinstance(doc, dict):
        raise SchemaError(f"{path}: config must be a JSON object")
    return doc


def _coerce(key, value, expected):
    if expected is float and isinstance(value, int) and not isinstance(value, bool):
        return float(value)
    if expected is float and isinstance(value, float):
        return value
    if not isinstance(value, expected) or (expected is int and isinstance(value, bool)):
        raise SchemaError(f"config key {key!r} must be {expected.__name__}")
    return value


def _merge_config(command, args):
    allowed = _COMMAND_KEYS[command]
    merged = {}
    if args.config is not None:
        doc = _load_config_file(args.config)
        unknown = sorted(set(doc) - set(allowed))
        if unknown:
            raise SchemaError(f"unknown config keys for {command}: {', '.join(unknown)}")
        for key, value in doc.items():
            merged[key] = _coerce(key, value, allowed[key])
    for key in allowed:
        value = getattr(args, key, None)
        if value is not None:
            merged[key] = value
    if command in _SEED_REQUIRED and "seed" not in merged:
        raise SchemaError(f"{command} is stochastic: a seed is mandatory")
    return merged


def _outdir(cfg):
    path = cfg.get("out", "loopwalk-out")
    os.makedirs(path, exist_ok=True)
    return path


def _write_json(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True)
        fh.write("\n")
    return path


def _write_rows_csv(path, rows):
    with open(path, "w", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=list(rows[0].keys()))
        writer.writeheader()
        for row in rows:
            writer.writerow({k: ("" if v is None else v) for k, v in row.items()})
    return path


# ---------------------------------------------------------------------------
# tables / estimate


def _config_echo(cfg):
    """Config as echoed into result files: the output location is not a
    parameter of the run, so reruns into different directories stay
    byte-identical."""
    return {k: v for k, v in cfg.items() if k != "out"}


def _cost_params(cfg):
    L = cfg.get("L", 10)
    return resources.CostParams(
        L=L,
        N=cfg.get("N", 20 * L),
        b=cfg.get("b", 8),
        b_prime=cfg.get("bprime", 16),
        toffoli_time=cfg.get("toffoli_time", resources.TOFFOLI_TIME_DEFAULT),
        mode=cfg.get("mode", "parallel"),
        n_classical=cfg.get("Nc", 4.0e9),
        t_classical=cfg.get("t_classical", 2.3e-4),
        qsnerf_variant=cfg.get("qsnerf_variant", "angle"),
        count_both_states=cfg.get("count_both_states", False),
        factories=cfg.get("factories", 100),
        physical_per_logical=cfg.get("physical_per_logical", 1000),
        qubits_per_factory=cfg.get("qubits_per_factory", 150000),
    )


def cmd_tables(cfg):
    params = _cost_params(cfg)
    tables = resources.emit_tables(params)
    rep = resources.report(params)
    out = _outdir(cfg)
    written = []
    if cfg.get("format", "csv") == "json":
        written.append(_write_json(os.path.join(out, "tables.json"), tables))
    else:
        for name, rows in tables.items():
            written.append(_write_rows_csv(os.path.join(out, f"{name}.csv"), rows))
    written.append(_write_json(os.path.join(out, "report.json"), rep))
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def cmd_estimate(cfg):
    params = _cost_params(cfg)
    rep = resources.report(params)
    print(json.dumps(rep, indent=2, sort_keys=True))
    out = _outdir(cfg)
    _write_json(os.path.join(out, "estimate.json"), rep)
    return EXIT_OK


# ---------------------------------------------------------------------------
# fold / refold


def _tables_from_cfg(cfg):
    has_paths = "t1" in cfg or "t2" in cfg
    if has_paths:
        if "t1" not in cfg or "t2" not in cfg:
            raise SchemaError("table files t1 and t2 must both be given")
        return geometry.load_tables(cfg["t1"], cfg["t2"])
    if "b1" in cfg and "b2" in cfg:
        return geometry.uniform_tables(cfg["b1"], cfg["b2"])
    raise SchemaError("provide table files (t1, t2) or synthetic table bits (b1, b2)")


def _require(cfg, key):
    if key not in cfg:
        raise SchemaError(f"missing required config key {key!r}")
    return cfg[key]


def _chain_seeds(seed, chains):
    children = np.random.SeedSequence(seed).spawn(chains)
    return [int(child.generate_state(1)[0]) for child in children]


def _write_trajectory(path, result):
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(["step", "energy", "accepted"])
        for step, (energy, accepted) in enumerate(zip(result.energies, result.accepted), 1):
            writer.writerow([step, repr(float(energy)), int(accepted)])
    return path


def cmd_fold(cfg):
    L = _require(cfg, "L")
    tables = _tables_from_cfg(cfg)
    flat = cfg.get("flat_energy", False)
    if flat:
        system = None
        program = geometry.RefoldProgram(L, tables)
        energy = lambda state: 0.0  # noqa: E731 - stub oracle
    else:
        params = forcefield.load_forcefield(_require(cfg, "ff"))
        system = LoopSystem.build(L, tables, params)
        program = system.program
        energy = system.energy
    chains = cfg.get("chains", 1)
    if chains < 1:
        raise SchemaError("chains must be at least 1")
    seeds = _chain_seeds(cfg["seed"], chains)
    space = mcmc.StateSpace(L=L, b1=tables.b1, b2=tables.b2)
    initial = geometry.LoopState(i1=(0,) * L, i2=(0,) * L)

    def run_one(chain_seed):
        config = mcmc.ChainConfig(
            temperature=cfg.get("temperature", 1.0),
            steps=cfg.get("steps", 1000),
            seed=chain_seed,
            burn_in=cfg.get("burn_in", 0),
            thin=cfg.get("thin", 1),
        )
        return mcmc.run_chain(space, initial, config, energy)

    if chains == 1:
        results = [run_one(seeds[0])]
    else:
        with ThreadPoolExecutor(max_workers=chains) as pool:
            futures = [pool.submit(run_one, s) for s in seeds]
            results = [f.result() for f in futures]

    out = _outdir(cfg)
    written = []
    chain_meta = []
    for i, result in enumerate(results):
        suffix = "" if chains == 1 else f"_{i:02d}"
        written.append(_write_trajectory(os.path.join(out, f"trajectory{suffix}.csv"), result))
        final = program.conformation(result.final_state)
        final_path = os.path.join(out, f"final{suffix}.xyz")
        geometry.write_xyz(final, final_path, comment=f"final state, chain {i}")
        written.append(final_path)
        if cfg.get("dump_states", False):
            samples_path = os.path.join(out, f"samples{suffix}.csv")
            with open(samples_path, "w", newline="") as fh:
                writer = csv.writer(fh)
                writer.writerow(["sample", "step", "state_hex", "energy"])
                for n, (state, e) in enumerate(result.samples):
                    step = result.config.burn_in + 1 + n * result.config.thin
                    writer.writerow([n, step, f"{space.index_of(state):x}", repr(float(e))])
            written.append(samples_path)
        chain_meta.append(
            {
                "chain": i,
                "seed": seeds[i],
                "acceptance_rate": result.acceptance_rate,
                "final_energy": result.final_energy,
                "best_energy": result.best_energy,
                "best_step": result.best_step,
                "n_samples": len(result.samples),
            }
        )

    best_chain = min(range(chains), key=lambda i: (results[i].best_energy, i))
    best = program.conformation(results[best_chain].best_state)
    best_path = os.path.join(out, "best.xyz")
    geometry.write_xyz(best, best_path, comment=f"best state, chain {best_chain}")
    written.append(best_path)

    meta = {
        "command": "fold",
        "config": _config_echo(cfg),
        "flat_energy": flat,
        "space": {"L": L, "b1": tables.b1, "b2": tables.b2, "size": space.size},
        "chains": chain_meta,
        "acceptance_rate": float(np.mean([c["acceptance_rate"] for c in chain_meta])),
        "best_chain": best_chain,
    }
    written.append(_write_json(os.path.join(out, "run.json"), meta))
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


def _state_from_cfg(cfg, L, tables):
    has_explicit = "state_i1" in cfg or "state_i2" in cfg
    if has_explicit and cfg.get("sample", False):
        raise SchemaError("give an explicit state or --sample, not both")
    if has_explicit:
        if "state_i1" not in cfg or "state_i2" not in cfg:
            raise SchemaError("state_i1 and state_i2 must both be given")
        i1, i2 = cfg["state_i1"], cfg["state_i2"]
        if len(i1) != L or len(i2) != L:
            raise SchemaError(f"state vectors must have length L={L}")
        state = geometry.LoopState(i1=tuple(i1), i2=tuple(i2))
    elif cfg.get("sample", False):
        if "seed" not in cfg:
            raise SchemaError("--sample needs a seed")
        rng = np.random.default_rng(cfg["seed"])
        state = geometry.LoopState(
            i1=tuple(int(v) for v in rng.integers(0, tables.phi_psi.shape[0], size=L)),
            i2=tuple(int(v) for v in rng.integers(0, tables.chi1.shape[0], size=L)),
        )
    else:
        state = geometry.LoopState(i1=(0,) * L, i2=(0,) * L)
    state.validate_against(tables)
    return state


def cmd_refold(cfg):
    L = _require(cfg, "L")
    tables = _tables_from_cfg(cfg)
    state = _state_from_cfg(cfg, L, tables)
    conf = geometry.refold(state, tables)
    out = _outdir(cfg)
    written = []
    xyz_path = os.path.join(out, "conformation.xyz")
    geometry.write_xyz(conf, xyz_path, comment=f"refolded loop, L={L}")
    written.append(xyz_path)
    if cfg.get("report", False):
        measured = geometry.measure_state_dihedrals(conf)
        i1 = np.array(state.i1)
        i2 = np.array(state.i2)
        expected = {
            "phi": tables.phi_psi[i1, 0],
            "psi": tables.phi_psi[i1, 1],
            "chi1": tables.chi1[i2],
            "omega": np.full(L, geometry.OMEGA),
        }
        def wrapped_error(name):
            diff = np.abs(measured[name] - expected[name])
            return np.minimum(diff, 2.0 * math.pi - diff)

        report = {
            "state": {"i1": list(state.i1), "i2": list(state.i2)},
            "measured": {k: [float(x) for x in v] for k, v in measured.items()},
            "expected": {k: [float(x) for x in v] for k, v in expected.items()},
            "max_error": float(max(np.max(wrapped_error(k)) for k in expected)),
        }
        written.append(_write_json(os.path.join(out, "dihedrals.json"), report))
    for path in written:
        print(f"wrote {path}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# walk


def _walk_energies(cfg, wspace):
    model = cfg.get("energy", "flat")
    scale = cfg.get("delta", 1.0)
    if model == "flat":
        return np.zeros(wspace.size)
    if model == "two-level":
        parity = np.array([bin(x).count("1") % 2 for x in range(wspace.size)], dtype=float)
        return scale * parity
    if model == "random":
        rng = np.random.default_rng(cfg["seed"])
        return rng.uniform(0.0, scale, size=wspace.size)
    raise SchemaError(f"unknown energy model {model!r} (flat, two-level, random)")


def cmd_walk(cfg):
    L = cfg.get("L", 1)
    b = cfg.get("b", 1)
    temperature = cfg.get("temperature", 1.0)
    wspace = qwalk.WalkSpace.from_loop(L, b)
    energies = _walk_energies(cfg, wspace)
    walk = qwalk.build_walk(wspace, energies, temperature)
    spectrum = qwalk.walk_spectrum(walk)

    resolution = cfg.get("resolution", spectrum.phase_gap_exact / 2.0)
    initial_name = cfg.get("initial", "pi")
    if initial_name == "pi":
        initial = qwalk.stationary_coherent_state(walk)
    elif initial_name == "uniform":
        initial = qwalk.uniform_coherent_state(walk)
    else:
        raise SchemaError(f"unknown initial state {initial_name!r} (pi, uniform)")
    rng = np.random.default_rng(cfg["seed"])
    qpe = qwalk.qpe_sample(walk, initial, resolution, rng)

    doc = {
        "command": "walk",
        "config": _config_echo(cfg),
        "dimensions": {"system": wspace.size, "moves": wspace.n_moves, "total": wspace.dim},
        "energies": [float(e) for e in energies],
        "spectrum": spectrum.to_dict(),
        "unitarity_defects": {
            "V": qwalk.unitarity_defect(walk.v),
            "B": qwalk.unitarity_defect(walk.b),
            "F": qwalk.unitarity_defect(walk.f),
            "R": qwalk.unitarity_defect(walk.r),
            "walk": qwalk.unitarity_defect(walk.w),
        },
        "qpe": {"initial": initial_name, **qpe.to_dict()},
    }
    out = _outdir(cfg)
    path = _write_json(os.path.join(out, "walk.json"), doc)
    print(f"wrote {path}")
    print(
        f"sigma={walk.sigma:+.12f} residual={walk.sigma_residual:.3e} "
        f"max_phase_residual={spectrum.max_residual:.3e} "
        f"qpe_success_p={qpe.success_probability:.6f}"
    )
    return EXIT_OK


# ---------------------------------------------------------------------------
# Parser


def _int_list(text):
    try:
        return [int(v) for v in text.split(",") if v != ""]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}")


def build_parser():
    parser = argparse.ArgumentParser(
        prog="loopwalk",
        description="Loop sampling in dihedral space: MCMC, quantized-walk toys, resource tables.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(sp):
        sp.add_argument("--config", help="JSON config file; explicit flags override it")
        sp.add_argument("--seed", type=int, help="RNG seed (mandatory for stochastic commands)")
        sp.add_argument("--out", help="output directory (default loopwalk-out)")
        sp.add_argument("--format", choices=["json", "csv"])

    def add_estimator(sp):
        sp.add_argument("--L", type=int, help="loop residues (default 10)")
        sp.add_argument("--N", type=int, help="total atoms (default 200)")
        sp.add_argument("--b", type=int, help="table index bits (default 8)")
        sp.add_argument("--bprime", type=int, help="coordinate precision bits (default 16)")
        sp.add_argument("--mode", choices=list(resources.MODES))
        sp.add_argument("--toffoli-time", dest="toffoli_time", type=float)
        sp.add_argument("--Nc", dest="Nc", type=float, help="classical step count (default 4e9)")
        sp.add_argument("--t-classical", dest="t_classical", type=float)
        sp.add_argument("--qsnerf-variant", dest="qsnerf_variant", choices=list(resources.QSNERF_VARIANTS))
        sp.add_argument(
            "--count-both-states", dest="count_both_states", action="store_true", default=None,
            help="price E(x) and E(x') independently inside the B operator",
        )
        sp.add_argument("--factories", type=int)
        sp.add_argument("--physical-per-logical", dest="physical_per_logical", type=int)
        sp.add_argument("--qubits-per-factory", dest="qubits_per_factory", type=int)

    sp = sub.add_parser("tables", help="write the five report tables and report.json")
    add_common(sp)
    add_estimator(sp)

    sp = sub.add_parser("estimate", help="full resource estimate as JSON")
    add_common(sp)
    add_estimator(sp)

    sp = sub.add_parser("fold", help="run Metropolis-Hastings over a loop")
    add_common(sp)
    sp.add_argument("--L", type=int, help="loop residues")
    sp.add_argument("--b1", type=int, help="synthesize a uniform (phi,psi) table with 2^b1 rows")
    sp.add_argument("--b2", type=int, help="synthesize a uniform chi1 table with 2^b2 rows")
    sp.add_argument("--t1", help="CSV file of (phi, psi) pairs")
    sp.add_argument("--t2", help="CSV file of chi1 angles")
    sp.add_argument("--ff", help="force-field JSON file")
    sp.add_argument("--flat-energy", dest="flat_energy", action="store_true", default=None,
                    help="replace the oracle by E = 0 (every move accepted)")
    sp.add_argument("--temperature", type=float)
    sp.add_argument("--steps", type=int)
    sp.add_argument("--burn-in", dest="burn_in", type=int)
    sp.add_argument("--thin", type=int)
    sp.add_argument("--chains", type=int, help="independent chains on worker threads")
    sp.add_argument("--dump-states", dest="dump_states", action="store_true", default=None)

    sp = sub.add_parser("refold", help="rebuild one conformation as XYZ")
    add_common(sp)
    sp.add_argument("--L", type=int)
    sp.add_argument("--b1", type=int)
    sp.add_argument("--b2", type=int)
    sp.add_argument("--t1")
    sp.add_argument("--t2")
    sp.add_argument("--state-i1", dest="state_i1", type=_int_list, help="comma-separated i1 per residue")
    sp.add_argument("--state-i2", dest="state_i2", type=_int_list, help="comma-separated i2 per residue")
    sp.add_argument("--sample", action="store_true", default=None, help="draw the state from the tables")
    sp.add_argument("--report", action="store_true", default=None,
                    help="also re-measure dihedrals and report the round-trip error")

    sp = sub.add_parser("walk", help="build a toy quantized walk and verify its spectrum")
    add_common(sp)
    sp.add_argument("--L", type=int, help="residues (default 1; power of two)")
    sp.add_argument("--b", type=int, help="bits per register (default 1)")
    sp.add_argument("--energy", choices=["flat", "two-level", "random"])
    sp.add_argument("--delta", type=float, help="energy scale of the two-level/random models")
    sp.add_argument("--temperature", type=float)
    sp.add_argument("--resolution", type=float, help="QPE bin width (default: half the phase gap)")
    sp.add_argument("--initial", choices=["pi", "uniform"])
    return parser


_DISPATCH = {
    "tables": cmd_tables,
    "estimate": cmd_estimate,
    "fold": cmd_fold,
    "refold": cmd_refold,
    "walk": cmd_walk,
}


def main(argv=None):
    args = build_parser().parse_args(argv)
    try:
        cfg = _merge_config(args.command, args)
        return _DISPATCH[args.command](cfg)
    except _NUMERIC_ERRORS as exc:
        step = getattr(exc, "chain_step", None)
        where = f" (chain step {step})" if step is not None else ""
        print(f"error: {exc}{where}", file=sys.stderr)
        return EXIT_NUMERIC
    except _VALIDATION_ERRORS as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
