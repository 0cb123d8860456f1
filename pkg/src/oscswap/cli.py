"""Batch front-end.

    oscswap run CONFIG [--with-oracle] [--parallel] [--seed S] [--output DIR]
    oscswap validate CONFIG

A config is a JSON object holding one task, or ``{"tasks": [...]}``. Task
fields: ``task`` (overlap, purity, fidelity, witness, power_trace, moments,
spectrum, hs_distance, compile), ``N``, ``k``, ``n_max``, ``shots``
("exact" or an integer), ``seed``, ``states`` (state specs, see
:mod:`oscswap.io`), ``d`` (spectrum), ``matrix`` ("dft" or rows, compile),
``name``, ``histogram``, ``circuit``.

Exit statuses: 0 ok, 2 config/parse error, 3 dimension or cutoff error,
4 numerical diagnostic failure.
"""

from __future__ import annotations

import argparse
import csv
import json
import math
import sys
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from . import analysis, swap
from .errors import ConfigError, DimensionError, OscswapError
from .estimator import combine_inputs, estimate_pipeline
from .fock import CutoffConfig, embed, enumerate_basis
from .interferometer import check_unitary, dft_matrix, reck_decompose, reck_reconstruct
from .io import dumps, estimate_record, parse_complex, spec_shape, state_from_spec, write_circuit

TASKS = ("overlap", "purity", "fidelity", "witness", "power_trace", "moments", "spectrum", "hs_distance", "compile")
ARITY = {"overlap": 2, "purity": 1, "fidelity": 2, "power_trace": 1, "spectrum": 1, "hs_distance": 2, "compile": 0}


@dataclass
class ExperimentConfig:
    task: str
    N: int = 2
    k: int = 1
    n_max: int | None = None
    shots: int | str = "exact"
    seed: int = 0
    states: list = field(default_factory=list)
    d: int | None = None
    matrix: object = None
    name: str | None = None
    histogram: bool = False
    circuit: str | None = None

    @property
    def exact(self) -> bool:
        return self.shots == "exact"

    @property
    def label(self) -> str:
        return self.name or self.task


def _int_field(raw, key, default, minimum):
    val = raw.get(key, default)
    if val is None:
        return None
    if isinstance(val, bool) or not isinstance(val, int):
        raise ConfigError(f"'{key}' must be an integer, got {val!r}")
    if val < minimum:
        raise ConfigError(f"'{key}' must be >= {minimum}, got {val}")
    return val


def parse_task(raw: dict, seed_override: int | None = None) -> ExperimentConfig:
    if not isinstance(raw, dict):
        raise ConfigError("each task must be a JSON object")
    task = raw.get("task")
    if task not in TASKS:
        raise ConfigError(f"unknown task {task!r}; expected one of {', '.join(TASKS)}")
    known = set(ExperimentConfig.__dataclass_fields__)
    extra = set(raw) - known
    if extra:
        raise ConfigError(f"unknown task field(s): {', '.join(sorted(extra))}")
    shots = raw.get("shots", "exact")
    if shots != "exact" and (isinstance(shots, bool) or not isinstance(shots, int) or shots < 1):
        raise ConfigError(f"'shots' must be \"exact\" or a positive integer, got {shots!r}")
    states = raw.get("states", [])
    if not isinstance(states, list):
        raise ConfigError("'states' must be a list")
    cfg = ExperimentConfig(
        task=task,
        N=_int_field(raw, "N", 2, 2),
        k=_int_field(raw, "k", 1, 1),
        n_max=_int_field(raw, "n_max", None, 0),
        shots=shots,
        seed=seed_override if seed_override is not None else _int_field(raw, "seed", 0, 0),
        states=states,
        d=_int_field(raw, "d", None, 2),
        matrix=raw.get("matrix"),
        name=raw.get("name"),
        histogram=bool(raw.get("histogram", False)),
        circuit=raw.get("circuit"),
    )
    want = ARITY.get(task)
    if want is not None and len(states) != want:
        raise ConfigError(f"task {task!r} needs exactly {want} state(s), got {len(states)}")
    if task == "witness" and len(states) not in (1, 2):
        raise ConfigError("task 'witness' needs one joint state or two single-oscillator states")
    if task == "moments" and len(states) not in (1, cfg.N):
        raise ConfigError(f"task 'moments' needs one joint state or N={cfg.N} states")
    if task == "compile" and cfg.matrix is None:
        raise ConfigError("task 'compile' needs 'matrix' (\"dft\" or a list of rows)")
    return cfg


def load_config(path, seed_override=None) -> tuple[list[ExperimentConfig], dict]:
    try:
        with open(path) as fh:
            doc = json.load(fh)
    except FileNotFoundError:
        raise ConfigError(f"config file not found: {path}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config {path} is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("config must be a JSON object")
    raw_tasks = doc["tasks"] if "tasks" in doc else [doc]
    if "tasks" in doc:
        meta = {k: v for k, v in doc.items() if k != "tasks"}
    else:
        meta = {k: doc.pop(k) for k in ("output",) if k in doc}
    return [parse_task(t, seed_override) for t in raw_tasks], meta


# ---------------------------------------------------------------- running


def _child_seeds(seed, n):
    return [int(s.generate_state(1)[0]) for s in np.random.SeedSequence(seed).spawn(n)]


def _pipeline(cfg: ExperimentConfig, inputs, N, k=1, seed=None):
    joint = combine_inputs(inputs)
    if cfg.n_max is not None:
        joint = embed(joint, cfg.n_max)
    return estimate_pipeline(joint, N, k, shots=cfg.shots, seed=None if cfg.exact else seed, histogram=cfg.histogram)


def _tol(est):
    return swap.WITNESS_TOL if est.method == "exact" else 3 * est.stderr_real


def _attach_oracle(rec, oracle, with_oracle):
    if with_oracle:
        rec["oracle"] = complex(oracle)
        rec["residual"] = abs(complex(rec["value"]) - complex(oracle))


def run_task(cfg: ExperimentConfig, base_dir: Path, out_dir: Path, with_oracle: bool = False) -> dict:
    if cfg.task == "compile":
        return _run_compile(cfg, out_dir, with_oracle)
    states = [state_from_spec(s, base_dir) for s in cfg.states]
    rec = {"task": cfg.task, "name": cfg.name}
    t = cfg.task
    if t in ("overlap", "purity", "fidelity", "witness", "power_trace", "moments"):
        if t == "purity":
            inputs, N, k = [states[0], states[0]], 2, 1
        elif t == "power_trace":
            inputs, N, k = [states[0]] * cfg.N, cfg.N, 1
        elif t == "moments":
            inputs, N, k = states, cfg.N, cfg.k
        else:
            inputs, N, k = states, 2, 1
        if t == "fidelity" and not states[0].is_pure:
            raise ConfigError("fidelity needs a pure first state")
        est = _pipeline(cfg, inputs, N, k, cfg.seed)
        rec.update(estimate_record(est, cfg.histogram))
        if t == "witness":
            verdict = swap.classify_witness(est.value.real, _tol(est))
            rec["verdict"] = verdict.verdict.value
            rec["tol"] = verdict.tol
        if t == "moments" and N > 2 and len(states) == N and not cfg.exact:
            if all(s is states[0] for s in states) and abs(est.value.imag) > 5 * est.stderr_imag:
                rec["anomalous_imaginary"] = True
        if with_oracle:
            if t == "overlap":
                oracle = swap.overlap(states[0], states[1])
            elif t == "purity":
                oracle = swap.purity(states[0])
            elif t == "fidelity":
                oracle = swap.fidelity_pure(states[0], states[1])
            elif t == "power_trace":
                oracle = swap.power_trace(states[0], N)
            else:
                joint = combine_inputs(inputs)
                if cfg.n_max is not None:
                    joint = embed(joint, cfg.n_max)
                oracle = swap.swap_expectation(joint, N, k, slot_modes=joint.mode_count // N)
            _attach_oracle(rec, oracle, True)
        return rec
    if t == "hs_distance":
        a, b = states
        seeds = _child_seeds(cfg.seed, 3)
        parts = [
            _pipeline(cfg, [a, a], 2, 1, seeds[0]),
            _pipeline(cfg, [b, b], 2, 1, seeds[1]),
            _pipeline(cfg, [a, b], 2, 1, seeds[2]),
        ]
        value = parts[0].value.real + parts[1].value.real - 2 * parts[2].value.real
        err = math.sqrt(parts[0].stderr_real ** 2 + parts[1].stderr_real ** 2 + 4 * parts[2].stderr_real ** 2)
        rec.update({
            "method": parts[0].method, "shots": cfg.shots, "N": 2, "k": 1, "seed": cfg.seed,
            "value": complex(value), "stderr": [err, 0.0],
            "estimates": [estimate_record(p, cfg.histogram) for p in parts],
        })
        _attach_oracle(rec, swap.hs_distance(a, b), with_oracle)
        return rec
    if t == "spectrum":
        rho = states[0]
        d = cfg.d if cfg.d is not None else rho.dim
        spec, ests = analysis.spectrum_via_pipeline(rho, d, shots=cfg.shots, seed=cfg.seed)
        p = [e.value.real for e in ests]
        rec.update({
            "method": ests[0].method if ests else "exact", "shots": cfg.shots, "seed": cfg.seed, "d": d,
            "spectrum": list(spec.eigenvalues), "fit_residual": spec.residual,
            "power_traces": p,
            "entropy": analysis.functional_trace(spec, "von_neumann_entropy"),
            "estimates": [estimate_record(e, cfg.histogram) for e in ests],
        })
        if not cfg.exact:
            rec["spectrum_sigma"] = list(analysis.resample_spectrum_sigma(p, [e.stderr_real for e in ests], d, seed=cfg.seed))
        if with_oracle:
            lam = np.sort(np.linalg.eigvalsh(rho.density_matrix()))[::-1][:d]
            rec["oracle_spectrum"] = list(lam)
            rec["residual"] = float(np.max(np.abs(lam - np.array(spec.eigenvalues))))
        return rec
    raise ConfigError(f"unhandled task {t!r}")


def _run_compile(cfg: ExperimentConfig, out_dir: Path, with_oracle: bool) -> dict:
    if cfg.matrix == "dft":
        u = dft_matrix(cfg.N)
    elif isinstance(cfg.matrix, list):
        try:
            u = np.array([[parse_complex(x) for x in row] for row in cfg.matrix], dtype=complex)
        except TypeError:
            raise ConfigError("'matrix' must be \"dft\" or a list of rows") from None
        u = check_unitary(u)
    else:
        raise ConfigError("'matrix' must be \"dft\" or a list of rows")
    plan = reck_decompose(u)
    circuit = cfg.circuit or f"{cfg.label}.circuit.json"
    write_circuit(plan, out_dir / circuit)
    rec = {
        "task": "compile", "name": cfg.name, "N": int(u.shape[0]), "circuit": circuit,
        "rotations": len(plan.rotations), "elements": len(plan.elements),
        "mixing_angles": [r.angle for r in plan.rotations],
    }
    if with_oracle:
        rec["residual"] = float(np.max(np.abs(reck_reconstruct(plan) - u)))
    return rec


def _run_one(args):
    cfg, base_dir, out_dir, with_oracle = args
    return run_task(cfg, base_dir, out_dir, with_oracle)


def _record_sigma(rec) -> float:
    if "stderr" in rec:
        return rec["stderr"][0]
    return max(rec.get("spectrum_sigma", [float("nan")]))


def run(config_path, with_oracle=False, parallel=False, seed=None, output=None) -> list[dict]:
    tasks, meta = load_config(config_path, seed)
    base_dir = Path(config_path).resolve().parent
    out_dir = Path(output) if output else Path(meta.get("output_dir", "."))
    out_dir.mkdir(parents=True, exist_ok=True)
    jobs = [(t, base_dir, out_dir, with_oracle) for t in tasks]
    if parallel and len(jobs) > 1:
        with ProcessPoolExecutor() as pool:
            records = list(pool.map(_run_one, jobs))
    else:
        records = [_run_one(j) for j in jobs]
    results = out_dir / meta.get("output", "results.jsonl")
    with open(results, "w") as fh:
        for rec in records:
            fh.write(dumps(rec) + "\n")
    if with_oracle:
        sampled = [(i, r) for i, r in enumerate(records) if r.get("method") == "sampled" and "residual" in r]
        if sampled:
            with open(out_dir / "convergence.csv", "w", newline="") as fh:
                w = csv.writer(fh)
                w.writerow(["task_index", "name", "task", "shots", "seed", "abs_error", "stderr_real"])
                for i, r in sampled:
                    w.writerow([i, r.get("name") or "", r["task"], r["shots"], r["seed"],
                                format(r["residual"], ".17g"), format(_record_sigma(r), ".17g")])
    return records


# ---------------------------------------------------------------- validate


def _pipeline_space(cfg: ExperimentConfig, base_dir: Path) -> tuple[int, int]:
    shapes = [spec_shape(s, base_dir) for s in cfg.states]
    t = cfg.task
    if t == "compile":
        n = cfg.N if cfg.matrix == "dft" else len(cfg.matrix)
        return n, 1
    if t == "purity":
        shapes = shapes * 2
    elif t == "power_trace":
        shapes = shapes * cfg.N
    elif t == "spectrum":
        d = cfg.d or math.comb(shapes[0][1] + shapes[0][0], shapes[0][0])
        shapes = shapes * d
    elif t == "hs_distance":
        shapes = [shapes[0], shapes[0]] if shapes[0][1] >= shapes[1][1] else [shapes[1], shapes[1]]
    modes = sum(m for m, _ in shapes)
    n_max = cfg.n_max if cfg.n_max is not None else sum(n for _, n in shapes)
    return modes, n_max


def validate(config_path) -> list[dict]:
    tasks, _ = load_config(config_path)
    base_dir = Path(config_path).resolve().parent
    report = []
    for cfg in tasks:
        modes, n_max = _pipeline_space(cfg, base_dir)
        if cfg.task == "compile":
            report.append({"task": "compile", "name": cfg.name, "N": modes, "matrix_entries": modes * modes})
            continue
        N = {"purity": 2, "fidelity": 2, "overlap": 2, "witness": 2, "hs_distance": 2}.get(cfg.task, cfg.N)
        if cfg.task == "spectrum":
            # the largest pipeline runs d copies
            N = modes // spec_shape(cfg.states[0], base_dir)[0]
        if cfg.task != "spectrum" and modes % N:
            raise DimensionError(f"{modes} modes cannot be split into {N} slots")
        sectors = [len(s) for s in enumerate_basis(CutoffConfig(n_max, modes))]
        dim = sum(sectors)
        report.append({
            "task": cfg.task, "name": cfg.name, "N": N, "k": cfg.k, "mode_count": modes, "n_max": n_max,
            "sector_sizes": sectors, "basis_size": dim, "density_matrix_bytes": 16 * dim * dim,
        })
    return report


# ---------------------------------------------------------------- entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="oscswap", description="Interferometric swap-operator estimation.")
    sub = parser.add_subparsers(dest="command", required=True)
    p_run = sub.add_parser("run", help="run every task in a config file")
    p_run.add_argument("config")
    p_run.add_argument("--with-oracle", action="store_true", help="also compute brute-force values and residuals")
    p_run.add_argument("--parallel", action="store_true", help="run tasks in parallel processes")
    p_run.add_argument("--seed", type=int, default=None, help="override every task seed")
    p_run.add_argument("--output", default=None, help="output directory (default: current directory)")
    p_val = sub.add_parser("validate", help="dry run: report basis sizes without computing")
    p_val.add_argument("config")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        if args.command == "run":
            records = run(args.config, args.with_oracle, args.parallel, args.seed, args.output)
            for rec in records:
                print(dumps({k: rec[k] for k in ("task", "name", "value", "verdict", "residual") if k in rec}))
        else:
            for rec in validate(args.config):
                print(dumps(rec))
    except OscswapError as exc:
        print(f"oscswap: {exc}", file=sys.stderr)
        return exc.exit_status
    except ValueError as exc:
        print(f"oscswap: {exc}", file=sys.stderr)
        return ConfigError.exit_status
    return 0


if __name__ == "__main__":
    sys.exit(main())
