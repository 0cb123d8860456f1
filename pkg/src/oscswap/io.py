"""File formats: state specifications, result records, circuit files.

All files are JSON. Floats are written with 17 significant digits; complex
numbers are ``[re, im]`` pairs. Results are one JSON object per line.

State specification fields::

    {"mode_count": 2, "n_max": 1, "kind": "pure",
     "terms": [[[0.7071, 0], [0, 1]], [-0.7071, [1, 0]]]}
    {"mode_count": 1, "kind": "mixed", "matrix": [[0.5, 0], [0, 0.5]]}
    {"kind": "coherent", "alpha": [0.3, 0.1], "n_max": 8}

Term coefficients and matrix entries may be real numbers or ``[re, im]``.
``n_max`` defaults to the largest photon number in ``terms``, or ``d - 1``
for a single-mode ``matrix``.
"""

from __future__ import annotations

import json
import math
import re
from pathlib import Path

import numpy as np

from .errors import ConfigError, DimensionError
from .fock import (
    CutoffConfig,
    MultiModeState,
    coherent_state,
    density_state,
    fock_state,
    superpose,
)
from .interferometer import ReckPlan, SinglePhase, TwoModeRotation

_FLOAT_TAG = "\x00f:"


def _fmt_float(x: float) -> str:
    if math.isnan(x) or math.isinf(x):
        return "null"
    s = format(x, ".17g")
    if "e" not in s and "." not in s:
        s += ".0"
    return s


def _tag(obj):
    if isinstance(obj, bool) or obj is None:
        return obj
    if isinstance(obj, (float, np.floating)):
        return _FLOAT_TAG + _fmt_float(float(obj))
    if isinstance(obj, (int, np.integer)):
        return int(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [_tag(float(obj.real)), _tag(float(obj.imag))]
    if isinstance(obj, dict):
        return {str(k): _tag(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple, np.ndarray)):
        return [_tag(v) for v in (obj.tolist() if isinstance(obj, np.ndarray) else obj)]
    return obj


def dumps(obj, indent=None) -> str:
    """JSON with every float rendered at 17 significant digits."""
    text = json.dumps(_tag(obj), indent=indent, sort_keys=False)
    return re.sub(r'"\\u0000f:([^"]*)"', r"\1", text)


def parse_complex(x) -> complex:
    if isinstance(x, (int, float)) and not isinstance(x, bool):
        return complex(x)
    if isinstance(x, (list, tuple)) and len(x) == 2 and all(isinstance(v, (int, float)) for v in x):
        return complex(x[0], x[1])
    raise ConfigError(f"cannot read {x!r} as a complex number; use a number or [re, im]")


def state_from_spec(spec: dict, base_dir: Path | None = None) -> MultiModeState:
    """Build a state from a specification dict (or ``{"file": path}``)."""
    if not isinstance(spec, dict):
        raise ConfigError(f"state specification must be an object, got {type(spec).__name__}")
    if "file" in spec:
        path = Path(spec["file"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        try:
            with open(path) as fh:
                inner = json.load(fh)
        except FileNotFoundError:
            raise ConfigError(f"state file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"state file {path} is not valid JSON: {exc}") from None
        return state_from_spec(inner, path.parent)
    kind = spec.get("kind", "pure")
    if kind == "coherent":
        if "alpha" not in spec or "n_max" not in spec:
            raise ConfigError("coherent state needs 'alpha' and 'n_max'")
        return coherent_state(parse_complex(spec["alpha"]), int(spec["n_max"]))
    if kind == "pure":
        terms = spec.get("terms")
        if not terms:
            raise ConfigError("pure state needs a nonempty 'terms' list of [coefficient, occupation]")
        try:
            parsed = [(parse_complex(c), tuple(int(n) for n in occ)) for c, occ in terms]
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"malformed term list: {exc}") from None
        modes = spec.get("mode_count", len(parsed[0][1]))
        n_max = spec.get("n_max", max(sum(o) for _, o in parsed))
        cutoff = _cutoff(n_max, modes)
        return superpose([(c, fock_state(cutoff, o)) for c, o in parsed])
    if kind == "mixed":
        if "matrix" not in spec:
            raise ConfigError("mixed state needs 'matrix'")
        try:
            rho = np.array([[parse_complex(x) for x in row] for row in spec["matrix"]], dtype=complex)
        except TypeError:
            raise ConfigError("'matrix' must be a list of rows") from None
        modes = int(spec.get("mode_count", 1))
        if "n_max" in spec:
            n_max = spec["n_max"]
        elif modes == 1:
            n_max = rho.shape[0] - 1
        else:
            raise ConfigError("multi-mode 'matrix' needs an explicit 'n_max'")
        cutoff = _cutoff(n_max, modes)
        if rho.shape != (cutoff.dim, cutoff.dim):
            raise DimensionError(f"matrix shape {rho.shape} does not match basis size {cutoff.dim}")
        return density_state(rho, cutoff)
    raise ConfigError(f"unknown state kind {kind!r}")


def _cutoff(n_max, modes) -> CutoffConfig:
    try:
        return CutoffConfig(int(n_max), int(modes))
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"bad cutoff (n_max={n_max!r}, mode_count={modes!r}): {exc}") from None


def state_to_spec(state: MultiModeState) -> dict:
    if state.is_pure:
        occ = state.basis.occupations.tolist()
        terms = [[complex(a), o] for a, o in zip(state.data, occ) if a != 0]
        return {"mode_count": state.mode_count, "n_max": state.n_max, "kind": "pure", "terms": terms}
    return {
        "mode_count": state.mode_count,
        "n_max": state.n_max,
        "kind": "mixed",
        "matrix": [[complex(x) for x in row] for row in state.data],
    }


def spec_shape(spec: dict, base_dir: Path | None = None) -> tuple[int, int]:
    """``(mode_count, n_max)`` of a state spec without building the state."""
    if "file" in spec:
        path = Path(spec["file"])
        if base_dir is not None and not path.is_absolute():
            path = base_dir / path
        try:
            with open(path) as fh:
                return spec_shape(json.load(fh), path.parent)
        except FileNotFoundError:
            raise ConfigError(f"state file not found: {path}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"state file {path} is not valid JSON: {exc}") from None
    kind = spec.get("kind", "pure")
    if kind == "coherent":
        return 1, int(spec["n_max"])
    if kind == "pure":
        terms = spec.get("terms") or []
        if not terms:
            raise ConfigError("pure state needs a nonempty 'terms' list")
        return int(spec.get("mode_count", len(terms[0][1]))), int(spec.get("n_max", max(sum(o) for _, o in terms)))
    if kind == "mixed":
        modes = int(spec.get("mode_count", 1))
        if "n_max" in spec:
            return modes, int(spec["n_max"])
        if modes == 1:
            return 1, len(spec.get("matrix", [])) - 1
        raise ConfigError("multi-mode 'matrix' needs an explicit 'n_max'")
    raise ConfigError(f"unknown state kind {kind!r}")


# ---------------------------------------------------------------- circuits


def plan_to_records(plan: ReckPlan) -> list[dict]:
    out = []
    for el in plan.elements:
        if isinstance(el, TwoModeRotation):
            out.append({"kind": "rotation", "modes": list(el.modes), "angle": el.angle, "phase": el.phase})
        else:
            out.append({"kind": "phase", "modes": [el.mode], "angle": 0.0, "phase": el.phase})
    return out


def plan_from_records(dim: int, records: list[dict]) -> ReckPlan:
    elements = []
    for r in records:
        if r["kind"] == "rotation":
            elements.append(TwoModeRotation(tuple(r["modes"]), float(r["angle"]), float(r["phase"])))
        elif r["kind"] == "phase":
            elements.append(SinglePhase(int(r["modes"][0]), float(r["phase"])))
        else:
            raise ConfigError(f"unknown circuit element kind {r['kind']!r}")
    return ReckPlan(dim, tuple(elements))


def write_circuit(plan: ReckPlan, path) -> None:
    doc = {"format": "reck-circuit", "dim": plan.dim, "elements": plan_to_records(plan)}
    Path(path).write_text(dumps(doc, indent=1) + "\n")


def read_circuit(path) -> ReckPlan:
    doc = json.loads(Path(path).read_text())
    return plan_from_records(int(doc["dim"]), doc["elements"])


# ---------------------------------------------------------------- results


def estimate_record(est, include_histogram=False) -> dict:
    rec = {
        "method": est.method,
        "shots": est.shots,
        "N": est.N,
        "k": est.k,
        "seed": est.seed,
        "value": complex(est.value),
        "stderr": [float(est.stderr_real), float(est.stderr_imag)],
    }
    if est.truncation_error:
        rec["caveat"] = {"truncation_error": float(est.truncation_error)}
    if include_histogram and est.histogram is not None:
        rec["histogram"] = [[list(k), v] for k, v in est.histogram.items()]
    return rec
