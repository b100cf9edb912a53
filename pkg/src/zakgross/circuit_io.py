"""Circuit documents: JSON schema, validation, state building, and runs.

Schema "zakgross-circuit/1" (all keys required unless noted):

    {
      "format": "zakgross-circuit/1",
      "d": 3, "n": 2,
      "inputs": [
        {"ideal_logical": 0},
        {"ideal_table": [[1, 0, 0], [0, 0, 0], [0, 0, 0]]},
        {"realistic": {"kind": "logical", "j": 0, "delta": 0.25}},
        {"realistic": {"kind": "phase_state", "delta": 0.25}}
      ],
      "ops": [
        {"gate": "F", "modes": [0]},
        {"gate": "SUM", "modes": [0, 1]},
        {"gate": "symplectic", "matrix": [[...2n x 2n ints...]]},
        {"gate": "displace", "c": [1, 0, 0.5, 0]}
      ],
      "measurement": {"modes": [0], "K": 3},
      "estimator": {"epsilon": 0.05, "delta_fail": 0.1, "seed": 7}   // optional
    }

ideal_table entries are numbers or [re, im] pairs. Displacements are in
units of ell. Validation walks the whole document and reports every
problem with its JSON path before giving up.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np

from . import estimator as est_mod
from .measure import (
    MeasurementSpec,
    bin_of_position,
    exact_probabilities,
)
from .qudit import GATE_NAMES, CodeParams, Gate
from .symplectic import IntSymplectic, NotInteger, NotSymplectic
from .theta import CodeState
from .wigner import IdealFactor, RealisticFactor, WignerState, sample_abs

FORMAT_TAG = "zakgross-circuit/1"
RESULT_TAG = "zakgross-result/1"


class SchemaError(ValueError):
    """Invalid circuit document; .errors lists every problem found."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


@dataclass(frozen=True, eq=False)
class CircuitSpec:
    params: CodeParams
    inputs: tuple  # ("ideal_logical", j) | ("ideal_table", tuple rows) | ("realistic", CodeState)
    ops: tuple  # ("gate", Gate) | ("symplectic", IntSymplectic) | ("displace", tuple)
    measurement: MeasurementSpec
    estimator: dict | None


def parse_circuit(text: str) -> CircuitSpec:
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError([f"at $: not valid JSON ({exc.msg} at line {exc.lineno})"])
    errors = []

    def err(path, msg):
        errors.append(f"at {path}: {msg}")

    if not isinstance(doc, dict):
        raise SchemaError(["at $: document must be a JSON object"])
    if doc.get("format") != FORMAT_TAG:
        err("$.format", f"expected {FORMAT_TAG!r}, got {doc.get('format')!r}")

    d = doc.get("d")
    n = doc.get("n")
    if not isinstance(d, int) or d < 3:
        err("$.d", f"must be an odd integer >= 3, got {d!r}")
        d = 3
    elif d % 2 == 0:
        err("$.d", "d must be odd")
        d = 3
    if not isinstance(n, int) or n < 1:
        err("$.n", f"must be a positive integer, got {n!r}")
        n = 1
    params = CodeParams(d, n)

    inputs = _parse_inputs(doc.get("inputs"), params, err)
    ops = _parse_ops(doc.get("ops"), params, err)
    measurement = _parse_measurement(doc.get("measurement"), params, err)
    est = _parse_estimator(doc.get("estimator"), err)

    if errors:
        raise SchemaError(errors)
    return CircuitSpec(params, tuple(inputs), tuple(ops), measurement, est)


def _parse_inputs(raw, params, err):
    out = []
    if not isinstance(raw, list) or len(raw) != params.n:
        err("$.inputs", f"must be a list with one entry per mode (n={params.n})")
        return out
    d = params.d
    for i, item in enumerate(raw):
        path = f"$.inputs[{i}]"
        if not isinstance(item, dict) or len(item) != 1:
            err(path, "must be an object with exactly one input key")
            continue
        (key, val), = item.items()
        if key == "ideal_logical":
            if not isinstance(val, int) or not 0 <= val < d:
                err(f"{path}.ideal_logical", f"must be an integer in [0, {d})")
            else:
                out.append(("ideal_logical", val))
        elif key == "ideal_table":
            rho = _parse_complex_matrix(val, d, f"{path}.ideal_table", err)
            if rho is not None:
                try:
                    IdealFactor.from_density_matrix(CodeParams(d, 1), rho)
                except ValueError as exc:
                    err(f"{path}.ideal_table", str(exc))
                else:
                    out.append(("ideal_table", _freeze_matrix(rho)))
        elif key == "realistic":
            state = _parse_realistic(val, d, f"{path}.realistic", err)
            if state is not None:
                out.append(("realistic", state))
        else:
            err(path, f"unknown input key {key!r}")
    return out


def _parse_complex_matrix(val, d, path, err):
    if not isinstance(val, list) or len(val) != d:
        err(path, f"must be a {d} x {d} matrix")
        return None
    rho = np.zeros((d, d), dtype=complex)
    for r, row in enumerate(val):
        if not isinstance(row, list) or len(row) != d:
            err(f"{path}[{r}]", f"must be a row of {d} entries")
            return None
        for c, entry in enumerate(row):
            if isinstance(entry, (int, float)):
                rho[r, c] = entry
            elif (
                isinstance(entry, list)
                and len(entry) == 2
                and all(isinstance(x, (int, float)) for x in entry)
            ):
                rho[r, c] = complex(entry[0], entry[1])
            else:
                err(f"{path}[{r}][{c}]", "entries must be numbers or [re, im]")
                return None
    return rho


def _freeze_matrix(rho):
    return tuple(tuple(complex(x) for x in row) for row in rho)


def _parse_realistic(val, d, path, err):
    if not isinstance(val, dict):
        err(path, "must be an object with kind/delta")
        return None
    kind = val.get("kind")
    delta = val.get("delta")
    if not isinstance(delta, (int, float)) or not 0 < delta < 2:
        err(f"{path}.delta", f"must be a number in (0, 2), got {delta!r}")
        return None
    if kind == "logical":
        j = val.get("j")
        if not isinstance(j, int) or not 0 <= j < d:
            err(f"{path}.j", f"must be an integer in [0, {d})")
            return None
        return CodeState.logical(d, j, float(delta))
    if kind == "phase_state":
        return CodeState.phase_state(d, float(delta))
    err(f"{path}.kind", f"must be 'logical' or 'phase_state', got {kind!r}")
    return None


def _parse_ops(raw, params, err):
    out = []
    if raw is None:
        err("$.ops", "missing (use [] for no gates)")
        return out
    if not isinstance(raw, list):
        err("$.ops", "must be a list")
        return out
    n = params.n
    for i, item in enumerate(raw):
        path = f"$.ops[{i}]"
        if not isinstance(item, dict) or "gate" not in item:
            err(path, "must be an object with a 'gate' key")
            continue
        tag = item["gate"]
        if tag in GATE_NAMES:
            modes = item.get("modes")
            if not isinstance(modes, list) or not all(
                isinstance(m, int) for m in modes
            ):
                err(f"{path}.modes", "must be a list of integers")
                continue
            if any(not 0 <= m < n for m in modes):
                err(f"{path}.modes", f"mode indices must lie in [0, {n})")
                continue
            try:
                out.append(("gate", Gate(tag, tuple(modes))))
            except ValueError as exc:
                err(path, str(exc))
        elif tag == "symplectic":
            mat = item.get("matrix")
            if not isinstance(mat, list):
                err(f"{path}.matrix", "must be a 2n x 2n integer matrix")
                continue
            try:
                arr = np.array(mat, dtype=object)
                if arr.shape != (2 * n, 2 * n):
                    raise ValueError(f"shape {arr.shape}, expected {(2*n, 2*n)}")
                out.append(("symplectic", IntSymplectic(arr)))
            except (NotSymplectic, NotInteger, ValueError) as exc:
                err(f"{path}.matrix", str(exc))
        elif tag == "displace":
            c = item.get("c")
            if (
                not isinstance(c, list)
                or len(c) != 2 * n
                or not all(isinstance(x, (int, float)) for x in c)
            ):
                err(f"{path}.c", f"must be a list of 2n = {2*n} numbers")
                continue
            out.append(("displace", tuple(c)))
        else:
            err(f"{path}.gate", f"unknown gate tag {tag!r}")
    return out


def _parse_measurement(raw, params, err):
    fallback = MeasurementSpec.from_params(params, (0,), params.d)
    if not isinstance(raw, dict):
        err("$.measurement", "must be an object with modes and K")
        return fallback
    modes = raw.get("modes")
    k = raw.get("K")
    if not isinstance(modes, list) or not all(isinstance(m, int) for m in modes):
        err("$.measurement.modes", "must be a list of integers")
        return fallback
    if any(not 0 <= m < params.n for m in modes):
        err("$.measurement.modes", f"mode indices must lie in [0, {params.n})")
        return fallback
    if not isinstance(k, int) or k < 1:
        err("$.measurement.K", f"must be a positive integer, got {k!r}")
        return fallback
    try:
        return MeasurementSpec.from_params(params, modes, k)
    except ValueError as exc:
        err("$.measurement", str(exc))
        return fallback


def _parse_estimator(raw, err):
    if raw is None:
        return None
    if not isinstance(raw, dict):
        err("$.estimator", "must be an object")
        return None
    eps = raw.get("epsilon")
    delta = raw.get("delta_fail")
    seed = raw.get("seed", 0)
    ok = True
    if not isinstance(eps, (int, float)) or not 0 < eps < 1:
        err("$.estimator.epsilon", f"must be a number in (0, 1), got {eps!r}")
        ok = False
    if not isinstance(delta, (int, float)) or not 0 < delta < 1:
        err("$.estimator.delta_fail", f"must be a number in (0, 1), got {delta!r}")
        ok = False
    if not isinstance(seed, int):
        err("$.estimator.seed", f"must be an integer, got {seed!r}")
        ok = False
    if not ok:
        return None
    return {"epsilon": float(eps), "delta_fail": float(delta), "seed": seed}


def emit_circuit(spec: CircuitSpec) -> str:
    """Serialize back to schema JSON; parse(emit(spec)) reproduces spec."""
    inputs = []
    for kind, val in spec.inputs:
        if kind == "ideal_logical":
            inputs.append({"ideal_logical": val})
        elif kind == "ideal_table":
            rows = [
                [x.real if x.imag == 0 else [x.real, x.imag] for x in row]
                for row in val
            ]
            inputs.append({"ideal_table": rows})
        else:
            state = val
            if state.eps == CodeState.phase_state(state.d, state.delta).eps:
                inputs.append(
                    {"realistic": {"kind": "phase_state", "delta": state.delta}}
                )
            else:
                j = max(range(state.d), key=lambda i: abs(state.eps[i]))
                inputs.append(
                    {"realistic": {"kind": "logical", "j": j, "delta": state.delta}}
                )
    ops = []
    for kind, val in spec.ops:
        if kind == "gate":
            ops.append({"gate": val.name, "modes": list(val.modes)})
        elif kind == "symplectic":
            ops.append(
                {"gate": "symplectic", "matrix": [[int(x) for x in r] for r in val.mat]}
            )
        else:
            ops.append({"gate": "displace", "c": list(val)})
    doc = {
        "format": FORMAT_TAG,
        "d": spec.params.d,
        "n": spec.params.n,
        "inputs": inputs,
        "ops": ops,
        "measurement": {
            "modes": list(spec.measurement.measured_modes),
            "K": spec.measurement.K,
        },
    }
    if spec.estimator is not None:
        doc["estimator"] = spec.estimator
    return json.dumps(doc, indent=2)


def build_state(spec: CircuitSpec) -> WignerState:
    """Materialize the input product state and apply every op."""
    params = spec.params
    factors = []
    for kind, val in spec.inputs:
        if kind == "ideal_logical":
            factors.append(IdealFactor.logical(params.d, val))
        elif kind == "ideal_table":
            rho = np.array(val, dtype=complex)
            factors.append(IdealFactor.from_density_matrix(CodeParams(params.d, 1), rho))
        else:
            factors.append(RealisticFactor.make(val))
    state = WignerState.from_factors(params, factors)
    for kind, val in spec.ops:
        if kind == "gate":
            state = state.apply_gate(val)
        elif kind == "symplectic":
            state = state.apply_symplectic(val)
        else:
            state = state.apply_displacement(val)
    return state


def run(
    spec: CircuitSpec,
    mode: str,
    seed: int | None = None,
    n_samples: int = 10_000,
    threads: int = 1,
    max_samples: int = est_mod.MAX_SAMPLES,
) -> dict:
    """Execute a parsed circuit and return a result document (JSON-ready)."""
    if mode not in ("exact", "sample", "estimate"):
        raise ValueError(f"mode must be exact, sample, or estimate, got {mode!r}")
    state = build_state(spec)
    mspec = spec.measurement
    base = {
        "format": RESULT_TAG,
        "mode": mode,
        "d": spec.params.d,
        "n": spec.params.n,
        "measured_modes": list(mspec.measured_modes),
        "K": mspec.K,
    }
    if mode == "exact":
        probs = exact_probabilities(state, mspec)
        base["probabilities"] = probs.tolist()
        return base
    if mode == "sample":
        negativity = state.negativity()
        if negativity > 1.0 + 1e-9:
            raise ValueError(
                "sample mode draws outcomes directly and therefore requires a "
                "positive Wigner function (negativity = 1); this input has "
                f"negativity {negativity:.6g}. Use estimate mode instead."
            )
        use_seed = 0 if seed is None else seed
        pts, _signs = sample_abs(state, use_seed, n_samples)
        k = mspec.K
        cols = [
            bin_of_position(pts[:, m], mspec.period, k)
            for m in mspec.measured_modes
        ]
        outcomes = np.stack(cols, axis=-1)
        counts = np.zeros(mspec.table_shape(), dtype=np.int64)
        np.add.at(counts, tuple(outcomes[:, i] for i in range(outcomes.shape[1])), 1)
        base.update(
            {
                "seed": use_seed,
                "n_samples": int(n_samples),
                "outcomes": outcomes.tolist(),
                "counts": counts.tolist(),
                "frequencies": (counts / n_samples).tolist(),
            }
        )
        return base
    # estimate
    if spec.estimator is None:
        raise ValueError(
            "estimate mode needs an 'estimator' section (epsilon, delta_fail, seed)"
        )
    use_seed = spec.estimator["seed"] if seed is None else seed
    pl = est_mod.plan(
        spec.estimator["epsilon"],
        spec.estimator["delta_fail"],
        state.negativity(),
        max_samples=max_samples,
    )
    report = est_mod.estimate(state, mspec, pl, use_seed, threads=threads)
    base.update(report.to_dict())
    return base


def negativity_sweep(kind: str, deltas, d: int, tol: float = 1e-6) -> list:
    """Rows (delta, negativity, log negativity) for one input family."""
    if kind not in ("logical_0", "phase_state"):
        raise ValueError(f"kind must be logical_0 or phase_state, got {kind!r}")
    rows = []
    for delta in deltas:
        delta = float(delta)
        if not 0 < delta <= 1:
            raise ValueError(f"delta values must lie in (0, 1], got {delta}")
        if kind == "logical_0":
            state = CodeState.logical(d, 0, delta)
        else:
            state = CodeState.phase_state(d, delta)
        m = RealisticFactor.make(state).negativity(tol)
        rows.append((delta, m, float(np.log(m))))
    return rows


def sweep_csv(rows) -> str:
    lines = ["delta,negativity,log_negativity"]
    for delta, m, logm in rows:
        lines.append(f"{delta:.6g},{m:.12g},{logm:.12g}")
    return "\n".join(lines) + "\n"
